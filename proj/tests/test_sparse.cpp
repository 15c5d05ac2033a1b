#include "sparsedom/errors.hpp"
#include "sparsedom/harness.hpp"
#include "sparsedom/rng.hpp"
#include "sparsedom/sparse.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace sparsedom;

namespace {

Vector random_vector(Index n, std::uint64_t seed, double lo, double hi) {
    Rng rng(seed);
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = rng.uniform(lo, hi);
    return v;
}

std::vector<Index> cells_in(const GridDomain& d, const Cube& q) {
    std::vector<Index> out;
    for (Index c = 0; c < d.cell_count(); ++c)
        if (box_contains_cell(d, cube_box(d, q), c)) out.push_back(c);
    return out;
}

bool nested(const GridDomain& d, const Cube& inner, const Cube& outer) {
    return box_contains(d, cube_box(d, outer), cube_box(d, inner));
}

std::vector<Cube> tower(int depth) {
    std::vector<Cube> t;
    for (int k = 0; k <= depth; ++k) t.push_back(Cube{kBaseLattice, k, {0, 0}});
    return t;
}

}  // namespace

TEST_CASE("sparseness certificate") {
    const GridDomain d = make_domain(1, {0.0}, 1.0, 5);
    SparseFamily disjoint;
    for (std::int64_t i = 0; i < 4; ++i) disjoint.cubes.push_back(Cube{kBaseLattice, 2, {i, 0}});
    auto c = verify_sparseness(d, disjoint);
    CHECK(c.ok);
    CHECK(c.achieved_eta == 1.0);

    SparseFamily t{kBaseLattice, tower(5), {}, 0.5};
    c = verify_sparseness(d, t);
    CHECK(c.ok);
    CHECK(c.achieved_eta == doctest::Approx(0.5).epsilon(1e-15));
    t.eta = 0.6;
    CHECK_FALSE(verify_sparseness(d, t).ok);

    SparseFamily dup{kBaseLattice, {Cube{kBaseLattice, 1, {0, 0}}, Cube{kBaseLattice, 1, {0, 0}}}, {}, 0.1};
    CHECK_FALSE(verify_sparseness(d, dup).ok);

    // Explicit witness that leaves its cube.
    SparseFamily bad{kBaseLattice, {Cube{kBaseLattice, 3, {0, 0}}}, {{0, 1, 9}}, 0.5};
    CHECK_FALSE(verify_sparseness(d, bad).ok);
    // Overlapping explicit witnesses.
    SparseFamily overlap{kBaseLattice, {Cube{kBaseLattice, 1, {0, 0}}, Cube{kBaseLattice, 2, {0, 0}}},
                         {{0, 1, 2, 3, 8, 9, 10, 11}, {0, 1, 2, 3, 4}}, 0.5};
    CHECK_FALSE(verify_sparseness(d, overlap).ok);
}

TEST_CASE("family text round trip") {
    const GridDomain d = make_domain(2, {0.0, 0.0}, 1.0, 3);
    SparseFamily fam{4, {Cube{4, 1, {1, 2}}, Cube{4, 2, {3, 3}}}, {{1, 2, 3}, {40, 41}}, 1.0 / 18.0};
    std::stringstream buf;
    write_family(buf, d, fam);
    const SparseFamily back = read_family(buf);
    CHECK(back.lattice == fam.lattice);
    CHECK(back.cubes == fam.cubes);
    CHECK(back.witness == fam.witness);
    CHECK(back.eta == fam.eta);
    std::stringstream junk("not a family\n");
    CHECK_THROWS_AS(read_family(junk), IoError);
}

TEST_CASE("construct_sparse certificates and degenerate operator") {
    const GridDomain d = make_domain(1, {0.0}, 1.0, 7);
    const Cube q0{kBaseLattice, 1, {0, 0}};
    const OperatorRep zero(d, Matrix::Zero(128, 128), {}, "zero");
    Vector f = Vector::Zero(128), g = Vector::Zero(128);
    f.head(64) = random_vector(64, 1, 0.0, 1.0);
    g.head(64) = random_vector(64, 2, 0.0, 1.0);
    const Vector b = random_vector(128, 3, -1.0, 1.0);
    const SparseConstruction z = construct_sparse(zero, b, 1, f, g, q0, 1.0, kInf, 0.0);
    CHECK(z.pre_merge.cubes == std::vector<Cube>{q0});
    CHECK(z.report.lhs == 0.0);
    CHECK(z.report.c_two_term == 0.0);

    const OperatorRep t = riesz_potential(d, 0.5);
    for (int m : {0, 1, 2}) {
        const SparseConstruction s = construct_sparse(t, b, m, f, g, q0, 1.0, kInf, 0.5);
        const SparsenessCheck pre = verify_sparseness(d, s.pre_merge);
        const SparsenessCheck post = verify_sparseness(d, s.merged);
        CHECK(pre.ok);
        CHECK(post.ok);
        CHECK(s.pre_merge.eta == 0.5);
        CHECK(s.merged.eta == doctest::Approx(1.0 / 6.0));
        for (const RecursionStep& st : s.report.steps) {
            CHECK(st.packing_ok);
            CHECK(st.selected_measure <= 0.5 * st.cube_measure + 1e-15);
        }
        for (const Cube& c : s.merged.cubes) CHECK(c.lattice == s.merged.lattice);
        CHECK(std::isfinite(s.report.c_two_term));
        CHECK(s.report.c_two_term > 0.0);
        CHECK(s.report.lhs > 0.0);
    }
    Vector outside = f;
    outside[100] = 1.0;
    CHECK_THROWS_AS(construct_sparse(t, b, 1, outside, g, q0, 1.0, kInf, 0.5), SupportError);
}

TEST_CASE("sparse form") {
    const GridDomain d = make_domain(1, {0.0}, 1.0, 6);
    const Cube q{kBaseLattice, 2, {1, 0}};
    Vector chi = Vector::Zero(64);
    for (Index c : cells_in(d, q)) chi[c] = 1.0;
    const SparseFamily single{kBaseLattice, {q}, {}, 0.5};
    const Vector b = random_vector(64, 4, -1.0, 1.0);
    for (double alpha : {0.0, 0.5})
        CHECK(sparse_form(d, single, b, 0, chi, chi, 1.0, kInf, alpha, FormSide::BOnFirst) ==
              doctest::Approx(std::pow(0.25, 1.0 + alpha)).epsilon(1e-14));

    // Independent re-summation on a random family, both sides, p0 = 2, q0 = 4.
    const auto cubes = random_sparse_family(d, Cube{}, 9);
    const SparseFamily fam{kBaseLattice, cubes, {}, 0.5};
    const Vector f = random_vector(64, 5, 0.0, 1.0);
    const Vector g = random_vector(64, 6, 0.0, 1.0);
    const int m = 2;
    const double p0 = 2.0, q0c = 4.0 / 3.0, alpha = 0.3;
    double first = 0.0, second = 0.0;
    for (const Cube& c : cubes) {
        const auto cells = cells_in(d, c);
        const double meas = cube_measure(d, c), h = d.cell_measure();
        double bm = 0.0;
        for (Index i : cells) bm += b[i];
        bm /= static_cast<double>(cells.size());
        double a1 = 0, a2 = 0, a3 = 0, a4 = 0;
        for (Index i : cells) {
            const double o = std::pow(std::abs(b[i] - bm), m);
            a1 += std::pow(o * f[i], p0) * h;
            a2 += std::pow(g[i], q0c) * h;
            a3 += std::pow(f[i], p0) * h;
            a4 += std::pow(o * g[i], q0c) * h;
        }
        const double scale = std::pow(meas, 1.0 + alpha);
        first += std::pow(a1 / meas, 1 / p0) * std::pow(a2 / meas, 1 / q0c) * scale;
        second += std::pow(a3 / meas, 1 / p0) * std::pow(a4 / meas, 1 / q0c) * scale;
    }
    CHECK(sparse_form(d, fam, b, m, f, g, 2.0, 4.0, alpha, FormSide::BOnFirst) ==
          doctest::Approx(first).epsilon(1e-12));
    CHECK(sparse_form(d, fam, b, m, f, g, 2.0, 4.0, alpha, FormSide::BOnSecond) ==
          doctest::Approx(second).epsilon(1e-12));

    const SparseFamily dup{kBaseLattice, {q, q}, {}, 0.5};
    CHECK_THROWS_AS(sparse_form(d, dup, b, 0, chi, chi, 1.0, kInf, 0.0, FormSide::BOnFirst), SparsenessError);
}

TEST_CASE("midpoint control of pair averages") {
    const GridDomain d = make_domain(1, {0.0}, 1.0, 6);
    Rng rng(77);
    int checked = 0;
    for (int trial = 0; trial < 40; ++trial) {
        const Vector b = random_vector(64, 100 + static_cast<std::uint64_t>(trial), -2.0, 2.0);
        const Vector f = random_vector(64, 200 + static_cast<std::uint64_t>(trial), 0.0, 1.0);
        const Vector g = random_vector(64, 300 + static_cast<std::uint64_t>(trial), 0.0, 1.0);
        const double r = 1.0 + rng.uniform() * 2.0, t = 1.0 + rng.uniform() * 2.0;
        for (const Cube& q : enumerate_cubes(d, {base_lattice(d)}))
            for (int m = 0; m <= 3; ++m) {
                const auto c = pair_averages(d, q, b, m, f, g, r, t);
                REQUIRE(c.size() == static_cast<std::size_t>(m + 1));
                for (int k = 0; k <= m; ++k) {
                    CHECK(c[static_cast<std::size_t>(k)] <= c.front() + c.back() + 1e-12);
                    ++checked;
                }
            }
    }
    CHECK(checked > 1000);
}

TEST_CASE("sparse operator") {
    const GridDomain d = make_domain(1, {0.0}, 1.0, 5);
    const Cube q{kBaseLattice, 1, {1, 0}};
    const Vector f = random_vector(32, 7, 0.0, 1.0);
    const Vector a = sparse_operator(d, {q}, 1.0, 0.25, f);
    double integral = 0.0;
    for (Index c : cells_in(d, q)) integral += f[c] * d.cell_measure();
    for (Index c = 0; c < 32; ++c)
        CHECK(a[c] == doctest::Approx(c >= 16 ? std::pow(0.5, -0.25) * integral : 0.0).epsilon(1e-14));

    const std::vector<Cube> fam = tower(4);
    const Vector bigger = f + random_vector(32, 8, 0.0, 0.5);
    const Vector lo = sparse_operator(d, fam, 2.0, 0.0, f), hi = sparse_operator(d, fam, 2.0, 0.0, bigger);
    for (Index c = 0; c < 32; ++c) CHECK(lo[c] <= hi[c]);

    // r = 2 on the tower: cell c collects the cubes containing it.
    for (Index c = 0; c < 32; ++c) {
        double s = 0.0;
        for (const Cube& k : fam) {
            if (!box_contains_cell(d, cube_box(d, k), c)) continue;
            double in = 0.0;
            for (Index x : cells_in(d, k)) in += f[x] * d.cell_measure();
            s += in * in;
        }
        CHECK(lo[c] == doctest::Approx(std::sqrt(s)).epsilon(1e-13));
    }
    CHECK_THROWS_AS(sparse_operator(d, fam, 1.0, 0.0, -f), ParameterError);
}

TEST_CASE("iterated sparse averaging") {
    const GridDomain d = make_domain(1, {0.0}, 1.0, 5);
    const Cube q{kBaseLattice, 2, {2, 0}};
    Vector chi = Vector::Zero(32);
    for (Index c : cells_in(d, q)) chi[c] = 1.0;
    const Vector one = Vector::Ones(32);
    CHECK((iterated_sparse_avg(d, {q}, one, 3, chi) - chi).norm() < 1e-14);

    const std::vector<Cube> fam = tower(3);
    const Vector nu = random_vector(32, 9, 0.5, 2.0);
    const Vector f = random_vector(32, 10, 0.0, 1.0);
    Vector direct = Vector::Zero(32);
    for (const Cube& k : fam) {
        double avg = 0.0;
        for (Index x : cells_in(d, k)) avg += f[x];
        avg *= d.cell_measure() / cube_measure(d, k);
        for (Index x : cells_in(d, k)) direct[x] += avg;
    }
    direct = direct.cwiseProduct(nu);
    CHECK((iterated_sparse_avg(d, fam, nu, 1, f) - direct).norm() < 1e-13);
    CHECK(iterated_sparse_avg(d, fam, nu, 4, f).minCoeff() >= 0.0);
}

TEST_CASE("stopping family") {
    const GridDomain d = make_domain(1, {0.0}, 1.0, 6);
    std::vector<Cube> all;
    for (const Cube& c : enumerate_cubes(d, {base_lattice(d)})) all.push_back(c);
    const Vector one = Vector::Ones(64);
    const StoppingResult flat = stopping_family(d, all, one, one, 1.0, Cube{});
    CHECK(flat.family == std::vector<Cube>{Cube{}});
    CHECK(flat.verified);

    // Spike of height 1 on [0, 1/8) plus height 100 on the first cell: averages
    // 1/8 + 99/64 on [0,1); the first stop is the largest cube with average > 2x that.
    Vector spike = Vector::Zero(64);
    for (Index c = 0; c < 8; ++c) spike[c] = 1.0;
    spike[0] = 100.0;
    const StoppingResult s = stopping_family(d, all, spike, one, 1.0, Cube{});
    const double top = spike.sum() / 64.0;
    CHECK(s.verified);
    REQUIRE(s.family.size() >= 2);
    const Cube head = s.family[1];
    const auto avg = [&](const Cube& k) {
        double a = 0.0;
        const auto cells = cells_in(d, k);
        for (Index c : cells) a += spike[c];
        return a / static_cast<double>(cells.size());
    };
    CHECK(avg(head) > 2.0 * top);
    CHECK(head.coords[0] == 0);
    const auto parent = dyadic_parent(d, head);
    REQUIRE(parent.has_value());
    CHECK(avg(*parent) <= 2.0 * top);
    CHECK(std::isfinite(s.carleson_sum));
    for (std::size_t i = 0; i < all.size(); ++i) CHECK(s.parent[i] >= 0);
}

TEST_CASE("testing norms") {
    const GridDomain d = make_domain(1, {0.0}, 1.0, 5);
    const Cube r{kBaseLattice, 1, {0, 0}};
    const Vector u = random_vector(32, 11, 0.5, 2.0), v = random_vector(32, 12, 0.5, 2.0);
    const double p = 2.0, q = 3.0, rr = 1.5, s = 4.0, lam = 0.7;
    const TestingReport one = testing_norms(d, {r}, u, v, {lam}, p, q, rr, s);
    double mu = 0, mv = 0;
    for (Index c = 0; c < 16; ++c) {
        mu += u[c] * d.cell_measure();
        mv += v[c] * d.cell_measure();
    }
    const double au = mu / 0.5, av = mv / 0.5;
    const double tau = std::pow(au, 1.0 / rr - 1.0) * std::pow(av, -1.0 / s) * lam / 0.5;
    CHECK(one.zeta == doctest::Approx(tau * au * std::pow(mv, 1.0 / q) / std::pow(mu, 1.0 / p)).epsilon(1e-13));

    // u = v = 1, lambda_Q = |Q|, r = 1, s = inf: tau = 1 and T_R 1 counts the cubes below R.
    const std::vector<Cube> fam = tower(3);
    std::vector<double> lambda;
    for (const Cube& k : fam) lambda.push_back(cube_measure(d, k));
    const Vector ones = Vector::Ones(32);
    const TestingReport t = testing_norms(d, fam, ones, ones, lambda, 2.0, 2.0, 1.0, kInf);
    Vector count = Vector::Zero(32);
    for (const Cube& k : fam)
        for (Index c : cells_in(d, k)) count[c] += 1.0;
    CHECK(t.zeta_terms.front() == doctest::Approx(std::sqrt(count.squaredNorm() / 32.0)).epsilon(1e-13));
    CHECK(t.zeta == doctest::Approx(t.zeta_star).epsilon(1e-13));
}

TEST_CASE("COV formula") {
    const GridDomain d = make_domain(1, {0.0}, 1.0, 6);
    const Vector w = random_vector(64, 13, 0.2, 3.0);
    const auto fam = random_sparse_family(d, Cube{}, 21, 3);
    std::vector<double> lambda;
    Rng rng(14);
    for (std::size_t i = 0; i < fam.size(); ++i) lambda.push_back(rng.uniform(0.1, 2.0));
    CHECK(cov_norm_rhs(d, fam, lambda, w, 1.0) == doctest::Approx(cov_norm_direct(d, fam, lambda, w, 1.0)).epsilon(1e-12));

    const Cube r{kBaseLattice, 2, {1, 0}};
    double wr = 0.0;
    for (Index c : cells_in(d, r)) wr += w[c] * d.cell_measure();
    CHECK(std::pow(cov_norm_rhs(d, {r}, {1.5}, w, 2.0), 2) == doctest::Approx(2.25 * wr).epsilon(1e-13));
    CHECK(std::pow(cov_norm_direct(d, {r}, {1.5}, w, 2.0), 2) == doctest::Approx(2.25 * wr).epsilon(1e-13));

    for (double p : {2.0, 3.0})
        for (std::uint64_t seed = 30; seed < 40; ++seed) {
            const auto f2 = random_sparse_family(d, Cube{}, seed, 3);
            std::vector<double> l2(f2.size(), 1.0);
            const double ratio = cov_norm_rhs(d, f2, l2, w, p) / cov_norm_direct(d, f2, l2, w, p);
            CHECK(ratio >= 0.1);
            CHECK(ratio <= 10.0);
        }
}

TEST_CASE("sparse sum bounds") {
    const GridDomain d = make_domain(1, {0.0}, 1.0, 6);
    const Vector om = random_vector(64, 15, 0.5, 2.0), si = random_vector(64, 16, 0.5, 2.0);
    const Cube r{kBaseLattice, 1, {1, 0}};
    const SparseSumBound one = sparse_sum_bound(d, {r}, om, si, 0.5, 0.3, 0.4, r);
    CHECK(one.lhs == doctest::Approx(one.rhs).epsilon(1e-15));
    CHECK(one.ratio <= 1.0 + 1e-15);

    const SparseSumBound geo = sparse_sum_bound(d, tower(6), om, si, 1.0, 0.0, 0.0, Cube{});
    CHECK(geo.lhs <= 2.0 * geo.rhs);
    CHECK(geo.universal);

    const Vector ones = Vector::Ones(64);
    for (std::uint64_t seed = 50; seed < 60; ++seed) {
        const auto fam = random_sparse_family(d, Cube{}, seed);
        const SparseSumBound b = sparse_sum_bound(d, fam, ones, ones, 0.0, 1.0, 0.0, Cube{});
        CHECK_FALSE(b.universal);
        CHECK(b.ratio <= 2.0);
    }
    CHECK_THROWS_AS(sparse_sum_bound(d, {r}, om, si, 0.2, 0.2, 0.2, r), ParameterError);
}
