#include "sparsedom/errors.hpp"
#include "sparsedom/maximal.hpp"
#include "sparsedom/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace sparsedom;

namespace {

GridFunction random_function(const GridDomain& d, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
    Rng rng(seed);
    GridFunction f = GridFunction::zeros(d);
    for (Index i = 0; i < f.size(); ++i) f[i] = rng.uniform(lo, hi);
    return f;
}

bool holds(const GridDomain& d, const Cube& q, Index c) { return box_contains_cell(d, cube_box(d, q), c); }

// Every cube of the lattices that meets the domain.
std::vector<Cube> all_cubes(const GridDomain& d, const std::vector<DyadicLattice>& lats) {
    std::vector<Cube> out;
    for (const Cube& q : enumerate_cubes(d, lats))
        if (cells_inside(d, cube_box(d, q)) > 0) out.push_back(q);
    return out;
}

double scan_maximal(const GridFunction& f, double r, const std::vector<Cube>& cubes, Index x) {
    const GridDomain& d = f.domain;
    double best = 0.0;
    for (const Cube& q : cubes) {
        if (!holds(d, q, x)) continue;
        double s = 0.0;
        for (Index c = 0; c < d.cell_count(); ++c)
            if (holds(d, q, c)) s += std::pow(std::abs(f[c]), r) * d.cell_measure();
        best = std::max(best, std::pow(s / cube_measure(d, q), 1.0 / r));
    }
    return best;
}

}  // namespace

TEST_CASE("dyadic maximal function") {
    const GridDomain d = make_domain(1, {0.0}, 1.0, 5);
    const auto lats = all_lattices(d);
    const GridFunction c = GridFunction::constant(d, 2.0);
    // Geometric |Q|: cubes hanging off the domain average less, but every cell sees a cube inside D.
    const GridFunction mc = maximal(c, 1.0, lats);
    for (Index i = 0; i < d.cell_count(); ++i) CHECK(mc[i] == doctest::Approx(2.0).epsilon(1e-14));

    const GridFunction f = random_function(d, 1);
    const auto cubes = all_cubes(d, lats);
    for (double r : {1.0, 2.0}) {
        const GridFunction m = maximal(f, r, lats);
        for (Index i = 0; i < d.cell_count(); ++i) {
            CHECK(m[i] >= std::abs(f[i]) - 1e-14);
            CHECK(m[i] == doctest::Approx(scan_maximal(f, r, cubes, i)).epsilon(1e-12));
        }
    }

    // Point mass in one cell, base lattice only: M f(x) = 1/(h 2^(J-k)) at the finest common level k.
    GridFunction delta = GridFunction::zeros(d);
    delta[9] = 1.0;
    const auto base = std::vector<DyadicLattice>{base_lattice(d)};
    const GridFunction md = maximal(delta, 1.0, base);
    const auto base_cubes = all_cubes(d, base);
    for (Index i = 0; i < d.cell_count(); ++i)
        CHECK(md[i] == doctest::Approx(scan_maximal(delta, 1.0, base_cubes, i)).epsilon(1e-12));
    CHECK(md[9] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(md[8] == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("weighted maximal function") {
    const GridDomain d = make_domain(1, {0.0}, 1.0, 5);
    const auto lats = all_lattices(d);
    const GridFunction f = random_function(d, 2);
    const GridFunction one = GridFunction::constant(d, 1.0);
    const GridFunction a = weighted_maximal(f, 2.0, one, lats);
    const GridFunction u = random_function(d, 3, 0.2, 3.0);
    const GridFunction w = weighted_maximal(f, 1.0, u, lats);
    CHECK(weighted_maximal(GridFunction::constant(d, 1.5), 1.0, u, lats)[7] == doctest::Approx(1.5));

    const auto cubes = all_cubes(d, lats);
    for (Index x = 0; x < d.cell_count(); ++x) {
        double best_w = 0.0, best_a = 0.0;
        for (const Cube& q : cubes) {
            if (!holds(d, q, x)) continue;
            double num = 0.0, den = 0.0, sq = 0.0, cnt = 0.0;
            for (Index c = 0; c < d.cell_count(); ++c)
                if (holds(d, q, c)) {
                    num += std::abs(f[c]) * u[c];
                    den += u[c];
                    sq += f[c] * f[c];
                    cnt += 1.0;
                }
            best_w = std::max(best_w, num / den);
            best_a = std::max(best_a, std::sqrt(sq / cnt));
        }
        CHECK(w[x] == doctest::Approx(best_w).epsilon(1e-12));
        CHECK(a[x] == doctest::Approx(best_a).epsilon(1e-12));  // u = 1 averages over Q in D
    }
}

TEST_CASE("fractional maximal function") {
    const GridDomain d = make_domain(1, {0.0}, 1.0, 6);
    const auto lats = all_lattices(d);
    const GridFunction f = random_function(d, 4);
    const GridFunction m0 = fractional_maximal(f, 0.0, 2.0, lats);
    const GridFunction m = maximal(f, 2.0, lats);
    for (Index i = 0; i < d.cell_count(); ++i) CHECK(m0[i] == doctest::Approx(m[i]).epsilon(1e-14));

    const GridFunction one = GridFunction::constant(d, 1.0);
    const GridFunction mo = fractional_maximal(one, 0.5, 1.0, lats);
    CHECK(mo.values.maxCoeff() == doctest::Approx(1.0).epsilon(1e-14));

    GridFunction scaled = f;
    scaled.values *= -2.5;
    const GridFunction ms = fractional_maximal(scaled, 0.3, 1.0, lats);
    const GridFunction mf = fractional_maximal(f, 0.3, 1.0, lats);
    for (Index i = 0; i < d.cell_count(); ++i) CHECK(ms[i] == doctest::Approx(2.5 * mf[i]).epsilon(1e-13));
    CHECK_THROWS_AS(fractional_maximal(f, 1.5, 1.0, lats), ParameterError);
}

TEST_CASE("sharp grand maximal truncation") {
    const GridDomain d = make_domain(1, {0.0}, 1.0, 5);
    const auto lats = all_lattices(d);
    const OperatorRep t = riesz_potential(d, 0.5);

    CHECK(sharp_grand_truncation(t, GridFunction::zeros(d), 1.0, lats).values.norm() == 0.0);
    const OperatorRep id(d, Matrix::Identity(32, 32), {}, "identity");
    CHECK(sharp_grand_truncation(id, random_function(d, 5), 1.0, lats).values.norm() == 0.0);

    // Only the level-0 base cube is represented: 3Q covers the domain, so f chi_{D \ 3Q} = 0.
    const std::vector<DyadicLattice> top{{kBaseLattice, 0, 0}};
    CHECK(sharp_grand_truncation(t, random_function(d, 6), 2.0, top).values.norm() == 0.0);

    // Direct double-sum oscillation at one point.
    const GridFunction f = random_function(d, 7);
    const GridFunction got = sharp_grand_truncation(t, f, 1.0, lats);
    const Index x = 13;
    double best = 0.0;
    for (const Cube& q : all_cubes(d, lats)) {
        if (!holds(d, q, x)) continue;
        Vector g = f.values;
        for (Index c = 0; c < 32; ++c)
            if (box_contains_cell(d, triple(d, q), c)) g[c] = 0.0;
        const Vector tg = t.matrix() * g;
        std::vector<Index> in;
        for (Index c = 0; c < 32; ++c)
            if (holds(d, q, c)) in.push_back(c);
        double s = 0.0;
        for (Index a : in)
            for (Index b : in) s += std::abs(tg[a] - tg[b]);
        best = std::max(best, s / static_cast<double>(in.size() * in.size()));
    }
    CHECK(got[x] == doctest::Approx(best).epsilon(1e-12));

    // M# <= 2 M_{T,q0} cellwise.
    for (std::uint64_t seed = 10; seed < 15; ++seed) {
        const GridFunction h = random_function(d, seed);
        for (double q0 : {1.0, 2.0}) {
            const GridFunction sharp = sharp_grand_truncation(t, h, q0, lats);
            const GridFunction trunc = truncation_ML(t, h, q0, lats);
            for (Index i = 0; i < 32; ++i) CHECK(sharp[i] <= 2.0 * trunc[i] + 1e-12);
        }
        const GridFunction inf = truncation_ML(t, h, kInf, lats);
        CHECK(inf.values.minCoeff() >= truncation_ML(t, h, 4.0, lats).values.minCoeff() - 1e-12);
    }
    CHECK(truncation_ML(t, GridFunction::zeros(d), 2.0, lats).values.norm() == 0.0);
}

TEST_CASE("T-sharp") {
    const GridDomain d = make_domain(1, {0.0}, 1.0, 5);
    const auto lats = all_lattices(d);
    const SpectralData s = spectral_data(divergence_form(d, GridFunction::constant(d, 1.0), Boundary::Dirichlet));
    CHECK(tsharp(s, 2, 0.5, 2.0, 2.0, GridFunction::zeros(d), lats).values.norm() == 0.0);

    // Single eigenvector: every cube scales it by p(l^2 lam) e^{-l^2 lam} lam^{-1/4}.
    const int k = 2;
    const double lam = s.eigenvalues[k];
    const GridFunction v{d, s.eigenvectors.col(k)};
    const GridFunction got = tsharp(s, 2, 0.5, 2.0, 2.0, v, lats);
    const auto cubes = all_cubes(d, lats);
    for (Index x : {Index{0}, Index{11}, Index{31}}) {
        double best = 0.0;
        for (const Cube& q : cubes) {
            if (!holds(d, q, x)) continue;
            const double ell = side_length(d, q);
            const double y = ell * ell * lam;
            const double scale = (1.0 + y) * std::exp(-y) * std::pow(lam, -0.25);
            double s2 = 0.0, cnt = 0.0;
            for (Index c = 0; c < 32; ++c)
                if (holds(d, q, c)) {
                    s2 += v[c] * v[c];
                    cnt += 1.0;
                }
            best = std::max(best, scale * std::sqrt(s2 / cnt));
        }
        CHECK(got[x] == doctest::Approx(best).epsilon(1e-10));
    }

    // T# f <= c M_{p0}(L^{-a} f) with c stable across random f.
    const Matrix inv = fractional_power_oracle(s, 0.5, 2.0);
    double lo = INFINITY, hi = 0.0;
    for (std::uint64_t seed = 20; seed < 30; ++seed) {
        const GridFunction f = random_function(d, seed, 0.0, 1.0);
        const GridFunction ts = tsharp(s, 2, 0.5, 2.0, kInf, f, lats);
        const GridFunction m = maximal(GridFunction{d, inv * f.values}, 1.0, lats);
        double c = 0.0;
        for (Index i = 0; i < 32; ++i) c = std::max(c, ts[i] / m[i]);
        lo = std::min(lo, c);
        hi = std::max(hi, c);
    }
    CHECK(std::isfinite(hi));
    CHECK(hi / lo < 2.0);
}

TEST_CASE("weak-type profile") {
    const GridDomain d = make_domain(1, {0.0}, 1.0, 6);
    std::vector<Cube> cubes;
    for (int level = 0; level <= 4; ++level)
        for (const Cube& q : cubes_at_level(d, base_lattice(d), level)) cubes.push_back(q);
    std::vector<Vector> sample;
    for (std::uint64_t seed = 0; seed < 6; ++seed) sample.push_back(random_function(d, 40 + seed).values);
    const std::vector<double> lambdas = {1.0 / 16, 1.0 / 8, 1.0 / 4, 1.0 / 2};

    const CellMap zero = [](const Vector& f) { return Vector::Zero(f.size()); };
    const auto pz = weak_bound_profile(zero, "zero", d, 1.0, 0.0, lambdas, cubes, sample);
    for (double v : pz.values) CHECK(v == 0.0);

    const CellMap ident = [](const Vector& f) { return f; };
    const auto pi = weak_bound_profile(ident, "identity", d, 1.0, 0.0, lambdas, cubes, sample);
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        CHECK(pi.values[i] <= 1.0 / lambdas[i] + 1e-12);
        if (i > 0) CHECK(pi.values[i] <= pi.values[i - 1]);
    }

    const OperatorRep t = riesz_potential(d, 0.5);
    const auto pr = weak_bound_profile(t.as_map(), "riesz", d, 1.0, 0.5, lambdas, cubes, sample);
    for (double v : pr.values) CHECK((std::isfinite(v) && v > 0.0));
    CHECK(pr.samples_used == static_cast<int>(cubes.size() * sample.size()));

    const std::vector<Vector> zeros(2, Vector::Zero(d.cell_count()));
    CHECK_THROWS_AS(weak_bound_profile(ident, "identity", d, 1.0, 0.0, lambdas, cubes, zeros), EmptySampleError);
}

TEST_CASE("weak quasi-norm is exact") {
    const GridDomain d = make_domain(1, {0.0}, 1.0, 4);
    const GridFunction g = random_function(d, 50);
    const double h = d.cell_measure();
    for (double e : {1.0, 2.0, 3.0}) {
        // sup over lambda just below each value of lambda |{|g| > lambda}|^{1/e}.
        double best = 0.0;
        for (Index i = 0; i < 16; ++i) {
            const double lam = std::abs(g[i]);
            double count = 0.0;
            for (Index j = 0; j < 16; ++j)
                if (std::abs(g[j]) >= lam) count += 1.0;
            best = std::max(best, lam * std::pow(count * h, 1.0 / e));
        }
        CHECK(weak_quasinorm(g.values, e, h) == doctest::Approx(best).epsilon(1e-14));
    }
    CHECK(weak_quasinorm(Vector::Zero(8), 2.0, 0.1) == 0.0);
}
