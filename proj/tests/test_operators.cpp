#include "sparsedom/errors.hpp"
#include "sparsedom/operators.hpp"
#include "sparsedom/rng.hpp"

#include <doctest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace sparsedom;

namespace {

OperatorRep dirichlet_laplacian(int depth) {
    const GridDomain d = make_domain(1, {0.0}, 1.0, depth);
    return divergence_form(d, GridFunction::constant(d, 1.0), Boundary::Dirichlet);
}

Vector random_vector(Index n, std::uint64_t seed) {
    Rng rng(seed);
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = rng.uniform(-1.0, 1.0);
    return v;
}

double rel(const Vector& a, const Vector& b) { return (a - b).norm() / b.norm(); }

// Composite Simpson rule on [a, b] with an even number of panels, for vector-valued integrands.
template <typename Fn>
Vector simpson(Fn&& fn, double a, double b, int panels) {
    const double h = (b - a) / panels;
    Vector acc = fn(a) + fn(b);
    for (int k = 1; k < panels; ++k) acc += (k % 2 ? 4.0 : 2.0) * fn(a + k * h);
    return acc * (h / 3.0);
}

}  // namespace

TEST_CASE("Riesz potential 1D matches the closed-form antiderivative") {
    // Domain [0,4), f = indicator of [0,1); the cell starting at x = 2 averages 2(sqrt x - sqrt(x-1)).
    const GridDomain d = make_domain(1, {0.0}, 4.0, 8);
    const OperatorRep t = riesz_potential(d, 0.5);
    CHECK(t.is_symmetric());
    CHECK(t.apply(Vector::Zero(d.cell_count())).norm() == 0.0);
    Vector f = Vector::Zero(d.cell_count());
    const double h = d.cell_size();
    for (Index i = 0; i < d.cell_count(); ++i)
        if (d.cell_center(i)[0] < 1.0) f[i] = 1.0;
    const Vector tf = t.apply(f);
    const Index at = *d.locate({2.0 + 0.5 * h, 0.0});
    const auto prim = [](double x) { return (4.0 / 3.0) * (std::pow(x, 1.5) - std::pow(x - 1.0, 1.5)); };
    CHECK(tf[at] == doctest::Approx((prim(2.0 + h) - prim(2.0)) / h).epsilon(1e-10));
    CHECK(tf[at] == doctest::Approx(2.0 * (std::sqrt(2.0) - 1.0)).epsilon(2e-3));
    CHECK_THROWS_AS(riesz_potential(d, 1.0), ParameterError);
}

TEST_CASE("Riesz potential 2D is symmetric and positive") {
    const GridDomain d = make_domain(2, {0.0, 0.0}, 1.0, 3);
    const OperatorRep t = riesz_potential(d, 1.0);
    CHECK(t.is_symmetric());
    CHECK(t.matrix().minCoeff() > 0.0);
}

TEST_CASE("divergence form stencil and spectrum") {
    const OperatorRep l = dirichlet_laplacian(3);
    const double h = 0.125;
    Matrix expect = Matrix::Zero(8, 8);
    for (int i = 0; i < 8; ++i) {
        expect(i, i) = 2.0 / (h * h);
        if (i > 0) expect(i, i - 1) = -1.0 / (h * h);
        if (i < 7) expect(i, i + 1) = -1.0 / (h * h);
    }
    CHECK((l.matrix() - expect).norm() <= 1e-12 * expect.norm());

    const SpectralData s = spectral_data(l);
    for (int k = 1; k <= 8; ++k) {
        const double oracle = 4.0 / (h * h) * std::pow(std::sin(k * M_PI / (2.0 * 9.0)), 2);
        CHECK(s.eigenvalues[k - 1] == doctest::Approx(oracle).epsilon(1e-12));
    }
    CHECK(s.reconstruction_error < 1e-12);

    const GridDomain d2 = make_domain(2, {0.0, 0.0}, 1.0, 3);
    const OperatorRep per = divergence_form(d2, GridFunction::constant(d2, 2.0), Boundary::Periodic);
    CHECK(per.apply(Vector::Ones(d2.cell_count())).norm() < 1e-10);
    GridFunction bad = GridFunction::constant(d2, 1.0);
    bad[5] = 0.0;
    CHECK_THROWS_AS(divergence_form(d2, bad, Boundary::Dirichlet), EllipticityError);
}

TEST_CASE("matrix file loader") {
    const GridDomain d = make_domain(1, {0.0}, 1.0, 2);
    const auto path = std::filesystem::temp_directory_path() / "sparsedom_matrix_test.txt";
    {
        std::ofstream out(path);
        out << "1 4 4\n";
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) out << (i == j ? 2.0 : 0.5) << (j == 3 ? "\n" : " ");
    }
    const OperatorRep m = load_matrix_file(path.string(), d);
    CHECK(m.matrix()(0, 0) == 2.0);
    CHECK(m.matrix()(2, 1) == 0.5);
    CHECK_THROWS_AS(load_matrix_file(path.string(), make_domain(1, {0.0}, 1.0, 3)), Error);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_matrix_file(path.string(), d), IoError);
}

TEST_CASE("semigroup") {
    const OperatorRep l = dirichlet_laplacian(5);
    const SpectralData s = spectral_data(l);
    const Vector f = random_vector(32, 1);
    CHECK(rel(semigroup_apply(s, 1e-8, f), f) < 1e-4);
    const Vector v = s.eigenvectors.col(3);
    CHECK(rel(semigroup_apply(s, 1e-3, v), std::exp(-1e-3 * s.eigenvalues[3]) * v) < 1e-12);
    const Vector two_step = semigroup_apply(s, 2e-3, semigroup_apply(s, 1e-3, f));
    CHECK(rel(two_step, semigroup_apply(s, 3e-3, f)) < 1e-8);

    // Padé exponential as an independent path.
    const Matrix e = (-1e-3 * l.matrix()).exp();
    CHECK(rel(semigroup_apply(l, 1e-3, f), e * f) < 1e-10);
}

TEST_CASE("fractional power quadrature") {
    const OperatorRep l = dirichlet_laplacian(8);
    const SpectralData s = spectral_data(l);
    const double lmin = s.eigenvalues.minCoeff(), lmax = s.eigenvalues.maxCoeff();
    const QuadratureRule rule = make_quadrature(0.25, lmin, lmax, 200);
    const Matrix approx = fractional_power(s, 0.5, 2.0, rule).matrix();
    const Matrix oracle = fractional_power_oracle(s, 0.5, 2.0);
    const double err = (approx - oracle).operatorNorm() / oracle.operatorNorm();
    CHECK(err <= 1e-6);

    const OperatorRep small = dirichlet_laplacian(4);
    const SpectralData ss = spectral_data(small);
    const QuadratureRule r1 =
        make_quadrature(1.0, ss.eigenvalues.minCoeff(), ss.eigenvalues.maxCoeff(), 200);
    const Matrix inv = fractional_power(ss, 2.0, 2.0, r1).matrix();
    const Matrix exact = small.matrix().inverse();
    CHECK((inv - exact).norm() / exact.norm() <= 1e-6);
}

TEST_CASE("P_{N,t} calculus") {
    const OperatorRep l = dirichlet_laplacian(5);
    const SpectralData s = spectral_data(l);
    const Vector f = random_vector(32, 2);
    const double t = 1e-3;
    const Vector semi = (-t * l.matrix()).exp() * f;
    CHECK(rel(pnt_apply(s, 1, t, f), semi) < 1e-10);
    CHECK(rel(pnt_apply(s, 2, t, f), semi + t * (l.matrix() * semi)) < 1e-10);

    CHECK(pnt_polynomial(1) == std::vector<double>{1.0});
    const auto p3 = pnt_polynomial(3);
    REQUIRE(p3.size() == 3);
    CHECK(p3[0] == doctest::Approx(1.0));
    CHECK(p3[1] == doctest::Approx(1.0));
    CHECK(p3[2] == doctest::Approx(0.5));

    // I - P_{N,t} = int_0^t Q_{N,s} ds/s, with s = t e^{-v}.
    for (int n = 1; n <= 4; ++n) {
        const Vector integral =
            simpson([&](double v) { return qnt_apply(s, n, t * std::exp(-v), f); }, 0.0, 40.0, 8000);
        CHECK(rel(f - pnt_apply(s, n, t, f), integral) < 1e-6);
    }
    CHECK_THROWS_AS(pnt_apply(s, 0, t, f), ParameterError);
}

TEST_CASE("commutators") {
    const GridDomain d = make_domain(1, {0.0}, 1.0, 5);
    const OperatorRep t = riesz_potential(d, 0.5);
    const Vector f = random_vector(32, 3);
    const Vector b = random_vector(32, 4);
    CHECK(rel(commutator_apply(t.as_map(), b, 0, f), t.apply(f)) < 1e-14);
    CHECK(commutator_apply(t.as_map(), Vector::Constant(32, 1.7), 2, f).norm() < 1e-10 * t.apply(f).norm());

    // Kernel double sum: sum_j K_ij (b_i - b_j)^2 f_j.
    Vector direct = Vector::Zero(32);
    for (Index i = 0; i < 32; ++i)
        for (Index j = 0; j < 32; ++j) direct[i] += t.matrix()(i, j) * std::pow(b[i] - b[j], 2) * f[j];
    CHECK(rel(commutator_apply(t.as_map(), b, 2, f), direct) < 1e-12);
}

TEST_CASE("off-diagonal profile of the heat semigroup") {
    const OperatorRep l = dirichlet_laplacian(7);
    const SpectralData s = spectral_data(l);
    const GridDomain& d = s.domain;
    std::vector<Cube> cubes;
    for (int level : {3, 4, 5})
        for (const Cube& q : cubes_at_level(d, base_lattice(d), level))
            if (q.coords[0] % 3 == 1) cubes.push_back(q);
    const std::vector<double> ts = {1e-4, 1e-3, 1e-2};
    const auto rows = offdiag_profile(s, OperatorMeta{}, ts, 3, 1.0, 2.0, cubes);
    double worst = 0.0;
    for (const OffDiagonalRow& r : rows) {
        CHECK(std::isfinite(r.max_ratio));
        if (r.samples > 0) worst = std::max(worst, r.max_ratio);
    }
    CHECK(worst > 0.0);
    CHECK(worst < 50.0);
}
