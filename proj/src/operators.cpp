#include "sparsedom/operators.hpp"

#include "sparsedom/errors.hpp"
#include "sparsedom/rng.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <fstream>
#include <sstream>

namespace sparsedom {

OperatorRep::OperatorRep(GridDomain domain, Matrix matrix, OperatorMeta meta, std::string name)
    : domain_(domain), matrix_(std::move(matrix)), meta_(meta), name_(std::move(name)) {
    if (matrix_.rows() != domain_.cell_count() || matrix_.cols() != domain_.cell_count())
        throw ParameterError("operator matrix does not match the cell count");
}

CellMap OperatorRep::as_map() const {
    return [m = matrix_](const Vector& f) -> Vector { return m * f; };
}

bool OperatorRep::is_symmetric(double rel_tol) const {
    const double scale = std::max(1.0, matrix_.cwiseAbs().maxCoeff());
    return (matrix_ - matrix_.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

namespace {

double riesz_self_average_2d(double alpha) {
    // Mean of |x-y|^(alpha-2) over the unit cell, by splitting it into
    // s x s subcells: pairs in distinct subcells are summed on a fine grid,
    // equal-subcell pairs follow from scaling.
    constexpr int s = 8;
    constexpr int g = 4;
    constexpr int m = s * g;
    double total = 0.0;
    for (int a = 0; a < m * m; ++a) {
        const int ax = a % m;
        const int ay = a / m;
        for (int b = 0; b < m * m; ++b) {
            const int bx = b % m;
            const int by = b / m;
            if (ax / g == bx / g && ay / g == by / g) continue;
            const double dx = static_cast<double>(ax - bx) / m;
            const double dy = static_cast<double>(ay - by) / m;
            total += std::pow(dx * dx + dy * dy, 0.5 * (alpha - 2.0));
        }
    }
    const double mean_distinct = total / std::pow(static_cast<double>(m), 4);
    return mean_distinct / (1.0 - std::pow(static_cast<double>(s), -alpha));
}

}  // namespace

OperatorRep riesz_potential(const GridDomain& d, double alpha) {
    if (!(alpha > 0.0 && alpha < d.dim)) throw ParameterError("Riesz order must lie in (0, n)");
    const Index n = d.cell_count();
    const double h = d.cell_size();
    Matrix k(n, n);
    if (d.dim == 1) {
        const auto second = [alpha](double x) {
            return std::pow(std::abs(x), alpha + 1.0) / (alpha * (alpha + 1.0));
        };
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < n; ++j) {
                const double dist = static_cast<double>(i - j) * h;
                k(i, j) = (second(dist + h) + second(dist - h) - 2.0 * second(dist)) / h;
            }
    } else {
        const double self = riesz_self_average_2d(alpha) * std::pow(h, alpha - 2.0);
        const double area = d.cell_measure();
        for (Index i = 0; i < n; ++i) {
            const Point ci = d.cell_center(i);
            for (Index j = 0; j < n; ++j) {
                if (i == j) {
                    k(i, j) = self * area;
                    continue;
                }
                const Point cj = d.cell_center(j);
                const double r = std::hypot(ci[0] - cj[0], ci[1] - cj[1]);
                k(i, j) = std::pow(r, alpha - 2.0) * area;
            }
        }
    }
    OperatorMeta meta{1.0, kInf, 2.0, alpha, 1.0};
    return OperatorRep(d, std::move(k), meta, "riesz");
}

OperatorRep divergence_form(const GridDomain& d, const GridFunction& coefficient, Boundary boundary,
                            OperatorMeta meta) {
    for (Index i = 0; i < coefficient.size(); ++i)
        if (!(coefficient.values[i] > 0.0) || !std::isfinite(coefficient.values[i]))
            throw EllipticityError("coefficient must be positive in every cell");
    const Index n = d.cell_count();
    const std::int64_t side = d.cells_per_axis();
    const double inv_h2 = 1.0 / (d.cell_size() * d.cell_size());
    Matrix a = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        const Coord c = d.cell_coords(i);
        for (int ax = 0; ax < d.dim; ++ax)
            for (int dir : {-1, 1}) {
                Coord nb = c;
                nb[ax] += dir;
                const bool outside = nb[ax] < 0 || nb[ax] >= side;
                if (outside && boundary == Boundary::Dirichlet) {
                    // Ghost value zero one cell beyond the boundary face.
                    a(i, i) += coefficient.values[i] * inv_h2;
                    continue;
                }
                nb[ax] = (nb[ax] + side) % side;
                const Index j = d.cell_index(nb);
                const double face = 0.5 * (coefficient.values[i] + coefficient.values[j]) * inv_h2;
                a(i, i) += face;
                a(i, j) -= face;
            }
    }
    meta.kappa = 2.0;
    return OperatorRep(d, std::move(a), meta, "divergence_form");
}

OperatorRep load_matrix_file(const std::string& path, const GridDomain& d, OperatorMeta meta) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open matrix file " + path);
    int dim = 0;
    Index rows = 0;
    Index cols = 0;
    if (!(in >> dim >> rows >> cols)) throw IoError("matrix file header must read `dim rows cols`");
    if (dim != d.dim || rows != cols || rows != d.cell_count())
        throw ParameterError("matrix file shape does not match the declared domain");
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j)
            if (!(in >> m(i, j))) throw IoError("matrix file ended early");
    return OperatorRep(d, std::move(m), meta, "matrix_file");
}

SpectralData spectral_data(const OperatorRep& op) {
    if (!op.is_symmetric(1e-10)) throw ParameterError("spectral calculus needs a symmetric operator");
    const Matrix sym = 0.5 * (op.matrix() + op.matrix().transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
    if (solver.info() != Eigen::Success) throw SpectrumError("eigen-decomposition failed");
    SpectralData s{op.domain(), solver.eigenvalues(), solver.eigenvectors(), 0.0};
    const Matrix rebuilt = s.eigenvectors * s.eigenvalues.asDiagonal() * s.eigenvectors.transpose();
    s.reconstruction_error = (rebuilt - sym).norm() / std::max(1e-300, sym.norm());
    return s;
}

Matrix spectral_matrix(const SpectralData& s, const std::function<double(double)>& fn) {
    Vector diag(s.eigenvalues.size());
    for (Index i = 0; i < diag.size(); ++i) diag[i] = fn(s.eigenvalues[i]);
    return s.eigenvectors * diag.asDiagonal() * s.eigenvectors.transpose();
}

Vector spectral_apply(const SpectralData& s, const std::function<double(double)>& fn, const Vector& f) {
    Vector coeffs = s.eigenvectors.transpose() * f;
    for (Index i = 0; i < coeffs.size(); ++i) coeffs[i] *= fn(s.eigenvalues[i]);
    return s.eigenvectors * coeffs;
}

Vector semigroup_apply(const SpectralData& s, double t, const Vector& f) {
    if (!(t > 0.0)) throw ParameterError("semigroup time must be positive");
    return spectral_apply(s, [t](double l) { return std::exp(-t * l); }, f);
}

Vector semigroup_apply(const OperatorRep& op, double t, const Vector& f) {
    if (!(t > 0.0)) throw ParameterError("semigroup time must be positive");
    if (op.is_symmetric(1e-10)) return semigroup_apply(spectral_data(op), t, f);
    const Matrix e = (-t * op.matrix()).exp();
    return e * f;
}

QuadratureRule make_quadrature(double exponent, double lambda_min, double lambda_max, int count,
                               double c_lo, double c_hi) {
    if (!(exponent > 0.0)) throw ParameterError("quadrature exponent must be positive");
    if (!(lambda_min > 0.0) || !(lambda_max >= lambda_min))
        throw SpectrumError("quadrature needs a strictly positive spectrum");
    if (count < 2) throw ParameterError("quadrature needs at least two nodes");
    QuadratureRule rule;
    rule.exponent = exponent;
    rule.s_min = c_lo / lambda_max;
    rule.s_max = c_hi / lambda_min;
    const double u0 = std::log(rule.s_min);
    const double du = (std::log(rule.s_max) - u0) / (count - 1);
    for (int j = 0; j < count; ++j) {
        const double s = std::exp(u0 + j * du);
        rule.nodes.push_back(s);
        rule.weights.push_back(du * std::pow(s, exponent));
    }
    const double decay = std::exp(-exponent * du);
    rule.tail_weight = du * std::pow(rule.s_min, exponent) * decay / (1.0 - decay);
    rule.tail_warning = rule.s_max * lambda_min < 30.0;
    return rule;
}

namespace {

void require_positive_spectrum(const SpectralData& s) {
    const double top = std::max(1.0, std::abs(s.eigenvalues.maxCoeff()));
    if (!(s.eigenvalues.minCoeff() > 1e-12 * top))
        throw SpectrumError("operator has a zero or negative eigenvalue; negative powers are undefined");
}

void require_order(double alpha, double kappa) {
    if (!(alpha > 0.0) || !(kappa > 0.0)) throw ParameterError("fractional order and kappa must be positive");
}

}  // namespace

OperatorRep fractional_power(const SpectralData& s, double alpha, double kappa, const QuadratureRule& rule) {
    require_order(alpha, kappa);
    require_positive_spectrum(s);
    const double a = alpha / kappa;
    const double norm = 1.0 / std::tgamma(a);
    Matrix m = spectral_matrix(s, [&](double l) {
        double acc = rule.tail_weight;
        for (std::size_t j = 0; j < rule.nodes.size(); ++j) acc += rule.weights[j] * std::exp(-rule.nodes[j] * l);
        return acc * norm;
    });
    OperatorMeta meta{1.0, kInf, kappa, alpha, 1.0};
    return OperatorRep(s.domain, std::move(m), meta, "fractional_power");
}

OperatorRep fractional_power(const OperatorRep& op, double alpha, double kappa, const QuadratureRule& rule) {
    require_order(alpha, kappa);
    const Index n = op.matrix().rows();
    Matrix acc = rule.tail_weight * Matrix::Identity(n, n);
    for (std::size_t j = 0; j < rule.nodes.size(); ++j)
        acc += rule.weights[j] * (-rule.nodes[j] * op.matrix()).exp();
    acc /= std::tgamma(alpha / kappa);
    OperatorMeta meta = op.meta();
    meta.kappa = kappa;
    meta.alpha = alpha;
    return OperatorRep(op.domain(), std::move(acc), meta, "fractional_power");
}

Matrix fractional_power_oracle(const SpectralData& s, double alpha, double kappa) {
    require_order(alpha, kappa);
    require_positive_spectrum(s);
    const double a = alpha / kappa;
    return spectral_matrix(s, [a](double l) { return std::pow(l, -a); });
}

std::vector<double> pnt_polynomial(int n) {
    if (n < 1) throw ParameterError("P_{N,t} needs N >= 1");
    // I_N(y) = int_y^inf x^{N-1} e^{-x} dx satisfies, after one integration by parts,
    // I_N(y) = y^{N-1} e^{-y} + (N-1) I_{N-1}(y), with I_1(y) = e^{-y}.
    // Coefficients of I_N(y) e^{y}, then divide by (N-1)!.
    std::vector<double> coeffs{1.0};
    for (int k = 2; k <= n; ++k) {
        for (double& c : coeffs) c *= (k - 1);
        coeffs.push_back(1.0);
    }
    const double fact = std::tgamma(static_cast<double>(n));
    for (double& c : coeffs) c /= fact;
    return coeffs;
}

Vector qnt_apply(const SpectralData& s, int n, double t, const Vector& f) {
    if (n < 1) throw ParameterError("Q_{N,t} needs N >= 1");
    if (!(t > 0.0)) throw ParameterError("t must be positive");
    const double c = 1.0 / std::tgamma(static_cast<double>(n));
    return spectral_apply(s, [&](double l) { return c * std::pow(t * l, n) * std::exp(-t * l); }, f);
}

Vector pnt_apply(const SpectralData& s, int n, double t, const Vector& f) {
    if (!(t > 0.0)) throw ParameterError("t must be positive");
    const std::vector<double> coeffs = pnt_polynomial(n);
    return spectral_apply(s, [&](double l) {
        const double x = t * l;
        double p = 0.0;
        for (std::size_t k = coeffs.size(); k-- > 0;) p = p * x + coeffs[k];
        return p * std::exp(-x);
    }, f);
}

Vector commutator_apply(const CellMap& t, const Vector& b, int m, const Vector& f) {
    if (m < 0) throw ParameterError("commutator order must be nonnegative");
    Vector out = Vector::Zero(f.size());
    Vector moment = f;  // (-b)^k f
    double binom = 1.0;
    for (int k = 0; k <= m; ++k) {
        const Vector image = t(moment);
        out.array() += binom * b.array().pow(m - k) * image.array();
        moment = (-b.array() * moment.array()).matrix();
        binom = binom * (m - k) / (k + 1);
    }
    return out;
}

std::vector<OffDiagonalRow> offdiag_profile(const SpectralData& s, const OperatorMeta& meta,
                                            const std::vector<double>& t_grid, int j_max, double p,
                                            double q, const std::vector<Cube>& cubes, std::uint64_t seed) {
    if (!(p >= 1.0 && q >= p)) throw ParameterError("off-diagonal profile needs 1 <= p <= q");
    const GridDomain& d = s.domain;
    const double n = d.dim;
    const double hn = d.cell_measure();
    Rng rng(seed);
    std::vector<OffDiagonalRow> rows;
    for (double t : t_grid)
        for (int j = 0; j <= j_max; ++j)
            for (int k = 0; k <= 1; ++k) {
                OffDiagonalRow row{t, j, k, 0.0, 0};
                for (const Cube& cube : cubes) {
                    const std::vector<Index> ring = annulus(d, cube, j);
                    if (ring.empty()) continue;
                    const double ell = side_length(d, cube);
                    const double qmeasure = cube_measure(d, cube);
                    const double ring_measure =
                        j == 0 ? qmeasure : (std::pow(3.0, j * n) - std::pow(3.0, (j - 1) * n)) * qmeasure;
                    for (int trial = 0; trial < 2; ++trial) {
                        Vector f = Vector::Zero(d.cell_count());
                        for (Index c : ring) f[c] = trial == 0 ? 1.0 : rng.uniform();
                        const Vector out = spectral_apply(
                            s, [&](double l) { return std::pow(t * l, k) * std::exp(-t * l); }, f);
                        double lhs = 0.0;
                        double fin = 0.0;
                        for_each_cell(d, cube_box(d, cube), [&](Index c) { lhs += std::pow(std::abs(out[c]), q); });
                        lhs = std::pow(lhs * hn / qmeasure, 1.0 / q);
                        for (Index c : ring) fin += std::pow(std::abs(f[c]), p);
                        const double f_avg = std::pow(fin * hn / ring_measure, 1.0 / p);
                        const double scale = std::pow(t, 1.0 / meta.kappa);
                        double rhs = 0.0;
                        if (j >= 2) {
                            const double x = std::pow(3.0, j) * ell / scale;
                            rhs = std::max(std::pow(x, n), std::pow(x, n / p)) *
                                  std::pow(1.0 + scale / ell, n / q) * std::pow(1.0 + x, -n - meta.epsilon) * f_avg;
                        } else {
                            rhs = std::pow(qmeasure, -1.0 / q) * std::pow(ring_measure, 1.0 / p) *
                                  std::pow(t, -(n / meta.kappa) * (1.0 / p - 1.0 / q)) * f_avg;
                        }
                        if (rhs > 0.0) {
                            row.max_ratio = std::max(row.max_ratio, lhs / rhs);
                            ++row.samples;
                        }
                    }
                }
                rows.push_back(row);
            }
    return rows;
}

}  // namespace sparsedom
