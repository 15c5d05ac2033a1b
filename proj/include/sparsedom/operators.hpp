#pragma once

#include "sparsedom/grid.hpp"

#include <functional>
#include <string>
#include <vector>

namespace sparsedom {

/// Exponent profile attached to an operator: (p0, q0) range, order kappa,
/// fractional order alpha and off-diagonal decay epsilon.
struct OperatorMeta {
    double p0 = 1.0;
    double q0 = kInf;
    double kappa = 2.0;
    double alpha = 0.0;
    double epsilon = 1.0;
};

/// Possibly sublinear map on cell arrays.
using CellMap = std::function<Vector(const Vector&)>;

// Dense linear operator on the cells of a domain.
class OperatorRep {
public:
    OperatorRep(GridDomain domain, Matrix matrix, OperatorMeta meta, std::string name);

    const GridDomain& domain() const noexcept { return domain_; }
    const Matrix& matrix() const noexcept { return matrix_; }
    const OperatorMeta& meta() const noexcept { return meta_; }
    const std::string& name() const noexcept { return name_; }

    Vector apply(const Vector& f) const { return matrix_ * f; }
    GridFunction operator()(const GridFunction& f) const { return {domain_, matrix_ * f.values}; }
    CellMap as_map() const;
    bool is_symmetric(double rel_tol = 1e-12) const;

private:
    GridDomain domain_;
    Matrix matrix_;
    OperatorMeta meta_;
    std::string name_;
};

/// Discrete I_alpha: exact cell-pair averages of |x-y|^(alpha-n) in 1D,
/// midpoint off-diagonal and a self-similar self term in 2D.
OperatorRep riesz_potential(const GridDomain& d, double alpha);

enum class Boundary { Dirichlet, Periodic };

/// Finite-difference -div(a grad) with face coefficients (a_i + a_j)/2.
OperatorRep divergence_form(const GridDomain& d, const GridFunction& coefficient, Boundary boundary,
                            OperatorMeta meta = {});

/// Reads `dim rows cols` followed by row-major entries; must be square with
/// one row per cell of `d`.
OperatorRep load_matrix_file(const std::string& path, const GridDomain& d, OperatorMeta meta = {});

// Eigen-decomposition of a symmetric operator, ascending eigenvalues.
struct SpectralData {
    GridDomain domain;
    Vector eigenvalues;
    Matrix eigenvectors;
    double reconstruction_error = 0.0;  // relative, Frobenius
};

SpectralData spectral_data(const OperatorRep& op);

/// V diag(fn(lambda)) V^T
Matrix spectral_matrix(const SpectralData& s, const std::function<double(double)>& fn);
Vector spectral_apply(const SpectralData& s, const std::function<double(double)>& fn, const Vector& f);

/// e^{-tL} f through the eigenbasis.
Vector semigroup_apply(const SpectralData& s, double t, const Vector& f);
/// e^{-tL} f; symmetric operators use the eigenbasis, others scaling and squaring.
Vector semigroup_apply(const OperatorRep& op, double t, const Vector& f);

// Log-spaced rule for the integral of s^a e^{-s lambda} ds/s over (0, inf).
// `tail_weight` integrates the geometric continuation of the grid below
// s_min, where e^{-s L} is replaced by the identity.
struct QuadratureRule {
    double exponent = 0.0;
    std::vector<double> nodes;
    std::vector<double> weights;
    double s_min = 0.0;
    double s_max = 0.0;
    double tail_weight = 0.0;
    bool tail_warning = false;  // s_max * lambda_min too small for the upper tail to vanish
};

QuadratureRule make_quadrature(double exponent, double lambda_min, double lambda_max, int count = 200,
                               double c_lo = 1e-6, double c_hi = 50.0);

/// (1/Gamma(a)) * quadrature of s^a e^{-sL} ds/s with a = alpha/kappa.
OperatorRep fractional_power(const SpectralData& s, double alpha, double kappa, const QuadratureRule& rule);
/// Same quadrature with matrix exponentials, for operators without an eigenbasis.
OperatorRep fractional_power(const OperatorRep& op, double alpha, double kappa, const QuadratureRule& rule);
/// V Lambda^{-alpha/kappa} V^T
Matrix fractional_power_oracle(const SpectralData& s, double alpha, double kappa);

/// Coefficients (ascending) of the polynomial p with P_{N,t}(L) = p(tL) e^{-tL}.
std::vector<double> pnt_polynomial(int n);
/// Q_{N,t}(L) f = (tL)^N e^{-tL} f / (N-1)!
Vector qnt_apply(const SpectralData& s, int n, double t, const Vector& f);
/// P_{N,t}(L) f = p(tL) e^{-tL} f
Vector pnt_apply(const SpectralData& s, int n, double t, const Vector& f);

/// x -> T((b(x) - b(.))^m f)(x) via m + 1 applications of T.
Vector commutator_apply(const CellMap& t, const Vector& b, int m, const Vector& f);

struct OffDiagonalRow {
    double t = 0.0;
    int j = 0;
    int k = 0;
    double max_ratio = 0.0;
    int samples = 0;
};

/// Measured ratio of <|(tL)^k e^{-tL}(f chi_{S_j(Q)})|>_{q,Q} to the off-diagonal
/// right-hand side, maximized over the cube sample and f in {chi_{S_j}, random}.
/// j >= 2 uses the annular bound, j in {0, 1} the global L^p -> L^q bound.
std::vector<OffDiagonalRow> offdiag_profile(const SpectralData& s, const OperatorMeta& meta,
                                            const std::vector<double>& t_grid, int j_max, double p,
                                            double q, const std::vector<Cube>& cubes,
                                            std::uint64_t seed = 1);

}  // namespace sparsedom
