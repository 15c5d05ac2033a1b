#pragma once

#include "sparsedom/grid.hpp"
#include "sparsedom/operators.hpp"

#include <string>
#include <vector>

namespace sparsedom {

// Every supremum over cubes containing x is a maximum over the cubes of the
// given lattices, levels 0..depth. Lebesgue averages of inputs use the
// geometric |Q|; averages of operator outputs and weighted averages are taken
// over Q intersected with the domain.

/// M_r f
GridFunction maximal(const GridFunction& f, double r, const std::vector<DyadicLattice>& lattices);
/// M_{r,u} f; cubes where u has no mass are skipped.
GridFunction weighted_maximal(const GridFunction& f, double r, const GridFunction& u,
                              const std::vector<DyadicLattice>& lattices);
/// M_{alpha,p} f = sup l(Q)^alpha <|f|>_{p,Q}
GridFunction fractional_maximal(const GridFunction& f, double alpha, double p,
                                const std::vector<DyadicLattice>& lattices);

/// Cells of R in the domain and the values of T(f chi_{D \ 3R}) on them, given tf = T f.
struct TruncatedImage {
    std::vector<Index> cells;
    Vector values;
};
TruncatedImage truncated_image(const OperatorRep& t, const Vector& f, const Vector& tf, const Cube& r);

/// M^#_{T,s} f: oscillation of T(f chi_{D \ 3Q}) on Q.
GridFunction sharp_grand_truncation(const OperatorRep& t, const GridFunction& f, double s,
                                    const std::vector<DyadicLattice>& lattices);
/// M_{T,q0} f: q0-average of |T(f chi_{D \ 3Q})| on Q.
GridFunction truncation_ML(const OperatorRep& t, const GridFunction& f, double q0,
                           const std::vector<DyadicLattice>& lattices);
/// T^#_L f: q0-average of |P_{N, l(Q)^kappa}(L) L^{-alpha/kappa} f| on Q.
GridFunction tsharp(const SpectralData& s, int n, double alpha, double kappa, double q0, const GridFunction& f,
                    const std::vector<DyadicLattice>& lattices);

// Empirical local weak-type profile: phi(lambda) is the least constant with
// |{x in Q : |T(f chi_Q)| > phi <|f|>_{p0,Q} |Q|^{alpha/n}}| <= lambda |Q|
// on every sampled (Q, f), made non-increasing in lambda.
struct WeakBoundProfile {
    std::string op;
    double p0 = 1.0;
    double alpha = 0.0;
    std::string sample;
    std::vector<double> lambdas;  // ascending
    std::vector<double> values;
    int samples_used = 0;
};

WeakBoundProfile weak_bound_profile(const CellMap& t, std::string name, const GridDomain& d, double p0,
                                    double alpha, std::vector<double> lambdas, const std::vector<Cube>& cubes,
                                    const std::vector<Vector>& f_sample);

/// sup_lambda lambda |{|g| > lambda}|^{1/exponent}, exact over the cell values.
double weak_quasinorm(const Vector& g, double exponent, double cell_measure);

}  // namespace sparsedom
