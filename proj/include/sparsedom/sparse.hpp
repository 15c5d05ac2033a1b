#pragma once

#include "sparsedom/grid.hpp"
#include "sparsedom/operators.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace sparsedom {

// Cube family with an optional explicit witness E_Q (cell lists, one per cube).
struct SparseFamily {
    int lattice = kBaseLattice;
    std::vector<Cube> cubes;
    std::vector<std::vector<Index>> witness;
    double eta = 0.5;
};

struct SparsenessCheck {
    bool ok = false;
    double achieved_eta = 0.0;  // min |E_Q| / |Q in D|
    std::string message;
    std::vector<std::vector<Index>> witness;  // the witness actually checked
};

/// Checks E_Q inside Q, pairwise disjointness and |E_Q| >= eta |Q in D|.
/// Without a stored witness, E_Q = Q minus the family cubes strictly inside Q.
SparsenessCheck verify_sparseness(const GridDomain& d, const SparseFamily& family);

/// Text form: a `# sparse-family` header, then `shift level coords... | cells...` per cube.
void write_family(std::ostream& out, const GridDomain& d, const SparseFamily& family);
SparseFamily read_family(std::istream& in);

struct RecursionStep {
    Cube cube;
    int depth = 0;
    double cube_measure = 0.0;
    double exceptional_measure = 0.0;  // |Omega|
    double selected_measure = 0.0;     // sum |Q'|
    std::size_t selected = 0;
    bool packing_ok = true;    // sum |Q'| <= |Q| / 2
    bool selection_ok = true;  // |Q'|/2^{n+1} < |Q' cap Omega| <= |Q'|/2 for each Q'
};

struct DominationReport {
    double lhs = 0.0;               // int |T_b^m f| |g|
    double form_b_on_f = 0.0;       // first symmetric term, merged family
    double form_b_on_g = 0.0;       // second symmetric term, merged family
    double c_two_term = 0.0;        // lhs / (sum of the two terms)
    double form_full = 0.0;         // sum over k = 0..m on tripled cubes of the recursion family
    double c_full = 0.0;
    double form_all_lattices = 0.0; // two terms summed over every tripled lattice
    double c_all_lattices = 0.0;
    int depth = 0;
    std::size_t pre_merge_count = 0;
    std::size_t merged_count = 0;
    double max_packing_ratio = 0.0;
    std::vector<double> lattice_measure;
    std::vector<RecursionStep> steps;
};

struct SparseConstruction {
    SparseFamily pre_merge;                // base-lattice cubes, eta = 1/2
    SparseFamily merged;                   // tripled cubes of the heaviest lattice, eta = 1/(2 3^n)
    std::vector<SparseFamily> per_lattice; // tripled cubes grouped by lattice
    DominationReport report;
};

/// Stopping-time sparse construction for T_b^m on the base cube q0_cube.
/// alpha is the unnormalized order; forms carry |Q|^{1 + alpha/n}.
SparseConstruction construct_sparse(const OperatorRep& t, const Vector& b, int m, const Vector& f,
                                    const Vector& g, const Cube& q0_cube, double p0, double q0, double alpha);

enum class FormSide { BOnFirst, BOnSecond };

/// B^{m,alpha}: sum_Q <|b-<b>_Q|^m |f|>_{p0,Q} <|g|>_{q0',Q} |Q|^{1+alpha/n}
/// (b moved onto g for BOnSecond). Refuses families that fail verification.
double sparse_form(const GridDomain& d, const SparseFamily& s, const Vector& b, int m, const Vector& f,
                   const Vector& g, double p0, double q0, double alpha, FormSide side);

/// c_k = <|b-<b>_Q|^{m-k}|f|>_{r,Q} <|b-<b>_Q|^k |g|>_{t,Q}, k = 0..m.
std::vector<double> pair_averages(const GridDomain& d, const Cube& q, const Vector& b, int m, const Vector& f,
                                  const Vector& g, double r, double t);

/// A^{r,alpha}_S f = (sum_Q (|Q|^{-alpha} int_Q f)^r chi_Q)^{1/r}, f >= 0.
Vector sparse_operator(const GridDomain& d, const std::vector<Cube>& s, double r, double alpha, const Vector& f);
/// k-fold application of f -> (sum_Q <f>_Q chi_Q) nu.
Vector iterated_sparse_avg(const GridDomain& d, const std::vector<Cube>& s, const Vector& nu, int k,
                           const Vector& f);

struct StoppingResult {
    std::vector<Cube> family;
    std::vector<int> parent;     // per input cube: index into family, -1 outside Q0
    bool verified = false;       // <|f|>^u_Q <= 2 <|f|>^u_{parent} for every visited Q
    double carleson_sum = 0.0;   // sum_F <|f|>^u_{r,F} u(F)
    std::vector<std::string> warnings;
};

StoppingResult stopping_family(const GridDomain& d, const std::vector<Cube>& s, const Vector& f, const Vector& u,
                               double r, const Cube& q0_cube);

struct TestingReport {
    double zeta = 0.0;
    double zeta_star = 0.0;
    std::vector<double> zeta_terms;       // per R in S
    std::vector<double> zeta_star_terms;
};

/// tau_Q = <u>_Q^{1/r-1} <v>_Q^{-1/s} lambda_Q / |Q|, T_R f = sum_{Q in S, Q in R} tau_Q <f>_Q chi_Q.
TestingReport testing_norms(const GridDomain& d, const std::vector<Cube>& s, const Vector& u, const Vector& v,
                            const std::vector<double>& lambda, double p, double q, double r, double s_exp);

/// (sum_Q lambda_Q ((1/w(Q)) sum_{Q' in Q} lambda_{Q'} w(Q'))^{p-1} w(Q))^{1/p}
double cov_norm_rhs(const GridDomain& d, const std::vector<Cube>& s, const std::vector<double>& lambda,
                    const Vector& w, double p);
/// || sum_Q lambda_Q chi_Q ||_{L^p(w)}
double cov_norm_direct(const GridDomain& d, const std::vector<Cube>& s, const std::vector<double>& lambda,
                       const Vector& w, double p);

struct SparseSumBound {
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
    bool universal = true;  // alpha > 0 case
};

/// sum_{Q in S, Q in R} |Q|^alpha sigma(Q)^beta omega(Q)^gamma against
/// |R|^alpha sigma(R)^beta omega(R)^gamma, times [sigma]^beta [omega]^gamma when alpha = 0.
SparseSumBound sparse_sum_bound(const GridDomain& d, const std::vector<Cube>& s, const Vector& omega,
                                const Vector& sigma, double alpha, double beta, double gamma, const Cube& r,
                                double sigma_ainf = 1.0, double omega_ainf = 1.0);

}  // namespace sparsedom
