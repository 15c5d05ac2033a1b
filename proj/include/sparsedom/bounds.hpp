#pragma once

#include "sparsedom/grid.hpp"

#include <optional>
#include <string>

namespace sparsedom {

/// Exponents shared by the bound calculators. q0 and s may be kInf.
/// In thm31_bound and cor37_bound `alpha` is already divided by n.
struct ExponentProfile {
    int n = 1;
    double p0 = 1.0;
    double q0 = kInf;
    double p = 2.0;
    double q = 2.0;
    double r = 1.0;
    double s = kInf;
    double alpha = 0.0;
    double kappa = 2.0;
    double epsilon = 1.0;
    int m = 0;
};

/// Hölder conjugate with 1' = inf and inf' = 1.
double conjugate(double p) noexcept;

/// q0 q / (q0 - q), with the q0 = inf limit q.
double tail_ratio(double q0, double q);

/// [u,v] ([u]^{1-1/p'^2}[v]^{1/p'^2} + [u]^{1/p^2}[v]^{1-1/p^2}) if p = q and alpha > 0,
/// [u,v] ([u]^{1/q} + [v]^{1/p'}) otherwise.
double thm31_bound(const ExponentProfile& e, double uv, double u_ainf, double v_ainf);

struct DeltaInterval {
    double lo = 1.0;
    double hi = 1.0;
    double from_r = kInf;      // p/(p-r)
    double from_s = kInf;      // (s-1)q/(s-q)
    double from_alpha = kInf;  // alpha/(alpha-1/p+1/q), inactive when the denominator vanishes
    double from_q = kInf;      // q/(q-1)
    bool feasible = true;
    bool has_interior = false;
};

DeltaInterval delta_feasible(const ExponentProfile& e);

struct Thm12Result {
    double value = 0.0;
    double u_exponent = 0.0;  // u = mu^{u_exponent}
    double v_exponent = 0.0;  // v = lambda^{v_exponent}
    std::string dictionary;
};

/// Two-weight bound for the fractional power; requires alpha = n(1/p - 1/q), p0 < p < q < q0.
Thm12Result thm12_bound(const ExponentProfile& e, double uv, double u_ainf, double v_ainf);

/// thm31_bound under r -> p0, s -> q0, alpha -> alpha/n.
double cor32_bound(const ExponentProfile& e, double uv, double u_ainf, double v_ainf);

double cor13_exponent(const ExponentProfile& e);
double cor13_bound(const ExponentProfile& e, double a_char, double rh_char);

/// Characteristics entering the Bloom constants; every one must be present.
struct BloomCharacteristics {
    std::optional<double> lambda_tail;     // [lambda^{q0 q/(q0-q)}]_{A_{1+...}}
    std::optional<double> mu_tail;         // [mu^{q0 q/(q0-q)}]_{A_{1+...}}
    std::optional<double> mu_p;            // [mu^p]_{A_{p/p0}}
    std::optional<double> lambda_p;        // [lambda^p]_{A_{p/p0}}
    std::optional<double> mu_dual;         // [mu^{-q'}]_{A_{q'/q0'}}
    std::optional<double> lambda_dual;     // [lambda^{-q'}]_{A_{q'/q0'}}
};

struct BloomConstant {
    double c1 = 0.0;
    double c2 = 0.0;
    double c = 0.0;
};

/// Floor-function exponents: x - fl + fl^2/(2x) + fl/(2x) and fl - fl^2/(2x) - fl/(2x), fl = floor(x).
double bloom_upper_exponent(double x);
double bloom_lower_exponent(double x);

BloomConstant thm41_bloom_constant(const ExponentProfile& e, const BloomCharacteristics& k);

double cor43_exponent(const ExponentProfile& e);
double cor43_bound(const ExponentProfile& e, double a_char, double rh_char);

struct ClassicalExponents {
    double buckley = 0.0;
    double lacey = 0.0;
    double bloom_sharp = 0.0;
};

ClassicalExponents classical_exponents(int n, double p, double q, double alpha, int m = 0);

/// Sparse-operator bound; uses e.p, e.q, e.r, e.alpha. r > p is evaluated at r = p.
double cor37_bound(const ExponentProfile& e, double omega_sigma, double omega_ainf, double sigma_ainf);

}  // namespace sparsedom
