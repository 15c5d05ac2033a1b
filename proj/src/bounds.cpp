#include "sparsedom/bounds.hpp"

#include "sparsedom/errors.hpp"

#include <algorithm>
#include <cmath>

namespace sparsedom {

namespace {

constexpr double kTol = 1e-12;

void require_characteristic(double c, const char* what) {
    if (!(c >= 1.0 - 1e-9) || std::isinf(c)) throw ParameterError(std::string(what) + " must be a finite value >= 1");
}

void require_positive(double c, const char* what) {
    if (!(c > 0.0) || std::isinf(c)) throw ParameterError(std::string(what) + " must be finite and positive");
}

void require_fractional_profile(const ExponentProfile& e) {
    if (e.n < 1) throw ParameterError("dimension must be positive");
    if (!(e.p0 >= 1.0 && e.p0 < e.p && e.p < e.q && e.q < e.q0))
        throw ParameterError("need 1 <= p0 < p < q < q0");
    if (e.m < 0) throw ParameterError("commutator order must be nonnegative");
}

}  // namespace

double conjugate(double p) noexcept {
    if (std::isinf(p)) return 1.0;
    if (p == 1.0) return kInf;
    return p / (p - 1.0);
}

double tail_ratio(double q0, double q) {
    if (std::isinf(q0)) return q;
    if (!(q0 > q)) throw ParameterError("need q < q0");
    return q0 * q / (q0 - q);
}

double thm31_bound(const ExponentProfile& e, double uv, double u_ainf, double v_ainf) {
    if (!(e.p >= 1.0 && e.p <= e.q && e.q < e.s)) throw ParameterError("need 1 <= p <= q < s");
    if (!(e.r > 0.0 && e.r < e.p)) throw ParameterError("need 0 < r < p");
    const double upper = 1.0 / e.r - (std::isinf(e.s) ? 0.0 : 1.0 / e.s);
    if (e.alpha < 1.0 / e.p - 1.0 / e.q - kTol || !(e.alpha < upper))
        throw ParameterError("need 1/p - 1/q <= alpha < 1/r - 1/s");
    require_positive(uv, "[u,v]");
    require_characteristic(u_ainf, "[u]_{A_inf}");
    require_characteristic(v_ainf, "[v]_{A_inf}");
    if (e.p == e.q && e.alpha > 0.0) {
        const double pc = conjugate(e.p);
        const double a = std::isinf(pc) ? 0.0 : 1.0 / (pc * pc);
        const double b = 1.0 / (e.p * e.p);
        return uv * (std::pow(u_ainf, 1.0 - a) * std::pow(v_ainf, a) + std::pow(u_ainf, b) * std::pow(v_ainf, 1.0 - b));
    }
    return uv * (std::pow(u_ainf, 1.0 / e.q) + std::pow(v_ainf, 1.0 / conjugate(e.p)));
}

DeltaInterval delta_feasible(const ExponentProfile& e) {
    if (!(e.p >= 1.0 && e.p <= e.q && e.q < e.s)) throw ParameterError("need 1 <= p <= q < s");
    if (!(e.r > 0.0 && e.r <= e.p)) throw ParameterError("need 0 < r <= p");
    DeltaInterval out;
    if (e.r < e.p) out.from_r = e.p / (e.p - e.r);
    if (e.q > 1.0) out.from_s = std::isinf(e.s) ? e.q : (e.s - 1.0) * e.q / (e.s - e.q);
    const double gap = e.alpha - 1.0 / e.p + 1.0 / e.q;
    if (gap > 0.0) out.from_alpha = e.alpha / gap;
    if (e.q > 1.0) out.from_q = e.q / (e.q - 1.0);
    out.hi = std::min({out.from_r, out.from_s, out.from_alpha, out.from_q});
    out.feasible = out.hi >= out.lo;
    out.has_interior = out.hi > out.lo;
    return out;
}

Thm12Result thm12_bound(const ExponentProfile& e, double uv, double u_ainf, double v_ainf) {
    require_fractional_profile(e);
    if (std::abs(e.alpha - e.n * (1.0 / e.p - 1.0 / e.q)) > 1e-12)
        throw ParameterError("need alpha = n(1/p - 1/q)");
    Thm12Result out;
    out.u_exponent = e.p0 * e.p / (e.p0 - e.p);
    out.v_exponent = tail_ratio(e.q0, e.q);
    out.dictionary = "u=mu^" + std::to_string(out.u_exponent) + ";v=lambda^" + std::to_string(out.v_exponent);
    out.value = cor32_bound(e, uv, u_ainf, v_ainf);
    return out;
}

double cor32_bound(const ExponentProfile& e, double uv, double u_ainf, double v_ainf) {
    ExponentProfile sub = e;
    sub.r = e.p0;
    sub.s = e.q0;
    sub.alpha = e.alpha / e.n;
    return thm31_bound(sub, uv, u_ainf, v_ainf);
}

double cor13_exponent(const ExponentProfile& e) {
    require_fractional_profile(e);
    const double lead = e.p0 * e.p / (e.p - e.p0) / e.q;
    const double tail = tail_ratio(e.q0, e.q) / conjugate(e.p);
    return 1.0 + std::max(lead, tail);
}

double cor13_bound(const ExponentProfile& e, double a_char, double rh_char) {
    require_characteristic(a_char, "A_p characteristic");
    require_characteristic(rh_char, "RH characteristic");
    return std::pow(a_char * rh_char, cor13_exponent(e));
}

double bloom_upper_exponent(double x) {
    if (x == 0.0) return 0.0;
    const double fl = std::floor(x);
    return x - fl + fl * fl / (2.0 * x) + fl / (2.0 * x);
}

double bloom_lower_exponent(double x) {
    if (x == 0.0) return 0.0;
    const double fl = std::floor(x);
    return fl - fl * fl / (2.0 * x) - fl / (2.0 * x);
}

BloomConstant thm41_bloom_constant(const ExponentProfile& e, const BloomCharacteristics& k) {
    require_fractional_profile(e);
    auto need = [](const std::optional<double>& c, const char* what) {
        if (!c) throw ParameterError(std::string("missing characteristic ") + what);
        require_characteristic(*c, what);
        return *c;
    };
    const double lambda_tail = need(k.lambda_tail, "lambda_tail");
    const double mu_tail = need(k.mu_tail, "mu_tail");
    const double mu_p = need(k.mu_p, "mu_p");
    const double lambda_p = need(k.lambda_p, "lambda_p");
    const double mu_dual = need(k.mu_dual, "mu_dual");
    const double lambda_dual = need(k.lambda_dual, "lambda_dual");

    const double lead = cor13_exponent(e) / tail_ratio(e.q0, e.q);
    const double x1 = e.p0 * e.m;
    const double w1 = std::max(1.0, e.p0 / (e.p - e.p0));
    const double q0c = conjugate(e.q0);
    const double qc = conjugate(e.q);
    const double x2 = q0c * e.m;
    const double w2 = std::max(1.0, q0c / (qc - q0c));

    BloomConstant out;
    out.c1 = std::pow(lambda_tail, lead) * std::pow(mu_p, w1 * bloom_upper_exponent(x1)) *
             std::pow(lambda_p, w1 * bloom_lower_exponent(x1));
    out.c2 = std::pow(mu_tail, lead) * std::pow(mu_dual, w2 * bloom_upper_exponent(x2)) *
             std::pow(lambda_dual, w2 * bloom_lower_exponent(x2));
    out.c = out.c1 + out.c2;
    return out;
}

double cor43_exponent(const ExponentProfile& e) {
    const double base = cor13_exponent(e);
    const double q0c = conjugate(e.q0);
    const double qc = conjugate(e.q);
    const double growth = std::max({e.p0 * e.p, e.p0 * e.p0 * e.p / (e.p - e.p0), q0c * qc, q0c * q0c * qc / (qc - q0c)});
    return base + growth * e.m;
}

double cor43_bound(const ExponentProfile& e, double a_char, double rh_char) {
    require_characteristic(a_char, "A_p characteristic");
    require_characteristic(rh_char, "RH characteristic");
    return std::pow(a_char * rh_char, cor43_exponent(e));
}

ClassicalExponents classical_exponents(int n, double p, double q, double alpha, int m) {
    if (n < 1 || !(p > 1.0) || !(q >= p) || alpha < 0.0 || m < 0) throw ParameterError("inadmissible classical exponents");
    const double spread = std::max(1.0, conjugate(p) / q);
    ClassicalExponents out;
    out.buckley = 1.0 / (p - 1.0);
    out.lacey = (1.0 - alpha / n) * spread;
    out.bloom_sharp = (m + 1.0 - alpha / n) * spread;
    return out;
}

double cor37_bound(const ExponentProfile& e, double omega_sigma, double omega_ainf, double sigma_ainf) {
    if (!(e.p > 1.0 && e.p <= e.q) || std::isinf(e.q)) throw ParameterError("need 1 < p <= q < inf");
    if (!(e.r > 0.0) || std::isinf(e.r)) throw ParameterError("need 0 < r < inf");
    if (!(e.alpha > 0.0 && e.alpha <= 1.0)) throw ParameterError("need 0 < alpha <= 1");
    require_positive(omega_sigma, "[omega,sigma]");
    require_characteristic(omega_ainf, "[omega]_{A_inf}");
    require_characteristic(sigma_ainf, "[sigma]_{A_inf}");
    const double r = std::min(e.r, e.p);
    if (e.p == e.q && e.p > r && e.alpha < 1.0) {
        const double a = (1.0 - r / e.p) * (1.0 - r / e.p);
        const double b = (r / e.p) * (r / e.p);
        return omega_sigma * (std::pow(omega_ainf, a / r) * std::pow(sigma_ainf, (1.0 - a) / r) +
                              std::pow(omega_ainf, (1.0 - b) / r) * std::pow(sigma_ainf, b / r));
    }
    return omega_sigma * (std::pow(omega_ainf, std::max(1.0 / r - 1.0 / e.p, 0.0)) + std::pow(sigma_ainf, 1.0 / e.q));
}

}  // namespace sparsedom
