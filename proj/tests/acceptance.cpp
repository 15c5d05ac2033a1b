// Acceptance runner: `acceptance <criterion|all> [cli-path]`; no argument runs all of them.
// Prints one PASS/FAIL line per criterion; exits nonzero when any fails.

#include "sparsedom/bounds.hpp"
#include "sparsedom/errors.hpp"
#include "sparsedom/grid.hpp"
#include "sparsedom/harness.hpp"
#include "sparsedom/operators.hpp"
#include "sparsedom/rng.hpp"
#include "sparsedom/sparse.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <memory>
#include <sstream>
#include <string>

using namespace sparsedom;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// ---------------------------------------------------------------- 1

Outcome three_lattice_cover() {
    Stopwatch clock;
    long checked = 0, violations = 0;
    for (const GridDomain& d : {make_domain(1, {0.0}, 1.0, 4), make_domain(2, {0.0, 0.0}, 1.0, 3)}) {
        const auto lats = three_lattices(d);
        for (int level = 0; level <= d.depth; ++level) {
            std::vector<std::vector<Cube>> per_lattice;
            for (const DyadicLattice& lat : lats) per_lattice.push_back(cubes_at_level(d, lat, level));
            for (const Cube& q : cubes_at_level(d, base_lattice(d), level)) {
                ++checked;
                const Box t = triple(d, q);
                int owners = 0;
                for (std::size_t j = 0; j < lats.size(); ++j)
                    for (const Cube& r : per_lattice[j])
                        if (cube_box(d, r) == t) {
                            ++owners;
                            // l(R) = 3 l(Q) and Q inside R.
                            if (std::abs(box_side(d, cube_box(d, r)) - 3.0 * side_length(d, q)) > 1e-12 ||
                                !box_contains(d, cube_box(d, r), cube_box(d, q)) ||
                                lats[j].shift != lattice_of_triple(d, q))
                                ++violations;
                        }
                if (owners != 1) ++violations;
            }
            // Each tripled lattice is closed under subdivision.
            if (level < d.depth)
                for (std::size_t j = 0; j < lats.size(); ++j)
                    for (const Cube& r : per_lattice[j])
                        for (const Cube& c : dyadic_children(d, r))
                            if (!lattice_contains(d, lats[j], c)) ++violations;
        }
    }
    const double secs = clock.seconds();
    return {violations == 0 && secs < 1.0,
            fmt("%ld cubes, %ld violations, %.3f s", checked, violations, secs)};
}

// ---------------------------------------------------------------- 2, 3

Outcome sparseness_certificates() {
    Stopwatch clock;
    ExperimentConfig cfg = default_config("dominate");
    cfg.depth = 8;
    const GridDomain d = make_domain(1, {0.0}, 1.0, 8);
    const OperatorRep t = riesz_potential(d, cfg.op_alpha);
    const Cube top{kBaseLattice, 0, {0, 0}};
    int runs = 0, failures = 0;
    double worst_packing = 0.0;
    for (int s = 0; s < 100; ++s) {
        const DominationSample sample = domination_sample(d, splitmix64(7) + static_cast<std::uint64_t>(s));
        const int m = s % 3;
        const SparseConstruction sc =
            construct_sparse(t, sample.b, m, sample.f, sample.g, top, cfg.profile.p0, cfg.profile.q0, cfg.op_alpha);
        ++runs;
        const SparsenessCheck pre = verify_sparseness(d, sc.pre_merge);
        const SparsenessCheck post = verify_sparseness(d, sc.merged);
        const double post_eta = 1.0 / (2.0 * std::pow(3.0, d.dim));
        bool ok = pre.ok && post.ok && sc.pre_merge.eta == 0.5 && std::abs(sc.merged.eta - post_eta) < 1e-15 &&
                  pre.achieved_eta >= 0.5 && post.achieved_eta >= post_eta;
        for (const RecursionStep& st : sc.report.steps) {
            ok = ok && st.packing_ok && st.selected_measure <= 0.5 * st.cube_measure * (1.0 + 1e-12);
            worst_packing = std::max(worst_packing, st.selected_measure / st.cube_measure);
        }
        if (!ok) ++failures;
    }
    const double secs = clock.seconds();
    return {failures == 0 && secs < 30.0,
            fmt("%d/%d runs certified, max packing %.4f, %.2f s", runs - failures, runs, worst_packing, secs)};
}

Outcome domination_stability() {
    ExperimentConfig cfg = default_config("dominate");
    cfg.depth = 8;
    cfg.seeds = 20;
    cfg.orders = {0, 1, 2};
    const DominationExperiment ex = run_domination_experiment(cfg);
    bool ok = ex.runs.size() == 60;
    std::string detail;
    for (const DominationRun& r : ex.runs) ok = ok && std::isfinite(r.report.c_two_term) && r.report.c_two_term > 0.0;
    for (const DominationSummary& s : ex.summaries) {
        const double ratio = s.max_c / s.median_c;
        ok = ok && ratio <= 4.0;
        detail += fmt("m=%d max/median C %.3f (full %.3f); ", s.m, ratio, s.max_c_full / s.median_c_full);
    }
    return {ok, detail};
}

// ---------------------------------------------------------------- 4, 5

Outcome fractional_power_consistency() {
    Stopwatch clock;
    ExperimentConfig cfg = default_config("fracpow");
    cfg.depth = 8;
    const FracPowReport r = run_fracpow_experiment(cfg);
    const double secs = clock.seconds();
    const bool quad = r.quadrature_error <= 1e-6;
    const bool riesz = r.riesz_error <= 0.05;
    return {quad && riesz && secs < 10.0,
            fmt("quadrature %.3g (%s); Riesz interior L2 %.4f (%s, centered %.4f, mean offset %.4g); %.2f s",
                r.quadrature_error, quad ? "ok" : "fail", r.riesz_error, riesz ? "ok" : "fail",
                r.riesz_error_centered, r.riesz_offset, secs)};
}

Outcome pnt_calculus() {
    const GridDomain d = make_domain(1, {0.0}, 1.0, 5);
    const OperatorRep l = divergence_form(d, GridFunction::constant(d, 1.0), Boundary::Dirichlet);
    const SpectralData s = spectral_data(l);
    Rng rng(5);
    Vector f(d.cell_count());
    for (Index i = 0; i < f.size(); ++i) f[i] = rng.uniform(-1.0, 1.0);
    const double t = 1e-3;
    const auto rel = [](const Vector& a, const Vector& b) { return (a - b).norm() / b.norm(); };
    const Vector semi = (-t * l.matrix()).exp() * f;
    const double e1 = rel(pnt_apply(s, 1, t, f), semi);
    const double e2 = rel(pnt_apply(s, 2, t, f), semi + t * (l.matrix() * semi));
    double worst = 0.0;
    for (int n = 1; n <= 4; ++n) {
        // s = t e^{-v} turns ds/s into dv; Simpson on [0, 40].
        const int panels = 8000;
        const double a = 0.0, b = 40.0, h = (b - a) / panels;
        const auto q = [&](double v) { return qnt_apply(s, n, t * std::exp(-v), f); };
        Vector acc = q(a) + q(b);
        for (int k = 1; k < panels; ++k) acc += (k % 2 ? 4.0 : 2.0) * q(a + k * h);
        acc *= h / 3.0;
        worst = std::max(worst, rel(f - pnt_apply(s, n, t, f), acc));
    }
    return {e1 <= 1e-10 && e2 <= 1e-10 && worst <= 1e-6,
            fmt("P1 %.2g, P2 %.2g, max integral identity error N<=4 %.2g", e1, e2, worst)};
}

// ---------------------------------------------------------------- 6, 7, 8, 9

Outcome two_weight_sandwich() {
    ExperimentConfig cfg = default_config("twoweight");
    cfg.depth = 8;
    const TwoWeightReport r = run_two_weight_experiment(cfg);
    bool ok = r.rows.size() == 20 && r.min_necessity > 0.0 && std::isfinite(r.slack);
    for (const TwoWeightRow& row : r.rows) ok = ok && row.n_hat <= r.slack * row.bound * (1.0 + 1e-12);
    ok = ok && r.ratio_spread < 10.0;
    return {ok, fmt("%zu pairs, slack %.4g, ratio spread %.4f, min N/[u,v] %.4g", r.rows.size(), r.slack,
                    r.ratio_spread, r.min_necessity)};
}

Outcome testing_comparability() {
    ExperimentConfig cfg = default_config("testing");
    cfg.seeds = 20;
    const TestingExperiment r = run_testing_experiment(cfg);
    bool ok = r.rows.size() == 20 && r.spread <= 20.0;
    for (const TestingRow& row : r.rows) ok = ok && std::isfinite(row.ratio) && row.ratio > 0.0;
    return {ok, fmt("%zu instances, ratio spread %.4f", r.rows.size(), r.spread)};
}

Outcome micro_suites() {
    Stopwatch clock;
    const MicroSuiteReport r = run_micro_suites(42, 1000);
    const double secs = clock.seconds();
    const int total = r.midpoint_trials + r.cov_trials + r.sum_trials_universal + r.sum_trials_weak;
    const bool ok = r.midpoint_failures == 0 && r.cov_min_ratio >= 0.1 && r.cov_max_ratio <= 10.0 &&
                    std::isfinite(r.sum_slack_universal) && std::isfinite(r.sum_max_weak) && r.all_finite &&
                    total >= 1000 && secs < 60.0;
    return {ok, fmt("midpoint %d/%d exact; COV ratio [%.3f, %.3f]; sum (i) slack %.4g; sum (ii) max %.4g; "
                    "%d trials, %.2f s",
                    r.midpoint_trials - r.midpoint_failures, r.midpoint_trials, r.cov_min_ratio, r.cov_max_ratio,
                    r.sum_slack_universal, r.sum_max_weak, total, secs)};
}

Outcome weak_type_growth() {
    ExperimentConfig cfg = default_config("weaktype");
    cfg.depths = {6, 7, 8};
    const WeakTypeReport r = run_weak_type_experiment(cfg);
    bool ok = r.target_exponent == 2.0;
    for (const WeakTypeRow& row : r.rows)
        ok = ok && std::isfinite(row.fractional_power) && std::isfinite(row.truncation) && row.fractional_power > 0.0;
    ok = ok && r.growth_power < 2.0 && r.growth_truncation < 2.0;
    return {ok, fmt("weak (1 -> %.3g): growth L^{-1/2} %.4f, truncation %.4f", r.target_exponent, r.growth_power,
                    r.growth_truncation)};
}

// ---------------------------------------------------------------- 10

Outcome bound_examples() {
    int checks = 0, misses = 0;
    const auto expect = [&](double got, double want) {
        ++checks;
        if (!(std::abs(got - want) <= 1e-12 * std::max(1.0, std::abs(want)))) ++misses;
    };
    ExponentProfile e;
    e.p = 2.0;
    e.q = 4.0;
    e.r = 1.0;
    e.alpha = 0.5;
    expect(thm31_bound(e, 1.0, 1.0, 1.0), 2.0);
    e.q = 2.0;
    e.alpha = 0.25;
    expect(thm31_bound(e, 1.0, std::exp(1.0), std::exp(1.0)), 2.0 * std::exp(1.0));

    ExponentProfile f;
    f.p0 = 1.0;
    f.q0 = kInf;
    f.p = 2.0;
    f.q = 4.0;
    expect(cor13_exponent(f), 3.0);
    expect(cor13_bound(f, 1.0, 1.0), 1.0);
    f.m = 1;
    expect(cor43_exponent(f), 7.0);
    expect(bloom_upper_exponent(2.0), 1.5);
    expect(bloom_lower_exponent(2.0), 0.5);
    expect(thm41_bloom_constant(f, BloomCharacteristics{1.0, 1.0, 1.0, 1.0, 1.0, 1.0}).c, 2.0);
    f.alpha = 0.25;
    f.m = 0;
    const Thm12Result t12 = thm12_bound(f, 1.0, 1.0, 1.0);
    expect(t12.value, 2.0);
    expect(t12.u_exponent, -2.0);
    expect(t12.v_exponent, 4.0);

    expect(classical_exponents(1, 2.0, 2.0, 0.0).buckley, 1.0);
    expect(classical_exponents(1, 4.0 / 3.0, 4.0, 0.5).lacey, 0.5);
    expect(classical_exponents(1, 4.0 / 3.0, 4.0, 0.5, 0).bloom_sharp, 0.5);
    ExponentProfile g;
    g.p = 2.0;
    g.q = 3.0;
    g.r = 1.0;
    g.alpha = 0.5;
    expect(cor37_bound(g, 1.0, 1.0, 1.0), 2.0);
    return {misses == 0, fmt("%d/%d example values exact", checks - misses, checks)};
}

// ---------------------------------------------------------------- 11

std::string capture(const std::string& cmd) {
    std::string out;
    std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(cmd.c_str(), "r"), pclose);
    if (!pipe) return out;
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe.get())) > 0) out.append(buf.data(), n);
    return out;
}

Outcome reproducibility(const std::string& cli) {
    if (cli.empty()) return {false, "no CLI path given"};
    const std::string cmd = "'" + cli + "' verify --seed 42";
    const std::string a = capture(cmd), b = capture(cmd);
    const long lines = std::count(a.begin(), a.end(), '\n');
    return {!a.empty() && a == b, fmt("%ld CSV lines, %s", lines, a == b ? "byte-identical" : "outputs differ")};
}

}  // namespace

int main(int argc, char** argv) {
    const std::string cli = argc > 2 ? argv[2] : "";
    const std::array<std::pair<const char*, std::function<Outcome()>>, 11> criteria{{
        {"three-lattice cover", three_lattice_cover},
        {"sparseness certificates", sparseness_certificates},
        {"sparse domination stability", domination_stability},
        {"fractional-power consistency", fractional_power_consistency},
        {"P_{N,t} calculus", pnt_calculus},
        {"two-weight sandwich", two_weight_sandwich},
        {"testing characterization", testing_comparability},
        {"micro-suites", micro_suites},
        {"weak type", weak_type_growth},
        {"bound calculators", bound_examples},
        {"reproducibility", [&] { return reproducibility(cli); }},
    }};
    int first = 1, last = 11;
    if (argc > 1 && std::string(argv[1]) != "all" && std::string(argv[1]) != "0") first = last = std::atoi(argv[1]);
    if (first < 1 || last > 11) {
        std::fprintf(stderr, "usage: acceptance [1-11|all] [cli-path]\n");
        return 2;
    }
    int failed = 0;
    for (int k = first; k <= last; ++k) {
        const auto& [name, run] = criteria[static_cast<std::size_t>(k - 1)];
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& ex) {
            o = {false, std::string("exception: ") + ex.what()};
        }
        std::printf("criterion %2d %-30s %s  %s\n", k, name, o.pass ? "PASS" : "FAIL", o.detail.c_str());
        if (!o.pass) ++failed;
    }
    return failed == 0 ? 0 : 1;
}
