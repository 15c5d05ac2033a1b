#pragma once

#include "sparsedom/bounds.hpp"
#include "sparsedom/grid.hpp"
#include "sparsedom/sparse.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace sparsedom {

// ---------------------------------------------------------------- forms

/// ||f|| = (sum |f|^p w h^n)^{1/p}; an empty weight means w = 1.
struct WeightedNorm {
    double p = 2.0;
    Vector weight;
    double cell_measure = 1.0;

    double operator()(const Vector& f) const;
    /// Unit-norm nonnegative f maximizing sum_c a_c f_c for a >= 0.
    Vector extremizer(const Vector& a) const;
};

/// Bilinear-type form with supporting linear functionals.
/// grad_f(f, g) is a vector a with a.f = value(f, g) and a.f' <= value(f', g)
/// for every f' >= 0; grad_g likewise.
struct FormEvaluator {
    std::function<double(const Vector&, const Vector&)> value;
    std::function<Vector(const Vector&, const Vector&)> grad_f;
    std::function<Vector(const Vector&, const Vector&)> grad_g;
};

/// Evaluator for the form sum_Q coeff_Q <|phi_Q f|>_{r,Q} <|psi_Q g|>_{t,Q}, with
/// geometric |Q|. Empty multiplier lists mean phi_Q = psi_Q = 1.
struct SparseFormSpec {
    GridDomain domain;
    std::vector<Cube> cubes;
    std::vector<double> coeff;
    double r = 1.0;
    double t = 1.0;
    std::vector<Vector> f_factor;
    std::vector<Vector> g_factor;
};

FormEvaluator sparse_form_evaluator(SparseFormSpec spec);
FormEvaluator inner_product_evaluator(double cell_measure);

struct BestConstantOptions {
    int random_trials = 16;
    int rounds = 10;
    std::uint64_t seed = 1;
    Index cells = 0;                                   // vector length when no norm carries a weight
    std::vector<std::vector<Index>> atoms;             // f = g = indicator of each cell set
    std::vector<std::pair<Vector, Vector>> extra_pairs;  // caller-supplied starting points
};

struct BestConstantEstimate {
    double value = 0.0;
    std::vector<double> running;  // running maximum after each trial
    int trials = 0;
    int skipped = 0;
    Vector f;
    Vector g;
};

/// Lower bound for sup form(f,g)/(||f|| ||g||) over nonnegative f, g.
BestConstantEstimate estimate_best_constant(const FormEvaluator& form, const WeightedNorm& f_norm,
                                            const WeightedNorm& g_norm, const BestConstantOptions& options);

// ---------------------------------------------------------------- reports

struct ReportRow {
    std::string quantity;
    double value = 0.0;
    std::string meta;
};

struct Report {
    std::string experiment;
    std::uint64_t seed = 0;
    std::vector<ReportRow> rows;

    void add(std::string quantity, double value, std::string meta = {});
};

// ---------------------------------------------------------------- configuration

enum class OperatorKind { Riesz, Laplacian, DivergenceForm, MatrixFile };

struct ExperimentConfig {
    int dim = 1;
    int depth = 8;
    double side = 1.0;

    OperatorKind op = OperatorKind::Riesz;
    double op_alpha = 0.5;
    double op_kappa = 2.0;
    double coefficient_contrast = 0.0;  // a(x) = 1 + contrast * sin(2 pi x) for divergence_form
    std::string matrix_path;

    ExponentProfile profile;

    std::vector<double> omega_exponents;
    std::vector<double> sigma_exponents;
    std::vector<double> mu_exponents;
    std::vector<double> lambda_exponents;
    std::vector<int> orders;
    std::vector<int> depths;
    std::vector<double> lambdas;

    int seeds = 20;
    int trials = 16;
    int rounds = 10;
    int samples = 24;
    std::uint64_t seed = 42;
};

ExperimentConfig default_config(const std::string& experiment);

// ---------------------------------------------------------------- experiments

/// Base-lattice towers shrinking to both ends of the domain, levels 1..depth.
std::vector<Cube> synthetic_towers(const GridDomain& d);

struct TwoWeightRow {
    double omega_exponent = 0.0;
    double sigma_exponent = 0.0;
    double n_hat = 0.0;
    double uv_family = 0.0;   // two-weight characteristic over the family's cubes
    double uv_lattice = 0.0;  // over every base-lattice cube
    double u_ainf = 0.0;
    double v_ainf = 0.0;
    double bound = 0.0;       // thm31_bound
    double ratio = 0.0;       // n_hat / bound
    double necessity = 0.0;   // n_hat / uv_family
};

struct TwoWeightReport {
    std::vector<TwoWeightRow> rows;
    double slack = 0.0;         // max ratio; n_hat <= slack * bound across the sweep
    double ratio_spread = 0.0;  // max ratio / min ratio
    double min_necessity = 0.0;
    Report table;
};

TwoWeightReport run_two_weight_experiment(const ExperimentConfig& cfg);

struct DominationRun {
    int m = 0;
    std::uint64_t seed = 0;
    DominationReport report;
    bool pre_merge_sparse = false;
    bool merged_sparse = false;
    bool packing_ok = false;
    bool selection_ok = false;
};

struct DominationSummary {
    int m = 0;
    double max_c = 0.0;
    double median_c = 0.0;
    double max_c_full = 0.0;
    double median_c_full = 0.0;
};

struct DominationExperiment {
    std::vector<DominationRun> runs;
    std::vector<DominationSummary> summaries;
    Report table;
};

/// Random b, f, g on the whole domain for one (m, seed) pair.
struct DominationSample {
    Vector b;
    Vector f;
    Vector g;
};
DominationSample domination_sample(const GridDomain& d, std::uint64_t seed);

DominationExperiment run_domination_experiment(const ExperimentConfig& cfg);

struct BloomRow {
    double mu_exponent = 0.0;
    double lambda_exponent = 0.0;
    std::uint64_t seed = 0;
    double n_hat = 0.0;
    double bmo = 0.0;
    BloomConstant constant;
    double ratio = 0.0;  // n_hat / (C1 * bmo^m)
    bool trivial = false;
};

struct BloomReport {
    std::vector<BloomRow> rows;
    double max_ratio = 0.0;
    double min_ratio = 0.0;
    Report table;
};

BloomReport run_bloom_experiment(const ExperimentConfig& cfg);

struct WeakTypeRow {
    int depth = 0;
    double fractional_power = 0.0;  // sup ||L^{-a} f||_{p0(alpha),inf} / ||f||_{p0}
    double truncation = 0.0;        // same for the q0-truncation of L^{-a}
};

struct WeakTypeReport {
    double target_exponent = 0.0;  // p0(alpha)
    std::vector<WeakTypeRow> rows;
    double growth_power = 0.0;       // finest / coarsest
    double growth_truncation = 0.0;
    Report table;
};

WeakTypeReport run_weak_type_experiment(const ExperimentConfig& cfg);

struct FracPowReport {
    double quadrature_error = 0.0;  // relative operator 2-norm versus the spectral oracle
    double riesz_error = 0.0;       // relative L2 error on the middle half, smooth bump
    double riesz_offset = 0.0;      // mean of (Riesz - fractional power) on the middle half
    double riesz_error_centered = 0.0;
    Report table;
};

FracPowReport run_fracpow_experiment(const ExperimentConfig& cfg);

struct WeightsReport {
    Report table;
};

WeightsReport run_weights_experiment(const ExperimentConfig& cfg);

/// Random 1/2-sparse family below `top`: each cube keeps up to `max_picks` random
/// descendants two levels down (the top keeps at least one) and recurses into them.
std::vector<Cube> random_sparse_family(const GridDomain& d, const Cube& top, std::uint64_t seed, int max_picks = 2);

struct TestingRow {
    std::uint64_t seed = 0;
    double n_hat = 0.0;
    double zeta = 0.0;
    double zeta_star = 0.0;
    double ratio = 0.0;  // (zeta + zeta_star) / n_hat
};

struct TestingExperiment {
    std::vector<TestingRow> rows;
    double spread = 0.0;  // max ratio / min ratio
    Report table;
};

/// Testing constants against the measured best constant on random weights and families.
TestingExperiment run_testing_experiment(const ExperimentConfig& cfg);

struct MicroSuiteReport {
    int midpoint_trials = 0;
    int midpoint_failures = 0;      // c_k > c_0 + c_m
    int cov_trials = 0;
    double cov_min_ratio = 0.0;     // formula / direct norm
    double cov_max_ratio = 0.0;
    int sum_trials_universal = 0;
    double sum_slack_universal = 0.0;  // max lhs/rhs with alpha > 0
    int sum_trials_weak = 0;
    double sum_max_weak = 0.0;         // max lhs/rhs with alpha = 0
    bool all_finite = true;
    Report table;
};

/// Randomized checks of the midpoint, COV and sparse-sum inequalities.
MicroSuiteReport run_micro_suites(std::uint64_t seed, int trials);

/// Light versions of every experiment; CSV output is deterministic in the seed.
std::vector<Report> run_verify(std::uint64_t seed);

}  // namespace sparsedom
