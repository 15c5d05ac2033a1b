#include "sparsedom/harness.hpp"

#include "sparsedom/errors.hpp"
#include "sparsedom/maximal.hpp"
#include "sparsedom/operators.hpp"
#include "sparsedom/rng.hpp"
#include "sparsedom/weights.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>

namespace sparsedom {

// ---------------------------------------------------------------- norms and forms

double WeightedNorm::operator()(const Vector& f) const {
    if (std::isinf(p)) return f.size() ? f.cwiseAbs().maxCoeff() : 0.0;
    if (weight.size() == 0) return std::pow(f.cwiseAbs().array().pow(p).sum() * cell_measure, 1.0 / p);
    return weighted_lp_norm(f, weight, p, cell_measure);
}

Vector WeightedNorm::extremizer(const Vector& a) const {
    const Vector pos = a.cwiseMax(0.0);
    const Vector w = weight.size() ? weight : Vector::Ones(a.size());
    Vector f = Vector::Zero(a.size());
    if (pos.maxCoeff() <= 0.0) return f;
    if (std::isinf(p)) {
        for (Index c = 0; c < a.size(); ++c) f[c] = pos[c] > 0.0 ? 1.0 : 0.0;
        return f;
    }
    if (p == 1.0) {
        Index best = 0;
        double top = -1.0;
        for (Index c = 0; c < a.size(); ++c)
            if (pos[c] / w[c] > top) {
                top = pos[c] / w[c];
                best = c;
            }
        f[best] = 1.0 / (w[best] * cell_measure);
        return f;
    }
    f = (pos.array() / (w.array() * cell_measure)).pow(1.0 / (p - 1.0)).matrix();
    const double n = (*this)(f);
    return n > 0.0 ? Vector(f / n) : f;
}

namespace {

// <|phi x|>_{r,Q} over `cells` with geometric measure, and its supporting functional.
struct LocalAverage {
    std::vector<Index> cells;
    std::vector<double> factor;  // |phi| on cells
    double measure = 1.0;
    double h = 1.0;
    double r = 1.0;

    double value(const Vector& x) const {
        if (std::isinf(r)) {
            double m = 0.0;
            for (std::size_t i = 0; i < cells.size(); ++i) m = std::max(m, factor[i] * std::abs(x[cells[i]]));
            return m;
        }
        double s = 0.0;
        for (std::size_t i = 0; i < cells.size(); ++i) s += std::pow(factor[i] * std::abs(x[cells[i]]), r);
        return std::pow(s * h / measure, 1.0 / r);
    }

    void add_gradient(const Vector& x, double scale, Vector& out) const {
        if (scale == 0.0) return;
        if (std::isinf(r)) {
            std::size_t best = 0;
            double m = -1.0;
            for (std::size_t i = 0; i < cells.size(); ++i)
                if (factor[i] * std::abs(x[cells[i]]) > m) {
                    m = factor[i] * std::abs(x[cells[i]]);
                    best = i;
                }
            out[cells[best]] += scale * factor[best];
            return;
        }
        if (r == 1.0) {
            for (std::size_t i = 0; i < cells.size(); ++i) out[cells[i]] += scale * factor[i] * h / measure;
            return;
        }
        const double a = value(x);
        if (a <= 0.0) return;
        const double lead = scale * std::pow(a, 1.0 - r) * h / measure;
        for (std::size_t i = 0; i < cells.size(); ++i)
            out[cells[i]] += lead * std::pow(factor[i], r) * std::pow(std::abs(x[cells[i]]), r - 1.0);
    }
};

struct SparseFormData {
    std::vector<double> coeff;
    std::vector<LocalAverage> left;
    std::vector<LocalAverage> right;
    Index size = 0;
};

LocalAverage make_average(const GridDomain& d, const Cube& q, double r, const std::vector<Vector>& factors,
                          std::size_t i) {
    LocalAverage a;
    a.cells = box_cells(d, cube_box(d, q));
    a.measure = cube_measure(d, q);
    a.h = d.cell_measure();
    a.r = r;
    a.factor.reserve(a.cells.size());
    for (Index c : a.cells) a.factor.push_back(factors.empty() ? 1.0 : std::abs(factors[i][c]));
    return a;
}

}  // namespace

FormEvaluator sparse_form_evaluator(SparseFormSpec spec) {
    if (spec.coeff.size() != spec.cubes.size()) throw ParameterError("one coefficient per cube is required");
    if ((!spec.f_factor.empty() && spec.f_factor.size() != spec.cubes.size()) ||
        (!spec.g_factor.empty() && spec.g_factor.size() != spec.cubes.size()))
        throw ParameterError("multiplier lists must match the cube list");
    if (!(spec.r >= 1.0) || !(spec.t >= 1.0)) throw ParameterError("form exponents must be at least 1");
    auto data = std::make_shared<SparseFormData>();
    data->coeff = spec.coeff;
    data->size = spec.domain.cell_count();
    for (std::size_t i = 0; i < spec.cubes.size(); ++i) {
        data->left.push_back(make_average(spec.domain, spec.cubes[i], spec.r, spec.f_factor, i));
        data->right.push_back(make_average(spec.domain, spec.cubes[i], spec.t, spec.g_factor, i));
    }
    FormEvaluator form;
    form.value = [data](const Vector& f, const Vector& g) {
        double s = 0.0;
        for (std::size_t i = 0; i < data->coeff.size(); ++i)
            s += data->coeff[i] * data->left[i].value(f) * data->right[i].value(g);
        return s;
    };
    form.grad_f = [data](const Vector& f, const Vector& g) {
        Vector out = Vector::Zero(data->size);
        for (std::size_t i = 0; i < data->coeff.size(); ++i)
            data->left[i].add_gradient(f, data->coeff[i] * data->right[i].value(g), out);
        return out;
    };
    form.grad_g = [data](const Vector& f, const Vector& g) {
        Vector out = Vector::Zero(data->size);
        for (std::size_t i = 0; i < data->coeff.size(); ++i)
            data->right[i].add_gradient(g, data->coeff[i] * data->left[i].value(f), out);
        return out;
    };
    return form;
}

FormEvaluator inner_product_evaluator(double cell_measure) {
    FormEvaluator form;
    form.value = [cell_measure](const Vector& f, const Vector& g) {
        return f.cwiseAbs().dot(g.cwiseAbs()) * cell_measure;
    };
    form.grad_f = [cell_measure](const Vector&, const Vector& g) { return Vector(g.cwiseAbs() * cell_measure); };
    form.grad_g = [cell_measure](const Vector& f, const Vector&) { return Vector(f.cwiseAbs() * cell_measure); };
    return form;
}

BestConstantEstimate estimate_best_constant(const FormEvaluator& form, const WeightedNorm& f_norm,
                                            const WeightedNorm& g_norm, const BestConstantOptions& options) {
    BestConstantEstimate out;
    auto consider = [&](Vector f, Vector g) {
        f = f.cwiseAbs();
        g = g.cwiseAbs();
        const double nf = f_norm(f);
        const double ng = g_norm(g);
        ++out.trials;
        if (!(nf > 0.0) || !(ng > 0.0)) {
            ++out.skipped;
            out.running.push_back(out.value);
            return;
        }
        f /= nf;
        g /= ng;
        auto record = [&](const Vector& ff, const Vector& gg) {
            const double v = form.value(ff, gg);
            if (v > out.value) {
                out.value = v;
                out.f = ff;
                out.g = gg;
            }
        };
        record(f, g);
        for (int round = 0; round < options.rounds; ++round) {
            Vector g_next = g_norm.extremizer(form.grad_g(f, g));
            if (!(g_norm(g_next) > 0.0)) break;
            g = std::move(g_next);
            record(f, g);
            Vector f_next = f_norm.extremizer(form.grad_f(f, g));
            if (!(f_norm(f_next) > 0.0)) break;
            f = std::move(f_next);
            record(f, g);
        }
        out.running.push_back(out.value);
    };

    Index n = options.cells;
    if (n == 0) n = f_norm.weight.size() ? f_norm.weight.size() : g_norm.weight.size();
    if (n == 0 && !options.extra_pairs.empty()) n = options.extra_pairs.front().first.size();
    for (const auto& [f, g] : options.extra_pairs) consider(f, g);
    for (const std::vector<Index>& atom : options.atoms) {
        Vector chi = Vector::Zero(n);
        for (Index c : atom) chi[c] = 1.0;
        consider(chi, chi);
    }
    for (int trial = 0; trial < options.random_trials && n > 0; ++trial) {
        Rng rng = Rng::substream(options.seed, static_cast<std::uint64_t>(trial));
        Vector f(n);
        Vector g(n);
        for (Index c = 0; c < n; ++c) {
            switch (trial % 3) {
            case 0:
                f[c] = rng.uniform();
                g[c] = rng.uniform();
                break;
            case 1:
                f[c] = std::exp(2.0 * rng.normal());
                g[c] = std::exp(2.0 * rng.normal());
                break;
            default:
                f[c] = rng.uniform() < 0.05 ? 1.0 : 0.0;
                g[c] = rng.uniform() < 0.05 ? 1.0 : 0.0;
                break;
            }
        }
        consider(f, g);
    }
    return out;
}

// ---------------------------------------------------------------- reports

void Report::add(std::string quantity, double value, std::string meta) {
    rows.push_back({std::move(quantity), value, std::move(meta)});
}

ExperimentConfig default_config(const std::string& experiment) {
    ExperimentConfig cfg;
    ExponentProfile& e = cfg.profile;
    if (experiment == "twoweight") {
        e.p = 2.0;
        e.q = 4.0;
        e.r = 1.0;
        e.s = kInf;
        e.alpha = 0.25;
        cfg.omega_exponents = {-0.8, -0.4, 0.0, 0.4, 0.8};
        cfg.sigma_exponents = {-0.3, -0.1, 0.1, 0.3};
    } else if (experiment == "testing") {
        e.p = 2.0;
        e.q = 4.0;
        e.r = 1.0;
        e.s = kInf;
        e.alpha = 0.25;
        cfg.seeds = 20;
    } else if (experiment == "dominate") {
        cfg.orders = {0, 1, 2};
        cfg.seeds = 20;
        e.p0 = 1.0;
        e.q0 = kInf;
        e.alpha = 0.5;
    } else if (experiment == "bloom") {
        e.p0 = 1.0;
        e.q0 = kInf;
        e.alpha = 0.5;
        e.p = 4.0 / 3.0;
        e.q = 4.0;
        e.m = 1;
        cfg.mu_exponents = {-0.3, 0.0, 0.2};
        cfg.lambda_exponents = {-0.2, 0.2};
        cfg.seeds = 20;
    } else if (experiment == "weaktype") {
        cfg.op = OperatorKind::Laplacian;
        e.p0 = 1.0;
        e.q0 = kInf;
        e.alpha = 0.5;
        e.kappa = 2.0;
        cfg.depths = {6, 7, 8};
        cfg.samples = 24;
    } else if (experiment == "fracpow") {
        cfg.op = OperatorKind::Laplacian;
        e.alpha = 0.5;
        e.kappa = 2.0;
    } else if (experiment == "weights") {
        cfg.omega_exponents = {-0.9, -0.5, 0.0, 0.5, 0.9};
    }
    return cfg;
}

// ---------------------------------------------------------------- helpers

namespace {

std::string meta_pair(const char* a, double x, const char* b, double y) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%s=%.6g;%s=%.6g", a, x, b, y);
    return buf;
}

std::string meta_one(const char* a, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s=%.6g", a, x);
    return buf;
}

GridDomain domain_of(const ExperimentConfig& cfg, int depth) {
    std::vector<double> origin(static_cast<std::size_t>(cfg.dim), 0.0);
    return make_domain(cfg.dim, origin, cfg.side, depth);
}

GridFunction pow_of(const GridFunction& w, double e) {
    GridFunction out = w;
    out.values = w.values.array().pow(e).matrix();
    return out;
}

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

OperatorRep build_operator(const ExperimentConfig& cfg, const GridDomain& d) {
    OperatorMeta meta{cfg.profile.p0, cfg.profile.q0, cfg.op_kappa, cfg.op_alpha, cfg.profile.epsilon};
    switch (cfg.op) {
    case OperatorKind::Riesz:
        return riesz_potential(d, cfg.op_alpha);
    case OperatorKind::MatrixFile:
        return load_matrix_file(cfg.matrix_path, d, meta);
    case OperatorKind::Laplacian:
    case OperatorKind::DivergenceForm: {
        const double contrast = cfg.op == OperatorKind::Laplacian ? 0.0 : cfg.coefficient_contrast;
        const GridFunction a = GridFunction::sample(d, [contrast](const Point& x) {
            return 1.0 + contrast * std::sin(2.0 * std::numbers::pi * x[0]);
        });
        const OperatorRep l = divergence_form(d, a, Boundary::Dirichlet, meta);
        const SpectralData s = spectral_data(l);
        const QuadratureRule rule = make_quadrature(cfg.op_alpha / cfg.op_kappa, s.eigenvalues.minCoeff(),
                                                    s.eigenvalues.maxCoeff());
        return fractional_power(s, cfg.op_alpha, cfg.op_kappa, rule);
    }
    }
    throw ConfigError("unknown operator kind");
}

}  // namespace

std::vector<Cube> synthetic_towers(const GridDomain& d) {
    std::vector<Cube> out;
    const std::int64_t top = d.cells_per_axis();
    for (int k = 1; k <= d.depth; ++k) {
        const std::int64_t last = (top >> (d.depth - k)) - 1;
        out.push_back(Cube{kBaseLattice, k, {0, 0}});
        out.push_back(Cube{kBaseLattice, k, d.dim == 1 ? Coord{last, 0} : Coord{last, last}});
    }
    return out;
}

// ---------------------------------------------------------------- two-weight sandwich

TwoWeightReport run_two_weight_experiment(const ExperimentConfig& cfg) {
    const GridDomain d = domain_of(cfg, cfg.depth);
    const ExponentProfile& e = cfg.profile;
    const double sc = conjugate(e.s);
    const double qc = conjugate(e.q);
    const std::vector<Cube> family = synthetic_towers(d);
    const CubeSet family_set{"family", family};
    const CubeSet lattice_set = lattice_cubes(d, {base_lattice(d)}, "base");

    SparseFormSpec spec;
    spec.domain = d;
    spec.cubes = family;
    spec.r = e.r;
    spec.t = sc;
    for (const Cube& q : family) spec.coeff.push_back(std::pow(cube_measure(d, q), 1.0 + e.alpha));
    const FormEvaluator form = sparse_form_evaluator(spec);

    TwoWeightReport out;
    out.table.experiment = "twoweight";
    out.table.seed = cfg.seed;
    const double class_alpha = e.alpha - 1.0 / e.r + (std::isinf(e.s) ? 0.0 : 1.0 / e.s);
    const double class_beta = 1.0 / e.r - 1.0 / e.p;
    const double class_gamma = 1.0 / e.q - (std::isinf(e.s) ? 0.0 : 1.0 / e.s);
    std::uint64_t counter = 0;
    for (double a : cfg.omega_exponents)
        for (double b : cfg.sigma_exponents) {
            const GridFunction omega = power_weight(d, {0.0, 0.0}, a);
            const GridFunction sigma = power_weight(d, {0.0, 0.0}, b);
            const GridFunction u = pow_of(omega, e.r / (e.r - e.p));
            const GridFunction v = pow_of(sigma, sc / (sc - qc));

            BestConstantOptions opt;
            opt.seed = splitmix64(cfg.seed) + counter++;
            opt.random_trials = cfg.trials;
            opt.rounds = cfg.rounds;
            for (const Cube& q : family) {
                Vector f = Vector::Zero(d.cell_count());
                Vector g = Vector::Zero(d.cell_count());
                for (Index c : box_cells(d, cube_box(d, q))) {
                    f[c] = std::pow(u.values[c], 1.0 / e.r);
                    g[c] = std::isinf(sc) ? 1.0 : std::pow(v.values[c], 1.0 / sc);
                }
                opt.extra_pairs.emplace_back(std::move(f), std::move(g));
            }
            const WeightedNorm nf{e.p, omega.values, d.cell_measure()};
            const WeightedNorm ng{qc, sigma.values, d.cell_measure()};
            const BestConstantEstimate est = estimate_best_constant(form, nf, ng, opt);

            TwoWeightRow row;
            row.omega_exponent = a;
            row.sigma_exponent = b;
            row.n_hat = est.value;
            row.uv_family = two_weight_constant(u, v, class_alpha, class_beta, class_gamma, family_set).value;
            row.uv_lattice = two_weight_constant(u, v, class_alpha, class_beta, class_gamma, lattice_set).value;
            row.u_ainf = ainf_constant(u, lattice_set, {base_lattice(d)}).value;
            row.v_ainf = ainf_constant(v, lattice_set, {base_lattice(d)}).value;
            row.bound = thm31_bound(e, row.uv_lattice, row.u_ainf, row.v_ainf);
            row.ratio = row.n_hat / row.bound;
            row.necessity = row.n_hat / row.uv_family;
            out.rows.push_back(row);

            const std::string meta = meta_pair("a", a, "b", b);
            out.table.add("n_hat", row.n_hat, meta);
            out.table.add("uv_family", row.uv_family, meta);
            out.table.add("uv_lattice", row.uv_lattice, meta);
            out.table.add("u_ainf", row.u_ainf, meta);
            out.table.add("v_ainf", row.v_ainf, meta);
            out.table.add("bound", row.bound, meta);
            out.table.add("ratio", row.ratio, meta);
            out.table.add("necessity", row.necessity, meta);
        }
    if (!out.rows.empty()) {
        double lo = kInf;
        out.min_necessity = kInf;
        for (const TwoWeightRow& r : out.rows) {
            out.slack = std::max(out.slack, r.ratio);
            lo = std::min(lo, r.ratio);
            out.min_necessity = std::min(out.min_necessity, r.necessity);
        }
        out.ratio_spread = out.slack / lo;
    }
    out.table.add("slack", out.slack);
    out.table.add("ratio_spread", out.ratio_spread);
    out.table.add("min_necessity", out.min_necessity);
    return out;
}

// ---------------------------------------------------------------- domination

DominationSample domination_sample(const GridDomain& d, std::uint64_t seed) {
    Rng rng(seed);
    const Index n = d.cell_count();
    DominationSample s{Vector(n), Vector(n), Vector(n)};
    // b: a Brownian path at unit scale; f, g: positive noise.
    double walk = 0.0;
    const double step = std::sqrt(1.0 / static_cast<double>(n));
    for (Index c = 0; c < n; ++c) {
        walk += step * rng.normal();
        s.b[c] = walk;
    }
    for (Index c = 0; c < n; ++c) s.f[c] = rng.uniform();
    for (Index c = 0; c < n; ++c) s.g[c] = rng.uniform();
    return s;
}

DominationExperiment run_domination_experiment(const ExperimentConfig& cfg) {
    const GridDomain d = domain_of(cfg, cfg.depth);
    const OperatorRep t = build_operator(cfg, d);
    const ExponentProfile& e = cfg.profile;
    const Cube top{kBaseLattice, 0, {0, 0}};
    DominationExperiment out;
    out.table.experiment = "dominate";
    out.table.seed = cfg.seed;
    for (int m : cfg.orders) {
        std::vector<double> cs;
        std::vector<double> cfull;
        for (int s = 0; s < cfg.seeds; ++s) {
            const std::uint64_t seed = splitmix64(cfg.seed) + static_cast<std::uint64_t>(s);
            const DominationSample sample = domination_sample(d, seed);
            const SparseConstruction sc =
                construct_sparse(t, sample.b, m, sample.f, sample.g, top, e.p0, e.q0, cfg.op_alpha);
            DominationRun run;
            run.m = m;
            run.seed = seed;
            run.report = sc.report;
            run.pre_merge_sparse = verify_sparseness(d, sc.pre_merge).ok;
            run.merged_sparse = verify_sparseness(d, sc.merged).ok;
            run.packing_ok = std::all_of(sc.report.steps.begin(), sc.report.steps.end(),
                                         [](const RecursionStep& st) { return st.packing_ok; });
            run.selection_ok = std::all_of(sc.report.steps.begin(), sc.report.steps.end(),
                                           [](const RecursionStep& st) { return st.selection_ok; });
            cs.push_back(run.report.c_two_term);
            cfull.push_back(run.report.c_full);
            const std::string meta = meta_one("m", m) + ";run=" + std::to_string(s);
            out.table.add("lhs", run.report.lhs, meta);
            out.table.add("c_two_term", run.report.c_two_term, meta);
            out.table.add("c_full", run.report.c_full, meta);
            out.table.add("c_all_lattices", run.report.c_all_lattices, meta);
            out.table.add("family_size", static_cast<double>(run.report.pre_merge_count), meta);
            out.table.add("max_packing_ratio", run.report.max_packing_ratio, meta);
            out.table.add("certificates_ok",
                          run.pre_merge_sparse && run.merged_sparse && run.packing_ok && run.selection_ok ? 1.0 : 0.0,
                          meta);
            out.runs.push_back(std::move(run));
        }
        DominationSummary sum;
        sum.m = m;
        sum.max_c = cs.empty() ? 0.0 : *std::max_element(cs.begin(), cs.end());
        sum.median_c = median_of(cs);
        sum.max_c_full = cfull.empty() ? 0.0 : *std::max_element(cfull.begin(), cfull.end());
        sum.median_c_full = median_of(cfull);
        out.summaries.push_back(sum);
        const std::string meta = meta_one("m", m);
        out.table.add("max_c", sum.max_c, meta);
        out.table.add("median_c", sum.median_c, meta);
        out.table.add("max_c_full", sum.max_c_full, meta);
        out.table.add("median_c_full", sum.median_c_full, meta);
    }
    return out;
}

// ---------------------------------------------------------------- Bloom

BloomReport run_bloom_experiment(const ExperimentConfig& cfg) {
    const GridDomain d = domain_of(cfg, cfg.depth);
    const ExponentProfile& e = cfg.profile;
    if (e.m < 1) throw ConfigError("the Bloom experiment needs m >= 1");
    const std::vector<Cube> family = synthetic_towers(d);
    const CubeSet cubes = default_cubes(d);
    const double tail = tail_ratio(e.q0, e.q);
    const double qc = conjugate(e.q);
    const double q0c = conjugate(e.q0);
    std::vector<std::pair<double, double>> pairs;
    for (double a : cfg.mu_exponents)
        for (double c : cfg.lambda_exponents) pairs.emplace_back(a, c);
    if (pairs.empty()) throw ConfigError("the Bloom experiment needs at least one weight pair");

    BloomReport out;
    out.table.experiment = "bloom";
    out.table.seed = cfg.seed;
    out.min_ratio = kInf;
    for (int s = 0; s < cfg.seeds; ++s) {
        const auto [a, c] = pairs[static_cast<std::size_t>(s) % pairs.size()];
        const std::uint64_t seed = splitmix64(cfg.seed) + static_cast<std::uint64_t>(s);
        const GridFunction mu = power_weight(d, {0.0, 0.0}, a);
        const GridFunction lambda = power_weight(d, {0.0, 0.0}, c);
        const GridFunction nu = bloom_weight(mu, lambda, e.m);
        const GridFunction b{d, domination_sample(d, seed).b};

        BloomRow row;
        row.mu_exponent = a;
        row.lambda_exponent = c;
        row.seed = seed;
        row.bmo = bmo_nu(b, nu, cubes).value;

        BloomCharacteristics k;
        k.lambda_tail = ap_constant(pow_of(lambda, tail), 1.0 + tail * (e.p - e.p0) / (e.p0 * e.p), cubes).value;
        k.mu_tail = ap_constant(pow_of(mu, tail), 1.0 + tail * (e.p - e.p0) / (e.p0 * e.p), cubes).value;
        k.mu_p = ap_constant(pow_of(mu, e.p), e.p / e.p0, cubes).value;
        k.lambda_p = ap_constant(pow_of(lambda, e.p), e.p / e.p0, cubes).value;
        k.mu_dual = ap_constant(pow_of(mu, -qc), qc / q0c, cubes).value;
        k.lambda_dual = ap_constant(pow_of(lambda, -qc), qc / q0c, cubes).value;
        row.constant = thm41_bloom_constant(e, k);

        SparseFormSpec spec;
        spec.domain = d;
        spec.cubes = family;
        spec.r = e.p0;
        spec.t = q0c;
        for (const Cube& q : family) {
            spec.coeff.push_back(std::pow(cube_measure(d, q), 1.0 + e.alpha / d.dim));
            const std::vector<Index> cells = box_cells(d, cube_box(d, q));
            double mean = 0.0;
            for (Index x : cells) mean += b.values[x];
            mean /= static_cast<double>(cells.size());
            Vector factor = Vector::Zero(d.cell_count());
            for (Index x : cells) factor[x] = std::pow(std::abs(b.values[x] - mean), e.m);
            spec.f_factor.push_back(std::move(factor));
        }
        BestConstantOptions opt;
        opt.seed = seed;
        opt.random_trials = cfg.trials;
        opt.rounds = cfg.rounds;
        const WeightedNorm nf{e.p, pow_of(mu, e.p).values, d.cell_measure()};
        const WeightedNorm ng{qc, pow_of(lambda, -qc).values, d.cell_measure()};
        row.n_hat = estimate_best_constant(sparse_form_evaluator(spec), nf, ng, opt).value;
        const double scale = row.constant.c1 * std::pow(row.bmo, e.m);
        row.trivial = !(row.bmo > 0.0);
        row.ratio = row.trivial ? 0.0 : row.n_hat / scale;
        out.rows.push_back(row);
        if (!row.trivial) {
            out.max_ratio = std::max(out.max_ratio, row.ratio);
            out.min_ratio = std::min(out.min_ratio, row.ratio);
        }

        const std::string meta = meta_pair("mu", a, "lambda", c) + ";run=" + std::to_string(s);
        out.table.add("n_hat", row.n_hat, meta);
        out.table.add("bmo_nu", row.bmo, meta);
        out.table.add("c1", row.constant.c1, meta);
        out.table.add("c2", row.constant.c2, meta);
        out.table.add("ratio", row.ratio, meta);
    }
    if (std::isinf(out.min_ratio)) out.min_ratio = 0.0;
    out.table.add("max_ratio", out.max_ratio);
    out.table.add("min_ratio", out.min_ratio);
    return out;
}

// ---------------------------------------------------------------- weak type

namespace {

struct ContinuumSample {
    int kind = 0;  // 0 spike, 1 indicator, 2 bump
    double x = 0.0;
    double width = 0.0;
};

Vector realize(const GridDomain& d, const ContinuumSample& s) {
    Vector f = Vector::Zero(d.cell_count());
    const double h = d.cell_size();
    switch (s.kind) {
    case 0: {
        const auto c = d.locate({s.x, 0.0});
        if (c) f[*c] = 1.0 / h;
        break;
    }
    case 1:
        for (Index c = 0; c < f.size(); ++c) {
            const double x = d.cell_center(c)[0];
            if (x >= s.x && x < s.x + s.width) f[c] = 1.0;
        }
        break;
    default:
        for (Index c = 0; c < f.size(); ++c) {
            const double z = (d.cell_center(c)[0] - s.x) / s.width;
            if (std::abs(z) < 1.0) f[c] = std::exp(-1.0 / (1.0 - z * z));
        }
        break;
    }
    return f;
}

}  // namespace

WeakTypeReport run_weak_type_experiment(const ExperimentConfig& cfg) {
    const ExponentProfile& e = cfg.profile;
    if (cfg.dim != 1) throw ConfigError("the weak-type experiment runs in one dimension");
    WeakTypeReport out;
    out.table.experiment = "weaktype";
    out.table.seed = cfg.seed;
    out.target_exponent = e.p0 * cfg.dim / (cfg.dim - e.alpha * e.p0);

    Rng rng(cfg.seed);
    std::vector<ContinuumSample> samples;
    for (int i = 0; i < cfg.samples; ++i) {
        ContinuumSample s;
        s.kind = i % 3;
        s.x = rng.uniform(0.05, 0.95);
        s.width = rng.uniform(0.02, 0.2);
        if (s.kind == 1) s.x = std::min(s.x, 1.0 - s.width);
        samples.push_back(s);
    }

    ExperimentConfig op_cfg = cfg;
    op_cfg.op = OperatorKind::Laplacian;
    op_cfg.op_alpha = e.alpha;
    op_cfg.op_kappa = e.kappa;
    for (int depth : cfg.depths) {
        const GridDomain d = domain_of(cfg, depth);
        const OperatorRep t = build_operator(op_cfg, d);
        const std::vector<DyadicLattice> lattices = all_lattices(d);
        WeakTypeRow row;
        row.depth = depth;
        for (const ContinuumSample& s : samples) {
            const GridFunction f{d, realize(d, s)};
            const double nf = lp_norm(f, e.p0);
            if (!(nf > 0.0)) continue;
            const Vector tf = t.apply(f.values);
            row.fractional_power =
                std::max(row.fractional_power, weak_quasinorm(tf, out.target_exponent, d.cell_measure()) / nf);
            const GridFunction ml = truncation_ML(t, f, e.q0, lattices);
            row.truncation =
                std::max(row.truncation, weak_quasinorm(ml.values, out.target_exponent, d.cell_measure()) / nf);
        }
        out.rows.push_back(row);
        const std::string meta = meta_one("J", depth);
        out.table.add("weak_fractional_power", row.fractional_power, meta);
        out.table.add("weak_truncation", row.truncation, meta);
    }
    if (!out.rows.empty()) {
        out.growth_power = out.rows.back().fractional_power / out.rows.front().fractional_power;
        out.growth_truncation = out.rows.back().truncation / out.rows.front().truncation;
    }
    out.table.add("target_exponent", out.target_exponent);
    out.table.add("growth_fractional_power", out.growth_power);
    out.table.add("growth_truncation", out.growth_truncation);
    return out;
}

// ---------------------------------------------------------------- fractional power

FracPowReport run_fracpow_experiment(const ExperimentConfig& cfg) {
    if (cfg.dim != 1) throw ConfigError("the fractional-power comparison runs in one dimension");
    const GridDomain d = domain_of(cfg, cfg.depth);
    const double alpha = cfg.profile.alpha;
    const double kappa = cfg.profile.kappa;
    const GridFunction one = GridFunction::constant(d, 1.0);
    const OperatorRep l = divergence_form(d, one, Boundary::Dirichlet);
    const SpectralData s = spectral_data(l);
    const QuadratureRule rule = make_quadrature(alpha / kappa, s.eigenvalues.minCoeff(), s.eigenvalues.maxCoeff());
    const OperatorRep quad = fractional_power(s, alpha, kappa, rule);
    const Matrix oracle = fractional_power_oracle(s, alpha, kappa);

    auto spectral_norm = [](const Matrix& m) {
        const Matrix sym = 0.5 * (m + m.transpose());
        return Eigen::SelfAdjointEigenSolver<Matrix>(sym, Eigen::EigenvaluesOnly).eigenvalues().cwiseAbs().maxCoeff();
    };
    FracPowReport out;
    out.table.experiment = "fracpow";
    out.table.seed = cfg.seed;
    out.quadrature_error = spectral_norm(quad.matrix() - oracle) / spectral_norm(oracle);

    // (-Delta)^{-alpha/2} = c I_alpha on the line, c = Gamma((n-alpha)/2) / (2^alpha pi^{n/2} Gamma(alpha/2)).
    const double n = 1.0;
    const double c = std::tgamma((n - alpha) / 2.0) /
                     (std::pow(2.0, alpha) * std::pow(std::numbers::pi, n / 2.0) * std::tgamma(alpha / 2.0));
    const OperatorRep riesz = riesz_potential(d, alpha);
    const GridFunction bump = GridFunction::sample(d, [](const Point& x) {
        const double z = (x[0] - 0.5) / 0.25;
        return std::abs(z) < 1.0 ? std::exp(-1.0 / (1.0 - z * z)) : 0.0;
    });
    const Vector via_riesz = c * riesz.apply(bump.values);
    const Vector via_power = oracle * bump.values;
    double diff2 = 0.0;
    double ref2 = 0.0;
    double offset = 0.0;
    int count = 0;
    std::vector<Index> middle;
    for (Index i = 0; i < d.cell_count(); ++i) {
        const double x = d.cell_center(i)[0];
        if (x < 0.25 || x >= 0.75) continue;
        middle.push_back(i);
        offset += via_riesz[i] - via_power[i];
        ++count;
    }
    offset /= std::max(count, 1);
    double centered2 = 0.0;
    for (Index i : middle) {
        const double delta = via_riesz[i] - via_power[i];
        diff2 += delta * delta;
        centered2 += (delta - offset) * (delta - offset);
        ref2 += via_riesz[i] * via_riesz[i];
    }
    out.riesz_error = std::sqrt(diff2 / ref2);
    out.riesz_offset = offset;
    out.riesz_error_centered = std::sqrt(centered2 / ref2);
    out.table.add("quadrature_error", out.quadrature_error, meta_one("nodes", static_cast<double>(rule.nodes.size())));
    out.table.add("riesz_error", out.riesz_error, "middle_half");
    out.table.add("riesz_offset", out.riesz_offset, "middle_half");
    out.table.add("riesz_error_centered", out.riesz_error_centered, "middle_half");
    return out;
}

// ---------------------------------------------------------------- weights

WeightsReport run_weights_experiment(const ExperimentConfig& cfg) {
    const GridDomain d = domain_of(cfg, cfg.depth);
    const CubeSet cubes = default_cubes(d);
    const std::vector<DyadicLattice> lattices = all_lattices(d);
    WeightsReport out;
    out.table.experiment = "weights";
    out.table.seed = cfg.seed;
    for (double a : cfg.omega_exponents) {
        const GridFunction w = power_weight(d, {0.0, 0.0}, a);
        const std::string meta = meta_one("a", a);
        out.table.add("A2", ap_constant(w, 2.0, cubes).value, meta);
        out.table.add("Ainf", ainf_constant(w, cubes, lattices).value, meta);
        out.table.add("RH2", rh_constant(w, 2.0, cubes).value, meta);
        out.table.add("A_2_4", apq_constant(w, 2.0, 4.0, cubes).value, meta);
    }
    return out;
}

// ---------------------------------------------------------------- testing constants

std::vector<Cube> random_sparse_family(const GridDomain& d, const Cube& top, std::uint64_t seed, int max_picks) {
    Rng rng(seed);
    std::vector<Cube> out{top};
    for (std::size_t head = 0; head < out.size(); ++head) {
        const Cube q = out[head];
        if (q.level + 2 > d.depth) continue;
        std::vector<Cube> grand;
        for (const Cube& c : dyadic_children(d, q))
            for (const Cube& g : dyadic_children(d, c)) grand.push_back(g);
        // Grandchildren have measure |Q|/4^{dim}; two picks keep the family 1/2-sparse.
        // The top always keeps one, so no instance collapses to a single cube.
        const int min_picks = head == 0 ? 1 : 0;
        const auto picks =
            min_picks + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_picks - min_picks) + 1));
        for (int i = 0; i < picks && !grand.empty(); ++i) {
            const auto j = static_cast<std::size_t>(rng.below(grand.size()));
            out.push_back(grand[j]);
            grand.erase(grand.begin() + static_cast<std::ptrdiff_t>(j));
        }
    }
    return out;
}

TestingExperiment run_testing_experiment(const ExperimentConfig& cfg) {
    const GridDomain d = domain_of(cfg, cfg.depth);
    const ExponentProfile& e = cfg.profile;
    const double sc = conjugate(e.s);
    const double qc = conjugate(e.q);
    const Cube top{kBaseLattice, 0, {0, 0}};
    TestingExperiment out;
    out.table.experiment = "testing";
    out.table.seed = cfg.seed;
    double lo = kInf;
    for (int s = 0; s < cfg.seeds; ++s) {
        const std::uint64_t seed = splitmix64(cfg.seed) + static_cast<std::uint64_t>(s);
        Rng rng(seed);
        const double a = rng.uniform(-0.6, 0.6);
        const double b = rng.uniform(-0.25, 0.25);
        const double ca = rng.uniform();
        const double cb = rng.uniform();
        const GridFunction omega = power_weight(d, {ca, 0.0}, a);
        const GridFunction sigma = power_weight(d, {cb, 0.0}, b);
        const GridFunction u = pow_of(omega, e.r / (e.r - e.p));
        const GridFunction v = pow_of(sigma, sc / (sc - qc));
        const std::vector<Cube> family = random_sparse_family(d, top, splitmix64(seed));

        std::vector<double> lambda;
        for (const Cube& q : family) lambda.push_back(std::pow(cube_measure(d, q), 1.0 + e.alpha));
        SparseFormSpec spec;
        spec.domain = d;
        spec.cubes = family;
        spec.coeff = lambda;
        spec.r = e.r;
        spec.t = sc;
        BestConstantOptions opt;
        opt.seed = seed;
        opt.random_trials = cfg.trials;
        opt.rounds = cfg.rounds;
        for (const Cube& q : family) {
            Vector f = Vector::Zero(d.cell_count());
            Vector g = Vector::Zero(d.cell_count());
            for (Index c : box_cells(d, cube_box(d, q))) {
                f[c] = std::pow(u.values[c], 1.0 / e.r);
                g[c] = std::isinf(sc) ? 1.0 : std::pow(v.values[c], 1.0 / sc);
            }
            opt.extra_pairs.emplace_back(std::move(f), std::move(g));
        }
        const WeightedNorm nf{e.p, omega.values, d.cell_measure()};
        const WeightedNorm ng{qc, sigma.values, d.cell_measure()};

        TestingRow row;
        row.seed = seed;
        row.n_hat = estimate_best_constant(sparse_form_evaluator(spec), nf, ng, opt).value;
        const TestingReport t = testing_norms(d, family, u.values, v.values, lambda, e.p, e.q, e.r, e.s);
        row.zeta = t.zeta;
        row.zeta_star = t.zeta_star;
        row.ratio = (t.zeta + t.zeta_star) / row.n_hat;
        out.rows.push_back(row);
        lo = std::min(lo, row.ratio);
        out.spread = std::max(out.spread, row.ratio);
        const std::string meta = "run=" + std::to_string(s) + ";" + meta_pair("a", a, "b", b);
        out.table.add("n_hat", row.n_hat, meta);
        out.table.add("zeta", row.zeta, meta);
        out.table.add("zeta_star", row.zeta_star, meta);
        out.table.add("ratio", row.ratio, meta);
    }
    out.spread = out.rows.empty() ? 0.0 : out.spread / lo;
    out.table.add("ratio_spread", out.spread);
    return out;
}

// ---------------------------------------------------------------- micro-suites

MicroSuiteReport run_micro_suites(std::uint64_t seed, int trials) {
    const GridDomain d = make_domain(1, {0.0}, 1.0, 6);
    const Cube top{kBaseLattice, 0, {0, 0}};
    const std::vector<Cube> all = enumerate_cubes(d, {base_lattice(d)});
    MicroSuiteReport out;
    out.table.experiment = "micro";
    out.table.seed = seed;
    out.cov_min_ratio = kInf;
    const double exps[] = {1.0, 2.0, kInf};
    auto random_positive = [&](Rng& rng) {
        Vector x(d.cell_count());
        for (Index c = 0; c < x.size(); ++c) x[c] = std::exp(rng.normal());
        return x;
    };
    auto random_power = [&](Rng& rng, double spread) {
        return power_weight(d, {rng.uniform(), 0.0}, rng.uniform(-spread, spread));
    };
    const int third = trials / 3;
    for (int i = 0; i < trials; ++i) {
        Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(i));
        if (i < third + trials % 3) {
            // Midpoint control c_k <= c_0 + c_m.
            const Vector b = random_positive(rng);
            const Vector f = random_positive(rng);
            const Vector g = random_positive(rng);
            const Cube q = all[static_cast<std::size_t>(rng.below(all.size()))];
            const int m = 1 + static_cast<int>(rng.below(3));
            const double r = exps[rng.below(3)];
            const double t = exps[rng.below(3)];
            const std::vector<double> c = pair_averages(d, q, b, m, f, g, r, t);
            ++out.midpoint_trials;
            for (int k = 0; k <= m; ++k)
                if (c[static_cast<std::size_t>(k)] > (c.front() + c.back()) * (1.0 + 1e-12)) ++out.midpoint_failures;
        } else if (i < 2 * third + trials % 3) {
            // Norm of sum lambda_Q chi_Q against the nested-sum formula.
            const std::vector<Cube> family = random_sparse_family(d, top, rng.next(), 3);
            std::vector<double> lambda;
            for (std::size_t j = 0; j < family.size(); ++j) lambda.push_back(std::exp(rng.normal()));
            const GridFunction w = random_power(rng, 0.8);
            const double p = rng.uniform() < 0.5 ? 2.0 : 3.0;
            const double ratio = cov_norm_rhs(d, family, lambda, w.values, p) /
                                 cov_norm_direct(d, family, lambda, w.values, p);
            ++out.cov_trials;
            out.cov_min_ratio = std::min(out.cov_min_ratio, ratio);
            out.cov_max_ratio = std::max(out.cov_max_ratio, ratio);
            out.all_finite = out.all_finite && std::isfinite(ratio);
        } else {
            // Sparse sums below the top cube.
            const std::vector<Cube> family = random_sparse_family(d, top, rng.next(), 2);
            const GridFunction omega = random_power(rng, 0.8);
            const GridFunction sigma = random_power(rng, 0.8);
            const bool universal = rng.uniform() < 0.5;
            const double alpha = universal ? rng.uniform(0.25, 1.0) : 0.0;
            const double beta = rng.uniform(0.0, 1.0);
            const double gamma = std::max(0.0, 1.0 - alpha - beta) + rng.uniform(0.0, 0.5);
            const std::vector<DyadicLattice> lats{base_lattice(d)};
            const CubeSet cubes = lattice_cubes(d, lats, "base");
            const double sa = universal ? 1.0 : ainf_constant(sigma, cubes, lats).value;
            const double oa = universal ? 1.0 : ainf_constant(omega, cubes, lats).value;
            const SparseSumBound s = sparse_sum_bound(d, family, omega.values, sigma.values, alpha, beta, gamma, top, sa, oa);
            out.all_finite = out.all_finite && std::isfinite(s.ratio);
            if (universal) {
                ++out.sum_trials_universal;
                out.sum_slack_universal = std::max(out.sum_slack_universal, s.ratio);
            } else {
                ++out.sum_trials_weak;
                out.sum_max_weak = std::max(out.sum_max_weak, s.ratio);
            }
        }
    }
    out.table.add("midpoint_trials", out.midpoint_trials);
    out.table.add("midpoint_failures", out.midpoint_failures);
    out.table.add("cov_trials", out.cov_trials);
    out.table.add("cov_min_ratio", out.cov_min_ratio);
    out.table.add("cov_max_ratio", out.cov_max_ratio);
    out.table.add("sum_trials_universal", out.sum_trials_universal);
    out.table.add("sum_slack_universal", out.sum_slack_universal);
    out.table.add("sum_trials_weak", out.sum_trials_weak);
    out.table.add("sum_max_weak", out.sum_max_weak);
    return out;
}

// ---------------------------------------------------------------- verify

std::vector<Report> run_verify(std::uint64_t seed) {
    std::vector<Report> out;
    {
        ExperimentConfig cfg = default_config("twoweight");
        cfg.seed = seed;
        cfg.depth = 6;
        cfg.omega_exponents = {-0.4, 0.4};
        cfg.sigma_exponents = {-0.2, 0.2};
        cfg.trials = 4;
        out.push_back(run_two_weight_experiment(cfg).table);
    }
    {
        ExperimentConfig cfg = default_config("dominate");
        cfg.seed = seed;
        cfg.depth = 6;
        cfg.orders = {0, 1};
        cfg.seeds = 3;
        out.push_back(run_domination_experiment(cfg).table);
    }
    {
        ExperimentConfig cfg = default_config("bloom");
        cfg.seed = seed;
        cfg.depth = 6;
        cfg.seeds = 4;
        cfg.trials = 4;
        out.push_back(run_bloom_experiment(cfg).table);
    }
    {
        ExperimentConfig cfg = default_config("weaktype");
        cfg.seed = seed;
        cfg.depths = {5, 6};
        cfg.samples = 6;
        out.push_back(run_weak_type_experiment(cfg).table);
    }
    {
        ExperimentConfig cfg = default_config("fracpow");
        cfg.seed = seed;
        cfg.depth = 6;
        out.push_back(run_fracpow_experiment(cfg).table);
    }
    {
        ExperimentConfig cfg = default_config("weights");
        cfg.seed = seed;
        cfg.depth = 6;
        out.push_back(run_weights_experiment(cfg).table);
    }
    {
        ExperimentConfig cfg = default_config("testing");
        cfg.seed = seed;
        cfg.depth = 6;
        cfg.seeds = 4;
        cfg.trials = 4;
        out.push_back(run_testing_experiment(cfg).table);
    }
    out.push_back(run_micro_suites(seed, 60).table);
    return out;
}

}  // namespace sparsedom
