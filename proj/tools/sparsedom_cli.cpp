#include "sparsedom/errors.hpp"
#include "sparsedom/harness.hpp"
#include "sparsedom/io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace sparsedom;

struct CommonOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out = ".";
    bool csv = false;
    bool svg = false;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--config", o.config, "JSON configuration overlay")->check(CLI::ExistingFile);
    cmd->add_option("--seed", o.seed, "Base RNG seed (u64)");
    cmd->add_option("--out", o.out, "Output directory");
    cmd->add_flag("--csv", o.csv, "Write <out>/<experiment>.csv");
    cmd->add_flag("--svg", o.svg, "Write <out>/<experiment>.svg");
}

ExperimentConfig resolve_config(const std::string& name, const CommonOptions& o) {
    ExperimentConfig cfg = default_config(name);
    if (!o.config.empty()) cfg = load_config(o.config, cfg);
    if (o.seed) cfg.seed = *o.seed;
    return cfg;
}

// One series per quantity, x = occurrence index.
SvgPlot plot_of(const std::vector<Report>& reports, const std::string& title) {
    SvgPlot plot;
    plot.title = title;
    plot.x_label = "row";
    plot.y_label = "value";
    std::map<std::string, SvgSeries> by_quantity;
    bool positive = true;
    for (const Report& r : reports)
        for (const ReportRow& row : r.rows) {
            SvgSeries& s = by_quantity[row.quantity];
            s.label = row.quantity;
            s.x.push_back(static_cast<double>(s.x.size()));
            s.y.push_back(row.value);
            positive = positive && row.value > 0.0;
        }
    plot.log_y = positive;
    for (auto& [_, s] : by_quantity) plot.series.push_back(std::move(s));
    return plot;
}

void print_summary(const std::vector<Report>& reports) {
    for (const Report& r : reports)
        for (const ReportRow& row : r.rows)
            if (!std::isfinite(row.value))
                throw IoError("non-finite value for " + r.experiment + "/" + row.quantity);
    std::cout << kCsvHeader << '\n';
    for (const Report& r : reports)
        for (const ReportRow& row : r.rows)
            std::cout << r.experiment << ',' << r.seed << ',' << row.quantity << ',' << format_value(row.value) << ','
                      << row.meta << '\n';
}

void finish(const std::string& name, const std::vector<Report>& reports, const CommonOptions& o) {
    if (!o.csv && !o.svg) {
        print_summary(reports);
        return;
    }
    const SvgPlot plot = plot_of(reports, name);
    OutputPaths paths{o.out, name, o.csv, o.svg};
    for (const std::string& p : emit_report(reports, paths, &plot)) std::cerr << "wrote " << p << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse domination toolkit: experiments and verification runs"};
    app.require_subcommand(1);

    const std::vector<std::string> names = {"weights", "dominate", "twoweight", "bloom", "fracpow", "weaktype", "verify"};
    std::map<std::string, CommonOptions> options;
    std::map<std::string, CLI::App*> commands;
    const std::map<std::string, std::string> help = {
        {"weights", "A_p, A_inf, RH and A_{p,q} characteristics of power weights"},
        {"dominate", "Sparse domination constants for commutators of the Riesz potential"},
        {"twoweight", "Two-weight sparse-form constants against the theoretical bound"},
        {"bloom", "Bloom-type commutator constants against C1 ||b||_BMO"},
        {"fracpow", "Fractional-power quadrature against the spectral oracle and the Riesz potential"},
        {"weaktype", "Weak-type quasi-norms under grid refinement"},
        {"verify", "Light run of every experiment; deterministic in --seed"},
    };
    for (const std::string& n : names) {
        commands[n] = app.add_subcommand(n, help.at(n));
        add_common(commands[n], options[n]);
    }

    CLI11_PARSE(app, argc, argv);

    try {
        for (const std::string& n : names) {
            if (!commands[n]->parsed()) continue;
            const CommonOptions& o = options[n];
            std::vector<Report> reports;
            if (n == "verify") {
                if (!o.config.empty()) throw ConfigError("verify takes no --config; its scale is fixed");
                reports = run_verify(o.seed.value_or(42));
            } else {
                const ExperimentConfig cfg = resolve_config(n, o);
                if (n == "weights") reports.push_back(run_weights_experiment(cfg).table);
                else if (n == "dominate") reports.push_back(run_domination_experiment(cfg).table);
                else if (n == "twoweight") reports.push_back(run_two_weight_experiment(cfg).table);
                else if (n == "bloom") reports.push_back(run_bloom_experiment(cfg).table);
                else if (n == "fracpow") reports.push_back(run_fracpow_experiment(cfg).table);
                else if (n == "weaktype") reports.push_back(run_weak_type_experiment(cfg).table);
            }
            finish(n, reports, o);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
