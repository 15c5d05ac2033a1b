#include "sparsedom/io.hpp"

#include "sparsedom/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace sparsedom {

std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + '"';
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) throw IoError("unterminated quote in CSV line");
    out.push_back(std::move(cur));
    return out;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

}  // namespace

void write_csv(std::ostream& out, const std::vector<Report>& reports) {
    out << kCsvHeader << '\n';
    for (const Report& r : reports)
        for (const ReportRow& row : r.rows) {
            if (!std::isfinite(row.value))
                throw IoError("non-finite value for " + r.experiment + "/" + row.quantity);
            out << csv_field(r.experiment) << ',' << r.seed << ',' << csv_field(row.quantity) << ','
                << format_value(row.value) << ',' << csv_field(row.meta) << '\n';
        }
}

std::vector<CsvRecord> read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) throw IoError("missing or malformed CSV header");
    std::vector<CsvRecord> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> f = split_csv_line(line);
        if (f.size() != 5) throw IoError("CSV row must have 5 fields: " + line);
        CsvRecord rec;
        rec.experiment = f[0];
        rec.seed = std::stoull(f[1]);
        rec.quantity = f[2];
        rec.value = std::stod(f[3]);
        rec.meta = f[4];
        out.push_back(std::move(rec));
    }
    return out;
}

void write_svg(std::ostream& out, const SvgPlot& plot) {
    constexpr double width = 640.0;
    constexpr double height = 400.0;
    constexpr double margin = 60.0;
    double x_lo = INFINITY, x_hi = -INFINITY, y_lo = INFINITY, y_hi = -INFINITY;
    auto ty = [&](double y) { return plot.log_y ? std::log10(std::max(y, 1e-300)) : y; };
    for (const SvgSeries& s : plot.series)
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            x_lo = std::min(x_lo, s.x[i]);
            x_hi = std::max(x_hi, s.x[i]);
            y_lo = std::min(y_lo, ty(s.y[i]));
            y_hi = std::max(y_hi, ty(s.y[i]));
        }
    if (!(x_hi > x_lo)) {
        x_lo = std::isfinite(x_lo) ? x_lo - 1.0 : 0.0;
        x_hi = x_lo + 2.0;
    }
    if (!(y_hi > y_lo)) {
        y_lo = std::isfinite(y_lo) ? y_lo - 1.0 : 0.0;
        y_hi = y_lo + 2.0;
    }
    auto px = [&](double x) { return margin + (x - x_lo) / (x_hi - x_lo) * (width - 2 * margin); };
    auto py = [&](double y) { return height - margin - (ty(y) - y_lo) / (y_hi - y_lo) * (height - 2 * margin); };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
    out << "  <rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    out << "  <text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << xml_escape(plot.title)
        << "</text>\n";
    out << "  <line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin << "\" y2=\""
        << height - margin << "\" stroke=\"black\"/>\n";
    out << "  <line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\"" << height - margin
        << "\" stroke=\"black\"/>\n";
    out << "  <text x=\"" << width / 2 << "\" y=\"" << height - 16 << "\" text-anchor=\"middle\" font-size=\"12\">"
        << xml_escape(plot.x_label) << "</text>\n";
    out << "  <text x=\"16\" y=\"" << height / 2 << "\" font-size=\"12\" transform=\"rotate(-90 16 " << height / 2
        << ")\" text-anchor=\"middle\">" << xml_escape(plot.y_label + (plot.log_y ? " (log10)" : "")) << "</text>\n";
    out << "  <text x=\"" << margin << "\" y=\"" << height - margin + 16 << "\" font-size=\"10\">" << format_value(x_lo)
        << "</text>\n";
    out << "  <text x=\"" << width - margin << "\" y=\"" << height - margin + 16
        << "\" font-size=\"10\" text-anchor=\"end\">" << format_value(x_hi) << "</text>\n";
    for (std::size_t k = 0; k < plot.series.size(); ++k) {
        const SvgSeries& s = plot.series[k];
        const char* color = colors[k % 6];
        const std::size_t n = std::min(s.x.size(), s.y.size());
        if (n > 1) {
            out << "  <polyline fill=\"none\" stroke=\"" << color << "\" points=\"";
            for (std::size_t i = 0; i < n; ++i) out << (i ? " " : "") << px(s.x[i]) << ',' << py(s.y[i]);
            out << "\"/>\n";
        }
        for (std::size_t i = 0; i < n; ++i)
            out << "  <circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"3\" fill=\"" << color
                << "\"/>\n";
        out << "  <text x=\"" << width - margin << "\" y=\"" << margin + 14.0 * static_cast<double>(k)
            << "\" font-size=\"11\" text-anchor=\"end\" fill=\"" << color << "\">" << xml_escape(s.label)
            << "</text>\n";
    }
    out << "</svg>\n";
}

std::vector<std::string> emit_report(const std::vector<Report>& reports, const OutputPaths& paths,
                                     const SvgPlot* plot) {
    std::vector<std::string> written;
    std::error_code ec;
    std::filesystem::create_directories(paths.dir, ec);
    if (ec) throw IoError("cannot create output directory " + paths.dir + ": " + ec.message());
    auto open = [](const std::string& p) {
        std::ofstream f(p, std::ios::binary);
        if (!f) throw IoError("cannot write " + p);
        return f;
    };
    if (paths.csv) {
        const std::string p = (std::filesystem::path(paths.dir) / (paths.stem + ".csv")).string();
        std::ostringstream buf;
        write_csv(buf, reports);
        std::ofstream f = open(p);
        f << buf.str();
        if (!f) throw IoError("write failed for " + p);
        written.push_back(p);
    }
    if (paths.svg && plot) {
        const std::string p = (std::filesystem::path(paths.dir) / (paths.stem + ".svg")).string();
        std::ofstream f = open(p);
        write_svg(f, *plot);
        if (!f) throw IoError("write failed for " + p);
        written.push_back(p);
    }
    return written;
}

// ---------------------------------------------------------------- configuration

namespace {

using nlohmann::json;

double exponent_value(const json& v, const std::string& key) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string() && (v.get<std::string>() == "inf" || v.get<std::string>() == "infinity")) return kInf;
    throw ConfigError("'" + key + "' must be a number or \"inf\"");
}

template <typename T>
T typed(const json& v, const std::string& key) {
    try {
        return v.get<T>();
    } catch (const json::exception&) {
        throw ConfigError("'" + key + "' has the wrong type");
    }
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
    for (const auto& [key, _] : obj.items())
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
            throw ConfigError("unknown key '" + key + "' in " + where);
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text, ExperimentConfig cfg) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
    check_keys(doc,
               {"domain", "operator", "profile", "weights", "orders", "depths", "lambdas", "seeds", "trials", "rounds",
                "samples", "seed"},
               "config");
    if (doc.contains("domain")) {
        const json& d = doc["domain"];
        check_keys(d, {"dim", "depth", "side"}, "domain");
        if (d.contains("dim")) cfg.dim = typed<int>(d["dim"], "dim");
        if (d.contains("depth")) cfg.depth = typed<int>(d["depth"], "depth");
        if (d.contains("side")) cfg.side = typed<double>(d["side"], "side");
        if (cfg.dim != 1 && cfg.dim != 2) throw ConfigError("domain.dim must be 1 or 2");
        if (cfg.depth < 1 || cfg.depth > 12) throw ConfigError("domain.depth must lie in [1, 12]");
    }
    if (doc.contains("operator")) {
        const json& o = doc["operator"];
        check_keys(o, {"kind", "alpha", "kappa", "contrast", "path"}, "operator");
        if (o.contains("kind")) {
            const std::string k = typed<std::string>(o["kind"], "operator.kind");
            if (k == "riesz") cfg.op = OperatorKind::Riesz;
            else if (k == "laplacian") cfg.op = OperatorKind::Laplacian;
            else if (k == "divergence_form") cfg.op = OperatorKind::DivergenceForm;
            else if (k == "matrix_file") cfg.op = OperatorKind::MatrixFile;
            else throw ConfigError("operator.kind must be riesz, laplacian, divergence_form or matrix_file");
        }
        if (o.contains("alpha")) cfg.op_alpha = typed<double>(o["alpha"], "operator.alpha");
        if (o.contains("kappa")) cfg.op_kappa = typed<double>(o["kappa"], "operator.kappa");
        if (o.contains("contrast")) cfg.coefficient_contrast = typed<double>(o["contrast"], "operator.contrast");
        if (o.contains("path")) cfg.matrix_path = typed<std::string>(o["path"], "operator.path");
        if (cfg.op == OperatorKind::MatrixFile && !std::filesystem::exists(cfg.matrix_path))
            throw ConfigError("operator.path does not exist: " + cfg.matrix_path);
    }
    if (doc.contains("profile")) {
        const json& p = doc["profile"];
        check_keys(p, {"n", "p0", "q0", "p", "q", "r", "s", "alpha", "kappa", "epsilon", "m"}, "profile");
        ExponentProfile& e = cfg.profile;
        if (p.contains("n")) e.n = typed<int>(p["n"], "profile.n");
        if (p.contains("p0")) e.p0 = exponent_value(p["p0"], "profile.p0");
        if (p.contains("q0")) e.q0 = exponent_value(p["q0"], "profile.q0");
        if (p.contains("p")) e.p = exponent_value(p["p"], "profile.p");
        if (p.contains("q")) e.q = exponent_value(p["q"], "profile.q");
        if (p.contains("r")) e.r = exponent_value(p["r"], "profile.r");
        if (p.contains("s")) e.s = exponent_value(p["s"], "profile.s");
        if (p.contains("alpha")) e.alpha = typed<double>(p["alpha"], "profile.alpha");
        if (p.contains("kappa")) e.kappa = typed<double>(p["kappa"], "profile.kappa");
        if (p.contains("epsilon")) e.epsilon = typed<double>(p["epsilon"], "profile.epsilon");
        if (p.contains("m")) e.m = typed<int>(p["m"], "profile.m");
        if (e.m < 0) throw ConfigError("profile.m must be nonnegative");
    }
    if (doc.contains("weights")) {
        const json& w = doc["weights"];
        check_keys(w, {"omega", "sigma", "mu", "lambda"}, "weights");
        if (w.contains("omega")) cfg.omega_exponents = typed<std::vector<double>>(w["omega"], "weights.omega");
        if (w.contains("sigma")) cfg.sigma_exponents = typed<std::vector<double>>(w["sigma"], "weights.sigma");
        if (w.contains("mu")) cfg.mu_exponents = typed<std::vector<double>>(w["mu"], "weights.mu");
        if (w.contains("lambda")) cfg.lambda_exponents = typed<std::vector<double>>(w["lambda"], "weights.lambda");
    }
    if (doc.contains("orders")) cfg.orders = typed<std::vector<int>>(doc["orders"], "orders");
    if (doc.contains("depths")) cfg.depths = typed<std::vector<int>>(doc["depths"], "depths");
    if (doc.contains("lambdas")) cfg.lambdas = typed<std::vector<double>>(doc["lambdas"], "lambdas");
    if (doc.contains("seeds")) cfg.seeds = typed<int>(doc["seeds"], "seeds");
    if (doc.contains("trials")) cfg.trials = typed<int>(doc["trials"], "trials");
    if (doc.contains("rounds")) cfg.rounds = typed<int>(doc["rounds"], "rounds");
    if (doc.contains("samples")) cfg.samples = typed<int>(doc["samples"], "samples");
    if (doc.contains("seed")) cfg.seed = typed<std::uint64_t>(doc["seed"], "seed");
    if (cfg.seeds < 0 || cfg.trials < 0 || cfg.rounds < 0 || cfg.samples < 0)
        throw ConfigError("counts must be nonnegative");
    return cfg;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), std::move(base));
}

}  // namespace sparsedom
