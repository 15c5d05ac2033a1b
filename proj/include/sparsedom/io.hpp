#pragma once

#include "sparsedom/harness.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace sparsedom {

/// One CSV record: experiment,seed,quantity,value,meta.
struct CsvRecord {
    std::string experiment;
    std::uint64_t seed = 0;
    std::string quantity;
    double value = 0.0;
    std::string meta;
};

inline constexpr const char* kCsvHeader = "experiment,seed,quantity,value,meta";

/// 17 significant digits, round-trip exact.
std::string format_value(double v);

/// Writes the header and every row; non-finite values raise an IoError.
void write_csv(std::ostream& out, const std::vector<Report>& reports);
std::vector<CsvRecord> read_csv(std::istream& in);

struct SvgSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct SvgPlot {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_y = false;
    std::vector<SvgSeries> series;
};

void write_svg(std::ostream& out, const SvgPlot& plot);

struct OutputPaths {
    std::string dir = ".";
    std::string stem = "report";
    bool csv = true;
    bool svg = false;
};

/// Writes <dir>/<stem>.csv and, when requested, <dir>/<stem>.svg; returns the written paths.
std::vector<std::string> emit_report(const std::vector<Report>& reports, const OutputPaths& paths,
                                     const SvgPlot* plot = nullptr);

/// Overlays a JSON document on `base`; unknown keys raise a ConfigError.
ExperimentConfig parse_config(const std::string& json_text, ExperimentConfig base);
ExperimentConfig load_config(const std::string& path, ExperimentConfig base);

}  // namespace sparsedom
