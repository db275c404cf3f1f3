#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "flatblow/modulation.hpp"
#include "flatblow/verifier.hpp"

namespace flatblow {

// 17 significant digits; "inf", "-inf", "nan" for non-finite values.
std::string format_double(double v);
double parse_double(const std::string& text);

std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t v);

// Columns s,q0..q6,qminus,sup,in_set. Empty input gives the header only.
std::string series_csv(const std::vector<SeriesRow>& rows);
std::vector<SeriesRow> read_series_csv(const std::string& text);

// One row per claim: id,claim,printed,measured,verdict,note.
std::string report_csv(const ExpansionReport& rep);
nlohmann::json report_json(const ExpansionReport& rep);
nlohmann::json rate_fit_json(const RateFit& f);

struct PlotSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;
};
// Line plot; with log_y, |y| on a log10 axis and nonpositive points skipped.
std::string svg_plot(const std::vector<PlotSeries>& series, const std::string& title, const std::string& x_label,
                     bool log_y);

// Writes text to dir/name, creating dir. I/O failures throw std::runtime_error
// carrying the system message.
std::string write_file(const std::string& dir, const std::string& name, const std::string& text);

// Writes stem.csv (+ stem.svg) and stem.json: config, per-file FNV-1a checksums, row count.
// Returns the paths written.
std::vector<std::string> emit_series(const std::vector<SeriesRow>& rows, const std::string& dir,
                                     const std::string& stem, const nlohmann::json& config, bool svg);
// Writes json_path (rows, counts, extra fields, config, CSV checksum) and the CSV
// next to it (extension replaced by .csv).
std::vector<std::string> emit_report(const ExpansionReport& rep, const nlohmann::json& extra,
                                     const std::string& json_path, const nlohmann::json& config);

}  // namespace flatblow
