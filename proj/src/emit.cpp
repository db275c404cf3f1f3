#include "flatblow/emit.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace flatblow {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& text) {
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  // strtod, unlike stod, accepts subnormals
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) {
    throw std::invalid_argument("parse_double: not a number '" + text + "'");
  }
  return v;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

namespace {

const char* kSeriesHeader = "s,q0,q1,q2,q3,q4,q5,q6,qminus,sup,in_set\n";

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

std::string series_csv(const std::vector<SeriesRow>& rows) {
  std::string out = kSeriesHeader;
  for (const SeriesRow& r : rows) {
    out += format_double(r.s);
    for (double q : r.q) out += "," + format_double(q);
    out += "," + format_double(r.q_minus) + "," + format_double(r.sup_w) + ",";
    out += r.membership.in_set ? "1\n" : "0\n";
  }
  return out;
}

std::vector<SeriesRow> read_series_csv(const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  std::vector<SeriesRow> rows;
  if (!std::getline(ss, line) || line + "\n" != kSeriesHeader) {
    throw std::runtime_error("read_series_csv: unexpected header");
  }
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = split(line, ',');
    if (f.size() != 11) throw std::runtime_error("read_series_csv: expected 11 columns");
    SeriesRow r;
    r.s = parse_double(f[0]);
    for (std::size_t k = 0; k < r.q.size(); ++k) r.q[k] = parse_double(f[1 + k]);
    r.q_minus = parse_double(f[8]);
    r.sup_w = parse_double(f[9]);
    r.membership.in_set = f[10] == "1";
    rows.push_back(r);
  }
  return rows;
}

std::string report_csv(const ExpansionReport& rep) {
  std::string out = "id,claim,printed,measured,verdict,note\n";
  for (const ClaimRow& r : rep.rows) {
    out += csv_field(r.id) + "," + csv_field(r.claim) + ",";
    out += r.printed ? format_double(*r.printed) : "";
    out += "," + format_double(r.measured) + "," + verdict_name(r.verdict) + "," + csv_field(r.note) + "\n";
  }
  return out;
}

nlohmann::json report_json(const ExpansionReport& rep) {
  nlohmann::json rows = nlohmann::json::array();
  for (const ClaimRow& r : rep.rows) {
    nlohmann::json j;
    j["id"] = r.id;
    j["claim"] = r.claim;
    j["printed"] = r.printed ? nlohmann::json(*r.printed) : nlohmann::json(nullptr);
    j["measured"] = r.measured;
    j["verdict"] = verdict_name(r.verdict);
    if (!r.note.empty()) j["note"] = r.note;
    rows.push_back(j);
  }
  nlohmann::json out;
  out["p"] = rep.p;
  out["rows"] = rows;
  out["counts"] = {{"match", rep.count(Verdict::Match)},
                   {"mismatch", rep.count(Verdict::Mismatch)},
                   {"measured-only", rep.count(Verdict::MeasuredOnly)}};
  return out;
}

nlohmann::json rate_fit_json(const RateFit& f) {
  nlohmann::json j;
  j["slope"] = f.slope;
  j["prefactor"] = f.prefactor;
  j["r2"] = f.r2;
  j["n"] = f.samples.size();
  j["warnings"] = f.warnings;
  return j;
}

std::string svg_plot(const std::vector<PlotSeries>& series, const std::string& title, const std::string& x_label,
                     bool log_y) {
  const double W = 640, H = 400, ml = 70, mr = 110, mt = 30, mb = 45;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  auto ty = [&](double v) { return log_y ? std::log10(std::abs(v)) : v; };
  auto usable = [&](double v) { return std::isfinite(v) && (!log_y || v != 0.0); };
  for (const PlotSeries& s : series) {
    for (auto [x, y] : s.points) {
      if (!std::isfinite(x) || !usable(y)) continue;
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, ty(y));
      y1 = std::max(y1, ty(y));
    }
  }
  if (!(x1 >= x0)) {
    x0 = 0;
    x1 = 1;
    y0 = 0;
    y1 = 1;
  }
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  auto px = [&](double x) { return ml + (x - x0) / (x1 - x0) * (W - ml - mr); };
  auto py = [&](double y) { return H - mb - (y - y0) / (y1 - y0) * (H - mt - mb); };

  static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                 "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  std::ostringstream o;
  o.precision(6);
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  o << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr << "\" height=\"" << H - mt - mb
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4.0;
    const double yv = y0 + (y1 - y0) * k / 4.0;
    o << "<text x=\"" << px(xv) << "\" y=\"" << H - mb + 16 << "\" text-anchor=\"middle\" font-size=\"11\">" << xv
      << "</text>\n";
    o << "<text x=\"" << ml - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\" font-size=\"11\">"
      << (log_y ? "1e" : "") << yv << "</text>\n";
  }
  o << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 8 << "\" text-anchor=\"middle\" font-size=\"12\">"
    << x_label << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* col = colors[k % 10];
    o << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
    for (auto [x, y] : series[k].points) {
      if (!std::isfinite(x) || !usable(y)) continue;
      o << px(x) << "," << py(ty(y)) << " ";
    }
    o << "\"/>\n";
    o << "<text x=\"" << W - mr + 8 << "\" y=\"" << mt + 14 * (k + 1) << "\" font-size=\"11\" fill=\"" << col
      << "\">" << series[k].name << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::string write_file(const std::string& dir, const std::string& name, const std::string& text) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir + ": " + ec.message());
  const std::string path = (std::filesystem::path(dir) / name).string();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + ": " + std::strerror(errno));
  out << text;
  out.close();
  if (!out) throw std::runtime_error("write failed for " + path + ": " + std::strerror(errno));
  return path;
}

namespace {

std::vector<std::string> with_sidecar(const std::vector<std::pair<std::string, std::string>>& files,
                                      const std::string& dir, const std::string& stem, nlohmann::json meta) {
  std::vector<std::string> paths;
  nlohmann::json sums = nlohmann::json::object();
  for (const auto& [name, text] : files) {
    paths.push_back(write_file(dir, name, text));
    sums[name] = "fnv1a64:" + hex64(fnv1a64(text));
  }
  meta["checksums"] = sums;
  paths.push_back(write_file(dir, stem + ".json", meta.dump(2) + "\n"));
  return paths;
}

}  // namespace

std::vector<std::string> emit_series(const std::vector<SeriesRow>& rows, const std::string& dir,
                                     const std::string& stem, const nlohmann::json& config, bool svg) {
  std::vector<std::pair<std::string, std::string>> files;
  files.emplace_back(stem + ".csv", series_csv(rows));
  if (svg) {
    std::vector<PlotSeries> ps(kLowModes + 1);
    for (int m = 0; m < kLowModes; ++m) ps[static_cast<std::size_t>(m)].name = "|q" + std::to_string(m) + "|";
    ps[kLowModes].name = "qminus";
    for (const SeriesRow& r : rows) {
      for (int m = 0; m < kLowModes; ++m) {
        ps[static_cast<std::size_t>(m)].points.emplace_back(r.s, r.q[static_cast<std::size_t>(m)]);
      }
      ps[kLowModes].points.emplace_back(r.s, r.q_minus);
    }
    files.emplace_back(stem + ".svg", svg_plot(ps, stem + ": modes of q", "s", true));
  }
  nlohmann::json meta;
  meta["config"] = config;
  meta["rows"] = rows.size();
  meta["columns"] = {"s", "q0", "q1", "q2", "q3", "q4", "q5", "q6", "qminus", "sup", "in_set"};
  return with_sidecar(files, dir, stem, meta);
}

std::vector<std::string> emit_report(const ExpansionReport& rep, const nlohmann::json& extra,
                                     const std::string& json_path, const nlohmann::json& config) {
  const std::filesystem::path jp(json_path);
  const std::string dir = jp.has_parent_path() ? jp.parent_path().string() : ".";
  const std::string csv_name = jp.stem().string() + ".csv";
  const std::string csv = report_csv(rep);
  nlohmann::json body = report_json(rep);
  for (auto it = extra.begin(); it != extra.end(); ++it) body[it.key()] = it.value();
  body["config"] = config;
  body["checksums"] = {{csv_name, "fnv1a64:" + hex64(fnv1a64(csv))}};
  std::vector<std::string> paths;
  paths.push_back(write_file(dir, csv_name, csv));
  paths.push_back(write_file(dir, jp.filename().string(), body.dump(2) + "\n"));
  return paths;
}

}  // namespace flatblow
