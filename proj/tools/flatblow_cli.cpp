#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "flatblow/config.hpp"
#include "flatblow/emit.hpp"
#include "flatblow/profile.hpp"
#include "flatblow/shooting.hpp"
#include "flatblow/verifier.hpp"

using namespace flatblow;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitNoTarget = 4;

void print_paths(const std::vector<std::string>& paths) {
  for (const std::string& p : paths) std::cout << "wrote " << p << "\n";
}

int run_simulate(const RunConfig& c) {
  const nlohmann::json cfg = config_to_json(c);
  const InitialData init = build_initial_data(c.d6, c.mp, c.yg, c.rg);
  if (c.physical) {
    const Trajectory tr = solve_radial(init.field, c.mp, RadialStop{}, c.rs);
    std::string csv = "t,sup_u,regular_max\n";
    for (std::size_t k = 0; k < tr.radial.size(); ++k) {
      double sup = 0.0;
      for (double u : tr.radial[k].u) sup = std::max(sup, std::abs(u));
      const double reg = k < tr.regular_series.size() ? tr.regular_series[k] : std::nan("");
      csv += format_double(tr.radial[k].t) + "," + format_double(sup) + "," + format_double(reg) + "\n";
    }
    nlohmann::json meta;
    meta["config"] = cfg;
    meta["stop_reason"] = tr.stop_reason;
    meta["T_construction"] = init.T;
    meta["regular_max"] = tr.regular_max;
    meta["checksums"] = {{"radial.csv", "fnv1a64:" + hex64(fnv1a64(csv))}};
    std::cout << "stop: " << tr.stop_reason << ", steps " << tr.stats.accepted << ", regular_max "
              << format_double(tr.regular_max) << "\n";
    if (tr.stop_reason == "blowup") {
      const BlowupEstimate be = detect_blowup(tr, c.mp);
      const ProfileReport pr = final_profile_check(tr, be.T_est, c.mp);
      meta["blowup"] = {{"T_est", be.T_est}, {"r_blow", be.r_blow}, {"cell", be.cell}, {"r2", be.r2}};
      meta["profile_ratio"] = {{"min", pr.min_ratio}, {"max", pr.max_ratio}};
      std::cout << "T_est " << format_double(be.T_est) << ", r_blow " << format_double(be.r_blow) << " (cell "
                << format_double(be.cell) << "), u/u* in [" << pr.min_ratio << ", " << pr.max_ratio << "]\n";
    }
    print_paths({write_file(c.out_dir, "radial.csv", csv), write_file(c.out_dir, "radial.json", meta.dump(2) + "\n")});
    return 0;
  }
  WSettings ws = c.ws;
  ws.keep_frames = true;
  const Trajectory tr = solve_w_equation(init.frame, c.mp, c.s_end, ws);
  const ShrinkingSetParams set = ShrinkingSetParams::from(c.mp);
  std::vector<SeriesRow> rows;
  rows.reserve(tr.frames.size());
  for (const SimilarityFrame& f : tr.frames) rows.push_back(summarize(f, c.mp, set, grid_rule(f.y)));
  const auto left = std::find_if(rows.begin(), rows.end(), [](const SeriesRow& r) { return !r.membership.in_set; });
  std::cout << "s " << format_double(c.mp.s0) << " -> " << format_double(tr.frames.back().s) << ", "
            << rows.size() << " rows, ";
  if (left == rows.end()) {
    std::cout << "in the shrinking set throughout\n";
  } else {
    std::cout << "leaves the shrinking set at s=" << format_double(left->s) << " through "
              << component_name(left->membership.exit ? left->membership.exit->component : -1) << "\n";
  }
  print_paths(emit_series(rows, c.out_dir, "simulate", config_to_json(c), c.svg));
  return 0;
}

int run_shoot(const RunConfig& c) {
  ShootingParams sp = ShootingParams::from(c.mp);
  sp.yg = c.yg;
  sp.rg = c.rg;
  sp.ws = c.ws;
  sp.ws.keep_frames = false;
  SearchOptions opt;
  opt.budget = c.budget;
  opt.bisect_steps = c.bisect_steps;
  opt.threads = c.threads;
  std::filesystem::create_directories(c.out_dir);
  opt.history_path = (std::filesystem::path(c.out_dir) / "shoot_history.jsonl").string();
  const SearchResult r = search(sp, c.s_target, opt);
  std::cout << (r.resumed ? "resumed, " : "") << r.evaluations << " evaluations, " << r.rounds << " rounds, best s_exit - s0 = "
            << format_double(r.best.s_exit - c.mp.s0) << "\n";
  const ExitRun best = run_to_exit(r.best.d6, sp, c.s_target + opt.s_budget_margin);
  std::vector<std::string> paths = emit_series(best.series, c.out_dir, "shoot_best", config_to_json(c), c.svg);
  nlohmann::json res;
  res["best"] = nlohmann::json::parse(to_json_line(r.best));
  res["evaluations"] = r.evaluations;
  res["rounds"] = r.rounds;
  res["reached_target"] = r.reached_target;
  res["history"] = opt.history_path;
  paths.push_back(write_file(c.out_dir, "shoot_result.json", res.dump(2) + "\n"));
  paths.push_back(opt.history_path);
  print_paths(paths);
  return r.reached_target ? 0 : kExitNoTarget;
}

int run_verify(const RunConfig& c) {
  const ExpansionReport rep = verify_expansion_suite(c.mp);
  const DecaySuite ds = decay_rate_suite(c.mp);
  nlohmann::json decay;
  for (int i = 0; i < 7; ++i) {
    const auto u = static_cast<std::size_t>(i);
    const std::string key = "P" + std::to_string(i) + "R";
    decay[key] = ds.parity_zero[u] ? nlohmann::json{{"identically_zero", true}} : rate_fit_json(ds.modes[u]);
  }
  decay["tail"] = rate_fit_json(ds.tail);
  decay["V"] = rate_fit_json(ds.potential);
  const std::string path =
      c.out.empty() ? (std::filesystem::path(c.out_dir) / "verify.json").string() : c.out;
  print_paths(emit_report(rep, {{"decay", decay}}, path, config_to_json(c)));
  std::cout << "p=" << c.mp.p << ": " << rep.count(Verdict::Match) << " match, " << rep.count(Verdict::Mismatch)
            << " mismatch, " << rep.count(Verdict::MeasuredOnly) << " measured-only\n";
  return 0;
}

int run_spectral(const RunConfig& c) {
  std::ifstream in(c.input);
  if (!in) throw std::runtime_error("cannot open " + c.input);
  std::vector<double> y, v;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string a, b;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',')) throw UsageError("input", "expects y,value rows");
    try {
      y.push_back(parse_double(a));
      v.push_back(parse_double(b));
    } catch (const std::invalid_argument&) {
      if (y.empty() && v.empty()) continue;  // header
      throw UsageError("input", "not a number in row '" + line + "'");
    }
  }
  if (y.size() < 3) throw UsageError("input", "needs at least 3 rows");
  const SpectralDecomp dec = decompose_values(v, grid_rule(y));
  nlohmann::json out;
  out["input"] = c.input;
  out["q"] = std::vector<double>(dec.q.begin(), dec.q.end());
  out["q_minus_norm"] = dec.q_minus_norm;
  out["norm_sq"] = dec.norm_sq;
  for (std::size_t m = 0; m < dec.q.size(); ++m) std::cout << "q" << m << " " << format_double(dec.q[m]) << "\n";
  std::cout << "qminus " << format_double(dec.q_minus_norm) << "\n";
  print_paths({write_file(c.out_dir, "spectral.json", out.dump(2) + "\n")});
  return 0;
}

int run_profile_table(const RunConfig& c) {
  std::string csv = "y,phi,V,R\n";
  std::vector<PlotSeries> ps{{"phi - kappa", {}}, {"V", {}}, {"R", {}}};
  const double kappa = c.mp.kappa();
  for (int k = 0; k < c.ny; ++k) {
    const double y = -c.y_max + 2.0 * c.y_max * k / (c.ny - 1);
    const double ph = phi(y, c.profile_s, c.mp);
    const double V = potential_V(y, c.profile_s, c.mp);
    const double R = remainder_R(y, c.profile_s, c.mp);
    csv += format_double(y) + "," + format_double(ph) + "," + format_double(V) + "," + format_double(R) + "\n";
    ps[0].points.emplace_back(y, ph - kappa);
    ps[1].points.emplace_back(y, V);
    ps[2].points.emplace_back(y, R);
  }
  std::vector<std::string> paths{write_file(c.out_dir, "profile_table.csv", csv)};
  if (c.svg) paths.push_back(write_file(c.out_dir, "profile_table.svg", svg_plot(ps, "profile terms", "y", false)));
  print_paths(paths);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    const RunConfig c = parse_config(argc, argv);
    if (c.command == "simulate") return run_simulate(c);
    if (c.command == "shoot") return run_shoot(c);
    if (c.command == "verify") return run_verify(c);
    if (c.command == "spectral") return run_spectral(c);
    return run_profile_table(c);
  } catch (const HelpRequested& h) {
    std::cout << h.what();
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\nrun 'flatblow --help' for options\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
}
