#include "flatblow/shooting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <thread>

#include "json.hpp"

#include "flatblow/kernels.hpp"

namespace flatblow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct RowEval {
  const ShootingParams& sp;
  const WEquation& eq;
  Quadrature rule;
  std::vector<std::size_t> inner;  // |y| <= 2

  RowEval(const ShootingParams& sp_, const WEquation& eq_) : sp(sp_), eq(eq_), rule(grid_rule(eq_.y())) {
    for (std::size_t j = 0; j < eq.y().size(); ++j) {
      if (std::abs(eq.y()[j]) <= 2.0) inner.push_back(j);
    }
  }

  SeriesRow operator()(double s, const std::vector<double>& q) const {
    SeriesRow row;
    row.s = s;
    const SpectralDecomp dec = decompose_values(q, rule);
    row.q = dec.q;
    row.q_minus = dec.q_minus_norm;
    const std::vector<double> phi = eq.phi_values(s);
    double sup = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) sup = std::max(sup, std::abs(phi[j] + q[j]));
    row.sup_w = sup;
    row.membership = check_membership(dec, sup, s, sp.set);
    return row;
  }

  double inner_sup(const std::vector<double>& q) const {
    double m = 0.0;
    for (std::size_t j : inner) m = std::max(m, std::abs(q[j]));
    return m;
  }
};

double worst_margin(const MembershipReport& m) {
  double w = 0.0;
  for (int c = 0; c < kRegular; ++c) w = std::max(w, m.margins[static_cast<std::size_t>(c)]);
  return w;
}

D6 coords_of(const SeriesRow& row, const ShootingParams& sp) {
  D6 c{};
  const double scale = std::exp(2.0 * row.s) / sp.set.A;
  for (int i = 0; i < 6; ++i) c[static_cast<std::size_t>(i)] = row.q[static_cast<std::size_t>(i)] * scale;
  return c;
}

int side(double v) { return v < 0.0 ? -1 : 1; }

}  // namespace

ShootingParams ShootingParams::from(const ModelParams& mp) {
  ShootingParams sp;
  sp.mp = mp;
  sp.set = ShrinkingSetParams::from(mp);
  sp.ws.keep_frames = false;
  return sp;
}

std::string make_run_id(const D6& d6) {
  std::uint64_t h = 14695981039346656037ULL;
  for (double v : d6) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &v, sizeof(double));
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 1099511628211ULL;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExitRun run_to_exit(const D6& d6, const ShootingParams& sp, double s_budget) {
  const ModelParams& mp = sp.mp;
  ExitRun out;
  ShootingState& st = out.state;
  st.d6 = d6;
  st.run_id = make_run_id(d6);
  st.s_budget = s_budget;

  const InitialData id = build_initial_data(d6, mp, sp.yg, sp.rg);
  WIntegrator integ(mp, id.frame, sp.ws);
  const RowEval eval(sp, integ.equation());

  SeriesRow row = eval(integ.s(), integ.q());
  st.sup_q_start = eval.inner_sup(integ.q());
  st.sup_q_last = st.sup_q_start;
  out.series.push_back(row);
  if (!row.membership.in_set) {
    st.s_exit = row.s;
    st.exit = row.membership.exit;
    st.exit_margin = row.membership.margins[static_cast<std::size_t>(st.exit->component)];
    st.exit_coords = coords_of(row, sp);
    out.last_in_set = integ.frame();
    out.at_exit = out.last_in_set;
    return out;
  }

  double last_sample = row.s;
  try {
    while (integ.s() < s_budget) {
      integ.step(s_budget);
      row = eval(integ.s(), integ.q());
      if (row.membership.in_set) {
        if (integ.s() - last_sample >= sp.sample_ds * (1.0 - 1e-9) || integ.s() >= s_budget) {
          out.series.push_back(row);
          last_sample = integ.s();
        }
        continue;
      }
      // Exit inside (prev_s, s]: shrink the step until the worst margin is 1 + O(tol).
      const double s_prev = integ.prev_s();
      double lo = 0.0;
      double hi = integ.s() - s_prev;
      std::vector<double> q_try;
      SeriesRow hi_row = row;
      for (int it = 0; it < 200 && worst_margin(hi_row.membership) - 1.0 > sp.exit_tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        integ.restep_from_previous(mid, q_try);
        SeriesRow r = eval(s_prev + mid, q_try);
        if (r.membership.in_set) {
          lo = mid;
        } else {
          hi = mid;
          hi_row = std::move(r);
        }
      }
      st.s_exit = hi_row.s;
      st.exit = hi_row.membership.exit;
      st.exit_margin = hi_row.membership.margins[static_cast<std::size_t>(st.exit->component)];
      st.exit_coords = coords_of(hi_row, sp);
      st.sup_q_last = eval.inner_sup(integ.prev_q());
      out.last_in_set = integ.frame_of(s_prev, integ.prev_q());
      if (hi == integ.s() - s_prev) {
        out.at_exit = integ.frame();
      } else {
        integ.restep_from_previous(hi, q_try);
        out.at_exit = integ.frame_of(hi_row.s, q_try);
      }
      out.series.push_back(hi_row);
      break;
    }
  } catch (const NumericError& e) {
    st.s_exit = integ.s();
    throw ShootingFault(std::string("run ") + st.run_id + ": " + e.what(), st);
  }

  if (!st.exit) {
    st.exit_coords = coords_of(out.series.back(), sp);
    st.sup_q_last = eval.inner_sup(integ.q());
    out.last_in_set = integ.frame();
    return out;
  }

  const int comp = st.exit->component;
  if (comp <= kSup && out.series.size() >= 3) {
    std::vector<FlowSample> window;
    const std::size_t n = out.series.size();
    for (std::size_t k = n >= 5 ? n - 5 : 0; k < n; ++k) {
      window.push_back({out.series[k].s, component_value(out.series[k], comp)});
    }
    try {
      st.flow = exit_flow_direction(window, *st.exit, sp.set).flow;
    } catch (const NumericError&) {
    }
  }
  if (comp <= 5 && st.s_exit - mp.s0 >= 1.0) {
    bool mono = true;
    double prev = -kInf;
    for (const SeriesRow& r : out.series) {
      if (r.s < st.s_exit - 0.5) continue;
      const double ratio = std::abs(r.q[static_cast<std::size_t>(comp)]) / sp.set.envelope(comp, r.s);
      if (ratio < prev) mono = false;
      prev = ratio;
    }
    out.monotone_growth = mono;
  }
  return out;
}

ShootingState exit_time(const D6& d6, const ShootingParams& sp, double s_budget) {
  return run_to_exit(d6, sp, s_budget).state;
}

int thread_cap() {
  if (const char* env = std::getenv("FLATBLOW_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
}

std::vector<ShootingState> evaluate_many(const std::vector<D6>& points, const Evaluator& eval, int threads) {
  std::vector<ShootingState> out(points.size());
  if (threads <= 0) threads = thread_cap();
  threads = std::min<int>(threads, static_cast<int>(points.size()));
  if (threads <= 1) {
    for (std::size_t k = 0; k < points.size(); ++k) out[k] = eval(points[k]);
    return out;
  }
  std::vector<std::exception_ptr> errs(points.size());
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t k = static_cast<std::size_t>(t); k < points.size(); k += static_cast<std::size_t>(threads)) {
        try {
          out[k] = eval(points[k]);
        } catch (...) {
          errs[k] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errs) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

namespace {

void keep_best(ShootingState& best, const ShootingState& cand, bool& have) {
  if (!have || cand.s_exit > best.s_exit) {
    best = cand;
    have = true;
  }
}

}  // namespace

Bracket bisect_coordinate(int i, const Bracket& start, const D6& frozen, const Evaluator& eval, int steps,
                          std::vector<ShootingState>* history) {
  if (i < 0 || i > 5) throw BoundsError("bisect_coordinate: mode index must be in 0..5");
  const auto ui = static_cast<std::size_t>(i);
  Bracket b = start;
  const int s_lo = side(b.at_lo.exit_coords[ui]);
  const int s_hi = side(b.at_hi.exit_coords[ui]);
  if (s_lo == s_hi) {
    throw InvalidBracket("bisect_coordinate: both ends of [" + std::to_string(b.lo) + ", " +
                         std::to_string(b.hi) + "] leave with the same sign on mode " + std::to_string(i));
  }
  bool have = false;
  keep_best(b.best, b.at_lo, have);
  keep_best(b.best, b.at_hi, have);
  for (int k = 0; k < steps; ++k) {
    D6 d = frozen;
    d[ui] = 0.5 * (b.lo + b.hi);
    ShootingState st = eval(d);
    ++b.evaluations;
    if (history) history->push_back(st);
    keep_best(b.best, st, have);
    if (side(st.exit_coords[ui]) == s_lo) {
      b.lo = d[ui];
      b.at_lo = std::move(st);
    } else {
      b.hi = d[ui];
      b.at_hi = std::move(st);
    }
  }
  return b;
}

Bracket bisect_coordinate(int i, double lo, double hi, const D6& frozen, const Evaluator& eval, int steps,
                          std::vector<ShootingState>* history) {
  if (i < 0 || i > 5) throw BoundsError("bisect_coordinate: mode index must be in 0..5");
  Bracket b;
  b.lo = lo;
  b.hi = hi;
  D6 dl = frozen, dh = frozen;
  dl[static_cast<std::size_t>(i)] = lo;
  dh[static_cast<std::size_t>(i)] = hi;
  b.at_lo = eval(dl);
  b.at_hi = eval(dh);
  if (history) {
    history->push_back(b.at_lo);
    history->push_back(b.at_hi);
  }
  Bracket r = bisect_coordinate(i, b, frozen, eval, steps, history);
  r.evaluations += 2;
  return r;
}

SearchResult search_with(const Evaluator& raw_eval, double s_target, const SearchOptions& opt) {
  SearchResult res;
  std::map<std::string, ShootingState> cache;
  if (!opt.history_path.empty()) {
    std::ifstream probe(opt.history_path);
    if (probe) {
      for (const ShootingState& st : load_history(opt.history_path)) cache[st.run_id] = st;
      res.resumed = !cache.empty();
    }
  }
  std::ofstream hist;
  if (!opt.history_path.empty()) {
    hist.open(opt.history_path, std::ios::app);
    if (!hist) throw std::runtime_error("search: cannot open history file " + opt.history_path);
  }

  int round = 0;
  bool have_best = false;
  auto record = [&](ShootingState st, bool fresh) {
    st.round = round;
    st.index = res.evaluations++;
    if (fresh && hist) {
      hist << to_json_line(st) << '\n';
      hist.flush();
    }
    res.history.push_back(st);
    keep_best(res.best, st, have_best);
    return st;
  };
  auto eval_one = [&](const D6& d) {
    const std::string id = make_run_id(d);
    if (auto it = cache.find(id); it != cache.end()) return record(it->second, false);
    return record(raw_eval(d), true);
  };
  auto eval_pair = [&](const D6& a, const D6& b) {
    std::vector<D6> todo;
    for (const D6* d : {&a, &b}) {
      if (!cache.count(make_run_id(*d))) todo.push_back(*d);
    }
    std::set<std::string> fresh_ids;
    for (const ShootingState& st : evaluate_many(todo, raw_eval, opt.threads)) {
      cache[st.run_id] = st;
      fresh_ids.insert(st.run_id);
    }
    auto rec = [&](const D6& d) {
      const std::string id = make_run_id(d);
      return record(cache.at(id), fresh_ids.count(id) > 0);
    };
    std::pair<ShootingState, ShootingState> out;
    out.first = rec(a);
    out.second = rec(b);
    return out;
  };
  auto done = [&] {
    res.reached_target = have_best && res.best.s_exit >= s_target;
    return res.reached_target || res.evaluations >= opt.budget;
  };

  eval_one(D6{});
  std::array<double, 6> hw;
  hw.fill(opt.initial_halfwidth);
  while (!done()) {
    ++round;
    D6 center = res.best.d6;
    bool progressed = false;
    for (int i = 0; i < 6 && !done(); ++i) {
      const auto ui = static_cast<std::size_t>(i);
      double lo = std::max(-2.0, center[ui] - hw[ui]);
      double hi = std::min(2.0, center[ui] + hw[ui]);
      if (res.evaluations + 2 > opt.budget) break;
      D6 dl = center, dh = center;
      dl[ui] = lo;
      dh[ui] = hi;
      auto [at_lo, at_hi] = eval_pair(dl, dh);
      while (side(at_lo.exit_coords[ui]) == side(at_hi.exit_coords[ui]) && (lo > -2.0 || hi < 2.0) &&
             res.evaluations + 2 <= opt.budget) {
        hw[ui] *= opt.widen;
        lo = std::max(-2.0, center[ui] - hw[ui]);
        hi = std::min(2.0, center[ui] + hw[ui]);
        dl[ui] = lo;
        dh[ui] = hi;
        std::tie(at_lo, at_hi) = eval_pair(dl, dh);
      }
      if (side(at_lo.exit_coords[ui]) == side(at_hi.exit_coords[ui])) {
        // No sign change inside the box: move toward the longer-lived end.
        center[ui] = at_lo.s_exit >= at_hi.s_exit ? lo : hi;
        continue;
      }
      Bracket b;
      b.lo = lo;
      b.hi = hi;
      b.at_lo = at_lo;
      b.at_hi = at_hi;
      const int steps = std::min(opt.bisect_steps, opt.budget - res.evaluations);
      Evaluator inner = [&](const D6& d) { return eval_one(d); };
      b = bisect_coordinate(i, b, center, inner, steps);
      center[ui] = 0.5 * (b.lo + b.hi);
      hw[ui] = std::max(b.hi - b.lo, 1e-12);
      progressed = true;
    }
    if (!progressed && res.evaluations >= opt.budget) break;
    if (!progressed) {
      // Every coordinate is pinned at the box; nothing left to bisect.
      break;
    }
  }
  res.rounds = round;
  res.reached_target = have_best && res.best.s_exit >= s_target;
  return res;
}

SearchResult search(const ShootingParams& sp, double s_target, const SearchOptions& opt) {
  const double s_budget = s_target + opt.s_budget_margin;
  Evaluator eval = [&](const D6& d) { return exit_time(d, sp, s_budget); };
  return search_with(eval, s_target, opt);
}

D6 exit_map(const D6& d6, const ShootingParams& sp, double s_probe) {
  const ShootingState st = exit_time(d6, sp, s_probe);
  if (!st.exited()) throw NoExit("exit_map: no exit by s=" + std::to_string(s_probe));
  return st.exit_coords;
}

namespace {

nlohmann::json num(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }
double num_of(const nlohmann::json& j) { return j.is_null() ? kInf : j.get<double>(); }

}  // namespace

std::string to_json_line(const ShootingState& st) {
  nlohmann::json j;
  j["run_id"] = st.run_id;
  j["d6"] = st.d6;
  j["s_exit"] = num(st.s_exit);
  j["s_budget"] = st.s_budget;
  if (st.exit) {
    j["exit"] = {{"component", st.exit->component}, {"theta", st.exit->theta}};
  } else {
    j["exit"] = nullptr;
  }
  j["exit_coords"] = st.exit_coords;
  j["exit_margin"] = st.exit_margin;
  j["flow"] = st.flow ? nlohmann::json(flow_name(*st.flow)) : nlohmann::json(nullptr);
  j["sup_q_start"] = st.sup_q_start;
  j["sup_q_last"] = st.sup_q_last;
  j["round"] = st.round;
  j["index"] = st.index;
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::strict);
}

ShootingState from_json_line(const std::string& line) {
  const nlohmann::json j = nlohmann::json::parse(line);
  ShootingState st;
  st.run_id = j.at("run_id").get<std::string>();
  st.d6 = j.at("d6").get<D6>();
  st.s_exit = num_of(j.at("s_exit"));
  st.s_budget = j.at("s_budget").get<double>();
  if (!j.at("exit").is_null()) {
    st.exit = ExitSig{j["exit"].at("component").get<int>(), j["exit"].at("theta").get<int>()};
  }
  st.exit_coords = j.at("exit_coords").get<D6>();
  st.exit_margin = j.at("exit_margin").get<double>();
  if (!j.at("flow").is_null()) {
    const std::string f = j["flow"].get<std::string>();
    st.flow = f == "outward" ? Flow::Outward : f == "inward" ? Flow::Inward : Flow::Ambiguous;
  }
  st.sup_q_start = j.at("sup_q_start").get<double>();
  st.sup_q_last = j.at("sup_q_last").get<double>();
  st.round = j.at("round").get<int>();
  st.index = j.at("index").get<int>();
  return st;
}

std::vector<ShootingState> load_history(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_history: cannot open " + path);
  std::vector<ShootingState> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(from_json_line(line));
  }
  return out;
}

}  // namespace flatblow
