#pragma once

#include <array>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "flatblow/modulation.hpp"
#include "flatblow/pde_solver.hpp"

namespace flatblow {

using D6 = std::array<double, 6>;

struct ShootingParams {
  ModelParams mp;
  ShrinkingSetParams set;  // from(mp) unless overridden
  YGrid yg;
  RGrid rg;
  WSettings ws;
  double sample_ds = 0.01;   // spacing of the recorded series
  double exit_tol = 1e-9;    // |margin - 1| at the located exit

  static ShootingParams from(const ModelParams& mp);
};

struct ShootingState {
  D6 d6{};
  double s_exit = std::numeric_limits<double>::infinity();  // inf: budget reached
  std::optional<ExitSig> exit;
  std::string run_id;
  double s_budget = 0.0;
  // (q_0..q_5) e^{2s}/A at the exit, or at the budget end without one.
  D6 exit_coords{};
  double exit_margin = 0.0;
  std::optional<Flow> flow;
  // sup_{|y|<=2} |q| at s0 and at the last in-set sample.
  double sup_q_start = 0.0;
  double sup_q_last = 0.0;
  int round = 0;
  int index = 0;

  bool exited() const { return exit.has_value(); }
};

struct ExitRun {
  ShootingState state;
  std::vector<SeriesRow> series;  // every sample_ds, last row at the exit
  SimilarityFrame last_in_set;
  SimilarityFrame at_exit;
  // Exit through i <= 5 only: |q_i|/envelope increased monotonically over the final 0.5.
  std::optional<bool> monotone_growth;
};

// Numeric fault during an evaluation; `partial` holds what was known.
struct ShootingFault : NumericError {
  ShootingFault(const std::string& msg, ShootingState st) : NumericError(msg), partial(std::move(st)) {}
  ShootingState partial;
};

struct NoExit : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidBracket : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string make_run_id(const D6& d6);

// Integrates from s0 with membership checked on every accepted step; the exit is
// located by bisection on the step size to |margin - 1| <= exit_tol.
ExitRun run_to_exit(const D6& d6, const ShootingParams& sp, double s_budget);
ShootingState exit_time(const D6& d6, const ShootingParams& sp, double s_budget);

using Evaluator = std::function<ShootingState(const D6&)>;

// Thread count: FLATBLOW_THREADS if set, else hardware concurrency (at least 1).
int thread_cap();
// Runs eval on every point; results are returned in input order.
std::vector<ShootingState> evaluate_many(const std::vector<D6>& points, const Evaluator& eval,
                                         int threads = 0);

struct Bracket {
  double lo = 0.0;
  double hi = 0.0;
  ShootingState at_lo;
  ShootingState at_hi;
  ShootingState best;  // longest s_exit among all evaluations
  int evaluations = 0;
};

// Sign of the exit coordinate i decides the side. Throws InvalidBracket when both
// ends share a sign.
Bracket bisect_coordinate(int i, double lo, double hi, const D6& frozen, const Evaluator& eval,
                          int steps, std::vector<ShootingState>* history = nullptr);
Bracket bisect_coordinate(int i, const Bracket& start, const D6& frozen, const Evaluator& eval,
                          int steps, std::vector<ShootingState>* history = nullptr);

struct SearchOptions {
  int budget = 500;           // trajectory evaluations
  int bisect_steps = 8;
  double initial_halfwidth = 2.0;
  double widen = 4.0;
  double s_budget_margin = 0.5;  // trajectories run to s_target + margin
  std::string history_path;      // JSON lines; resumes from it when present
  int threads = 0;
};

struct SearchResult {
  ShootingState best;
  std::vector<ShootingState> history;
  int evaluations = 0;
  int rounds = 0;
  bool reached_target = false;
  bool resumed = false;
};

// Round 0 evaluates d6 = 0; each round then cycles i = 0..5, widening brackets by
// `widen` until the exit coordinate changes sign and bisecting on it.
SearchResult search(const ShootingParams& sp, double s_target, const SearchOptions& opt = {});
// Same driver over an arbitrary evaluator (used with synthetic models).
SearchResult search_with(const Evaluator& eval, double s_target, const SearchOptions& opt);

// (q_0..q_5)(s*) e^{2 s*}/A; throws NoExit when nothing exits by s_probe.
D6 exit_map(const D6& d6, const ShootingParams& sp, double s_probe);

std::string to_json_line(const ShootingState& st);
ShootingState from_json_line(const std::string& line);
std::vector<ShootingState> load_history(const std::string& path);

}  // namespace flatblow
