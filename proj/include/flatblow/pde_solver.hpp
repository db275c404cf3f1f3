#pragma once

#include <array>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "flatblow/dopri.hpp"
#include "flatblow/errors.hpp"
#include "flatblow/hermite.hpp"
#include "flatblow/params.hpp"

namespace flatblow {

struct RadialField {
  std::vector<double> r;
  std::vector<double> u;
  double t = 0.0;
};

// w~ = phi + q on a y grid. `q` is the perturbation relative to phi(., s) when the
// producer tracked it directly (w-solver, initial data); empty otherwise.
struct SimilarityFrame {
  std::vector<double> y;
  std::vector<double> w;
  std::vector<double> q;
  double s = 0.0;
  double a = 1.0;
};

struct SolverStats {
  long accepted = 0;
  long rejected = 0;
  long rhs_evals = 0;
  double dt_min = std::numeric_limits<double>::infinity();
  double dt_max = 0.0;
};

// Runtime check that du/dt ~ u^p where u is large: for nodes with u >= u_large,
// worst |u_t/u^p - 1| and the smallest C with |u_t - u^p| <= eps u^p + C.
struct OdeLocalization {
  double eps = 0.2;
  double u_large = 10.0;
  long samples = 0;
  double worst_ratio_dev = 0.0;
  double c_eps = 0.0;
};

struct Trajectory {
  std::vector<RadialField> radial;
  std::vector<SimilarityFrame> frames;
  SolverStats stats;
  std::string stop_reason;
  std::vector<std::pair<std::string, double>> settings;
  // Radial runs: max |u| over r <= eps0/4 * r0 for every accepted step, and per snapshot.
  double regular_max = 0.0;
  std::vector<double> regular_series;
  OdeLocalization ode;
};

// ---- grids -----------------------------------------------------------------

struct YGrid {
  double L = 20.0;
  double dy = 0.05;
};
std::vector<double> make_y_grid(const YGrid& g = {});

struct RGrid {
  double r_max = 3.0;
  double dr_fine = 1e-3;
  double fine_halfwidth = 0.2;
  double dr_coarse = 1e-2;
  double growth = 1.05;
};
// Uniform dr_fine on |r - ring| <= fine_halfwidth, geometric growth up to dr_coarse
// outside, endpoints 0 and r_max included.
std::vector<double> make_r_grid(const RGrid& g = {}, double ring = 1.0);

// ---- initial data ----------------------------------------------------------

struct InitialData {
  SimilarityFrame frame;
  RadialField field;
  double T = 0.0;  // blow-up time of the construction, t0 = T - e^{-s0}
};

// w1 = chi((1 + y e^{-s0/2})/eps0) (E/D + (p-1)/(kappa D^2) A e^{-2 s0} S(y))^{1/(p-1)},
// S = d0 + d1 h1 + ... + d5 h5 (d6 holds d0..d5). The physical field lives on a sphere of
// radius r0 (rescaled from the unit-sphere construction) with t0 = 0.
InitialData build_initial_data(const std::array<double, 6>& d6, const ModelParams& mp,
                               const YGrid& yg = {}, const RGrid& rg = {});

// ---- radial equation --------------------------------------------------------

struct RadialSettings {
  double rtol = 1e-8;
  double atol = 1e-10;
  double c_safe = 0.25;
  double snapshot_dt = std::numeric_limits<double>::infinity();
  double snapshot_growth = 1.05;
  double ode_eps = 0.2;
  double ode_u_large = 10.0;
};

struct RadialStop {
  double t_end = std::numeric_limits<double>::infinity();
  double u_cap = 1e12;
  double dt_floor = 1e-300;
  long max_steps = 100'000'000;
};

// u_t = u_rr + (d-1)/r u_r + |u|^{p-1} u, d u_rr at r=0, homogeneous Neumann at r_max.
// Stops on t_end ("time"), sup|u| >= u_cap ("blowup") or dt < dt_floor ("step_floor");
// the last snapshot is always the final accepted state. NaN throws NumericError.
Trajectory solve_radial(const RadialField& field, const ModelParams& mp, const RadialStop& stop,
                        const RadialSettings& rs = {});

// ---- similarity-variable equation -------------------------------------------

struct WSettings {
  double rtol = 1e-7;
  double atol = 1e-15;
  double c_safe = 0.25;
  double snapshot_ds = 0.01;
  bool upwind = false;
  bool keep_frames = true;
};

/**
 * Right-hand side for the perturbation q = w~ - phi of the cut-off equation:
 * q_s = q'' - y/2 q' - q/(p-1) + c q' + N(q) + R + c phi' + F,
 * c = chi(2r/eps0)(d-1) e^{-s/2}/r, r = 1 + y e^{-s/2}.
 */
class WEquation {
 public:
  WEquation(const ModelParams& mp, std::vector<double> y, const WSettings& ws);
  void rhs(double s, const double* q, double* out);
  const std::vector<double>& y() const { return y_; }
  double dy() const { return dy_; }
  std::vector<double> phi_values(double s) const;
  long evals() const { return evals_; }

 private:
  void prepare(double s);
  ModelParams mp_;
  double kappa_;
  WSettings ws_;
  std::vector<double> y_;
  double dy_;
  double cached_s_ = std::numeric_limits<double>::quiet_NaN();
  bool cutoff_active_ = false;
  std::vector<double> phi_, phi_y_, src_, phipm1_, drift_, chi_, chi_y_, chi_yy_, chi_s_;
  std::vector<double> lo_, di_, hi_, tmp_;
  long evals_ = 0;
};

/**
 * Adaptive integrator for WEquation with access to the last accepted step, so a
 * caller can re-step from it with any h (exit-time location).
 */
class WIntegrator {
 public:
  WIntegrator(const ModelParams& mp, const SimilarityFrame& start, const WSettings& ws = {});

  double s() const { return s_; }
  const std::vector<double>& q() const { return q_; }
  double prev_s() const { return s_prev_; }
  const std::vector<double>& prev_q() const { return q_prev_; }
  const std::vector<double>& y() const { return eq_.y(); }

  // One accepted step, never past s_stop. Returns false when s() >= s_stop.
  bool step(double s_stop);
  // Single 5th-order step of size h from the previous accepted state.
  void restep_from_previous(double h, std::vector<double>& q_out);

  SimilarityFrame frame() const;
  SimilarityFrame frame_of(double s, const std::vector<double>& q) const;
  const SolverStats& stats() const { return stats_; }
  const WEquation& equation() const { return eq_; }

 private:
  ModelParams mp_;
  WSettings ws_;
  WEquation eq_;
  DormandPrince dp_;
  OdeRhs f_;
  double s_, s_prev_;
  double h_;
  std::vector<double> q_, k_, q_prev_, k_prev_, q_new_, k_new_, scratch_;
  SolverStats stats_;
};

// Observer sees each accepted step; returning false stops the run ("observer").
using WObserver = std::function<bool(const WIntegrator&)>;

// Runs to s_end ("time"); frames are stored every snapshot_ds plus the endpoints.
Trajectory solve_w_equation(const SimilarityFrame& start, const ModelParams& mp, double s_end,
                            const WSettings& ws = {}, const WObserver& obs = {});

// ---- frame conversion --------------------------------------------------------

// w_a(y, s) = (T-t)^{1/(p-1)} u(a + y sqrt(T-t)), s = -log(T-t), resampled on y_grid
// with a monotone cubic. Points mapping outside [0, r_max] throw BoundsError.
SimilarityFrame to_similarity(const RadialField& field, double T, double a, const ModelParams& mp,
                              const std::vector<double>& y_grid = make_y_grid());

// ---- blow-up analysis --------------------------------------------------------

struct NotBlowingUp : NumericError {
  using NumericError::NumericError;
};
struct InsufficientResolution : NumericError {
  using NumericError::NumericError;
};

struct BlowupEstimate {
  double T_est = 0.0;
  double r_blow = 0.0;
  double cell = 0.0;  // local grid spacing at r_blow
  double r2 = 0.0;
  int n_points = 0;
};

// Linear fit of sup|u|^{-(p-1)} against t over the last decade of growth.
BlowupEstimate detect_blowup(const Trajectory& traj, const ModelParams& mp);

struct ProfileReport {
  std::vector<double> xi;
  std::vector<double> ratio;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  double spread = 0.0;
  double dr = 0.0;
};

// Ratios u/u_star(|r - r0|) at the last snapshot over 2 dr <= |r - r0| <= 10 dr.
ProfileReport final_profile_check(const Trajectory& traj, double T_est, const ModelParams& mp);

}  // namespace flatblow
