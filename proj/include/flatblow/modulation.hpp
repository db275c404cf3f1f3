#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "flatblow/hermite.hpp"
#include "flatblow/params.hpp"
#include "flatblow/pde_solver.hpp"

namespace flatblow {

/**
 * Envelopes of the shrinking set. Defaults: |q_k| <= A e^{-2s} (k <= 5),
 * |q_6| <= A s^2 e^{-2s}, ||q_-|| <= A^2 s^2 e^{-3s}, sup|w| <= 2 kappa.
 * The A and s exponents of the q_6 and tail envelopes are configurable.
 */
struct ShrinkingSetParams {
  double A = 1.0;
  double kappa = 1.0;
  double eta0 = 1.0;
  double top_A_power = 1.0;
  double top_s_power = 2.0;
  double tail_A_power = 2.0;
  double tail_s_power = 2.0;

  static ShrinkingSetParams from(const ModelParams& mp);

  double low(double s) const { return A * std::exp(-2.0 * s); }
  double top(double s) const {
    return std::pow(A, top_A_power) * std::pow(s, top_s_power) * std::exp(-2.0 * s);
  }
  double tail(double s) const {
    return std::pow(A, tail_A_power) * std::pow(s, tail_s_power) * std::exp(-3.0 * s);
  }
  double sup_bound() const { return 2.0 * kappa; }

  // Envelope of a component (0..6 modes, kTail, kSup, kRegular) and its s-derivative.
  double envelope(int component, double s) const;
  double envelope_ds(int component, double s) const;
};

inline constexpr int kTail = 7;
inline constexpr int kSup = 8;
inline constexpr int kRegular = 9;
inline constexpr int kComponents = 10;

std::string component_name(int component);

struct ExitSig {
  int component = 0;
  int theta = 1;
};

struct MembershipReport {
  bool in_set = true;
  // |value|/envelope per component; regular is NaN when no physical data was given.
  std::array<double, kComponents> margins{};
  std::optional<ExitSig> exit;
};

// q = w~ - phi(., s) projected on the frame grid. Uses frame.q when present.
// q_minus_norm is the L2(rho_1) norm of the residual after removing modes 0..6.
SpectralDecomp decompose(const SimilarityFrame& frame, const ModelParams& mp);
SpectralDecomp decompose_values(const std::vector<double>& q, const Quadrature& rule);

// Exit is the largest margin above 1; ties go to the lowest component index.
MembershipReport check_membership(const SpectralDecomp& dec, double sup_w, double s,
                                  const ShrinkingSetParams& set,
                                  std::optional<double> regular_max = std::nullopt);
MembershipReport check_membership(const SpectralDecomp& dec, const SimilarityFrame& frame,
                                  const ShrinkingSetParams& set,
                                  std::optional<double> regular_max = std::nullopt);

// One row of a monitored run.
struct SeriesRow {
  double s = 0.0;
  std::array<double, kLowModes> q{};
  double q_minus = 0.0;
  double sup_w = 0.0;
  MembershipReport membership;
};

SeriesRow summarize(const SimilarityFrame& frame, const ModelParams& mp, const ShrinkingSetParams& set,
                    const Quadrature& rule);

// Value of a component along a row: q_i for modes, q_minus, sup|w|.
double component_value(const SeriesRow& row, int component);

enum class Flow { Outward, Inward, Ambiguous };
std::string flow_name(Flow f);

struct FlowSample {
  double s;
  double value;
};

struct FlowClassification {
  Flow flow = Flow::Ambiguous;
  double derivative = 0.0;           // theta * d/ds value at the last sample
  double envelope_derivative = 0.0;  // d/ds envelope there
  double noise = 0.0;
};

// Three-point one-sided derivative at the last sample (the exit). The crossing is
// ambiguous when |theta v' - env'| < rel_noise * envelope.
FlowClassification exit_flow_direction(const std::vector<FlowSample>& window, const ExitSig& exit,
                                       const ShrinkingSetParams& set, double rel_noise = 1e-3);

struct ModeSample {
  double s;
  std::array<double, kLowModes> q;
  bool in_set = true;
};

struct ModulationReport {
  std::array<double, kLowModes> sup_residual{};
  std::array<double, kLowModes> sup_scaled{};  // sup |r_i| e^{(3-delta)s}/s
  std::vector<std::array<double, kLowModes>> residual;  // per interior sample
  std::vector<double> s;
  bool membership_violated = false;
};

// r_i = q_i' - (1 - i/2) q_i - P_i R(., s) with centred nonuniform differences.
ModulationReport verify_modulation_odes(const std::vector<ModeSample>& samples, const ModelParams& mp,
                                        bool subtract_R = true, double delta = 0.25);

// P_0..P_6 of R(., s) under the default Gauss-Hermite rule.
std::array<double, kLowModes> remainder_modes(double s, const ModelParams& mp);

enum class Region { R1, R2, R3 };
std::string region_name(Region r);

struct RegionParams {
  double M = 1.0;
  double m = 0.5;
  double s0 = 10.0;
};

double G1(double x0_norm, const ModelParams& mp);
// G1 > M e^{-s0}: R1; m e^{-s0} <= G1 <= M e^{-s0}: R2; else R3.
Region region_classify(double x0_norm, const RegionParams& rp, const ModelParams& mp);

// W_{x0}(Y1 e1, s) = w1((|Y1 e^{-s/2} + |x0|| - 1) e^{s/2}, s), interpolated from the frame.
double W_x0_eval(const SimilarityFrame& frame, double x0_norm, double Y1);
// Same quantity from a physical field: (T-t)^{1/(p-1)} u(|x0| + Y1 sqrt(T-t)).
double W_x0_from_field(const RadialField& field, double T, double x0_norm, double Y1,
                       const ModelParams& mp);

struct NotInBasin : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct HeteroclinicFit {
  double sigma = 0.0;
  double residual = 0.0;  // RMS of W_k - psi(s_k + sigma)
  int iterations = 0;
};

// Least-squares shift sigma with W(0, s_k) ~ psi(s_k + sigma).
HeteroclinicFit heteroclinic_fit(const std::vector<FlowSample>& series, const ModelParams& mp);

}  // namespace flatblow
