#include "flatblow/modulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "flatblow/interp.hpp"
#include "flatblow/kernels.hpp"
#include "flatblow/profile.hpp"

namespace flatblow {

ShrinkingSetParams ShrinkingSetParams::from(const ModelParams& mp) {
  ShrinkingSetParams set;
  set.A = mp.A;
  set.kappa = mp.kappa();
  set.eta0 = mp.eta0;
  return set;
}

double ShrinkingSetParams::envelope(int component, double s) const {
  if (component >= 0 && component <= 5) return low(s);
  if (component == 6) return top(s);
  if (component == kTail) return tail(s);
  if (component == kSup) return sup_bound();
  if (component == kRegular) return eta0;
  throw BoundsError("envelope: unknown component " + std::to_string(component));
}

double ShrinkingSetParams::envelope_ds(int component, double s) const {
  if (component >= 0 && component <= 5) return -2.0 * low(s);
  if (component == 6) return top(s) * (top_s_power / s - 2.0);
  if (component == kTail) return tail(s) * (tail_s_power / s - 3.0);
  if (component == kSup || component == kRegular) return 0.0;
  throw BoundsError("envelope_ds: unknown component " + std::to_string(component));
}

std::string component_name(int component) {
  if (component >= 0 && component <= 6) return "q" + std::to_string(component);
  if (component == kTail) return "tail";
  if (component == kSup) return "sup";
  if (component == kRegular) return "regular";
  return "?";
}

SpectralDecomp decompose_values(const std::vector<double>& q, const Quadrature& rule) {
  SpectralDecomp dec = project_values(q, rule);
  const std::size_t n = q.size();
  std::vector<double> res(q);
  for (int m = 0; m < kLowModes; ++m) {
    const double c = dec.q[static_cast<std::size_t>(m)];
    const std::vector<double>& h = rule.basis[static_cast<std::size_t>(m)];
    for (std::size_t k = 0; k < n; ++k) res[k] -= c * h[k];
  }
  const double r2 = kernels::active().dot3(rule.weights.data(), res.data(), res.data(), n);
  dec.q_minus_norm = std::sqrt(std::max(0.0, r2));
  return dec;
}

SpectralDecomp decompose(const SimilarityFrame& frame, const ModelParams& mp) {
  if (frame.s < s2_threshold(mp)) {
    throw DomainError("decompose: frame s=" + std::to_string(frame.s) + " below the profile threshold");
  }
  const Quadrature rule = grid_rule(frame.y);
  if (!frame.q.empty()) return decompose_values(frame.q, rule);
  std::vector<double> q(frame.w.size());
  const double kappa = mp.kappa();
  for (std::size_t j = 0; j < q.size(); ++j) {
    q[j] = frame.w[j] - phi_parts<double>(frame.y[j], frame.s, mp.p, kappa).phi;
  }
  return decompose_values(q, rule);
}

MembershipReport check_membership(const SpectralDecomp& dec, double sup_w, double s,
                                  const ShrinkingSetParams& set, std::optional<double> regular_max) {
  MembershipReport rep;
  for (int i = 0; i < kLowModes; ++i) {
    rep.margins[static_cast<std::size_t>(i)] = std::abs(dec.q[static_cast<std::size_t>(i)]) / set.envelope(i, s);
  }
  rep.margins[kTail] = dec.q_minus_norm / set.tail(s);
  rep.margins[kSup] = std::abs(sup_w) / set.sup_bound();
  rep.margins[kRegular] = regular_max ? std::abs(*regular_max) / set.eta0
                                      : std::numeric_limits<double>::quiet_NaN();
  int worst = -1;
  double worst_margin = 1.0;
  for (int c = 0; c < kComponents; ++c) {
    const double m = rep.margins[static_cast<std::size_t>(c)];
    if (std::isnan(m)) continue;
    if (m > worst_margin) {
      worst_margin = m;
      worst = c;
    }
  }
  rep.in_set = worst < 0;
  if (worst >= 0) {
    int theta = 1;
    if (worst < kLowModes && dec.q[static_cast<std::size_t>(worst)] < 0.0) theta = -1;
    rep.exit = ExitSig{worst, theta};
  }
  return rep;
}

MembershipReport check_membership(const SpectralDecomp& dec, const SimilarityFrame& frame,
                                  const ShrinkingSetParams& set, std::optional<double> regular_max) {
  const double sup_w = kernels::active().absmax(frame.w.data(), frame.w.size());
  return check_membership(dec, sup_w, frame.s, set, regular_max);
}

SeriesRow summarize(const SimilarityFrame& frame, const ModelParams& mp, const ShrinkingSetParams& set,
                    const Quadrature& rule) {
  SeriesRow row;
  row.s = frame.s;
  SpectralDecomp dec;
  if (!frame.q.empty()) {
    dec = decompose_values(frame.q, rule);
  } else {
    dec = decompose(frame, mp);
  }
  row.q = dec.q;
  row.q_minus = dec.q_minus_norm;
  row.sup_w = kernels::active().absmax(frame.w.data(), frame.w.size());
  row.membership = check_membership(dec, row.sup_w, frame.s, set);
  return row;
}

double component_value(const SeriesRow& row, int component) {
  if (component >= 0 && component < kLowModes) return row.q[static_cast<std::size_t>(component)];
  if (component == kTail) return row.q_minus;
  if (component == kSup) return row.sup_w;
  throw BoundsError("component_value: component " + std::to_string(component) + " has no series value");
}

std::string flow_name(Flow f) {
  switch (f) {
    case Flow::Outward:
      return "outward";
    case Flow::Inward:
      return "inward";
    default:
      return "ambiguous";
  }
}

FlowClassification exit_flow_direction(const std::vector<FlowSample>& window, const ExitSig& exit,
                                       const ShrinkingSetParams& set, double rel_noise) {
  if (window.size() < 3) throw NumericError("exit_flow_direction: need at least 3 samples");
  const std::size_t n = window.size();
  const double s0 = window[n - 3].s, s1 = window[n - 2].s, s2 = window[n - 1].s;
  if (!(s0 < s1 && s1 < s2)) throw NumericError("exit_flow_direction: samples must increase in s");
  const double f0 = window[n - 3].value, f1 = window[n - 2].value, f2 = window[n - 1].value;
  const double d = f2 * (2.0 * s2 - s0 - s1) / ((s2 - s0) * (s2 - s1)) -
                   f1 * (s2 - s0) / ((s1 - s0) * (s2 - s1)) + f0 * (s2 - s1) / ((s1 - s0) * (s2 - s0));
  FlowClassification out;
  out.derivative = exit.theta * d;
  out.envelope_derivative = set.envelope_ds(exit.component, s2);
  out.noise = rel_noise * set.envelope(exit.component, s2);
  const double gap = out.derivative - out.envelope_derivative;
  if (std::abs(gap) < out.noise) {
    out.flow = Flow::Ambiguous;
  } else {
    out.flow = gap > 0.0 ? Flow::Outward : Flow::Inward;
  }
  return out;
}

std::array<double, kLowModes> remainder_modes(double s, const ModelParams& mp) {
  const double kappa = mp.kappa();
  const SpectralDecomp dec =
      project([&](double y) { return phi_parts<double>(y, s, mp.p, kappa).R; }, default_rule());
  return dec.q;
}

ModulationReport verify_modulation_odes(const std::vector<ModeSample>& samples, const ModelParams& mp,
                                        bool subtract_R, double delta) {
  if (samples.size() < 3) throw NumericError("verify_modulation_odes: need at least 3 samples");
  ModulationReport rep;
  for (const ModeSample& m : samples) rep.membership_violated = rep.membership_violated || !m.in_set;
  for (std::size_t k = 1; k + 1 < samples.size(); ++k) {
    const double sa = samples[k - 1].s, sb = samples[k].s, sc = samples[k + 1].s;
    const double ha = sb - sa, hc = sc - sb;
    if (!(ha > 0.0 && hc > 0.0)) throw NumericError("verify_modulation_odes: s must increase");
    std::array<double, kLowModes> R{};
    if (subtract_R) R = remainder_modes(sb, mp);
    std::array<double, kLowModes> r{};
    for (int i = 0; i < kLowModes; ++i) {
      const auto ii = static_cast<std::size_t>(i);
      const double qa = samples[k - 1].q[ii], qb = samples[k].q[ii], qc = samples[k + 1].q[ii];
      const double dq = (-hc / (ha * (ha + hc))) * qa + ((hc - ha) / (ha * hc)) * qb +
                        (ha / (hc * (ha + hc))) * qc;
      r[ii] = dq - (1.0 - 0.5 * i) * qb - R[ii];
      rep.sup_residual[ii] = std::max(rep.sup_residual[ii], std::abs(r[ii]));
      rep.sup_scaled[ii] = std::max(rep.sup_scaled[ii], std::abs(r[ii]) * std::exp((3.0 - delta) * sb) / sb);
    }
    rep.residual.push_back(r);
    rep.s.push_back(sb);
  }
  return rep;
}

std::string region_name(Region r) {
  switch (r) {
    case Region::R1:
      return "R1";
    case Region::R2:
      return "R2";
    default:
      return "R3";
  }
}

double G1(double x0_norm, const ModelParams& mp) {
  const double d = x0_norm - 1.0;
  return (mp.p - 1.0) / mp.kappa() * d * d * d * d;
}

Region region_classify(double x0_norm, const RegionParams& rp, const ModelParams& mp) {
  if (!(x0_norm >= 0.0)) throw DomainError("region_classify: |x0| must be nonnegative");
  if (!(rp.m > 0.0 && rp.m < 1.0 && rp.M >= 1.0)) throw DomainError("region_classify: need 0 < m < 1 <= M");
  const double g = G1(x0_norm, mp);
  const double e = std::exp(-rp.s0);
  if (g > rp.M * e) return Region::R1;
  if (g >= rp.m * e) return Region::R2;
  return Region::R3;
}

double W_x0_eval(const SimilarityFrame& frame, double x0_norm, double Y1) {
  const double eh = std::exp(-0.5 * frame.s);
  const double y = (std::abs(Y1 * eh + x0_norm) - 1.0) / eh;
  const MonotoneCubic interp(frame.y, frame.w);
  return interp(y);
}

double W_x0_from_field(const RadialField& field, double T, double x0_norm, double Y1,
                       const ModelParams& mp) {
  const double tau = T - field.t;
  if (!(tau > 0.0)) throw DomainError("W_x0_from_field: field time is not before T");
  const double r = std::abs(x0_norm + Y1 * std::sqrt(tau));
  const MonotoneCubic interp(field.r, field.u);
  return std::pow(tau, 1.0 / (mp.p - 1.0)) * interp(r);
}

HeteroclinicFit heteroclinic_fit(const std::vector<FlowSample>& series, const ModelParams& mp) {
  if (series.size() < 10) throw DomainError("heteroclinic_fit: need at least 10 samples");
  const double kappa = mp.kappa();
  const double pm1 = mp.p - 1.0;
  std::vector<double> guesses;
  for (const FlowSample& f : series) {
    if (!(f.value > 0.0 && f.value < kappa)) {
      throw NotInBasin("heteroclinic_fit: sample " + std::to_string(f.value) + " at s=" +
                       std::to_string(f.s) + " outside (0, kappa)");
    }
    // psi(x) = w  <=>  x = log((kappa/w)^{p-1} - 1)
    guesses.push_back(std::log(std::expm1(pm1 * std::log(kappa / f.value))) - f.s);
  }
  std::nth_element(guesses.begin(), guesses.begin() + static_cast<long>(guesses.size() / 2), guesses.end());
  HeteroclinicFit fit;
  fit.sigma = guesses[guesses.size() / 2];
  for (fit.iterations = 1; fit.iterations <= 100; ++fit.iterations) {
    double num = 0.0, den = 0.0;
    for (const FlowSample& f : series) {
      const double r = f.value - heteroclinic_psi(f.s + fit.sigma, mp);
      const double j = heteroclinic_psi_ds(f.s + fit.sigma, mp);
      num += j * r;
      den += j * j;
    }
    if (den == 0.0) break;
    const double step = num / den;
    fit.sigma += step;
    if (std::abs(step) <= 1e-14 * (1.0 + std::abs(fit.sigma))) break;
  }
  double ss = 0.0;
  for (const FlowSample& f : series) {
    const double r = f.value - heteroclinic_psi(f.s + fit.sigma, mp);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / static_cast<double>(series.size()));
  return fit;
}

}  // namespace flatblow
