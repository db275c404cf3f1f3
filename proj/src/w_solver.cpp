#include <algorithm>
#include <cmath>
#include <string>

#include "flatblow/kernels.hpp"
#include "flatblow/pde_solver.hpp"
#include "flatblow/profile.hpp"

namespace flatblow {

namespace {

// |phi+q|^{p-1}(phi+q) - phi^p with phi^{p-1} supplied.
double nonlinear_part(double phi, double phipm1, double q, double p) {
  const double w = phi + q;
  if (p == 2.0) return w >= 0.0 ? q * (phi + w) : -w * w - phi * phi;
  const double php = phi * phipm1;
  if (w > 0.0 && phi > 0.0) return php * std::expm1(p * std::log1p(q / phi));
  return std::copysign(std::pow(std::abs(w), p), w) - php;
}

double power_signed(double w, double p) {
  if (p == 2.0) return w * std::abs(w);
  return std::copysign(std::pow(std::abs(w), p), w);
}

}  // namespace

WEquation::WEquation(const ModelParams& mp, std::vector<double> y, const WSettings& ws)
    : mp_(mp), kappa_(mp.kappa()), ws_(ws), y_(std::move(y)) {
  const std::size_t n = y_.size();
  if (n < 5) throw DomainError("w equation: need at least 5 nodes");
  dy_ = (y_.back() - y_.front()) / static_cast<double>(n - 1);
  for (std::size_t j = 1; j < n; ++j) {
    if (std::abs(y_[j] - y_[j - 1] - dy_) > 1e-9 * dy_) {
      throw DomainError("w equation: y grid must be uniform");
    }
  }
  for (auto* v : {&phi_, &phi_y_, &src_, &phipm1_, &drift_, &chi_, &chi_y_, &chi_yy_, &chi_s_,
                  &lo_, &di_, &hi_, &tmp_}) {
    v->assign(n, 0.0);
  }
}

std::vector<double> WEquation::phi_values(double s) const {
  std::vector<double> out(y_.size());
  for (std::size_t j = 0; j < y_.size(); ++j) out[j] = phi_parts<double>(y_[j], s, mp_.p, kappa_).phi;
  return out;
}

void WEquation::prepare(double s) {
  if (s == cached_s_) return;
  cached_s_ = s;
  const std::size_t n = y_.size();
  const double eh = std::exp(-0.5 * s);
  const double dm1 = static_cast<double>(mp_.d - 1);
  const double inv_dy2 = 1.0 / (dy_ * dy_);
  const double inv_2dy = 0.5 / dy_;
  const double lin = 1.0 / (mp_.p - 1.0);
  cutoff_active_ = 1.0 + y_.front() * eh < 0.25 * mp_.eps0;
  for (std::size_t j = 0; j < n; ++j) {
    const double y = y_[j];
    const PhiParts<double> pp = phi_parts<double>(y, s, mp_.p, kappa_);
    const double r = 1.0 + y * eh;
    double c = 0.0;
    if (r > 0.0) {
      const double cd = cutoff_chi(2.0 * r / mp_.eps0).v;
      if (cd > 0.0) c = cd * dm1 * eh / r;
    }
    phi_[j] = pp.phi;
    phi_y_[j] = pp.dy;
    phipm1_[j] = pp.E / pp.D;
    drift_[j] = c;
    src_[j] = pp.R + c * pp.dy;
    const double a = -0.5 * y + c;
    lo_[j] = inv_dy2 - a * inv_2dy;
    di_[j] = -2.0 * inv_dy2 - lin;
    hi_[j] = inv_dy2 + a * inv_2dy;
    if (ws_.upwind) {
      // Replace the central drift by a one-sided difference from the upwind side.
      lo_[j] += a * inv_2dy;
      hi_[j] -= a * inv_2dy;
      if (a > 0.0) {
        hi_[j] += a / dy_;
        di_[j] -= a / dy_;
      } else {
        lo_[j] -= a / dy_;
        di_[j] += a / dy_;
      }
    }
    if (cutoff_active_) {
      const CutoffValue cv = r > 0.0 ? cutoff_chi(r / mp_.eps0) : CutoffValue{0.0, 0.0, 0.0};
      chi_[j] = cv.v;
      chi_y_[j] = cv.d1 * eh / mp_.eps0;
      chi_yy_[j] = cv.d2 * eh * eh / (mp_.eps0 * mp_.eps0);
      chi_s_[j] = cv.d1 * (-0.5 * y * eh) / mp_.eps0;
    }
  }
}

void WEquation::rhs(double s, const double* q, double* out) {
  prepare(s);
  ++evals_;
  const std::size_t n = y_.size();
  const double p = mp_.p;
  const double lin = 1.0 / (p - 1.0);
  kernels::active().stencil3(lo_.data(), di_.data(), hi_.data(), q, out, n);
  const double inv_dy2 = 1.0 / (dy_ * dy_);
  const double inv_2dy = 0.5 / dy_;
  {
    const double d2 = (2.0 * q[0] - 5.0 * q[1] + 4.0 * q[2] - q[3]) * inv_dy2;
    const double d1 = (-3.0 * q[0] + 4.0 * q[1] - q[2]) * inv_2dy;
    out[0] = d2 + (-0.5 * y_[0] + drift_[0]) * d1 - lin * q[0];
  }
  {
    const std::size_t m = n - 1;
    const double d2 = (2.0 * q[m] - 5.0 * q[m - 1] + 4.0 * q[m - 2] - q[m - 3]) * inv_dy2;
    const double d1 = (3.0 * q[m] - 4.0 * q[m - 1] + q[m - 2]) * inv_2dy;
    out[m] = d2 + (-0.5 * y_[m] + drift_[m]) * d1 - lin * q[m];
  }
  for (std::size_t j = 0; j < n; ++j) {
    out[j] += nonlinear_part(phi_[j], phipm1_[j], q[j], p) + src_[j];
  }
  if (!cutoff_active_) return;
  // F from the cutoff commutators, with w1 = w~/chi where chi > 0.
  for (std::size_t j = 0; j < n; ++j) tmp_[j] = phi_[j] + q[j];
  for (std::size_t j = 0; j < n; ++j) {
    const double chi = chi_[j];
    if (chi < 1e-14 || (chi == 1.0 && chi_y_[j] == 0.0)) continue;
    double wy;
    if (j == 0) {
      wy = (-3.0 * tmp_[0] + 4.0 * tmp_[1] - tmp_[2]) * inv_2dy;
    } else if (j == n - 1) {
      wy = (3.0 * tmp_[j] - 4.0 * tmp_[j - 1] + tmp_[j - 2]) * inv_2dy;
    } else {
      wy = (tmp_[j + 1] - tmp_[j - 1]) * inv_2dy;
    }
    const double w1 = tmp_[j] / chi;
    const double w1y = (wy - chi_y_[j] * w1) / chi;
    const double cy = chi_y_[j];
    const double F = w1 * chi_s_[j] - 2.0 * cy * w1y - chi_yy_[j] * w1 + 0.5 * y_[j] * cy * w1 -
                     drift_[j] * cy * w1 + power_signed(w1, p) * (chi - std::pow(chi, p));
    out[j] += F;
  }
}

WIntegrator::WIntegrator(const ModelParams& mp, const SimilarityFrame& start, const WSettings& ws)
    : mp_(mp), ws_(ws), eq_(mp, start.y, ws), dp_(start.y.size()), s_(start.s), s_prev_(start.s) {
  const std::size_t n = start.y.size();
  if (start.w.size() != n) throw DomainError("w integrator: frame size mismatch");
  if (!start.q.empty()) {
    if (start.q.size() != n) throw DomainError("w integrator: frame q size mismatch");
    q_ = start.q;
  } else {
    const std::vector<double> ph = eq_.phi_values(start.s);
    q_.resize(n);
    for (std::size_t j = 0; j < n; ++j) q_[j] = start.w[j] - ph[j];
  }
  for (double v : q_) {
    if (!std::isfinite(v)) throw NumericError("w integrator: non-finite start frame");
  }
  k_.resize(n);
  q_new_.resize(n);
  k_new_.resize(n);
  scratch_.resize(n);
  f_ = [this](double s, const double* x, double* dx) {
    eq_.rhs(s, x, dx);
    ++stats_.rhs_evals;
  };
  f_(s_, q_.data(), k_.data());
  q_prev_ = q_;
  k_prev_ = k_;
  h_ = ws_.c_safe * 0.5 * eq_.dy() * eq_.dy();
}

bool WIntegrator::step(double s_stop) {
  if (s_ >= s_stop) return false;
  const auto& K = kernels::active();
  const double sup_w = mp_.kappa() + K.absmax(q_.data(), q_.size());
  const double cap =
      ws_.c_safe * std::min(0.5 * eq_.dy() * eq_.dy(), std::pow(sup_w, 1.0 - mp_.p));
  int nonfinite = 0;
  while (true) {
    double h = std::min(h_, cap);
    bool to_end = false;
    if (s_ + 1.001 * h >= s_stop) {
      h = s_stop - s_;
      to_end = true;
    }
    if (h < 1e-14 && !to_end) throw NumericError("w integrator: step size collapsed at s=" + std::to_string(s_));
    const double err = dp_.attempt(f_, s_, q_.data(), k_.data(), h, q_new_.data(), k_new_.data(),
                                   ws_.rtol, ws_.atol);
    if (!std::isfinite(err)) {
      if (++nonfinite > 60) throw NumericError("w integrator: non-finite state at s=" + std::to_string(s_));
      ++stats_.rejected;
      h_ = 0.2 * h;
      continue;
    }
    if (err > 1.0) {
      ++stats_.rejected;
      h_ = h * DormandPrince::step_factor(err);
      continue;
    }
    q_prev_.swap(q_);
    k_prev_.swap(k_);
    q_.swap(q_new_);
    k_.swap(k_new_);
    s_prev_ = s_;
    s_ = to_end ? s_stop : s_ + h;
    ++stats_.accepted;
    stats_.dt_min = std::min(stats_.dt_min, h);
    stats_.dt_max = std::max(stats_.dt_max, h);
    if (!to_end || h >= h_) h_ = h * DormandPrince::step_factor(err);
    return true;
  }
}

void WIntegrator::restep_from_previous(double h, std::vector<double>& q_out) {
  q_out.resize(q_.size());
  dp_.attempt(f_, s_prev_, q_prev_.data(), k_prev_.data(), h, q_out.data(), scratch_.data(),
              ws_.rtol, ws_.atol);
}

SimilarityFrame WIntegrator::frame_of(double s, const std::vector<double>& q) const {
  SimilarityFrame fr;
  fr.y = eq_.y();
  fr.s = s;
  fr.q = q;
  fr.w = eq_.phi_values(s);
  for (std::size_t j = 0; j < q.size(); ++j) fr.w[j] += q[j];
  return fr;
}

SimilarityFrame WIntegrator::frame() const { return frame_of(s_, q_); }

Trajectory solve_w_equation(const SimilarityFrame& start, const ModelParams& mp, double s_end,
                            const WSettings& ws, const WObserver& obs) {
  if (!(s_end > start.s)) throw DomainError("solve_w_equation: s_end must exceed the start");
  WIntegrator integ(mp, start, ws);
  Trajectory traj;
  traj.settings = {{"rtol", ws.rtol},
                   {"atol", ws.atol},
                   {"c_safe", ws.c_safe},
                   {"snapshot_ds", ws.snapshot_ds},
                   {"upwind", ws.upwind ? 1.0 : 0.0},
                   {"dy", integ.equation().dy()},
                   {"L", start.y.back()}};
  if (ws.keep_frames) traj.frames.push_back(integ.frame());
  long snap_k = 1;
  traj.stop_reason = "time";
  while (integ.s() < s_end) {
    const double next_snap = start.s + static_cast<double>(snap_k) * ws.snapshot_ds;
    const double stop = std::min(s_end, next_snap);
    integ.step(stop);
    if (integ.s() >= next_snap) ++snap_k;
    const bool last = integ.s() >= s_end;
    if (ws.keep_frames && (integ.s() == stop || last)) traj.frames.push_back(integ.frame());
    if (obs && !obs(integ)) {
      traj.stop_reason = "observer";
      if (ws.keep_frames && traj.frames.back().s != integ.s()) traj.frames.push_back(integ.frame());
      break;
    }
  }
  traj.stats = integ.stats();
  return traj;
}

}  // namespace flatblow
