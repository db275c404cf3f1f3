#include <algorithm>
#include <cmath>
#include <string>

#include "flatblow/kernels.hpp"
#include "flatblow/pde_solver.hpp"

namespace flatblow {

namespace {

struct RadialOperator {
  std::vector<double> lo, di, hi;
  double h_min = 0.0;
};

// Second-order nonuniform central differences for u_rr + (d-1)/r u_r.
RadialOperator build_operator(const std::vector<double>& r, int d) {
  const std::size_t n = r.size();
  RadialOperator op;
  op.lo.assign(n, 0.0);
  op.di.assign(n, 0.0);
  op.hi.assign(n, 0.0);
  op.h_min = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j + 1 < n; ++j) op.h_min = std::min(op.h_min, r[j + 1] - r[j]);
  const double dm1 = static_cast<double>(d - 1);
  for (std::size_t j = 1; j + 1 < n; ++j) {
    const double hm = r[j] - r[j - 1];
    const double hp = r[j + 1] - r[j];
    const double sum = hm + hp;
    const double c = dm1 / r[j];
    op.lo[j] = 2.0 / (hm * sum) - c * hp / (hm * sum);
    op.hi[j] = 2.0 / (hp * sum) + c * hm / (hp * sum);
    op.di[j] = -(op.lo[j] + op.hi[j]);
  }
  // r = 0: d u_rr with the even reflection u(-h) = u(h).
  const double h0 = r[1] - r[0];
  op.hi[0] = 2.0 * d / (h0 * h0);
  op.di[0] = -op.hi[0];
  // r = r_max: homogeneous Neumann through the reflected ghost node.
  const double hn = r[n - 1] - r[n - 2];
  op.lo[n - 1] = 2.0 / (hn * hn);
  op.di[n - 1] = -op.lo[n - 1];
  return op;
}

double reaction(double u, double p) {
  if (p == 2.0) return u * std::abs(u);
  return std::copysign(std::pow(std::abs(u), p), u);
}

}  // namespace

Trajectory solve_radial(const RadialField& field, const ModelParams& mp, const RadialStop& stop,
                        const RadialSettings& rs) {
  const std::size_t n = field.r.size();
  if (n < 4 || field.u.size() != n) throw DomainError("solve_radial: need >= 4 matching nodes");
  if (field.r.front() != 0.0) throw DomainError("solve_radial: grid must start at r = 0");
  for (double v : field.u) {
    if (!std::isfinite(v)) throw NumericError("solve_radial: non-finite initial data");
  }
  const RadialOperator op = build_operator(field.r, mp.d);
  const double p = mp.p;
  const auto& K = kernels::active();

  Trajectory traj;
  traj.settings = {{"rtol", rs.rtol},           {"atol", rs.atol},
                   {"c_safe", rs.c_safe},       {"snapshot_growth", rs.snapshot_growth},
                   {"snapshot_dt", rs.snapshot_dt}, {"nodes", static_cast<double>(n)},
                   {"dr_min", op.h_min}};
  traj.ode.eps = rs.ode_eps;
  traj.ode.u_large = rs.ode_u_large;

  OdeRhs f = [&](double, const double* u, double* du) {
    K.stencil3(op.lo.data(), op.di.data(), op.hi.data(), u, du, n);
    du[0] = op.di[0] * u[0] + op.hi[0] * u[1];
    du[n - 1] = op.lo[n - 1] * u[n - 2] + op.di[n - 1] * u[n - 1];
    for (std::size_t j = 0; j < n; ++j) du[j] += reaction(u[j], p);
    ++traj.stats.rhs_evals;
  };

  std::size_t reg_end = 0;
  while (reg_end < n && field.r[reg_end] <= 0.25 * mp.eps0 * mp.r0) ++reg_end;
  auto regular_max = [&](const std::vector<double>& u) {
    double m = 0.0;
    for (std::size_t j = 0; j < reg_end; ++j) m = std::max(m, std::abs(u[j]));
    return m;
  };

  DormandPrince dp(n);
  std::vector<double> u = field.u, k(n), u_new(n), k_new(n);
  double t = field.t;
  f(t, u.data(), k.data());
  double sup = K.absmax(u.data(), n);
  traj.regular_max = regular_max(u);

  auto snapshot = [&]() {
    traj.radial.push_back({field.r, u, t});
    traj.regular_series.push_back(regular_max(u));
  };
  snapshot();
  double snap_t = t;
  double snap_sup = sup;

  auto cap = [&]() {
    double c = 0.5 * op.h_min * op.h_min;
    if (sup > 0.0) c = std::min(c, std::pow(sup, 1.0 - p));
    return rs.c_safe * c;
  };
  double h = cap();
  int nonfinite = 0;

  while (true) {
    if (t >= stop.t_end) {
      traj.stop_reason = "time";
      break;
    }
    if (sup >= stop.u_cap) {
      traj.stop_reason = "blowup";
      break;
    }
    if (traj.stats.accepted >= stop.max_steps) {
      traj.stop_reason = "max_steps";
      break;
    }
    double hs = std::min(h, cap());
    bool to_end = false;
    if (t + 1.001 * hs >= stop.t_end) {
      hs = stop.t_end - t;
      to_end = true;
    }
    if (hs < stop.dt_floor) {
      traj.stop_reason = "step_floor";
      break;
    }
    const double err = dp.attempt(f, t, u.data(), k.data(), hs, u_new.data(), k_new.data(),
                                  rs.rtol, rs.atol);
    if (!std::isfinite(err)) {
      if (++nonfinite > 60) {
        throw NumericError("solve_radial: non-finite state near t=" + std::to_string(t));
      }
      ++traj.stats.rejected;
      h = 0.2 * hs;
      continue;
    }
    nonfinite = 0;
    if (err > 1.0) {
      ++traj.stats.rejected;
      h = hs * DormandPrince::step_factor(err);
      continue;
    }
    t = to_end ? stop.t_end : t + hs;
    u.swap(u_new);
    k.swap(k_new);
    ++traj.stats.accepted;
    traj.stats.dt_min = std::min(traj.stats.dt_min, hs);
    traj.stats.dt_max = std::max(traj.stats.dt_max, hs);
    if (!to_end || hs >= h) h = hs * DormandPrince::step_factor(err);
    sup = K.absmax(u.data(), n);
    traj.regular_max = std::max(traj.regular_max, regular_max(u));
    for (std::size_t j = 0; j < n; ++j) {
      if (u[j] < rs.ode_u_large) continue;
      const double up = std::pow(u[j], p);
      ++traj.ode.samples;
      traj.ode.worst_ratio_dev = std::max(traj.ode.worst_ratio_dev, std::abs(k[j] / up - 1.0));
      traj.ode.c_eps = std::max(traj.ode.c_eps, std::abs(k[j] - up) - rs.ode_eps * up);
    }
    if (sup >= snap_sup * rs.snapshot_growth || t - snap_t >= rs.snapshot_dt) {
      snapshot();
      snap_t = t;
      snap_sup = sup;
    }
  }
  if (traj.radial.back().t != t) snapshot();
  return traj;
}

}  // namespace flatblow
