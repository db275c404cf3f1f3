#include <algorithm>
#include <cmath>
#include <string>

#include "flatblow/kernels.hpp"
#include "flatblow/pde_solver.hpp"
#include "flatblow/profile.hpp"

namespace flatblow {

namespace {

double sup_norm(const RadialField& f) { return kernels::active().absmax(f.u.data(), f.u.size()); }

double local_spacing(const std::vector<double>& r, std::size_t j) {
  double h = std::numeric_limits<double>::infinity();
  if (j > 0) h = std::min(h, r[j] - r[j - 1]);
  if (j + 1 < r.size()) h = std::min(h, r[j + 1] - r[j]);
  return h;
}

}  // namespace

BlowupEstimate detect_blowup(const Trajectory& traj, const ModelParams& mp) {
  if (traj.radial.size() < 3) throw NotBlowingUp("detect_blowup: fewer than 3 radial snapshots");
  const double first = sup_norm(traj.radial.front());
  const double last = sup_norm(traj.radial.back());
  if (!(last >= 10.0 * first) || last == 0.0) {
    throw NotBlowingUp("detect_blowup: sup norm grew from " + std::to_string(first) + " to " +
                       std::to_string(last) + " (< 10x)");
  }
  const double pm1 = mp.p - 1.0;
  std::vector<double> ts, vs;
  for (const RadialField& f : traj.radial) {
    const double m = sup_norm(f);
    if (m < 0.1 * last) continue;
    ts.push_back(f.t);
    vs.push_back(std::pow(m, -pm1));
  }
  const int n = static_cast<int>(ts.size());
  if (n < 3) throw NotBlowingUp("detect_blowup: fewer than 3 snapshots in the last decade");
  // Centred two-pass sums: t spans a tiny interval next to T.
  const double tm = ts.back();
  double mt = 0.0, mv = 0.0;
  for (int k = 0; k < n; ++k) {
    mt += ts[static_cast<std::size_t>(k)] - tm;
    mv += vs[static_cast<std::size_t>(k)];
  }
  mt /= n;
  mv /= n;
  double ctt = 0.0, ctv = 0.0, cvv = 0.0;
  for (int k = 0; k < n; ++k) {
    const double dt = ts[static_cast<std::size_t>(k)] - tm - mt;
    const double dv = vs[static_cast<std::size_t>(k)] - mv;
    ctt += dt * dt;
    ctv += dt * dv;
    cvv += dv * dv;
  }
  const double slope = ctv / ctt;
  if (!(slope < 0.0)) throw NotBlowingUp("detect_blowup: fitted decay slope is not negative");
  BlowupEstimate out;
  out.T_est = tm + mt - mv / slope;
  out.r2 = cvv > 0.0 ? std::clamp(ctv * ctv / (ctt * cvv), 0.0, 1.0) : 1.0;
  out.n_points = n;
  const RadialField& f = traj.radial.back();
  std::size_t jmax = 0;
  for (std::size_t j = 1; j < f.u.size(); ++j) {
    if (std::abs(f.u[j]) > std::abs(f.u[jmax])) jmax = j;
  }
  out.r_blow = f.r[jmax];
  out.cell = local_spacing(f.r, jmax);
  return out;
}

ProfileReport final_profile_check(const Trajectory& traj, double T_est, const ModelParams& mp) {
  if (traj.radial.empty()) throw InsufficientResolution("final_profile_check: no radial snapshots");
  const RadialField& f = traj.radial.back();
  if (!(T_est > f.t)) throw DomainError("final_profile_check: T_est must exceed the last snapshot time");
  const double r0 = mp.r0;
  auto it = std::lower_bound(f.r.begin(), f.r.end(), r0);
  std::size_t j0 = static_cast<std::size_t>(it - f.r.begin());
  if (j0 >= f.r.size()) throw InsufficientResolution("final_profile_check: r0 outside the grid");
  if (j0 > 0 && std::abs(f.r[j0 - 1] - r0) < std::abs(f.r[j0] - r0)) --j0;
  ProfileReport rep;
  rep.dr = local_spacing(f.r, j0);
  int inner = 0;
  int outer = 0;
  for (std::size_t j = 0; j < f.r.size(); ++j) {
    const double xi = std::abs(f.r[j] - r0);
    if (xi < 2.0 * rep.dr * (1.0 - 1e-9) || xi > 10.0 * rep.dr * (1.0 + 1e-9)) continue;
    (f.r[j] < r0 ? inner : outer) += 1;
    rep.xi.push_back(f.r[j] - r0);
    rep.ratio.push_back(f.u[j] / u_star(xi, mp));
  }
  if (inner < 2 || outer < 2) {
    throw InsufficientResolution("final_profile_check: annulus holds " + std::to_string(inner) +
                                 " inner and " + std::to_string(outer) + " outer nodes");
  }
  rep.min_ratio = *std::min_element(rep.ratio.begin(), rep.ratio.end());
  rep.max_ratio = *std::max_element(rep.ratio.begin(), rep.ratio.end());
  rep.spread = rep.max_ratio / rep.min_ratio;
  return rep;
}

}  // namespace flatblow
