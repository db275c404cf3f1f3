#include <cmath>
#include <string>

#include "flatblow/interp.hpp"
#include "flatblow/pde_solver.hpp"
#include "flatblow/profile.hpp"

namespace flatblow {

std::vector<double> make_y_grid(const YGrid& g) {
  if (!(g.L > 0.0 && g.dy > 0.0)) throw DomainError("y grid: L and dy must be positive");
  const auto half = static_cast<long>(std::llround(g.L / g.dy));
  std::vector<double> y(static_cast<std::size_t>(2 * half + 1));
  for (long j = -half; j <= half; ++j) y[static_cast<std::size_t>(j + half)] = static_cast<double>(j) * g.dy;
  return y;
}

namespace {

// Nodes from `ring` towards `end` (exclusive of ring), last node snapped to `end`.
std::vector<double> march(const RGrid& g, double ring, double end) {
  std::vector<double> out;
  const double dir = end > ring ? 1.0 : -1.0;
  const double span = std::abs(end - ring);
  double x = 0.0;
  double h = g.dr_fine;
  long k = 0;
  while (true) {
    const double next_fine = static_cast<double>(k + 1) * g.dr_fine;
    double nx;
    if (next_fine <= g.fine_halfwidth + 1e-12) {
      nx = next_fine;
      ++k;
    } else {
      h = std::min(h * g.growth, g.dr_coarse);
      nx = x + h;
    }
    if (nx >= span - 0.5 * h) {
      out.push_back(end);
      break;
    }
    out.push_back(ring + dir * nx);
    x = nx;
  }
  return out;
}

}  // namespace

std::vector<double> make_r_grid(const RGrid& g, double ring) {
  if (!(g.r_max > ring && ring > 0.0)) throw DomainError("r grid: need 0 < ring < r_max");
  if (!(g.dr_fine > 0.0 && g.dr_coarse >= g.dr_fine && g.growth > 1.0)) {
    throw DomainError("r grid: need 0 < dr_fine <= dr_coarse and growth > 1");
  }
  std::vector<double> left = march(g, ring, 0.0);
  std::vector<double> right = march(g, ring, g.r_max);
  std::vector<double> r(left.rbegin(), left.rend());
  r.push_back(ring);
  r.insert(r.end(), right.begin(), right.end());
  return r;
}

namespace {

struct W1Value {
  double w;  // chi * w1
  double q;  // w - phi, computed without cancellation
};

W1Value initial_w(double y, double s0, double xi_scale, const std::array<double, 6>& d6,
                  const ModelParams& mp, double kappa) {
  const double chi = cutoff_chi(xi_scale).v;
  const PhiParts<double> pp = phi_parts<double>(y, s0, mp.p, kappa);
  double h[6];
  hermite_values(5, y, h);
  double S = 0.0;
  for (int i = 0; i < 6; ++i) S += d6[static_cast<std::size_t>(i)] * h[i];
  const double pm1 = mp.p - 1.0;
  const double delta = pm1 / (kappa * pp.D * pp.D) * mp.A * std::exp(-2.0 * s0) * S;
  const double ed = pp.E / pp.D;
  if (!(ed + delta > 0.0)) {
    throw DomainError("initial data: bracket nonpositive at y=" + std::to_string(y) +
                      " (value " + std::to_string(ed + delta) + ")");
  }
  if (chi == 0.0) return {0.0, -pp.phi};
  const double rel = std::expm1(std::log1p(delta / ed) / pm1);
  const double q = chi * pp.phi * rel + (chi - 1.0) * pp.phi;
  return {chi * pp.phi * (1.0 + rel), q};
}

}  // namespace

InitialData build_initial_data(const std::array<double, 6>& d6, const ModelParams& mp,
                               const YGrid& yg, const RGrid& rg) {
  mp.validate();
  for (double v : d6) {
    if (!(v >= -2.0 && v <= 2.0)) throw DomainError("initial data: d6 entries must lie in [-2,2]");
  }
  const double kappa = mp.kappa();
  const double s0 = mp.s0;
  const double eh = std::exp(-0.5 * s0);
  InitialData out;
  out.frame.s = s0;
  out.frame.a = 1.0;
  out.frame.y = make_y_grid(yg);
  const std::size_t n = out.frame.y.size();
  out.frame.w.resize(n);
  out.frame.q.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double y = out.frame.y[j];
    const double rr = 1.0 + y * eh;
    const W1Value v = initial_w(y, s0, rr / mp.eps0, d6, mp, kappa);
    out.frame.w[j] = v.w;
    out.frame.q[j] = v.q;
  }

  // Unit-sphere field u1(rho) = e^{s0/(p-1)} w1((rho-1) e^{s0/2}), rescaled to radius r0:
  // u(r) = r0^{-2/(p-1)} u1(r/r0), T = r0^2 e^{-s0}.
  const double pm1 = mp.p - 1.0;
  const double r0 = mp.r0;
  RGrid g = rg;
  if (g.r_max <= r0) g.r_max = 3.0 * r0;
  out.field.r = make_r_grid(g, r0);
  out.field.t = 0.0;
  out.field.u.resize(out.field.r.size());
  const double amp = std::pow(r0, -2.0 / pm1) * std::exp(s0 / pm1);
  for (std::size_t j = 0; j < out.field.r.size(); ++j) {
    const double rho = out.field.r[j] / r0;
    const double xi = rho / mp.eps0;
    if (cutoff_chi(xi).v == 0.0) {
      out.field.u[j] = 0.0;
      continue;
    }
    const double y = (rho - 1.0) / eh;
    out.field.u[j] = amp * initial_w(y, s0, xi, d6, mp, kappa).w;
  }
  out.T = r0 * r0 * std::exp(-s0);
  return out;
}

SimilarityFrame to_similarity(const RadialField& field, double T, double a, const ModelParams& mp,
                              const std::vector<double>& y_grid) {
  const double tau = T - field.t;
  if (!(tau > 0.0)) {
    throw DomainError("to_similarity: field time " + std::to_string(field.t) +
                      " is not before T=" + std::to_string(T));
  }
  const MonotoneCubic interp(field.r, field.u);
  const double st = std::sqrt(tau);
  const double scale = std::pow(tau, 1.0 / (mp.p - 1.0));
  SimilarityFrame fr;
  fr.s = -std::log(tau);
  fr.a = a;
  fr.y = y_grid;
  fr.w.resize(y_grid.size());
  for (std::size_t j = 0; j < y_grid.size(); ++j) {
    const double r = a + y_grid[j] * st;
    const double chi = cutoff_chi(r / (mp.eps0 * a)).v;
    fr.w[j] = chi == 0.0 ? 0.0 : chi * scale * interp(r);
  }
  return fr;
}

}  // namespace flatblow
