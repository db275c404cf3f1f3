#include "flatblow/profile.hpp"

#include <string>

#include "flatblow/hermite.hpp"

namespace flatblow {

double kappa_of(double p) {
  if (!(p > 1.0)) throw DomainError("kappa_of: p must exceed 1, got " + std::to_string(p));
  return std::pow(p - 1.0, -1.0 / (p - 1.0));
}

void ModelParams::validate() const {
  if (!(p > 1.0) || !std::isfinite(p)) throw UsageError("p", "must exceed 1");
  if (d < 2) throw UsageError("d", "must be at least 2");
  if (static_cast<double>(d - 2) * p > static_cast<double>(d + 2)) {
    throw UsageError("p", "subcriticality (d-2)p <= d+2 violated");
  }
  if (!(r0 > 0.0)) throw UsageError("r0", "must be positive");
  if (!(eps0 > 0.0 && eps0 < 1.0)) throw UsageError("eps0", "must lie in (0,1)");
  if (!(A >= 1.0) || !std::isfinite(A)) throw UsageError("A", "must be >= 1");
  if (!(eta0 > 0.0 && eta0 <= 1.0)) throw UsageError("eta0", "must lie in (0,1]");
  if (!std::isfinite(s0)) throw UsageError("s0", "must be finite");
}

double s2_threshold(const ModelParams& mp) {
  return std::log(24.0 * (mp.p - 1.0) / mp.kappa());
}

ExactPoly correction_poly_scaled(double p) {
  const mpq_class pm1 = mpq_class(p) - 1;
  const ExactPoly y4 = ExactPoly::monomial(4);
  return (y4 - hermite_poly(4)) * pm1;
}

ProfileContext::ProfileContext(const ModelParams& mp)
    : params(mp), kappa(mp.kappa()), P_scaled(correction_poly_scaled(mp.p)) {}

double ProfileContext::D(double y, double s) const {
  const double pm1 = params.p - 1.0;
  return pm1 + pm1 * pm1 / kappa * y * y * y * y * std::exp(-s);
}

PhiParts<double> phi_partials(double y, double s, const ModelParams& mp) {
  return phi_parts<double>(y, s, mp.p, mp.kappa());
}

double phi(double y, double s, const ModelParams& mp) { return phi_partials(y, s, mp).phi; }
double potential_V(double y, double s, const ModelParams& mp) { return phi_partials(y, s, mp).V; }
double remainder_R(double y, double s, const ModelParams& mp) { return phi_partials(y, s, mp).R; }

double phi_tilde(double y, double s, const ModelParams& mp) {
  return std::pow(mp.p - 1.0 + std::exp(-s) * y * y * y * y, -1.0 / (mp.p - 1.0));
}

double f_profile(double z, const ModelParams& mp) {
  const double pm1 = mp.p - 1.0;
  return std::pow(pm1 + pm1 * pm1 / mp.kappa() * z * z * z * z, -1.0 / pm1);
}

double u_star(double xi, const ModelParams& mp) {
  if (xi == 0.0) throw DomainError("u_star: singular at xi = 0");
  const double pm1 = mp.p - 1.0;
  return std::pow(pm1 * pm1 * xi * xi * xi * xi / mp.kappa(), -1.0 / pm1);
}

double heteroclinic_psi(double s, const ModelParams& mp) {
  const double pm1 = mp.p - 1.0;
  // (1+e^s)^(-1/(p-1)) via log1p to stay accurate for s << 0.
  const double l = s > 0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
  return mp.kappa() * std::exp(-l / pm1);
}

double heteroclinic_psi_ds(double s, const ModelParams& mp) {
  const double frac = s > 0 ? 1.0 / (1.0 + std::exp(-s)) : std::exp(s) / (1.0 + std::exp(s));
  return -heteroclinic_psi(s, mp) * frac / (mp.p - 1.0);
}

namespace {

// g(t) = exp(-1/t) and its first two derivatives, zero for t <= 0.
struct G {
  double g, g1, g2;
};

G gfun(double t) {
  if (t <= 0.0) return {0.0, 0.0, 0.0};
  const double g = std::exp(-1.0 / t);
  const double it = 1.0 / t;
  return {g, g * it * it, g * (it * it * it * it - 2.0 * it * it * it)};
}

// Smooth step S on [0,1] with derivatives in t.
CutoffValue smooth_step(double t) {
  if (t <= 0.0) return {0.0, 0.0, 0.0};
  if (t >= 1.0) return {1.0, 0.0, 0.0};
  const G a = gfun(t);
  const G c = gfun(1.0 - t);
  const double sum = a.g + c.g;
  const double n = a.g1 * c.g + a.g * c.g1;
  const double n1 = a.g2 * c.g - a.g * c.g2;
  const double sum1 = a.g1 - c.g1;
  return {a.g / sum, n / (sum * sum), (n1 * sum - 2.0 * n * sum1) / (sum * sum * sum)};
}

}  // namespace

CutoffValue cutoff_chi(double xi) {
  const CutoffValue s = smooth_step((xi - 0.125) / 0.125);
  return {s.v, s.d1 * 8.0, s.d2 * 64.0};
}

CutoffValue cutoff_chibar(double xi) {
  const double w = 0.375;
  const CutoffValue s = smooth_step((xi - 0.375) / w);
  return {1.0 - s.v, -s.d1 / w, -s.d2 / (w * w)};
}

}  // namespace flatblow
