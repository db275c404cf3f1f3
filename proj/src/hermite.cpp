#include "flatblow/hermite.hpp"

#include <mutex>
#include <string>

#include "flatblow/errors.hpp"
#include "flatblow/kernels.hpp"

namespace flatblow {

namespace {

// Exact h_m without the M_max guard; the table grows on demand.
const ExactPoly& hermite_unchecked(int m) {
  static std::mutex mu;
  static std::vector<ExactPoly> table;
  std::lock_guard<std::mutex> lock(mu);
  if (table.empty()) {
    table.push_back(ExactPoly::constant(1));
    table.push_back(ExactPoly::monomial(1));
  }
  const ExactPoly y = ExactPoly::monomial(1);
  while (static_cast<int>(table.size()) <= m) {
    const int k = static_cast<int>(table.size()) - 1;
    ExactPoly next = y * table[k] - table[k - 1] * mpq_class(2 * k);
    table.push_back(std::move(next));
  }
  return table[static_cast<std::size_t>(m)];
}

}  // namespace

ExactPoly hermite_poly(int m, int m_max) {
  if (m < 0) throw DomainError("hermite_poly: negative index " + std::to_string(m));
  if (m > m_max) {
    throw BoundsError("hermite_poly: index " + std::to_string(m) + " exceeds M_max " +
                      std::to_string(m_max));
  }
  return hermite_unchecked(m);
}

mpq_class hermite_norm_sq(int m) {
  if (m < 0) throw DomainError("hermite_norm_sq: negative index");
  mpz_class r = 1;
  for (int k = 2; k <= m; ++k) r *= k;
  r <<= static_cast<mp_bitcnt_t>(m);
  return mpq_class(r);
}

double hermite_norm_sq_d(int m) {
  double r = 1.0;
  for (int k = 1; k <= m; ++k) r *= 2.0 * k;
  return r;
}

double rho(double y_norm, int d) {
  return std::exp(-y_norm * y_norm / 4.0) / std::pow(4.0 * std::numbers::pi, d / 2.0);
}

namespace {

void fill_basis(Quadrature& q) {
  const std::size_t n = q.nodes.size();
  q.basis.assign(kMaxMode + 1, std::vector<double>(n));
  std::array<double, kMaxMode + 1> h{};
  for (std::size_t k = 0; k < n; ++k) {
    hermite_values(kMaxMode, q.nodes[k], h.data());
    for (int m = 0; m <= kMaxMode; ++m) q.basis[static_cast<std::size_t>(m)][k] = h[static_cast<std::size_t>(m)];
  }
}

}  // namespace

Quadrature gauss_hermite_rule(int order) {
  if (order < 1) throw DomainError("gauss_hermite_rule: order must be positive");
  Quadrature q;
  gauss_hermite_rho<double>(order, q.nodes, q.weights);
  fill_basis(q);
  return q;
}

const Quadrature& default_rule() {
  static const Quadrature rule = gauss_hermite_rule(64);
  return rule;
}

Quadrature grid_rule(const std::vector<double>& y_grid) {
  const std::size_t n = y_grid.size();
  if (n < 2) throw DomainError("grid_rule: need at least two nodes");
  Quadrature q;
  q.nodes = y_grid;
  q.weights.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double left = j > 0 ? y_grid[j] - y_grid[j - 1] : 0.0;
    const double right = j + 1 < n ? y_grid[j + 1] - y_grid[j] : 0.0;
    q.weights[j] = 0.5 * (left + right) * rho(y_grid[j]);
  }
  fill_basis(q);
  return q;
}

double gaussian_weight_mass(int d, int order) {
  const Quadrature rule = gauss_hermite_rule(order);
  double m1 = 0.0;
  for (double w : rule.weights) m1 += w;
  return std::pow(m1, d);
}

namespace {

std::vector<double> sample(const Fn& f, const Quadrature& rule) {
  std::vector<double> v(rule.nodes.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    v[k] = f(rule.nodes[k]);
    if (!std::isfinite(v[k])) {
      throw NumericError("non-finite sample at y=" + std::to_string(rule.nodes[k]));
    }
  }
  return v;
}

}  // namespace

double inner_product(const Fn& f, const Fn& g, const Quadrature& rule) {
  const auto fv = sample(f, rule);
  const auto gv = sample(g, rule);
  return kernels::active().dot3(rule.weights.data(), fv.data(), gv.data(), fv.size());
}

SpectralDecomp project_values(const std::vector<double>& values, const Quadrature& rule,
                              bool with_tail) {
  if (values.size() != rule.nodes.size()) throw DomainError("project_values: size mismatch");
  const auto& K = kernels::active();
  const std::size_t n = values.size();
  SpectralDecomp out;
  out.norm_sq = K.dot3(rule.weights.data(), values.data(), values.data(), n);
  if (!std::isfinite(out.norm_sq)) throw NumericError("project: non-finite norm");
  double captured = 0.0;
  for (int m = 0; m < kLowModes; ++m) {
    const double ip = K.dot3(rule.weights.data(), values.data(), rule.basis[static_cast<std::size_t>(m)].data(), n);
    const double nm = hermite_norm_sq_d(m);
    out.q[static_cast<std::size_t>(m)] = ip / nm;
    captured += ip * ip / nm;
  }
  if (with_tail) {
    for (int m = kLowModes; m <= kMaxMode; ++m) {
      const double ip = K.dot3(rule.weights.data(), values.data(), rule.basis[static_cast<std::size_t>(m)].data(), n);
      out.tail.push_back(ip / hermite_norm_sq_d(m));
    }
  }
  const double rad = out.norm_sq - captured;
  const double tol = 1e-9 * out.norm_sq + 1e-300;
  if (rad < -tol) {
    throw InconsistencyError("project: negative Parseval radicand " + std::to_string(rad) +
                             " (quadrature under-resolved)");
  }
  out.q_minus_norm = std::sqrt(std::max(0.0, rad));
  return out;
}

SpectralDecomp project(const Fn& f, const Quadrature& rule, bool with_tail) {
  return project_values(sample(f, rule), rule, with_tail);
}

std::vector<mpq_class> to_hermite_basis(const ExactPoly& poly) {
  if (poly.is_zero()) return {};
  std::vector<mpq_class> c(static_cast<std::size_t>(poly.degree()) + 1, mpq_class(0));
  ExactPoly rest = poly;
  while (!rest.is_zero()) {
    const int k = rest.degree();
    const mpq_class lead = rest.coeff(k);
    c[static_cast<std::size_t>(k)] = lead;
    rest -= hermite_unchecked(k) * lead;
  }
  return c;
}

ExactPoly from_hermite_basis(const std::vector<mpq_class>& c) {
  ExactPoly out;
  for (std::size_t m = 0; m < c.size(); ++m) {
    if (c[m] != 0) out += hermite_unchecked(static_cast<int>(m)) * c[m];
  }
  return out;
}

std::vector<double> to_hermite_basis_numeric(const std::vector<double>& monomial) {
  std::vector<double> rest = monomial;
  std::vector<double> c(rest.size(), 0.0);
  for (int k = static_cast<int>(rest.size()) - 1; k >= 0; --k) {
    const double lead = rest[static_cast<std::size_t>(k)];
    c[static_cast<std::size_t>(k)] = lead;
    if (lead == 0.0) continue;
    const ExactPoly& h = hermite_unchecked(k);
    for (int j = 0; j <= k; ++j) rest[static_cast<std::size_t>(j)] -= lead * h.coeff(j).get_d();
  }
  return c;
}

ExactPoly apply_L(const ExactPoly& poly) {
  const ExactPoly d1 = poly.derivative();
  const ExactPoly d2 = d1.derivative();
  return d2 - ExactPoly::monomial(1, mpq_class(1, 2)) * d1 + poly;
}

SpectralDecomp semigroup_step(const SpectralDecomp& decomp, double ds) {
  if (ds < 0.0) throw DomainError("semigroup_step: negative step");
  SpectralDecomp out = decomp;
  for (int m = 0; m < kLowModes; ++m) out.q[static_cast<std::size_t>(m)] *= std::exp((1.0 - 0.5 * m) * ds);
  // Without a tail the whole of q_minus is bounded by the slowest mode m=7.
  double tail_old = 0.0;
  double tail_new = 0.0;
  for (std::size_t j = 0; j < out.tail.size(); ++j) {
    const int m = kLowModes + static_cast<int>(j);
    const double nm = hermite_norm_sq_d(m);
    tail_old += decomp.tail[j] * decomp.tail[j] * nm;
    out.tail[j] *= std::exp((1.0 - 0.5 * m) * ds);
    tail_new += out.tail[j] * out.tail[j] * nm;
  }
  const int first_unknown = kLowModes + static_cast<int>(out.tail.size());
  const double rest = std::max(0.0, decomp.q_minus_norm * decomp.q_minus_norm - tail_old);
  const double rest_new = rest * std::exp(2.0 * (1.0 - 0.5 * first_unknown) * ds);
  out.q_minus_norm = std::sqrt(tail_new + rest_new);
  double low = 0.0;
  for (int m = 0; m < kLowModes; ++m) low += out.q[static_cast<std::size_t>(m)] * out.q[static_cast<std::size_t>(m)] * hermite_norm_sq_d(m);
  out.norm_sq = low + out.q_minus_norm * out.q_minus_norm;
  return out;
}

}  // namespace flatblow
