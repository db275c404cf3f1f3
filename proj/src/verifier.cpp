#include "flatblow/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

#include "flatblow/exact_poly.hpp"
#include "flatblow/hermite.hpp"
#include "flatblow/profile.hpp"

namespace flatblow {

namespace {

using LD = long double;

struct LdRule {
  std::vector<LD> y, w;
  std::vector<std::array<LD, kMaxMode + 1>> h;  // h_m(y_k)
  std::array<LD, kMaxMode + 1> norm_sq{};
};

const LdRule& ld_rule() {
  static const LdRule rule = [] {
    LdRule r;
    gauss_hermite_rho<LD>(96, r.y, r.w);
    r.h.resize(r.y.size());
    for (std::size_t k = 0; k < r.y.size(); ++k) hermite_values<LD>(kMaxMode, r.y[k], r.h[k].data());
    for (int m = 0; m <= kMaxMode; ++m) r.norm_sq[static_cast<std::size_t>(m)] = static_cast<LD>(hermite_norm_sq_d(m));
    return r;
  }();
  return rule;
}

LD kappa_ld(LD p) { return std::pow(p - 1.0L, -1.0L / (p - 1.0L)); }

std::vector<double> to_double(const ExactPoly& e) {
  std::vector<double> out;
  for (const mpq_class& c : e.coeffs()) out.push_back(c.get_d());
  return out;
}

std::vector<double> hpoly(int m) { return to_double(hermite_poly(m)); }

// a += c * b (monomial vectors)
void axpy(std::vector<double>& a, double c, const std::vector<double>& b) {
  if (a.size() < b.size()) a.resize(b.size(), 0.0);
  for (std::size_t k = 0; k < b.size(); ++k) a[k] += c * b[k];
}

std::vector<double> mono(std::initializer_list<std::pair<int, double>> terms) {
  std::vector<double> v;
  for (auto [k, c] : terms) {
    if (v.size() <= static_cast<std::size_t>(k)) v.resize(static_cast<std::size_t>(k) + 1, 0.0);
    v[static_cast<std::size_t>(k)] += c;
  }
  return v;
}

std::array<double, kTableModes> to_table(const std::vector<double>& monomial) {
  std::array<double, kTableModes> t{};
  const std::vector<double> h = to_hermite_basis_numeric(monomial);
  for (std::size_t m = 0; m < h.size() && m < t.size(); ++m) t[m] = h[m];
  return t;
}

std::array<double, kTableModes> nan_table() {
  std::array<double, kTableModes> t;
  t.fill(std::numeric_limits<double>::quiet_NaN());
  return t;
}

}  // namespace

RateFit fit_decay(const std::function<double(double)>& sampler, double s_lo, double s_hi, int n) {
  if (n < 5 || !(s_hi > s_lo)) throw DomainError("fit_decay: need n >= 5 and s_lo < s_hi");
  RateFit fit;
  int sign = 0;
  bool crossed = false;
  for (int k = 0; k < n; ++k) {
    const double s = s_lo + (s_hi - s_lo) * k / (n - 1);
    const double v = sampler(s);
    if (!std::isfinite(v)) throw NumericError("fit_decay: non-finite sample at s=" + std::to_string(s));
    if (v == 0.0) {
      fit.warnings.push_back("zero sample at s=" + std::to_string(s) + " dropped");
      continue;
    }
    const int sg = v > 0.0 ? 1 : -1;
    if (sign != 0 && sg != sign) crossed = true;
    sign = sg;
    fit.samples.emplace_back(s, v);
  }
  if (crossed) fit.warnings.push_back("zero-crossing: fitted on |value|");
  if (fit.samples.size() < 5) throw NumericError("fit_decay: fewer than 5 nonzero samples");

  auto line = [](const std::vector<std::pair<double, double>>& pts, double& slope, double& icpt, double& r2) {
    double ms = 0.0, ml = 0.0;
    for (auto [s, v] : pts) {
      ms += s;
      ml += std::log(std::abs(v));
    }
    ms /= static_cast<double>(pts.size());
    ml /= static_cast<double>(pts.size());
    double css = 0.0, csl = 0.0, cll = 0.0;
    for (auto [s, v] : pts) {
      const double ds = s - ms;
      const double dl = std::log(std::abs(v)) - ml;
      css += ds * ds;
      csl += ds * dl;
      cll += dl * dl;
    }
    slope = csl / css;
    icpt = ml - slope * ms;
    r2 = cll > 0.0 ? std::clamp(csl * csl / (css * cll), 0.0, 1.0) : 1.0;
  };
  double icpt = 0.0;
  line(fit.samples, fit.slope, icpt, fit.r2);
  fit.prefactor = std::exp(icpt);

  const std::size_t half = fit.samples.size() / 2;
  if (half >= 3) {
    std::vector<std::pair<double, double>> a(fit.samples.begin(), fit.samples.begin() + static_cast<long>(half) + 1);
    std::vector<std::pair<double, double>> b(fit.samples.begin() + static_cast<long>(half), fit.samples.end());
    double sa, sb, ia, ib, ra, rb;
    line(a, sa, ia, ra);
    line(b, sb, ib, rb);
    if (std::abs(sa - sb) > 5e-3) {
      fit.warnings.push_back("local slope drifts from " + std::to_string(sa) + " to " + std::to_string(sb) +
                             ": power-of-s or higher-order correction likely");
    }
  }
  return fit;
}

std::vector<double> default_ladder() { return {8.0, 10.0, 12.0, 14.0, 16.0}; }

std::vector<long double> series_fit(const LdSampler& sampler, int k, const std::vector<double>& ladder) {
  const std::size_t n = ladder.size();
  if (n < 2) throw DomainError("series_fit: ladder needs at least 2 rungs");
  std::vector<LD> x(n), c(n);
  for (std::size_t j = 0; j < n; ++j) {
    const LD s = ladder[j];
    x[j] = std::exp(-s);
    c[j] = std::exp(static_cast<LD>(k) * s) * sampler(s);
    if (!std::isfinite(static_cast<double>(c[j]))) {
      throw SeriesDivergence("series_fit: non-finite sample at s=" + std::to_string(ladder[j]));
    }
  }
  // Bjorck-Pereyra: Newton divided differences, then expansion to monomials.
  for (std::size_t q = 0; q + 1 < n; ++q) {
    for (std::size_t j = n - 1; j > q; --j) c[j] = (c[j] - c[j - 1]) / (x[j] - x[j - q - 1]);
  }
  for (std::size_t q = n - 1; q-- > 0;) {
    for (std::size_t j = q; j + 1 < n; ++j) c[j] -= x[q] * c[j + 1];
  }
  return c;
}

double extract_series_coefficient(const LdSampler& sampler, int k, const std::vector<double>& ladder_in, double tol) {
  std::vector<double> ladder = ladder_in.empty() ? default_ladder() : ladder_in;
  std::sort(ladder.begin(), ladder.end());
  if (ladder.size() < 3) throw DomainError("extract_series_coefficient: ladder needs at least 3 rungs");
  const LD full = series_fit(sampler, k, ladder)[0];
  const std::vector<double> upper(ladder.begin() + 1, ladder.end());
  const LD part = series_fit(sampler, k, upper)[0];
  const double lim = static_cast<double>(full);
  if (!(std::abs(static_cast<double>(full - part)) <= tol * std::max(1.0, std::abs(lim)))) {
    throw SeriesDivergence("extract_series_coefficient: ladder limits " + std::to_string(lim) + " and " +
                           std::to_string(static_cast<double>(part)) + " disagree");
  }
  return lim;
}

std::string term_name(ProfileTerm t) {
  switch (t) {
    case ProfileTerm::Phi:
      return "phi";
    case ProfileTerm::Dyy:
      return "d2y_phi";
    case ProfileTerm::Drift:
      return "drift";
    case ProfileTerm::Linear:
      return "linear";
    case ProfileTerm::Power:
      return "phi_pow_p";
    case ProfileTerm::Ds:
      return "ds_phi";
    case ProfileTerm::V:
      return "V";
    case ProfileTerm::R:
      return "R";
  }
  return "?";
}

long double term_value(ProfileTerm t, long double y, long double s, long double p) {
  const PhiParts<LD> pp = phi_parts<LD>(y, s, p, kappa_ld(p));
  switch (t) {
    case ProfileTerm::Phi:
      return pp.phi;
    case ProfileTerm::Dyy:
      return pp.dyy;
    case ProfileTerm::Drift:
      return -0.5L * y * pp.dy;
    case ProfileTerm::Linear:
      return -pp.phi / (p - 1.0L);
    case ProfileTerm::Power:
      return pp.phi * pp.E / pp.D;  // phi^{p-1} = E/D
    case ProfileTerm::Ds:
      return pp.ds;
    case ProfileTerm::V:
      return pp.V;
    case ProfileTerm::R:
      return pp.R;
  }
  return 0.0L;
}

long double project_term(ProfileTerm t, int mode, long double s, long double p) {
  if (mode < 0 || mode > kMaxMode) throw BoundsError("project_term: mode out of range");
  const LdRule& r = ld_rule();
  const auto m = static_cast<std::size_t>(mode);
  LD acc = 0.0L;
  for (std::size_t k = 0; k < r.y.size(); ++k) acc += r.w[k] * term_value(t, r.y[k], s, p) * r.h[k][m];
  return acc / r.norm_sq[m];
}

long double term_limit(ProfileTerm t, long double p) {
  const LD k = kappa_ld(p);
  switch (t) {
    case ProfileTerm::Phi:
      return k;
    case ProfileTerm::Linear:
      return -k / (p - 1.0L);
    case ProfileTerm::Power:
      return k / (p - 1.0L);
    default:
      return 0.0L;
  }
}

ModeTable measure_term(ProfileTerm t, double p, const std::vector<double>& ladder) {
  ModeTable tab;
  const LD pl = p;
  const LD lim = term_limit(t, pl);
  for (int m = 0; m < kTableModes; ++m) {
    LdSampler f = [&](LD s) { return project_term(t, m, s, pl) - (m == 0 ? lim : 0.0L); };
    const std::vector<LD> c = series_fit(f, 1, ladder);
    tab.order1[static_cast<std::size_t>(m)] = static_cast<double>(c[0]);
    tab.order2[static_cast<std::size_t>(m)] = static_cast<double>(c[1]);
  }
  return tab;
}

std::vector<mpq_class> hermite_product(int a, int b) {
  return to_hermite_basis(hermite_poly(a) * hermite_poly(b));
}

ModeTable printed_term(ProfileTerm t, double p) {
  const double k = kappa_of(p);
  const std::vector<double> h2 = hpoly(2), h4 = hpoly(4), h8 = hpoly(8);
  const std::vector<double> h4sq = to_double(hermite_poly(4) * hermite_poly(4));
  // (p/2) y^8 - 12 y^6 + (156 - 72p) y^4 - 144(2-p) y^2 + 72(2-p): shared by three terms.
  const std::vector<double> Q = mono({{8, p / 2.0}, {6, -12.0}, {4, 156.0 - 72.0 * p}, {2, -144.0 * (2.0 - p)},
                                      {0, 72.0 * (2.0 - p)}});
  std::vector<double> o1, o2;
  ModeTable tab;
  switch (t) {
    case ProfileTerm::Phi:
      axpy(o1, -1.0, h4);
      tab.order1 = to_table(o1);
      tab.order2 = nan_table();
      return tab;
    case ProfileTerm::Dyy:
      axpy(o1, -12.0, h2);
      o2 = mono({{6, 28.0 * p / k}, {4, -360.0 / k}, {2, (1872.0 - 864.0 * p) / k}, {0, (2.0 - p) * 288.0 / k}});
      break;
    case ProfileTerm::Drift:
      axpy(o1, 2.0, h4);
      axpy(o1, 12.0, h2);
      o2 = mono({{8, -2.0 * p / k}, {6, 36.0 / k}, {4, -(312.0 - 144.0 * p) / k}, {2, 144.0 * (2.0 - p) / k}});
      break;
    case ProfileTerm::Linear:
      axpy(o1, 1.0 / (p - 1.0), h4);
      axpy(o2, -1.0 / (k * (p - 1.0)), Q);
      break;
    case ProfileTerm::Power: {
      axpy(o1, -p / (p - 1.0), h4);
      const std::vector<double> Qp = mono({{8, p / (2.0 * k)}, {6, -12.0 / k}, {4, 156.0 - 72.0 * p},
                                           {2, -144.0 * (2.0 - p)}, {0, 72.0 * (2.0 - p)}});
      axpy(o2, p / (p - 1.0), Qp);
      break;
    }
    case ProfileTerm::Ds:
      axpy(o1, 1.0, h4);
      axpy(o2, -2.0 / k, Q);
      axpy(o2, p / (2.0 * k), h4sq);
      break;
    case ProfileTerm::V:
      axpy(o1, -p * (p - 1.0) * std::pow(k, p - 2.0), h4);
      axpy(o2, 0.5 * p * p * (p - 1.0) * std::pow(k, p - 3.0), h8);
      axpy(o2, 0.5 * p * (p - 1.0) * (p - 2.0) * std::pow(k, p - 3.0), h4sq);
      break;
    case ProfileTerm::R: {
      o1 = {0.0};
      const double c = p / k;
      axpy(o2, c * 3.0 * p, h8);
      axpy(o2, c * (48.0 + 184.0 * p), hpoly(6));
      axpy(o2, c * (2268.0 + 3764.0 * p), h4);
      axpy(o2, c * (20880.0 + 20880.0 * p), h2);
      axpy(o2, c * (19584.0 + 14016.0 * p), {1.0});
      break;
    }
  }
  tab.order1 = to_table(o1);
  tab.order2 = to_table(o2);
  return tab;
}

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Match:
      return "match";
    case Verdict::Mismatch:
      return "mismatch";
    default:
      return "measured-only";
  }
}

int ExpansionReport::count(Verdict v) const {
  return static_cast<int>(std::count_if(rows.begin(), rows.end(), [v](const ClaimRow& r) { return r.verdict == v; }));
}

namespace {

ClaimRow exact_row(std::string id, std::string claim, const mpq_class& printed, const mpq_class& measured,
                   std::string note = {}) {
  ClaimRow r;
  r.id = std::move(id);
  r.claim = std::move(claim);
  r.printed = printed.get_d();
  r.measured = measured.get_d();
  r.verdict = printed == measured ? Verdict::Match : Verdict::Mismatch;
  r.note = std::move(note);
  return r;
}

}  // namespace

std::vector<ClaimRow> identity_audit(double p_d) {
  std::vector<ClaimRow> rows;
  const mpq_class p(p_d);
  const ExactPoly y2 = ExactPoly::monomial(2);
  const ExactPoly y4 = ExactPoly::monomial(4);
  const ExactPoly one = ExactPoly::constant(1);
  const ExactPoly h2 = hermite_poly(2), h4 = hermite_poly(4);

  // P(y) kappa = (p-1)(y^4 - h4) against 12(p-1)(y^2 - 1); kappa cancels.
  const ExactPoly lhs = correction_poly_scaled(p_d);
  const ExactPoly rhs = (y2 - one) * (mpq_class(12) * (p - 1));
  rows.push_back(exact_row("identity.P_simplification", "(p-1)/kappa (y^4 - h4) = 12(p-1)/kappa (y^2-1)", 1,
                           lhs == rhs ? 1 : 0, "exact polynomial equality, p as a binary rational"));

  const std::vector<mpq_class> d = to_hermite_basis(y4 - h4);
  const mpq_class d2 = d.size() > 2 ? d[2] : mpq_class(0);
  const mpq_class d0 = d.empty() ? mpq_class(0) : d[0];
  rows.push_back(exact_row("identity.y4_minus_h4.h2", "y^4 - h4 = 12 h2 + 12: h2 coefficient", 12, d2));
  rows.push_back(exact_row("identity.y4_minus_h4.h0", "y^4 - h4 = 12 h2 + 12: h0 coefficient", 12, d0));

  const std::vector<mpq_class> sq = hermite_product(4, 4);
  const std::array<std::pair<int, long>, 5> printed{{{8, 1}, {6, 32}, {4, 408}, {2, 2208}, {0, 1824}}};
  for (auto [m, pv] : printed) {
    const mpq_class meas = static_cast<std::size_t>(m) < sq.size() ? sq[static_cast<std::size_t>(m)] : mpq_class(0);
    rows.push_back(exact_row("identity.h4_squared.h" + std::to_string(m), "h4^2 in the Hermite basis: h" +
                             std::to_string(m) + " coefficient", pv, meas));
  }
  // Pointwise witness at y = 1.
  ExactPoly printed_rhs = hermite_poly(8) + hermite_poly(6) * mpq_class(32) + h4 * mpq_class(408) +
                          h2 * mpq_class(2208) + ExactPoly::constant(1824);
  const mpq_class at1 = (h4 * h4).eval(mpq_class(1));
  rows.push_back(exact_row("identity.h4_squared.witness_y1", "h4(1)^2 against the printed expansion at y=1",
                           printed_rhs.eval(mpq_class(1)), at1, "printed = right side at y=1, measured = left side"));

  const std::vector<mpq_class> sq2 = hermite_product(2, 2);
  const std::array<std::pair<int, long>, 3> exp2{{{4, 1}, {2, 8}, {0, 8}}};
  for (auto [m, v] : exp2) {
    ClaimRow r;
    r.id = "identity.h2_squared.h" + std::to_string(m);
    r.claim = "h2^2 in the Hermite basis: h" + std::to_string(m) + " coefficient";
    const mpq_class meas = static_cast<std::size_t>(m) < sq2.size() ? sq2[static_cast<std::size_t>(m)] : mpq_class(0);
    r.measured = meas.get_d();
    r.verdict = Verdict::MeasuredOnly;
    r.note = meas == v ? "exact, agrees with direct expansion" : "exact, DISAGREES with direct expansion";
    rows.push_back(r);
  }
  return rows;
}

ExpansionReport verify_expansion_suite(const ModelParams& mp, const ExpansionOptions& opt) {
  ExpansionReport rep;
  rep.p = mp.p;
  std::vector<double> ladder = opt.ladder;
  if (ladder.empty()) {
    for (int s = 8; s <= 16; ++s) ladder.push_back(s);
  }
  rep.rows = identity_audit(mp.p);
  for (ProfileTerm t : kAllTerms) {
    const ModeTable meas = measure_term(t, mp.p, ladder);
    const ModeTable pr = printed_term(t, mp.p);
    for (int order = 1; order <= 2; ++order) {
      const auto& mt = order == 1 ? meas.order1 : meas.order2;
      const auto& pt = order == 1 ? pr.order1 : pr.order2;
      for (int m = 0; m < kTableModes; ++m) {
        const double mv = mt[static_cast<std::size_t>(m)];
        const double pv = pt[static_cast<std::size_t>(m)];
        const bool printed = !std::isnan(pv);
        if (std::abs(mv) < opt.zero_threshold && (!printed || std::abs(pv) < opt.zero_threshold)) continue;
        ClaimRow r;
        r.id = term_name(t) + ".e-" + std::to_string(order) + "s.h" + std::to_string(m);
        r.claim = "coefficient of e^{-" + std::to_string(order) + "s} h" + std::to_string(m) + " in " + term_name(t);
        r.measured = mv;
        if (printed) {
          r.printed = pv;
          r.verdict = std::abs(mv - pv) <= opt.match_tol * std::max(1.0, std::abs(pv)) ? Verdict::Match
                                                                                       : Verdict::Mismatch;
        }
        rep.rows.push_back(r);
      }
    }
  }
  return rep;
}

DecaySuite decay_rate_suite(const ModelParams& mp, double s_lo, double s_hi, int n) {
  DecaySuite out;
  const LD p = mp.p;
  const LdRule& r = ld_rule();
  struct Sample {
    std::array<LD, 7> modes;
    LD tail;
    LD vnorm;
    LD rnorm;
  };
  std::mutex mu;
  std::vector<std::pair<double, Sample>> cache;
  auto sample = [&](double s) {
    std::lock_guard<std::mutex> lock(mu);
    for (auto& [cs, v] : cache) {
      if (cs == s) return v;
    }
    Sample smp{};
    std::vector<LD> Rv(r.y.size());
    LD vv = 0.0L, rr = 0.0L;
    for (std::size_t k = 0; k < r.y.size(); ++k) {
      Rv[k] = term_value(ProfileTerm::R, r.y[k], s, p);
      const LD V = term_value(ProfileTerm::V, r.y[k], s, p);
      vv += r.w[k] * V * V;
      rr += r.w[k] * Rv[k] * Rv[k];
    }
    for (int m = 0; m < 7; ++m) {
      LD acc = 0.0L;
      for (std::size_t k = 0; k < r.y.size(); ++k) acc += r.w[k] * Rv[k] * r.h[k][static_cast<std::size_t>(m)];
      smp.modes[static_cast<std::size_t>(m)] = acc / r.norm_sq[static_cast<std::size_t>(m)];
    }
    LD tt = 0.0L;
    for (std::size_t k = 0; k < r.y.size(); ++k) {
      LD res = Rv[k];
      for (int m = 0; m < 7; ++m) res -= smp.modes[static_cast<std::size_t>(m)] * r.h[k][static_cast<std::size_t>(m)];
      tt += r.w[k] * res * res;
    }
    smp.tail = std::sqrt(tt);
    smp.vnorm = std::sqrt(vv);
    smp.rnorm = std::sqrt(rr);
    cache.emplace_back(s, smp);
    return smp;
  };
  for (int m = 0; m < 7; ++m) {
    const auto um = static_cast<std::size_t>(m);
    // R is even in y, so odd projections vanish up to rounding.
    bool zero = true;
    for (int k = 0; k < n && zero; ++k) {
      const double s = s_lo + (s_hi - s_lo) * k / (n - 1);
      const Sample smp = sample(s);
      zero = std::abs(smp.modes[um]) * std::sqrt(r.norm_sq[um]) <= 1e-12L * smp.rnorm;
    }
    out.parity_zero[um] = zero;
    if (zero) {
      out.modes[um].warnings.push_back("identically zero by parity; no rate to fit");
      continue;
    }
    out.modes[um] = fit_decay([&](double s) { return static_cast<double>(sample(s).modes[um]); }, s_lo, s_hi, n);
  }
  out.tail = fit_decay([&](double s) { return static_cast<double>(sample(s).tail); }, s_lo, s_hi, n);
  out.potential = fit_decay([&](double s) { return static_cast<double>(sample(s).vnorm); }, s_lo, s_hi, n);
  return out;
}

}  // namespace flatblow
