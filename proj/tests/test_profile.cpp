#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "flatblow/hermite.hpp"
#include "flatblow/profile.hpp"

using namespace flatblow;

namespace {

ModelParams with_p(double p) {
  ModelParams mp;
  mp.p = p;
  return mp;
}

}  // namespace

TEST_CASE("kappa_of") {
  CHECK(kappa_of(2.0) == 1.0);
  CHECK(kappa_of(3.0) == doctest::Approx(0.7071067812).epsilon(1e-10));
  CHECK(kappa_of(1.5) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK_THROWS_AS(kappa_of(1.0), DomainError);
  CHECK_THROWS_AS(kappa_of(0.5), DomainError);
  for (double p : {1.2, 1.5, 2.0, 2.5, 3.0, 5.0, 7.0}) {
    CHECK(std::fabs(std::pow(kappa_of(p), p - 1.0) * (p - 1.0) - 1.0) <= 1e-12);
  }
}

TEST_CASE("ModelParams validation") {
  ModelParams mp;
  CHECK_NOTHROW(mp.validate());
  mp.d = 3;
  mp.p = 4;
  CHECK_NOTHROW(mp.validate());
  mp.p = 6;
  CHECK_THROWS_AS(mp.validate(), UsageError);
  mp = ModelParams{};
  mp.eps0 = 1.5;
  CHECK_THROWS_AS(mp.validate(), UsageError);
}

TEST_CASE("phi frozen values") {
  const auto mp = with_p(2);
  CHECK(phi(0, 5, mp) == doctest::Approx(1.0 - 12.0 * std::exp(-5.0)).epsilon(1e-14));
  CHECK(phi(0, 5, mp) == doctest::Approx(0.9191446).epsilon(1e-7));
  const double e = std::exp(-10.0);
  CHECK(phi(2, 10, mp) == doctest::Approx((1 + 36 * e) / (1 + 16 * e)).epsilon(1e-14));
  CHECK(phi(2, 10, mp) == doctest::Approx(1.000908).epsilon(1e-6));
  for (double p : {2.0, 3.0, 1.5}) {
    CHECK(phi(1.7, 40, with_p(p)) == doctest::Approx(kappa_of(p)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(phi(0, 2, mp), DomainError);
}

TEST_CASE("correction polynomial is exact") {
  for (double p : {2.0, 3.0, 1.5}) {
    const ExactPoly ps = correction_poly_scaled(p);
    const mpq_class pm1 = mpq_class(p) - 1;
    CHECK(ps * (1 / pm1) == ExactPoly::from_ints({-12, 0, 12}));
    CHECK(ps * (1 / pm1) == ExactPoly::monomial(4) - hermite_poly(4));
  }
}

TEST_CASE("E >= 1/2 beyond s2") {
  for (double p : {2.0, 3.0, 1.5}) {
    const auto mp = with_p(p);
    const ProfileContext ctx(mp);
    const double s2 = s2_threshold(mp);
    CHECK(ctx.E(0.0, s2) == doctest::Approx(0.5).epsilon(1e-12));
    for (double s : {s2, s2 + 0.5, s2 + 3}) {
      for (double y = -30; y <= 30; y += 0.01) CHECK_UNARY(ctx.E(y, s) >= 0.5 - 1e-12);
    }
  }
}

TEST_CASE("analytic partials match central differences") {
  std::mt19937_64 g(42);
  std::uniform_real_distribution<double> uy(-15, 15), us(4, 14);
  for (double p : {2.0, 3.0, 1.5}) {
    const auto mp = with_p(p);
    for (int k = 0; k < 100; ++k) {
      const double y = uy(g), s = us(g);
      const auto pp = phi_partials(y, s, mp);
      const double hy = 1e-4, hs = 1e-4, h2 = 2e-3;
      const double fy = (phi(y + hy, s, mp) - phi(y - hy, s, mp)) / (2 * hy);
      const double fs = (phi(y, s + hs, mp) - phi(y, s - hs, mp)) / (2 * hs);
      const double fyy = (phi(y + h2, s, mp) - 2 * pp.phi + phi(y - h2, s, mp)) / (h2 * h2);
      CHECK(std::fabs(pp.dy - fy) <= 1e-6 * std::fabs(pp.dy) + 1e-11);
      CHECK(std::fabs(pp.ds - fs) <= 1e-6 * std::fabs(pp.ds) + 1e-11);
      CHECK(std::fabs(pp.dyy - fyy) <= 1e-4 * std::fabs(pp.dyy) + 1e-9);
    }
  }
}

TEST_CASE("R and V agree with their defining formulas") {
  for (double p : {2.0, 3.0, 1.5}) {
    const auto mp = with_p(p);
    for (double s : {4.0, 6.0}) {
      for (double y = -10; y <= 10; y += 0.37) {
        const auto pp = phi_partials(y, s, mp);
        const double direct_R = pp.dyy - 0.5 * y * pp.dy - pp.phi / (p - 1) + std::pow(pp.phi, p) - pp.ds;
        CHECK(std::fabs(pp.R - direct_R) <= 1e-12);
        const double direct_V = p * std::pow(pp.phi, p - 1) - p / (p - 1);
        CHECK(std::fabs(pp.V - direct_V) <= 1e-13);
      }
    }
  }
}

TEST_CASE("R order e^{-2s} Hermite constants (series oracle)") {
  // Exact series coefficients computed independently with a CAS.
  const auto mp = with_p(2);
  const double s = 20.0;
  const auto d = project([&](double y) { return remainder_R(y, s, mp) * std::exp(2 * s); });
  CHECK(d.q[0] == doctest::Approx(1536).epsilon(5e-5));
  CHECK(d.q[2] == doctest::Approx(3456).epsilon(5e-5));
  CHECK(d.q[4] == doctest::Approx(780).epsilon(5e-5));
  CHECK(d.q[6] == doctest::Approx(32).epsilon(5e-5));
  CHECK(std::fabs(d.q[1]) + std::fabs(d.q[3]) + std::fabs(d.q[5]) < 1e-9);
}

TEST_CASE("flat profile: e^s (phi - kappa) projects to -h4") {
  // Next order is e^{-s}(h8 + 44h6 + 492h4 + 1344h2 + 384) at p=2 (series
  // oracle), so the gap is C e^{-s} with C ~ 1.3e3 (3.3e3 at p=3) rather than 2.
  for (double p : {2.0, 3.0}) {
    const auto mp = with_p(p);
    for (double s : {10.0, 12.0, 16.0}) {
      const double k = kappa_of(p);
      const auto d = project([&](double y) { return std::exp(s) * (phi(y, s, mp) - k); });
      for (int m = 0; m < 7; ++m) CHECK(std::fabs(d.q[m] - (m == 4 ? -1.0 : 0.0)) <= 4e3 * std::exp(-s));
    }
  }
}

TEST_CASE("phi bounded by kappa + C0 e^{-s/3} with a single fitted C0 <= 10") {
  for (double p : {2.0, 3.0}) {
    const auto mp = with_p(p);
    const double k = kappa_of(p);
    double C0 = 0.0, Cd = 0.0;
    for (double s = 6; s <= 16; s += 0.5) {
      double mx = 0.0, mdy = 0.0;
      for (double y = -60; y <= 60; y += 0.01) {
        const auto pp = phi_partials(y, s, mp);
        mx = std::max(mx, pp.phi);
        mdy = std::max(mdy, std::fabs(pp.dy));
      }
      C0 = std::max(C0, (mx - k) * std::exp(s / 3));
      Cd = std::max(Cd, mdy * std::exp(s / 4));
    }
    CHECK(C0 <= 10.0);
    CHECK(Cd <= 10.0);
  }
}

TEST_CASE("phi decays monotonically beyond the last critical point") {
  for (double p : {2.0, 3.0}) {
    const auto mp = with_p(p);
    const double s = 10;
    double last_crit = 0.0;
    for (double y = 0; y <= 400; y += 0.01) {
      if (phi_partials(y, s, mp).dy > 0) last_crit = y;
    }
    double prev = phi(last_crit + 0.01, s, mp);
    for (double y = last_crit + 0.02; y <= 5000; y *= 1.01) {
      const double v = phi(y, s, mp);
      CHECK_UNARY(v <= prev);
      prev = v;
    }
    CHECK(phi(1e8, s, mp) < 1e-7);
  }
}

TEST_CASE("phi versus f(e^{-s/4} y) on |y| <= e^{s/4}") {
  // The numerator correction 12(p-1)/kappa (e^{-s/2} z^2 - e^{-s}) makes the
  // gap O(e^{-s/2}); an O(e^{-s}) bound does not hold.
  const auto mp = with_p(2);
  std::vector<double> ss, lg;
  for (double s = 8; s <= 16; s += 1) {
    double sup = 0;
    const double Y = std::exp(s / 4);
    for (double y = -Y; y <= Y; y += Y / 2000) sup = std::max(sup, std::fabs(f_profile(std::exp(-s / 4) * y, mp) - phi(y, s, mp)));
    ss.push_back(s);
    lg.push_back(std::log(sup));
  }
  const double slope = (lg.back() - lg.front()) / (ss.back() - ss.front());
  CHECK(slope == doctest::Approx(-0.5).epsilon(0.05));
  // sup e^{s/2} increases to 12/2 = 6 (attained near z = 1).
  for (std::size_t i = 0; i < ss.size(); ++i) CHECK(std::exp(lg[i] + 0.5 * ss[i]) <= 6.0);
  CHECK(std::exp(lg.back() + 0.5 * ss.back()) > 5.99);
}

TEST_CASE("f_profile and u_star") {
  for (double p : {2.0, 3.0, 1.5}) {
    const auto mp = with_p(p);
    CHECK(f_profile(0, mp) == doctest::Approx(kappa_of(p)).epsilon(1e-14));
    CHECK(f_profile(1e4, mp) / u_star(1e4, mp) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(f_profile(-0.7, mp) == f_profile(0.7, mp));
    for (double z = 0.01; z < 10; z += 0.01) CHECK_UNARY(f_profile(z, mp) < f_profile(z - 0.01, mp));
    CHECK(u_star(2.0, mp) / u_star(1.0, mp) == doctest::Approx(std::pow(2.0, -4.0 / (p - 1))).epsilon(1e-13));
    CHECK_THROWS_AS(u_star(0.0, mp), DomainError);
  }
  CHECK(f_profile(1, with_p(2)) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(u_star(1, with_p(2)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(u_star(1, with_p(3)) == doctest::Approx(0.4204482).epsilon(1e-7));
}

TEST_CASE("heteroclinic psi") {
  const auto mp = with_p(2);
  CHECK(heteroclinic_psi(0, mp) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(heteroclinic_psi(-40, mp) == doctest::Approx(1.0).epsilon(1e-15));
  for (double p : {2.0, 3.0, 1.5}) {
    const auto m = with_p(p);
    double prev = kappa_of(p);
    for (double s = -5; s <= 5; s += 0.01) {
      const double v = heteroclinic_psi(s, m);
      CHECK_UNARY(v < prev);
      CHECK_UNARY(v > 0);
      prev = v;
      const double res = heteroclinic_psi_ds(s, m) + v / (p - 1) - std::pow(v, p);
      CHECK(std::fabs(res) <= 1e-10);
      const double fd = (heteroclinic_psi(s + 1e-5, m) - heteroclinic_psi(s - 1e-5, m)) / 2e-5;
      CHECK(std::fabs(fd - heteroclinic_psi_ds(s, m)) <= 1e-8);
    }
  }
}

TEST_CASE("cutoffs") {
  CHECK(cutoff_chi(0.1).v == 0.0);
  CHECK(cutoff_chi(0.3).v == 1.0);
  CHECK(cutoff_chi(0.0).v == 0.0);
  CHECK(cutoff_chibar(0.2).v == 1.0);
  CHECK(cutoff_chibar(0.8).v == 0.0);
  double prev = 0.0, maxd = 0.0;
  for (double xi = 0.125; xi <= 0.25; xi += 1e-4) {
    const auto c = cutoff_chi(xi);
    CHECK_UNARY(c.v >= prev);
    prev = c.v;
    maxd = std::max(maxd, std::fabs(c.d1));
    const double h = 1e-6;
    CHECK(std::fabs((cutoff_chi(xi + h).v - cutoff_chi(xi - h).v) / (2 * h) - c.d1) <= 1e-5 * (1 + std::fabs(c.d1)));
    CHECK(std::fabs((cutoff_chi(xi + h).d1 - cutoff_chi(xi - h).d1) / (2 * h) - c.d2) <= 1e-4 * (1 + std::fabs(c.d2)));
  }
  CHECK(maxd <= 32.0);
  CHECK(maxd <= kChiSlopeBound + 1e-9);
  for (double xi = 0.375; xi <= 0.75; xi += 1e-4) {
    const auto c = cutoff_chibar(xi);
    const double h = 1e-6;
    CHECK(std::fabs((cutoff_chibar(xi + h).v - cutoff_chibar(xi - h).v) / (2 * h) - c.d1) <= 1e-5 * (1 + std::fabs(c.d1)));
  }
}

TEST_CASE("V examples") {
  const auto mp = with_p(2);
  CHECK(std::fabs(potential_V(1.3, 40, mp)) < 1e-15);
  const auto d = project([&](double y) { return potential_V(y, 20, mp) * std::exp(20.0); });
  CHECK(d.q[4] == doctest::Approx(-2.0).epsilon(5e-5));
  for (double s : {6.0, 10.0}) {
    for (double y = -50; y <= 50; y += 0.1) CHECK_UNARY(std::fabs(potential_V(y, s, mp)) <= 2.0 + 1e-12);
  }
}
