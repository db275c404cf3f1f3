#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "flatblow/dopri.hpp"
#include "flatblow/hermite.hpp"
#include "flatblow/interp.hpp"
#include "flatblow/pde_solver.hpp"
#include "flatblow/profile.hpp"

using namespace flatblow;

namespace {

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
  return m;
}

std::vector<double> uniform_r(double h, double r_max) {
  std::vector<double> r;
  const auto n = static_cast<int>(std::lround(r_max / h));
  for (int j = 0; j <= n; ++j) r.push_back(j * h);
  return r;
}

}  // namespace

TEST_CASE("y grid is symmetric and uniform") {
  const auto y = make_y_grid();
  REQUIRE(y.size() == 801);
  CHECK(y.front() == doctest::Approx(-20.0));
  CHECK(y[400] == 0.0);
  CHECK(y.back() == doctest::Approx(20.0));
  for (std::size_t j = 1; j < y.size(); ++j) CHECK(y[j] - y[j - 1] == doctest::Approx(0.05));
}

TEST_CASE("r grid is graded around the ring") {
  const auto r = make_r_grid();
  CHECK(r.front() == 0.0);
  CHECK(r.back() == 3.0);
  double hmax = 0.0;
  for (std::size_t j = 1; j < r.size(); ++j) {
    const double h = r[j] - r[j - 1];
    REQUIRE(h > 0.0);
    hmax = std::max(hmax, h);
    const double mid = 0.5 * (r[j] + r[j - 1]);
    if (std::abs(mid - 1.0) < 0.19) CHECK(h == doctest::Approx(1e-3).epsilon(1e-9));
  }
  CHECK(hmax <= 0.015);
  CHECK(std::find(r.begin(), r.end(), 1.0) != r.end());
  CHECK_THROWS_AS(make_r_grid(RGrid{}, 5.0), DomainError);
}

TEST_CASE("monotone cubic interpolation") {
  std::vector<double> x, y;
  for (int k = 0; k <= 40; ++k) {
    x.push_back(0.1 * k + 0.01 * (k % 3));
    y.push_back(std::tanh(5.0 * (x.back() - 2.0)));
  }
  const MonotoneCubic m(x, y);
  double prev = -2.0;
  for (int k = 0; k <= 4000; ++k) {
    const double v = m(x.front() + (x.back() - x.front()) * k / 4000.0);
    CHECK(v >= prev - 1e-15);
    prev = v;
  }
  for (std::size_t k = 0; k < x.size(); ++k) CHECK(m(x[k]) == doctest::Approx(y[k]).epsilon(1e-15));
  const MonotoneCubic lin({0.0, 1.0, 2.5, 3.0}, {1.0, 3.0, 6.0, 7.0});
  CHECK(lin(1.7) == doctest::Approx(4.4).epsilon(1e-14));
  CHECK_THROWS_AS(lin(3.1), BoundsError);
  CHECK_THROWS_AS(MonotoneCubic({0.0, 0.0}, {1.0, 2.0}), DomainError);

  // Flat stretch next to a rise does not undershoot.
  const MonotoneCubic step({0, 1, 2, 3, 4}, {0, 0, 0, 1, 1});
  for (int k = 0; k <= 400; ++k) {
    const double v = step(k / 100.0);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }

  // Third-order convergence on smooth data away from extrema.
  auto err_for = [](int n) {
    std::vector<double> xs, ys;
    for (int k = 0; k <= n; ++k) {
      xs.push_back(1.0 + 2.0 * k / n);
      ys.push_back(std::log(xs.back()));
    }
    const MonotoneCubic c(xs, ys);
    double e = 0.0;
    for (int k = 0; k <= 1000; ++k) {
      const double t = 1.0 + 2.0 * k / 1000.0;
      e = std::max(e, std::abs(c(t) - std::log(t)));
    }
    return e;
  };
  CHECK(err_for(40) / err_for(80) > 7.0);
}

TEST_CASE("Dormand-Prince step is fifth order") {
  OdeRhs f = [](double, const double* x, double* dx) { dx[0] = -x[0] * x[0]; };
  auto run = [&](double h) {
    DormandPrince dp(1);
    double x = 1.0, k, xn, kn;
    f(0.0, &x, &k);
    double t = 0.0;
    while (t < 1.0 - 1e-12) {
      dp.attempt(f, t, &x, &k, h, &xn, &kn, 1e-6, 1e-12);
      x = xn;
      k = kn;
      t += h;
    }
    return std::abs(x - 0.5);
  };
  const double e1 = run(0.1);
  const double e2 = run(0.05);
  CHECK(e1 < 1e-7);
  CHECK(e1 / e2 > 25.0);
  CHECK(DormandPrince::step_factor(0.0) == 5.0);
  CHECK(DormandPrince::step_factor(1e12) == 0.2);
}

TEST_CASE("uniform data blows up at the ODE time") {
  ModelParams mp;
  RadialField f;
  f.r = uniform_r(0.05, 3.0);
  f.u.assign(f.r.size(), 10.0);
  RadialStop stop;
  stop.u_cap = 1e9;
  const Trajectory tr = solve_radial(f, mp, stop);
  CHECK(tr.stop_reason == "blowup");
  for (const auto& snap : tr.radial) {
    for (double v : snap.u) CHECK(v == doctest::Approx(snap.u[0]).epsilon(1e-6));
    // exact u = 1/(0.1 - t); compare in 1/u, where errors do not amplify
    CHECK(std::abs(1.0 / snap.u[0] - (0.1 - snap.t)) <= 1e-10);
  }
  const BlowupEstimate be = detect_blowup(tr, mp);
  CHECK(std::abs(be.T_est - 0.1) <= 1e-3);
  CHECK(std::abs(be.T_est - 0.1) <= 1e-8);
  CHECK(be.r2 > 0.999);
}

TEST_CASE("zero data stays zero and is not blowing up") {
  ModelParams mp;
  RadialField f;
  f.r = uniform_r(0.05, 3.0);
  f.u.assign(f.r.size(), 0.0);
  RadialStop stop;
  stop.t_end = 0.5;
  RadialSettings rs;
  rs.snapshot_dt = 0.05;
  const Trajectory tr = solve_radial(f, mp, stop, rs);
  CHECK(tr.stop_reason == "time");
  CHECK(tr.radial.back().t == 0.5);
  for (const auto& snap : tr.radial) {
    for (double v : snap.u) CHECK(v == 0.0);
  }
  CHECK_THROWS_AS(detect_blowup(tr, mp), NotBlowingUp);
}

TEST_CASE("radial operator: symmetric limit at the origin and bad input") {
  ModelParams mp;
  mp.p = 3.0;
  mp.d = 3;
  // Delta(r^2) = 2d, so small quadratic data rises uniformly at rate 2d a.
  RadialField f;
  f.r = uniform_r(0.01, 1.0);
  for (double r : f.r) f.u.push_back(1e-4 * r * r);
  RadialStop stop;
  stop.t_end = 1e-3;
  const Trajectory tr = solve_radial(f, mp, stop);
  const auto& u = tr.radial.back().u;
  CHECK(u[0] == doctest::Approx(1e-4 * 2 * 3 * 1e-3).epsilon(1e-6));
  // derivative at the origin stays zero
  CHECK(std::abs(u[1] - u[0]) < 2e-8);

  RadialField bad = f;
  bad.u[3] = std::nan("");
  CHECK_THROWS_AS(solve_radial(bad, mp, stop), NumericError);
  bad = f;
  bad.r[0] = 0.001;
  CHECK_THROWS_AS(solve_radial(bad, mp, stop), DomainError);
}

TEST_CASE("initial data: plateau, projections and bracket check") {
  ModelParams mp;
  const InitialData z = build_initial_data({0, 0, 0, 0, 0, 0}, mp);
  CHECK(z.T == doctest::Approx(std::exp(-10.0)));
  CHECK(z.field.t == 0.0);
  for (std::size_t j = 0; j < z.frame.y.size(); ++j) {
    CHECK(z.frame.q[j] == 0.0);
    CHECK(z.frame.w[j] == doctest::Approx(phi(z.frame.y[j], 10.0, mp)).epsilon(1e-15));
  }
  for (std::size_t j = 0; j < z.field.r.size(); ++j) {
    if (z.field.r[j] <= mp.eps0 / 8) CHECK(z.field.u[j] == 0.0);
  }
  const double y0 = 0.0;
  const auto it = std::find(z.field.r.begin(), z.field.r.end(), 1.0);
  REQUIRE(it != z.field.r.end());
  CHECK(z.field.u[static_cast<std::size_t>(it - z.field.r.begin())] ==
        doctest::Approx(std::exp(10.0) * phi(y0, 10.0, mp)).epsilon(1e-14));

  // q_i(s0)/(A e^{-2 s0}) = d_i + O(e^{-s0}); the O(e^{-s0}) part shrinks by ~e^{-2} per +2 in s0.
  for (int i = 0; i < 6; ++i) {
    std::array<double, 6> d{};
    d[static_cast<std::size_t>(i)] = 1.0;
    double prev = 0.0;
    for (double s0 : {10.0, 12.0}) {
      ModelParams m = mp;
      m.s0 = s0;
      const InitialData id = build_initial_data(d, m);
      const SpectralDecomp dec = project_values(id.frame.q, grid_rule(id.frame.y));
      const double env = m.A * std::exp(-2.0 * s0);
      const double dev = std::abs(dec.q[static_cast<std::size_t>(i)] / env - 1.0);
      CHECK(dev <= 2000.0 * std::exp(-s0));
      for (int k = 0; k < 6; ++k) {
        if (k != i) CHECK(std::abs(dec.q[static_cast<std::size_t>(k)] / env) <= 6000.0 * std::exp(-s0));
      }
      if (s0 == 12.0) CHECK(dev < prev * 0.2);
      prev = dev;
    }
  }

  ModelParams big = mp;
  big.A = 1e12;
  CHECK_THROWS_AS(build_initial_data({-2, 0, 0, 0, 0, 0}, big), DomainError);
  CHECK_THROWS_AS(build_initial_data({2.5, 0, 0, 0, 0, 0}, mp), DomainError);
}

TEST_CASE("initial data on a sphere of radius r0 is the rescaled unit construction") {
  ModelParams mp;
  ModelParams m2 = mp;
  m2.r0 = 2.0;
  // Doubling every grid length makes the nodes of b exactly twice those of a.
  RGrid rg{6.0, 2e-3, 0.4, 2e-2, 1.05};
  const InitialData a = build_initial_data({0.3, -0.2, 0.1, 0, 0, 0}, mp);
  const InitialData b = build_initial_data({0.3, -0.2, 0.1, 0, 0, 0}, m2, {}, rg);
  CHECK(b.T == doctest::Approx(4.0 * a.T));
  REQUIRE(a.field.r.size() == b.field.r.size());
  for (std::size_t j = 0; j < b.field.r.size(); ++j) {
    CHECK(b.field.r[j] == doctest::Approx(2.0 * a.field.r[j]).epsilon(1e-12));
    CHECK(b.field.u[j] == doctest::Approx(0.25 * a.field.u[j]).epsilon(1e-9));
  }
}

TEST_CASE("frame conversion round trip and closed forms") {
  ModelParams mp;
  RGrid fine;
  fine.dr_fine = 2e-5;
  fine.fine_halfwidth = 0.14;
  const InitialData id = build_initial_data({0.5, -0.3, 0.2, 0.1, -0.1, 0.05}, mp, {}, fine);
  const SimilarityFrame back = to_similarity(id.field, id.T, 1.0, mp);
  CHECK(back.s == doctest::Approx(mp.s0).epsilon(1e-14));
  CHECK(max_abs_diff(back.w, id.frame.w) <= 1e-8);

  // u = kappa/(T-t) -> w = kappa
  RadialField f;
  f.r = make_r_grid();
  f.t = 0.2;
  const double T = 0.2 + std::exp(-9.0);
  for (std::size_t j = 0; j < f.r.size(); ++j) f.u.push_back(mp.kappa() / (T - f.t));
  const SimilarityFrame k = to_similarity(f, T, 1.0, mp);
  for (double v : k.w) CHECK(v == doctest::Approx(mp.kappa()).epsilon(1e-12));

  // u = (T-t)^{-1} f((r-1)/(T-t)^{1/4}) -> w(y) = f(e^{-s/4} y)
  ModelParams m3 = mp;
  m3.p = 3.0;
  const double tau = std::exp(-12.0);
  RadialField g;
  RGrid rg;
  rg.dr_fine = 1e-5;
  rg.fine_halfwidth = 0.06;
  g.r = make_r_grid(rg);
  g.t = 1.0;
  for (double r : g.r) g.u.push_back(std::pow(tau, -0.5) * f_profile((r - 1.0) / std::pow(tau, 0.25), m3));
  const SimilarityFrame fr = to_similarity(g, 1.0 + tau, 1.0, m3);
  for (std::size_t j = 0; j < fr.y.size(); ++j) {
    CHECK(fr.w[j] == doctest::Approx(f_profile(std::exp(-3.0) * fr.y[j], m3)).epsilon(1e-8));
  }

  RadialField late = f;
  late.t = 1.0;
  CHECK_THROWS_AS(to_similarity(late, 0.5, 1.0, mp), DomainError);
  RadialField narrow;
  narrow.r = {0.0, 0.5, 1.0, 1.001};
  narrow.u = {0.0, 1.0, 1.0, 1.0};
  narrow.t = 0.0;
  CHECK_THROWS_AS(to_similarity(narrow, 0.1, 1.0, mp), BoundsError);
}

TEST_CASE("w equation: kappa plateau is stationary") {
  ModelParams mp;
  SimilarityFrame fr;
  fr.y = make_y_grid();
  fr.s = 12.0;
  fr.w.assign(fr.y.size(), mp.kappa());
  const Trajectory tr = solve_w_equation(fr, mp, 13.0);
  CHECK(tr.stop_reason == "time");
  CHECK(tr.frames.back().s == 13.0);
  // Only the discrete drift acting on phi's curvature remains (dy^2 y phi''' ~ 1e-6).
  for (double v : tr.frames.back().w) CHECK(std::abs(v - mp.kappa()) <= 1e-2 * std::exp(-6.0));
}

TEST_CASE("w equation: constant-in-y data follows the heteroclinic orbit") {
  for (double p : {2.0, 3.0}) {
    ModelParams mp;
    mp.p = p;
    const double shift = 11.0;  // psi(s - shift): decays from kappa across the window
    SimilarityFrame fr;
    fr.y = make_y_grid();
    fr.s = 10.0;
    fr.w.assign(fr.y.size(), heteroclinic_psi(fr.s - shift, mp));
    WSettings ws;
    ws.snapshot_ds = 0.25;
    const Trajectory tr = solve_w_equation(fr, mp, 12.0, ws);
    double worst = 0.0;
    for (const auto& f : tr.frames) {
      const double ref = heteroclinic_psi(f.s - shift, mp);
      for (double v : f.w) worst = std::max(worst, std::abs(v - ref));
    }
    CHECK(worst <= 1e-4);
  }
}

TEST_CASE("w equation: cutoff source F matches the transformed equation") {
  // w~ = chi * kappa solves the cut-off equation with w~_s = kappa chi_s. The discrete
  // residual must vanish like dy^2 where the cutoff transition sits on the grid.
  ModelParams mp;
  const double s = 4.0;
  auto residual = [&](double dy) {
    const auto y = make_y_grid({20.0, dy});
    WEquation eq(mp, y, WSettings{});
    const std::vector<double> ph = eq.phi_values(s);
    const double eh = std::exp(-0.5 * s);
    std::vector<double> q(y.size()), out(y.size());
    std::vector<double> expect(y.size());
    for (std::size_t j = 0; j < y.size(); ++j) {
      const double r = 1.0 + y[j] * eh;
      const CutoffValue cv = r > 0 ? cutoff_chi(r / mp.eps0) : CutoffValue{0, 0, 0};
      q[j] = cv.v * mp.kappa() - ph[j];
      const double chi_s = cv.d1 * (-0.5 * y[j] * eh) / mp.eps0;
      expect[j] = mp.kappa() * chi_s - phi_partials(y[j], s, mp).ds;
    }
    eq.rhs(s, q.data(), out.data());
    double e = 0.0;
    double scale = 0.0;
    for (std::size_t j = 2; j + 2 < y.size(); ++j) {
      e = std::max(e, std::abs(out[j] - expect[j]));
      scale = std::max(scale, std::abs(expect[j]));
    }
    return std::make_pair(e, scale);
  };
  const auto [e1, sc] = residual(0.002);
  const auto [e2, sc2] = residual(0.001);
  CHECK(sc > 10.0);
  CHECK(e2 / sc2 < 0.03);
  CHECK(e1 / e2 > 3.5);
}

TEST_CASE("w equation: exact source vs radial reduction on phi") {
  // With q = 0 the right-hand side is R + c phi' (no cutoff on the grid at s = 10).
  ModelParams mp;
  const double s = 10.0;
  const auto y = make_y_grid();
  WEquation eq(mp, y, WSettings{});
  std::vector<double> q(y.size(), 0.0), out(y.size());
  eq.rhs(s, q.data(), out.data());
  const double eh = std::exp(-0.5 * s);
  for (std::size_t j = 0; j < y.size(); j += 10) {
    const PhiParts<double> pp = phi_partials(y[j], s, mp);
    const double c = (mp.d - 1) * eh / (1.0 + y[j] * eh);
    CHECK(out[j] == doctest::Approx(pp.R + c * pp.dy).epsilon(1e-12));
  }
}

TEST_CASE("w equation: grid refinement is second order in dy") {
  ModelParams mp;
  std::vector<double> q4;
  for (double dy : {0.1, 0.05, 0.025}) {
    const InitialData id = build_initial_data({}, mp, {20.0, dy});
    const Trajectory tr = solve_w_equation(id.frame, mp, mp.s0 + 0.5);
    const SpectralDecomp dec = project_values(tr.frames.back().q, grid_rule(tr.frames.back().y));
    q4.push_back(dec.q[4]);
  }
  const double c1 = std::abs(q4[1] - q4[0]);
  const double c2 = std::abs(q4[2] - q4[1]);
  CHECK(c2 <= 4.0 * c1);
  CHECK(c1 / c2 > 3.5);
}

TEST_CASE("w equation: upwind option is first order and stays close") {
  ModelParams mp;
  const InitialData id = build_initial_data({0.2, 0, 0, 0, 0, 0}, mp);
  WSettings up;
  up.upwind = true;
  const Trajectory a = solve_w_equation(id.frame, mp, mp.s0 + 0.25);
  const Trajectory b = solve_w_equation(id.frame, mp, mp.s0 + 0.25, up);
  const SpectralDecomp da = project_values(a.frames.back().q, grid_rule(id.frame.y));
  const SpectralDecomp db = project_values(b.frames.back().q, grid_rule(id.frame.y));
  CHECK(std::abs(da.q[0] - db.q[0]) <= 0.05 * std::abs(da.q[0]));
}

TEST_CASE("w integrator: snapshots, observer stop and re-step") {
  ModelParams mp;
  const InitialData id = build_initial_data({}, mp);
  WSettings ws;
  ws.snapshot_ds = 0.05;
  int calls = 0;
  const Trajectory tr = solve_w_equation(id.frame, mp, mp.s0 + 1.0, ws, [&](const WIntegrator& it) {
    ++calls;
    return it.s() < mp.s0 + 0.3;
  });
  CHECK(tr.stop_reason == "observer");
  CHECK(calls > 10);
  for (std::size_t k = 1; k < tr.frames.size(); ++k) CHECK(tr.frames[k].s > tr.frames[k - 1].s);
  CHECK(tr.frames[1].s == doctest::Approx(mp.s0 + 0.05).epsilon(1e-14));
  CHECK(tr.frames.back().s >= mp.s0 + 0.3);

  WIntegrator it(mp, id.frame);
  REQUIRE(it.step(mp.s0 + 1.0));
  const double h = it.s() - it.prev_s();
  std::vector<double> again;
  it.restep_from_previous(h, again);
  CHECK(max_abs_diff(again, it.q()) <= 1e-15);
  CHECK_FALSE(it.step(it.s()));
  CHECK_THROWS_AS(solve_w_equation(id.frame, mp, mp.s0 - 1.0), DomainError);
}

TEST_CASE("nonnegative data stays nonnegative up to blow-up") {
  ModelParams mp;
  const InitialData id = build_initial_data({0.4, -0.3, 0.2, 0.0, 0.1, -0.1}, mp);
  RadialStop stop;
  stop.u_cap = 1e10;
  const Trajectory tr = solve_radial(id.field, mp, stop);
  CHECK(tr.stop_reason == "blowup");
  double mn = 0.0;
  for (const auto& f : tr.radial) {
    for (double v : f.u) mn = std::min(mn, v);
  }
  CHECK(mn >= -1e-10);
  CHECK(tr.ode.samples > 0);
  CHECK(std::isfinite(tr.ode.c_eps));
}

TEST_CASE("radial and similarity solvers agree over a unit log-time window") {
  ModelParams mp;
  const InitialData id = build_initial_data({0.3, 0.2, -0.4, 0.1, 0.0, -0.2}, mp);
  const double s1 = mp.s0 + 1.0;
  RadialStop stop;
  stop.t_end = id.T - std::exp(-s1);
  const Trajectory rad = solve_radial(id.field, mp, stop);
  CHECK(rad.radial.back().t == stop.t_end);
  const SimilarityFrame conv = to_similarity(rad.radial.back(), id.T, 1.0, mp);
  const Trajectory w = solve_w_equation(id.frame, mp, s1);
  CHECK(conv.s == doctest::Approx(s1).epsilon(1e-12));
  CHECK(max_abs_diff(conv.w, w.frames.back().w) <= 1e-4);
}

TEST_CASE("flat run blows up on the ring") {
  ModelParams mp;
  const InitialData id = build_initial_data({}, mp);
  RadialStop stop;
  stop.u_cap = 1e14;
  const Trajectory tr = solve_radial(id.field, mp, stop);
  const BlowupEstimate be = detect_blowup(tr, mp);
  CHECK(std::abs(be.r_blow - 1.0) <= be.cell * (1.0 + 1e-9));
  CHECK(be.T_est == doctest::Approx(id.T).epsilon(1e-4));
  CHECK(be.r2 > 0.999);
  CHECK(be.n_points >= 3);
  CHECK(tr.regular_max > 0.0);
  CHECK(tr.regular_series.size() == tr.radial.size());
}

TEST_CASE("final profile report on synthetic data") {
  ModelParams mp;
  Trajectory tr;
  RadialField f;
  f.r = make_r_grid();
  f.t = 0.0;
  for (double r : f.r) f.u.push_back(r == 1.0 ? 1e30 : u_star(std::abs(r - 1.0), mp));
  tr.radial.push_back(f);
  ProfileReport rep = final_profile_check(tr, 1.0, mp);
  CHECK(rep.dr == doctest::Approx(1e-3));
  CHECK(rep.xi.size() == 18);
  CHECK(rep.min_ratio == doctest::Approx(1.0));
  CHECK(rep.max_ratio == doctest::Approx(1.0));
  for (double& v : tr.radial[0].u) v *= 2.0;
  rep = final_profile_check(tr, 1.0, mp);
  for (double r : rep.ratio) CHECK(r == doctest::Approx(2.0));
  CHECK(rep.spread == doctest::Approx(1.0));

  Trajectory coarse;
  RadialField g;
  g.r = {0.0, 0.5, 1.0, 1.5, 2.0};
  g.u = {0, 0, 1, 0, 0};
  coarse.radial.push_back(g);
  CHECK_THROWS_AS(final_profile_check(coarse, 1.0, mp), InsufficientResolution);
  CHECK_THROWS_AS(final_profile_check(tr, -1.0, mp), DomainError);
}
