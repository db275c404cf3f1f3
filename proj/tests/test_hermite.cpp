#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "flatblow/errors.hpp"
#include "flatblow/hermite.hpp"

using namespace flatblow;

TEST_CASE("hermite_poly frozen values") {
  CHECK(hermite_poly(0) == ExactPoly::from_ints({1}));
  CHECK(hermite_poly(4) == ExactPoly::from_ints({12, 0, -12, 0, 1}));
  CHECK(hermite_poly(6) == ExactPoly::from_ints({-120, 0, 180, 0, -30, 0, 1}));
  CHECK(hermite_poly(4).str() == "y^4 - 12*y^2 + 12");
  CHECK_THROWS_AS(hermite_poly(17), BoundsError);
  CHECK_THROWS_AS(hermite_poly(-1), DomainError);
}

TEST_CASE("hermite_poly agrees with the defining sum") {
  for (int m = 0; m <= 16; ++m) {
    std::vector<mpq_class> c(static_cast<std::size_t>(m) + 1, mpq_class(0));
    for (int n = 0; 2 * n <= m; ++n) {
      mpz_class num, a, b;
      mpz_fac_ui(num.get_mpz_t(), static_cast<unsigned long>(m));
      mpz_fac_ui(a.get_mpz_t(), static_cast<unsigned long>(n));
      mpz_fac_ui(b.get_mpz_t(), static_cast<unsigned long>(m - 2 * n));
      mpq_class term(num, a * b);
      if (n % 2) term = -term;
      c[static_cast<std::size_t>(m - 2 * n)] = term;
    }
    CHECK(hermite_poly(m) == ExactPoly(c));
    CHECK(hermite_poly(m).coeff(m) == 1);
  }
}

TEST_CASE("hermite_norm_sq") {
  CHECK(hermite_norm_sq(0) == 1);
  CHECK(hermite_norm_sq(2) == 8);
  CHECK(hermite_norm_sq(4) == 384);
  CHECK(hermite_norm_sq_d(4) == 384.0);
  const double quad = inner_product([](double y) { return hermite_poly(4).eval(y); },
                                    [](double y) { return hermite_poly(4).eval(y); });
  CHECK(quad == doctest::Approx(384.0).epsilon(1e-12));
}

TEST_CASE("weight integrates to one") {
  for (int d = 1; d <= 3; ++d) CHECK(std::fabs(gaussian_weight_mass(d) - 1.0) <= 1e-12);
}

TEST_CASE("inner_product examples") {
  auto h = [](int m) { return [m](double y) { return hermite_poly(m).eval(y); }; };
  CHECK(inner_product(h(3), h(3)) == doctest::Approx(48.0).epsilon(1e-13));
  CHECK(std::fabs(inner_product(h(1), h(4))) < 1e-12);
  CHECK(inner_product([](double y) { return y * y; }, h(0)) == doctest::Approx(2.0).epsilon(1e-13));
  CHECK_THROWS_AS(inner_product([](double) { return NAN; }, h(0)), NumericError);
}

TEST_CASE("orthogonality for m,n <= 12 at order 40 and 64") {
  for (int order : {40, 64}) {
    const Quadrature rule = gauss_hermite_rule(order);
    for (int m = 0; m <= 12; ++m) {
      for (int n = 0; n <= 12; ++n) {
        double ip = 0.0;
        for (std::size_t k = 0; k < rule.nodes.size(); ++k) ip += rule.weights[k] * rule.basis[m][k] * rule.basis[n][k];
        const double expect = m == n ? hermite_norm_sq_d(n) : 0.0;
        CHECK(std::fabs(ip - expect) <= 1e-9 * hermite_norm_sq_d(n));
      }
    }
  }
}

TEST_CASE("grid rule is spectrally accurate for the solver grid") {
  std::vector<double> y;
  for (int j = -400; j <= 400; ++j) y.push_back(0.05 * j);
  const Quadrature rule = grid_rule(y);
  for (int m = 0; m <= 10; ++m) {
    double ip = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) ip += rule.weights[k] * rule.basis[m][k] * rule.basis[m][k];
    CHECK(std::fabs(ip / hermite_norm_sq_d(m) - 1.0) < 1e-12);
  }
}

TEST_CASE("project examples") {
  const auto d4 = project([](double y) { return hermite_poly(4).eval(y); });
  for (int m = 0; m < 7; ++m) CHECK(std::fabs(d4.q[m] - (m == 4 ? 1.0 : 0.0)) < 1e-12);
  CHECK(d4.q_minus_norm < 1e-6);

  const auto y4 = project([](double y) { return y * y * y * y; });
  CHECK(y4.q[0] == doctest::Approx(12.0).epsilon(1e-12));
  CHECK(y4.q[2] == doctest::Approx(12.0).epsilon(1e-12));
  CHECK(y4.q[4] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::fabs(y4.q[1]) + std::fabs(y4.q[3]) + std::fabs(y4.q[5]) + std::fabs(y4.q[6]) < 1e-11);

  const auto h8 = project([](double y) { return hermite_poly(8).eval(y); }, default_rule(), true);
  CHECK(h8.q_minus_norm == doctest::Approx(std::sqrt(hermite_norm_sq_d(8))).epsilon(1e-10));
  CHECK(h8.tail[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Parseval split on random polynomials of degree <= 10") {
  std::mt19937_64 g(99);
  std::uniform_int_distribution<int> deg(0, 10);
  std::uniform_real_distribution<double> c(-1, 1);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = deg(g);
    std::vector<double> co(static_cast<std::size_t>(n) + 1);
    for (auto& x : co) x = c(g);
    auto f = [&](double y) {
      double acc = 0;
      for (int k = n; k >= 0; --k) acc = acc * y + co[static_cast<std::size_t>(k)];
      return acc;
    };
    const auto d = project(f, default_rule(), true);
    double sum = d.q_minus_norm * d.q_minus_norm;
    for (int m = 0; m < 7; ++m) sum += d.q[m] * d.q[m] * hermite_norm_sq_d(m);
    CHECK(std::fabs(sum - d.norm_sq) <= 1e-9 * d.norm_sq);
    double tail = 0;
    for (std::size_t j = 0; j < d.tail.size(); ++j) tail += d.tail[j] * d.tail[j] * hermite_norm_sq_d(7 + static_cast<int>(j));
    CHECK(std::fabs(tail - d.q_minus_norm * d.q_minus_norm) <= 1e-9 * d.norm_sq + 1e-12);
  }
}

TEST_CASE("to_hermite_basis examples") {
  auto one = to_hermite_basis(ExactPoly::constant(1));
  REQUIRE(one.size() == 1);
  CHECK(one[0] == 1);

  const ExactPoly h2 = hermite_poly(2);
  auto c2 = to_hermite_basis(h2 * h2);
  CHECK(c2[0] == 8);
  CHECK(c2[2] == 8);
  CHECK(c2[4] == 1);
  CHECK((h2 * h2).eval(mpq_class(0)) == 4);

  const ExactPoly h4 = hermite_poly(4);
  auto c4 = to_hermite_basis(h4 * h4);
  REQUIRE(c4.size() == 9);
  CHECK(c4[0] == 384);
  CHECK(c4[2] == 768);
  CHECK(c4[4] == 288);
  CHECK(c4[6] == 32);
  CHECK(c4[8] == 1);
  CHECK(c4[1] == 0);
  CHECK((h4 * h4).eval(mpq_class(0)) == 144);
  CHECK((h4 * h4).eval(mpq_class(1)) == 1);
}

TEST_CASE("basis round trip on random integer polynomials up to degree 16") {
  std::mt19937_64 g(2024);
  std::uniform_int_distribution<long> c(-1000, 1000);
  std::uniform_int_distribution<int> deg(0, 16);
  for (int t = 0; t < 100; ++t) {
    std::vector<long> co(static_cast<std::size_t>(deg(g)) + 1);
    for (auto& x : co) x = c(g);
    const ExactPoly p = ExactPoly::from_ints(co);
    CHECK(from_hermite_basis(to_hermite_basis(p)) == p);
  }
}

TEST_CASE("to_hermite_basis_numeric agrees with exact conversion") {
  const auto c = to_hermite_basis_numeric({0, 0, 0, 0, 1});
  CHECK(c[0] == 12.0);
  CHECK(c[2] == 12.0);
  CHECK(c[4] == 1.0);
}

TEST_CASE("apply_L examples and eigen-identity") {
  CHECK(apply_L(hermite_poly(2)).is_zero());
  CHECK(apply_L(hermite_poly(6)) == hermite_poly(6) * mpq_class(-2));
  CHECK(apply_L(ExactPoly::monomial(4)) == ExactPoly::from_ints({0, 0, 12, 0, -1}));
  for (int m = 0; m <= 16; ++m) {
    CHECK(apply_L(hermite_poly(m)) == hermite_poly(m) * mpq_class(2 - m, 2));
  }
}

TEST_CASE("semigroup_step") {
  SpectralDecomp d;
  d.q = {1, 0, 0, 0, 0, 0, 1};
  const auto id = semigroup_step(d, 0.0);
  CHECK(id.q == d.q);
  const auto e1 = semigroup_step(d, 1.0);
  CHECK(e1.q[0] == doctest::Approx(2.7182818).epsilon(1e-7));
  const auto e2 = semigroup_step(d, 2.0);
  CHECK(e2.q[6] == doctest::Approx(0.0183156).epsilon(1e-5));
  CHECK_THROWS_AS(semigroup_step(d, -1.0), DomainError);
}

TEST_CASE("semigroup composition") {
  std::mt19937_64 g(5);
  std::uniform_real_distribution<double> u(-1, 1), t(0, 3);
  for (int k = 0; k < 20; ++k) {
    SpectralDecomp d;
    for (auto& x : d.q) x = u(g);
    d.tail.assign(10, 0.0);
    for (auto& x : d.tail) x = u(g);
    double qm = 0;
    for (std::size_t j = 0; j < d.tail.size(); ++j) qm += d.tail[j] * d.tail[j] * hermite_norm_sq_d(7 + static_cast<int>(j));
    d.q_minus_norm = std::sqrt(qm);
    const double a = t(g), b = t(g);
    const auto ab = semigroup_step(semigroup_step(d, a), b);
    const auto c = semigroup_step(d, a + b);
    for (int m = 0; m < 7; ++m) CHECK(ab.q[m] == doctest::Approx(c.q[m]).epsilon(1e-14));
    for (std::size_t j = 0; j < d.tail.size(); ++j) CHECK(ab.tail[j] == doctest::Approx(c.tail[j]).epsilon(1e-14));
    CHECK(ab.q_minus_norm == doctest::Approx(c.q_minus_norm).epsilon(1e-13));
  }
}

TEST_CASE("ExactPoly serialization round trip") {
  const ExactPoly p({mpq_class(3, 4), mpq_class(-12), mpq_class(0), mpq_class(1, 3)});
  CHECK(ExactPoly::from_strings(p.to_strings()) == p);
  CHECK(p.to_strings()[0] == "3/4");
  CHECK(ExactPoly().degree() == -1);
}
