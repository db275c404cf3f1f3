#pragma once

#include <gmpxx.h>

#include <string>
#include <vector>

namespace flatblow {

/**
 * @brief Polynomial in y with exact rational coefficients (index = power).
 *
 * Trailing zeros are stripped after every operation, so degree() is exact and
 * the zero polynomial has degree -1.
 */
class ExactPoly {
 public:
  ExactPoly() = default;
  explicit ExactPoly(std::vector<mpq_class> coeffs);

  static ExactPoly constant(const mpq_class& c);
  static ExactPoly monomial(int k, const mpq_class& c = 1);
  static ExactPoly from_ints(const std::vector<long>& coeffs);

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }
  mpq_class coeff(int k) const;
  const std::vector<mpq_class>& coeffs() const { return c_; }

  ExactPoly derivative() const;
  mpq_class eval(const mpq_class& y) const;
  double eval(double y) const;

  ExactPoly& operator+=(const ExactPoly& o);
  ExactPoly& operator-=(const ExactPoly& o);
  ExactPoly& operator*=(const mpq_class& s);

  friend ExactPoly operator+(ExactPoly a, const ExactPoly& b) { return a += b; }
  friend ExactPoly operator-(ExactPoly a, const ExactPoly& b) { return a -= b; }
  friend ExactPoly operator*(const ExactPoly& a, const ExactPoly& b);
  friend ExactPoly operator*(ExactPoly a, const mpq_class& s) { return a *= s; }
  friend ExactPoly operator*(const mpq_class& s, ExactPoly a) { return a *= s; }
  friend bool operator==(const ExactPoly& a, const ExactPoly& b) { return a.c_ == b.c_; }

  // Decimal strings ("-12", "3/4"), one per power; this is the JSON form.
  std::vector<std::string> to_strings() const;
  static ExactPoly from_strings(const std::vector<std::string>& s);

  // Human readable, highest power first: "y^4 - 12*y^2 + 12".
  std::string str() const;

 private:
  void trim();
  std::vector<mpq_class> c_;
};

}  // namespace flatblow
