#include "flatblow/exact_poly.hpp"

#include <algorithm>
#include <sstream>

namespace flatblow {

ExactPoly::ExactPoly(std::vector<mpq_class> coeffs) : c_(std::move(coeffs)) {
  for (auto& x : c_) x.canonicalize();
  trim();
}

ExactPoly ExactPoly::constant(const mpq_class& c) { return ExactPoly({c}); }

ExactPoly ExactPoly::monomial(int k, const mpq_class& c) {
  std::vector<mpq_class> v(static_cast<std::size_t>(k) + 1, mpq_class(0));
  v.back() = c;
  return ExactPoly(std::move(v));
}

ExactPoly ExactPoly::from_ints(const std::vector<long>& coeffs) {
  std::vector<mpq_class> v;
  v.reserve(coeffs.size());
  for (long x : coeffs) v.emplace_back(x);
  return ExactPoly(std::move(v));
}

void ExactPoly::trim() {
  while (!c_.empty() && c_.back() == 0) c_.pop_back();
}

mpq_class ExactPoly::coeff(int k) const {
  if (k < 0 || k > degree()) return 0;
  return c_[static_cast<std::size_t>(k)];
}

ExactPoly ExactPoly::derivative() const {
  if (c_.size() <= 1) return {};
  std::vector<mpq_class> v(c_.size() - 1);
  for (std::size_t k = 1; k < c_.size(); ++k) v[k - 1] = c_[k] * static_cast<long>(k);
  return ExactPoly(std::move(v));
}

mpq_class ExactPoly::eval(const mpq_class& y) const {
  mpq_class acc = 0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * y + *it;
  return acc;
}

double ExactPoly::eval(double y) const {
  double acc = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * y + it->get_d();
  return acc;
}

ExactPoly& ExactPoly::operator+=(const ExactPoly& o) {
  if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), mpq_class(0));
  for (std::size_t k = 0; k < o.c_.size(); ++k) c_[k] += o.c_[k];
  trim();
  return *this;
}

ExactPoly& ExactPoly::operator-=(const ExactPoly& o) {
  if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), mpq_class(0));
  for (std::size_t k = 0; k < o.c_.size(); ++k) c_[k] -= o.c_[k];
  trim();
  return *this;
}

ExactPoly& ExactPoly::operator*=(const mpq_class& s) {
  mpq_class f = s;
  f.canonicalize();
  for (auto& x : c_) x *= f;
  trim();
  return *this;
}

ExactPoly operator*(const ExactPoly& a, const ExactPoly& b) {
  if (a.is_zero() || b.is_zero()) return {};
  std::vector<mpq_class> v(a.c_.size() + b.c_.size() - 1, mpq_class(0));
  for (std::size_t i = 0; i < a.c_.size(); ++i) {
    if (a.c_[i] == 0) continue;
    for (std::size_t j = 0; j < b.c_.size(); ++j) v[i + j] += a.c_[i] * b.c_[j];
  }
  return ExactPoly(std::move(v));
}

std::vector<std::string> ExactPoly::to_strings() const {
  std::vector<std::string> out;
  out.reserve(c_.size());
  for (const auto& x : c_) out.push_back(x.get_str());
  return out;
}

ExactPoly ExactPoly::from_strings(const std::vector<std::string>& s) {
  std::vector<mpq_class> v;
  v.reserve(s.size());
  for (const auto& x : s) v.emplace_back(x, 10);
  return ExactPoly(std::move(v));
}

std::string ExactPoly::str() const {
  if (c_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (int k = degree(); k >= 0; --k) {
    const mpq_class& c = c_[static_cast<std::size_t>(k)];
    if (c == 0) continue;
    mpq_class mag = abs(c);
    if (first) {
      if (c < 0) os << "-";
    } else {
      os << (c < 0 ? " - " : " + ");
    }
    first = false;
    if (k == 0) {
      os << mag.get_str();
    } else {
      if (mag != 1) os << mag.get_str() << "*";
      os << "y";
      if (k > 1) os << "^" << k;
    }
  }
  return os.str();
}

}  // namespace flatblow
