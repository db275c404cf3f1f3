#pragma once

#include <vector>

namespace flatblow {

/**
 * Piecewise cubic Hermite interpolant on an increasing grid.
 *
 * Node slopes start from the second-order three-point formula. On monotone
 * stretches they are limited Fritsch-Carlson style (sign match, |s| <= 3 min
 * secant), a zero secant forces a zero slope, and at strict extrema the
 * unlimited slope is kept.
 */
class MonotoneCubic {
 public:
  MonotoneCubic(std::vector<double> x, std::vector<double> y);

  // Throws BoundsError outside [x.front(), x.back()].
  double operator()(double x) const;
  double lo() const { return x_.front(); }
  double hi() const { return x_.back(); }

 private:
  std::vector<double> x_, y_, m_;
};

}  // namespace flatblow
