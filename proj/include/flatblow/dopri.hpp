#pragma once

#include <functional>
#include <vector>

namespace flatblow {

using OdeRhs = std::function<void(double t, const double* x, double* dx)>;

/**
 * Dormand-Prince 5(4) with FSAL. One call attempts a single step; step-size
 * control and acceptance are left to the caller.
 */
class DormandPrince {
 public:
  explicit DormandPrince(std::size_t n);

  // From (t, x) with k1 = f(t, x): writes the 5th-order x_new, k_new = f(t+h, x_new)
  // and returns max_j |err_j| / (atol + rtol max(|x_j|, |x_new_j|)).
  double attempt(const OdeRhs& f, double t, const double* x, const double* k1, double h,
                 double* x_new, double* k_new, double rtol, double atol);

  // Standard controller factor for the next step after an error estimate.
  static double step_factor(double err);

  std::size_t size() const { return n_; }

 private:
  std::size_t n_;
  std::vector<double> k2_, k3_, k4_, k5_, k6_, tmp_, zeros_;
};

}  // namespace flatblow
