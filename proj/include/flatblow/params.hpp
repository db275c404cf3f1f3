#pragma once

#include <cmath>

namespace flatblow {

// (p-1)^(-1/(p-1)); throws DomainError for p <= 1.
double kappa_of(double p);

struct ModelParams {
  double p = 2.0;
  int d = 2;
  double r0 = 1.0;
  double eps0 = 0.25;
  double A = 1.0;
  double eta0 = 1.0;
  double s0 = 10.0;

  double kappa() const { return kappa_of(p); }

  // Throws UsageError naming the first offending field.
  void validate() const;
};

}  // namespace flatblow
