#pragma once

#include <cmath>

#include "flatblow/errors.hpp"
#include "flatblow/exact_poly.hpp"
#include "flatblow/params.hpp"

namespace flatblow {

/**
 * phi(y,s) = (E/D)^(1/(p-1)) with E = 1 + e^{-s} P(y), P = 12(p-1)/kappa (y^2-1),
 * D = (p-1) + (p-1)^2/kappa y^4 e^{-s}, and its closed-form partials.
 *
 * Derivatives go through l = log(phi): phi' = phi l', phi'' = phi (l'' + l'^2).
 * r_bracket is R/phi written so that every term is O(e^{-s}); V is exact as
 * -p(p-1) e^{-s} h4/(kappa D).
 */
template <class T>
struct PhiParts {
  T phi, dy, dyy, ds;
  T E, D;
  T V, R;
};

template <class T>
PhiParts<T> phi_parts(T y, T s, T p, T kappa) {
  using std::exp;
  using std::pow;
  const T pm1 = p - T(1);
  const T eps = exp(-s);
  const T y2 = y * y;
  const T y4 = y2 * y2;
  const T cP = T(12) * pm1 / kappa;
  const T cD = pm1 * pm1 / kappa;
  const T epsP = eps * cP * (y2 - T(1));
  const T E = T(1) + epsP;
  if (!(E > T(0))) {
    throw DomainError("phi: nonpositive numerator at y=" + std::to_string(static_cast<double>(y)) +
                      ", s=" + std::to_string(static_cast<double>(s)));
  }
  const T Dn = T(1) + cD / pm1 * y4 * eps;  // D/(p-1)
  const T D = pm1 * Dn;
  const T Ey = eps * T(2) * cP * y;
  const T Eyy = eps * T(2) * cP;
  const T Dy_D = T(4) * cD * y2 * y * eps / D;
  const T Dyy_D = T(12) * cD * y2 * eps / D;
  const T Ey_E = Ey / E;
  const T l1 = (Ey_E - Dy_D) / pm1;
  const T l2 = (Eyy / E - Ey_E * Ey_E - Dyy_D + Dy_D * Dy_D) / pm1;
  const T ls = (-epsP / E + cD * y4 * eps / D) / pm1;
  PhiParts<T> out;
  out.E = E;
  out.D = D;
  if (pm1 == T(1)) {
    out.phi = E / D;
  } else if (pm1 == T(2)) {
    out.phi = std::sqrt(E / D);
  } else {
    out.phi = pow(E / D, T(1) / pm1);
  }
  out.dy = out.phi * l1;
  out.dyy = out.phi * (l2 + l1 * l1);
  out.ds = out.phi * ls;
  const T h4 = y4 - T(12) * y2 + T(12);
  const T pot = -pm1 * eps * h4 / (kappa * D);  // phi^{p-1} - 1/(p-1)
  out.V = p * pot;
  out.R = out.phi * (l2 + l1 * l1 - T(0.5) * y * l1 - ls + pot);
  return out;
}

// log(24(p-1)/kappa): for s >= s2, 1 + e^{-s} P(y) >= 1/2.
double s2_threshold(const ModelParams& mp);

// P(y) * kappa as an exact polynomial: (p-1)(y^4 - h4) = 12(p-1)(y^2 - 1).
// p is taken as the exact binary rational of the double.
ExactPoly correction_poly_scaled(double p);

struct ProfileContext {
  explicit ProfileContext(const ModelParams& mp);
  ModelParams params;
  double kappa;
  ExactPoly P_scaled;  // P(y) = P_scaled(y)/kappa
  double P(double y) const { return P_scaled.eval(y) / kappa; }
  double E(double y, double s) const { return 1.0 + std::exp(-s) * P(y); }
  double D(double y, double s) const;
};

double phi(double y, double s, const ModelParams& mp);
PhiParts<double> phi_partials(double y, double s, const ModelParams& mp);
double potential_V(double y, double s, const ModelParams& mp);
double remainder_R(double y, double s, const ModelParams& mp);

// Uncorrected comparison profile (p-1 + e^{-s} y^4)^{-1/(p-1)}.
double phi_tilde(double y, double s, const ModelParams& mp);

double f_profile(double z, const ModelParams& mp);
double u_star(double xi, const ModelParams& mp);
double heteroclinic_psi(double s, const ModelParams& mp);
double heteroclinic_psi_ds(double s, const ModelParams& mp);

struct CutoffValue {
  double v, d1, d2;
};

// chi: 0 on [0,1/8], 1 on [1/4,inf). chibar: 1 on [0,3/8], 0 on [3/4,inf).
// Transition is the exp(-1/t) blend; |chi'| <= 16 on [1/8,1/4].
CutoffValue cutoff_chi(double xi);
CutoffValue cutoff_chibar(double xi);
inline constexpr double kChiSlopeBound = 16.0;

}  // namespace flatblow
