#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "flatblow/errors.hpp"
#include "flatblow/params.hpp"

namespace flatblow {

struct RateFit {
  std::vector<std::pair<double, double>> samples;  // (s, value)
  double slope = 0.0;
  double prefactor = 0.0;
  double r2 = 0.0;
  std::vector<std::string> warnings;
};

// Least squares of log|value| against s on n equispaced points of [s_lo, s_hi].
// Zero samples are dropped and sign changes noted; a drift of the local slope
// between the two halves of the range is flagged as a likely power-of-s factor.
RateFit fit_decay(const std::function<double(double)>& sampler, double s_lo, double s_hi, int n = 17);

struct SeriesDivergence : NumericError {
  using NumericError::NumericError;
};

using LdSampler = std::function<long double(long double)>;

std::vector<double> default_ladder();  // s = 8, 10, ..., 16

// g(s) = e^{ks} sampler(s) on the ladder, interpolated as a polynomial in x = e^{-s};
// entry j approximates the coefficient of e^{-(k+j)s} in sampler.
std::vector<long double> series_fit(const LdSampler& sampler, int k, const std::vector<double>& ladder);

// Limit of e^{ks} sampler(s) as s -> inf (Richardson in r = e^{-ds}). Throws
// SeriesDivergence when dropping the lowest rung moves the limit by more than
// tol * max(1, |limit|).
double extract_series_coefficient(const LdSampler& sampler, int k, const std::vector<double>& ladder = {},
                                  double tol = 1e-6);

// Terms of R = phi'' - y phi'/2 - phi/(p-1) + phi^p - d_s phi, plus phi and V.
enum class ProfileTerm { Phi, Dyy, Drift, Linear, Power, Ds, V, R };
inline constexpr std::array<ProfileTerm, 8> kAllTerms{ProfileTerm::Phi,   ProfileTerm::Dyy, ProfileTerm::Drift,
                                                      ProfileTerm::Linear, ProfileTerm::Power, ProfileTerm::Ds,
                                                      ProfileTerm::V,     ProfileTerm::R};
std::string term_name(ProfileTerm t);

long double term_value(ProfileTerm t, long double y, long double s, long double p);
// P_m of a term under a long-double Gauss-Hermite rule.
long double project_term(ProfileTerm t, int mode, long double s, long double p);
// s -> infinity limit of a term (kappa, -kappa/(p-1), kappa/(p-1) or 0).
long double term_limit(ProfileTerm t, long double p);

inline constexpr int kTableModes = 9;  // h_0..h_8
struct ModeTable {
  std::array<double, kTableModes> order1{};
  std::array<double, kTableModes> order2{};
};

ModeTable measure_term(ProfileTerm t, double p, const std::vector<double>& ladder);
// The printed expansion, converted to the Hermite basis at this p.
ModeTable printed_term(ProfileTerm t, double p);

// h_a h_b = sum c_m h_m, exact.
std::vector<mpq_class> hermite_product(int a, int b);

enum class Verdict { Match, Mismatch, MeasuredOnly };
std::string verdict_name(Verdict v);

struct ClaimRow {
  std::string id;
  std::string claim;
  std::optional<double> printed;
  double measured = 0.0;
  Verdict verdict = Verdict::MeasuredOnly;
  std::string note;
};

struct ExpansionOptions {
  std::vector<double> ladder;    // default: s = 8, 9, ..., 16
  double match_tol = 1e-6;       // relative, on max(1, |printed|)
  double zero_threshold = 1e-8;  // rows with both sides below this are omitted
};

struct ExpansionReport {
  double p = 2.0;
  std::vector<ClaimRow> rows;
  int count(Verdict v) const;
};

// Exact polynomial identities: P(y) simplification, y^4 - h4, h4^2, h2^2.
std::vector<ClaimRow> identity_audit(double p);

ExpansionReport verify_expansion_suite(const ModelParams& mp, const ExpansionOptions& opt = {});

struct DecaySuite {
  std::array<RateFit, 7> modes;  // P_i R, i <= 6
  std::array<bool, 7> parity_zero{};  // odd modes vanish identically
  RateFit tail;  // ||P_- R||
  RateFit potential;  // ||V||
};

DecaySuite decay_rate_suite(const ModelParams& mp, double s_lo = 8.0, double s_hi = 16.0, int n = 17);

}  // namespace flatblow
