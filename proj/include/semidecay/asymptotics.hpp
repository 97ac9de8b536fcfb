#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "semidecay/norms.hpp"
#include "semidecay/operators.hpp"
#include "semidecay/resolvent.hpp"
#include "semidecay/rvfunctions.hpp"
#include "semidecay/trend.hpp"

namespace semidecay {

/// left * g(T) * right with either side optional.
struct Sandwich {
  LinearOperator T;
  std::optional<LinearOperator> left;
  std::optional<LinearOperator> right;

  const LinearOperator* left_ptr() const { return left ? &*left : nullptr; }
  const LinearOperator* right_ptr() const { return right ? &*right : nullptr; }
  NormResult norm(const ScalarMap& g, const NormOptions& options = {}) const;
};

struct DecaySample {
  long long n = 0;
  double norm = 0.0;
  double error = 0.0;
};

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  /// Largest absolute deviation of log(norm) from the fitted line.
  double residual = 0.0;
  std::size_t count = 0;
};

struct DecayProfile {
  std::vector<DecaySample> samples;
  std::optional<FitResult> fit;
  std::string method;
  std::vector<std::string> flags;
};

/// 1..32, then four points per octave from 64 up to n_max, then n_max.
std::vector<long long> decay_schedule(long long n_max);

/// ||left T^n (I-T)^complement right|| on the schedule; the exponent is
/// fitted over n >= n_max / 4.
DecayProfile decay_profile(const Sandwich& s, long long n_max, int complement = 0);

/// Least squares of log y against log x over points with x in [x_lo, x_hi].
FitResult fit_loglog(const std::vector<double>& x, const std::vector<double>& y, double x_lo, double x_hi);
FitResult fit_exponent(const DecayProfile& profile, long long n_lo, long long n_hi);
/// Slope of log(sup norm) against log(r - 1).
FitResult fit_exponent(const GrowthProfile& profile);

struct SideReport {
  double sup = 0.0;
  Trend trend = Trend::Undetermined;
  std::vector<double> values;
};

struct EquivalenceReport {
  int k = 0;
  double alpha = 0.0;
  std::optional<bool> commutes;
  double commutator = 0.0;
  DecayProfile decay;
  GrowthProfile growth;
  /// f(n) ||T^n S|| along the schedule.
  SideReport decay_side;
  /// (r-1)^k f(1/(r-1)) sup_theta ||R(re^{it},T)^k S|| along the radii.
  SideReport growth_side;
  bool pass = false;
};

/// Max over seeded probes of ||T S x - S T x|| / ||x||; empty when S maps
/// out of the space of T.
std::optional<double> commutator_norm(const LinearOperator& T, const LinearOperator& S, std::size_t dim,
                                      int probes = 20, std::uint64_t seed = 1);

EquivalenceReport equivalence_check_resolvent(const Sandwich& s, const RVFunction& f, int k, long long n_max,
                                              const SpectralGrid& grid);

struct NlognSample {
  double r = 0.0;
  double norm = 0.0;
  double h = 0.0;
  double ratio = 0.0;
};

struct NlognReport {
  double alpha = 0.0;
  std::vector<NlognSample> samples;
  double sup_ratio = 0.0;
  double inf_ratio = 0.0;
  Trend trend = Trend::Undetermined;
  std::size_t excluded_radii = 0;
  /// sup over n >= 2 of n log(n)^alpha ||S1 T^n S2|| and its trend.
  SideReport decay_side;
};

/// ||S1 R(r,T) S2|| / H_alpha(r - 1) over radii below 4/3.
NlognReport nlogn_resolvent_check(const Sandwich& s, double alpha, const SpectralGrid& grid, long long n_max = 1 << 14);

struct IntegralEquivalenceReport {
  int k = 0;
  std::vector<double> radii;
  /// F_k(r^2 - 1) * max over probes of int ||R^k S y||^2 / ||y||^2
  SideReport integral_side;
  SideReport decay_side;
  /// sup ||T^n|| over the schedule and its trend (precondition diagnostic).
  SideReport power_side;
  std::string method;
  bool pass = false;
};

/// Probes empty: sup over all y (closed form for diagonals, Gram matrix for
/// dense operators).
IntegralEquivalenceReport integral_equivalence_check(const Sandwich& s, const RVFunction& f, int k,
                                                     const SpectralGrid& grid, const std::vector<ComplexVector>& probes,
                                                     long long n_max = 1 << 14);

/// F_k(s) = s^{2k-1} f(1/s)^2
double f_k(const RVFunction& f, int k, double s);

}  // namespace semidecay
