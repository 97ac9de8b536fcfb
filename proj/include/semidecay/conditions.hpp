#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "semidecay/asymptotics.hpp"
#include "semidecay/operators.hpp"
#include "semidecay/resolvent.hpp"
#include "semidecay/trend.hpp"

namespace semidecay {

/// |1 - lambda|^delta < c (1 - |lambda|) on the disc, together with lambda = 1.
struct StolzDomain {
  double delta = 1.0;
  double c = 2.0;

  void validate() const;
  /// Closure test with absolute slack.
  bool contains(Complex lambda, double slack = 1e-12) const;
  /// |1 - lambda|^delta / (1 - |lambda|); 0 at lambda = 1, inf outside the disc.
  double ratio(Complex lambda) const;
};

struct Witness {
  double r = 0.0;
  double theta = 0.0;
  double value = 0.0;
};

struct ConditionRow {
  int k = 1;
  double constant = 0.0;
  Trend trend = Trend::Undetermined;
  Witness witness;
  /// Per-radius sup, in the order of the grid.
  std::vector<double> values;
};

struct ConditionReport {
  std::string condition;
  double constant = 0.0;
  int k = 1;
  std::vector<Witness> witnesses;
  Trend trend = Trend::Undetermined;
  SpectralGrid grid;
  std::vector<double> radii;
  std::vector<ConditionRow> rows;
  /// Named side results (decay exponents, cross checks, ...).
  std::map<std::string, double> metrics;
  std::vector<std::string> notes;
};

/// Rows k = 1..k_max of sup (|lambda|-1)^k ||R(lambda,T)^k||. constant is the
/// k = 1 row, metrics["strong_kreiss"] the max over rows.
ConditionReport kreiss_constant(const LinearOperator& T, const SpectralGrid& grid, int k_max = 1);

/// sup |lambda - 1| ||R(lambda,T)|| over the grid and a corner grid
/// theta = +-2^{-i}; adds the fitted exponent of ||T^n (I-T)||.
ConditionReport ritt_constant(const LinearOperator& T, const SpectralGrid& grid, long long n_max = 1 << 12);

/// sup |lambda - 1| (|lambda|-1)^k ||R(lambda,T)^{k+1}||.
ConditionReport ritt_power_resolvent_check(const LinearOperator& T, int k, const SpectralGrid& grid);

/// sup |lambda-1|^alpha (|lambda|-1)^beta ||R(lambda,T)|| / |lambda|^{alpha+beta-1}, plus
/// |theta|^{1/alpha} ||R|| at radius 1 + 2^{-14} (metrics["boundary_sup"]).
ConditionReport rk_bounded_check(const LinearOperator& T, double alpha, double beta, const SpectralGrid& grid);

struct StolzReport {
  StolzDomain domain;
  bool member = true;
  std::size_t points_checked = 0;
  std::vector<Complex> violators;
  /// Largest ratio over spectrum points other than 1.
  double max_ratio = 0.0;
};

StolzReport stolz_containment(const LinearOperator& T, const StolzDomain& domain,
                              std::uint64_t max_points = kDefaultJMax);

struct QuasiMultReport {
  double alpha = 0.0;
  double c = 0.0;
  StolzReport containment;
  DecayProfile profile;
  /// ||T^n (I-T)|| / (c (n/(n+alpha))^n (alpha/(n+alpha))^alpha) per sample.
  std::vector<double> ratios;
  double max_ratio = 0.0;
  bool pass = false;
};

/// (n/(n+alpha))^n (alpha/(n+alpha))^alpha = max_{0<=s<=1} s^n (1-s)^alpha
double quasi_mult_bound(long long n, double alpha);

/// Diagonal T only. Without c, the smallest c >= 2 whose closed
/// (1/alpha)-Stolz domain holds the spectrum.
QuasiMultReport quasi_mult_decay_check(const LinearOperator& T, double alpha, long long n_max,
                                       std::optional<double> c = std::nullopt);

/// sup over radii of (r-1) int (||R x||^2 + ||R(.,T*) x||^2) / ||x||^2, empty
/// probes meaning the sup over all x. Cross-checked against sup ||T^n||.
ConditionReport gsf_integral_check(const LinearOperator& T, const SpectralGrid& grid,
                                   const std::vector<ComplexVector>& probes, long long n_max = 1 << 10);

/// sup over radii of (r-1)^{2k-1} int ||(lambda-1) R^{k+1} x||^2 / ||x||^2.
ConditionReport ritt_integral_check(const LinearOperator& T, int k, const SpectralGrid& grid,
                                    const std::vector<ComplexVector>& probes);

/// Rejects operators whose spectral radius exceeds 1 (beyond rounding).
void require_spectral_radius_at_most_one(const LinearOperator& T);

}  // namespace semidecay
