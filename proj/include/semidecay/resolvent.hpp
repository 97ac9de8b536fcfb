#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "semidecay/norms.hpp"
#include "semidecay/operators.hpp"

namespace semidecay {

/// lambda = r e^{i theta}
struct SpectralPoint {
  double r = 2.0;
  double theta = 0.0;

  Complex lambda() const { return std::polar(r, theta); }
};

/// Circles r_j = 1 + 2^{-j}, j = j_min..j_max (decreasing radii), each
/// sampled at n_theta equispaced angles starting at theta = 0.
struct SpectralGrid {
  int j_min = 1;
  int j_max = 20;
  int n_theta = 1024;
  bool auto_refine = true;
  /// Relative change of a circle sup below which doubling stops.
  double tolerance = 1e-4;
  int max_theta = 1 << 16;

  std::vector<double> radii() const;
  void validate() const;
  /// "jmin:jmax:ntheta", any trailing part optional.
  static SpectralGrid parse(std::string_view text);
};

/// R(lambda, T)^k x.
ComplexVector resolvent_apply(const LinearOperator& T, Complex lambda, int k, const ComplexVector& x);

/// T^n recovered from the contour integral of lambda^{n+k} R(lambda,T)^k on
/// |lambda| = r by the n_theta-point trapezoid rule. T must be finite.
DenseMatrix reconstruct_power(const LinearOperator& T, long long n, int k, double r, int n_theta);

struct ParsevalReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
  /// Bound on the omitted terms n > n_trunc of the right-hand series.
  double tail_bound = 0.0;
  int n_theta = 0;
  long long n_trunc = 0;
  /// Block length P and rate ||T^P||^{1/P} behind the tail bound.
  int power_block = 0;
  double power_rate = 0.0;
};

/// (1/2pi) int ||S R(re^{it},T)^k x||^2 dt against
/// sum_n ||binom(n+k-1,k-1) S T^n x||^2 / r^{2(n+k)}.
/// Sequence-space operators are restricted to the first x.size() coordinates.
ParsevalReport parseval_check(const LinearOperator& T, const LinearOperator* S, int k, double r,
                              const ComplexVector& x, int n_theta, long long n_trunc);

struct GrowthSample {
  double r = 0.0;
  double sup_norm = 0.0;
  double theta = 0.0;
  int n_theta_used = 0;
  std::string flags;
};

struct GrowthProfile {
  std::vector<GrowthSample> samples;
  /// Set when an ill-conditioned solve cut the radius schedule short.
  bool truncated = false;
  std::string method;
};

struct CircleSup {
  double value = 0.0;
  double theta = 0.0;
  int n_theta = 0;
  double min_rcond = 1.0;
  bool converged = true;
};

/// sup over theta of value(theta) on one circle, doubling the angle count
/// until the sup settles. value returns the norm result at angle theta.
CircleSup circle_sup(const std::function<NormResult(double theta)>& value, const SpectralGrid& grid,
                     bool theta_independent = false);

/// True when ||left g(T) right|| at re^{it} is largest at t = 0 for every r
/// (nonnegative diagonal symbols, or the shift whose resolvent norm only
/// sees |lambda|).
bool resolvent_peaks_on_real_axis(const LinearOperator& T, const LinearOperator* left,
                                  const LinearOperator* right);

/// sup_theta ||left R(re^{it},T)^k right|| for each radius of the grid.
GrowthProfile resolvent_sweep(const LinearOperator& T, const LinearOperator* right, int k,
                              const SpectralGrid& grid, const LinearOperator* left = nullptr);

/// int_0^{2pi} ||(lambda-1)^complement R(lambda,T)^resolvent_power S y||^2 dtheta
/// over lambda = r e^{i theta}.
struct CircleForm {
  int complement = 0;
  int resolvent_power = 1;
};

struct CircleIntegral {
  double value = 0.0;
  std::uint64_t argmax = 0;
  int n_theta = 0;
  std::string method;
};

/// Closed form for a scalar d with |d| < r.
double scalar_circle_integral(Complex d, double r, const CircleForm& form);

/// Hermitian G with int ||(lambda-1)^a R^m v||^2 dtheta = v* G v.
DenseMatrix circle_gram(const DenseMatrix& T, double r, const CircleForm& form, int* n_theta_used = nullptr,
                        std::string* method = nullptr);

/// Integral for one probe y, divided by ||y||^2. The adjoint flag adds the
/// same integral for T*.
CircleIntegral circle_integral(const LinearOperator& T, const LinearOperator* S, double r, const CircleForm& form,
                               const ComplexVector& y, bool with_adjoint = false);

/// Sup of the same quotient over all y.
CircleIntegral circle_integral_sup(const LinearOperator& T, const LinearOperator* S, double r,
                                   const CircleForm& form, bool with_adjoint = false);

/// binom(n + k - 1, k - 1) as a double.
double resolvent_coefficient(long long n, int k);

}  // namespace semidecay
