#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "semidecay/trend.hpp"

namespace semidecay {

/// Positive non-decreasing f on (0, inf) with phi(t) = t f'(t) / f(t) <= alpha
/// for t >= t0. Stored through log f and phi so that rapidly growing
/// examples stay in range.
class RVFunction {
 public:
  /// t^a
  static RVFunction power(double a);
  /// t^a log(e + t)^q
  static RVFunction power_log(double a, double q);
  /// log(e + t)
  static RVFunction log();
  static RVFunction constant(double c = 1.0);
  /// f(t) = 2^{mu(log2 t)} for t >= 1 with mu(x) the measure of
  /// [0, x] intersected with the union of [k^2 - 1, k^2), k >= 1; f(t) = t below 1.
  /// phi alternates between 0 and 1 on ever longer stretches.
  static RVFunction square_staircase();
  /// log_f gives log f(t); phi may be empty, then a centred difference of
  /// log f with step 1e-6 t is used.
  static RVFunction custom(std::string name, std::function<double(double)> log_f,
                           std::function<double(double)> phi, double alpha, double t0 = 1.0);

  /// "pow:a", "pow_log:a,q", "log", "const", "staircase" (alias "paper_example_2_2").
  static RVFunction parse(std::string_view spec);

  double operator()(double t) const;
  double log_value(double t) const;
  double derivative(double t) const;
  double phi(double t) const;
  double alpha() const;
  double t0() const;
  const std::string& name() const;

  RVFunction with_alpha(double alpha) const;
  /// f^gamma with index alpha * gamma.
  RVFunction power_of(double gamma) const;

 private:
  struct Data;
  explicit RVFunction(std::shared_ptr<const Data> data);
  std::shared_ptr<const Data> data_;
};

/// sup_{t > 0} t / ((e + t) log(e + t)), the index of log(e + t).
double log_index();

/// Geometric grid t0 * ratio^i up to t_max (t_max included).
std::vector<double> geometric_grid(double t0, double t_max, double ratio = 1.05);

struct BrvReport {
  double alpha = 0.0;
  double max_phi = 0.0;
  double witness_t = 0.0;
  /// Smallest phi on the grid: a liminf diagnostic, not a certificate.
  double min_phi = 0.0;
  bool monotone = true;
  bool pass = false;
  std::size_t points = 0;
};

/// Samples phi on the geometric grid [max(t0, t_min), t_max].
BrvReport check_brv(const RVFunction& f, double t_max = 1e8, double ratio = 1.05,
                    std::optional<double> alpha = std::nullopt, std::optional<double> t_min = std::nullopt);

struct PowerBound {
  double alpha = 0.0;
  double t0 = 0.0;
  /// f(t0) / t0^alpha
  double constant = 0.0;
  /// sup f(t) / t^alpha over the grid.
  double grid_sup = 0.0;
  bool verified = false;
  /// sup f(2t) / f(t) over the grid against 2^alpha.
  double doubling_ratio = 0.0;
  bool doubling_ok = false;
};

PowerBound power_bound(const RVFunction& f, double t_max = 1e8, std::optional<double> alpha = std::nullopt);

RVFunction gamma_power(const RVFunction& f, double gamma);

/// f(1) exp(int_1^t phi(s)/s ds) by quadrature in log s.
double representation_value(const RVFunction& f, double t);

struct SumBoundSample {
  double r = 0.0;
  double series = 0.0;
  double tail_bound = 0.0;
  long long terms = 0;
  double ratio = 0.0;
};

struct SumBoundReport {
  double beta = 0.0;
  /// sup over sampled n >= n0 of c(n) f(n) / n^beta.
  double c0 = 0.0;
  std::vector<SumBoundSample> samples;
  double sup_ratio = 0.0;
  Trend trend = Trend::Undetermined;
  bool pass = false;
};

/// Q(r) = [sum_{n >= 0} c(n) r^{-n}] (r-1)^{beta+1} f(1/(r-1)) over the radii.
/// An empty c means c(n) = m^beta / f(m), m = max(n, 1).
SumBoundReport cn_sum_bound_check(const RVFunction& f, double beta, std::function<double(long long)> c,
                                  const std::vector<double>& radii, long long n0 = 1);

struct IntBoundSample {
  double s = 0.0;
  double integral = 0.0;
  double ratio = 0.0;
  double error = 0.0;
};

struct IntBoundReport {
  double beta = 0.0;
  double delta = 0.0;
  /// Gamma(beta + 1) + 1 / (1 - delta)
  double bound = 0.0;
  std::vector<IntBoundSample> samples;
  double sup_ratio = 0.0;
  bool pass = false;
};

/// int_{t0}^inf t^beta e^{-st} / f(t) dt against s^{-(beta+1)} / f(1/s).
IntBoundReport int_bound_check(const RVFunction& f, double beta, const std::vector<double>& s_values);

/// |log s|^{1-alpha} (alpha < 1), log|log s| (alpha = 1), 1 (alpha > 1).
double h_alpha(double alpha, double s);

}  // namespace semidecay
