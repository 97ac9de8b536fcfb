#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "semidecay/asymptotics.hpp"
#include "semidecay/conditions.hpp"
#include "semidecay/operators.hpp"
#include "semidecay/resolvent.hpp"
#include "semidecay/rvfunctions.hpp"

namespace semidecay {

/// F[n] = sum_{m=1}^n w(m), F[0] = 0, accumulated in index order so that
/// F[n] = F[n-1] + w(n) holds exactly.
std::vector<double> partial_sums(const std::function<double(long long)>& w, long long n_max);

struct ProbeSet {
  int count = 50;
  std::uint64_t seed = 1;
  /// Truncation length for sequence-space operators.
  std::size_t dim = 256;
};

struct WeightedSumTrace {
  /// sums[n-1] = sum_{m<=n} f(m) ||left T^m S y||^p
  std::vector<double> sums;
  bool diverged = false;
  long long diverged_at = 0;
};

/// Norms are taken in the space of T (l^q for sequence operators).
WeightedSumTrace weighted_sum(const LinearOperator& T, const LinearOperator* S, const RVFunction& f, double p,
                              const ComplexVector& y, long long n_max, const LinearOperator* left = nullptr);

/// Probe vectors of unit norm in the space of T: seeded random vectors, plus
/// the unit vectors e_1..e_dim for diagonal T (where ||T^n S|| is attained).
std::vector<ComplexVector> summability_probes(const LinearOperator& T, const ProbeSet& probes);

/// T restricted to its first n coordinates (sequence operators) or T itself.
LinearOperator truncated(const LinearOperator& op, std::size_t n);

struct SumToDecayReport {
  double p = 1.0;
  /// max(1, sup_n ||T^n||) over the schedule.
  double K = 1.0;
  /// Max over probes of the full weighted sum.
  double C_hat = 0.0;
  std::vector<double> probe_sums;
  std::vector<long long> n;
  /// ||T^n S|| F(n)^{1/p} / (K C_hat^{1/p})
  std::vector<double> ratios;
  double max_ratio = 0.0;
  bool hypothesis_ok = false;
  bool pass = false;
  std::uint64_t seed = 0;
  std::size_t dim = 0;
};

/// Bounded weighted sums imply ||T^n S|| <= K (C / F(n))^{1/p}. Both sides use
/// the same truncation of sequence operators.
SumToDecayReport sum_to_decay(const LinearOperator& T, const LinearOperator* S, const RVFunction& f, double p,
                              long long n_max, const ProbeSet& probes = {});

struct DecayToSumReport {
  double p = 1.0;
  /// sup_n ||T^n S||^p sum_{m<=n} f(m) g(m) and its trend: the decay hypothesis.
  double decay_constant = 0.0;
  Trend decay_trend = Trend::Undetermined;
  bool decay_ok = false;
  /// Checkpoints n = 2^i and max over probes of the partial sum / G(n).
  std::vector<long long> checkpoints;
  std::vector<double> C_hat;
  std::vector<double> C_hat_log;
  double C_hat_sup = 0.0;
  Trend C_hat_trend = Trend::Undetermined;
  /// For g = const: G(n) <= 2 log(n+1) for every 2 <= n <= n_max.
  std::optional<bool> harmonic_bound_ok;
  bool pass = false;
  std::uint64_t seed = 0;
};

/// Decay ||T^n S|| = O(F(n)^{-1/p}), F = partial sums of f g, against weighted
/// partial sums growing like G(n) = sum 1/(m g(m)). Stability of C_hat is read
/// over checkpoints n >= window_lo.
DecayToSumReport decay_to_sum(const LinearOperator& T, const LinearOperator* S, const RVFunction& f,
                              const RVFunction& g, double p, long long n_max, const ProbeSet& probes = {},
                              long long window_lo = 256);

/// Certified evaluation of sum_{n>=1} n^beta x^n for 0 <= x < 1.
struct SeriesValue {
  double value = 0.0;
  double tail_bound = 0.0;
  long long terms = 0;
};
SeriesValue power_weighted_geometric(double beta, double x, double rel_tol = 1e-12);

struct MultOpReport {
  double alpha = 0.0;
  double p = 2.0;
  double q = 2.0;
  double beta = 0.0;
  double c = 0.0;
  StolzReport containment;
  double C1 = 0.0;
  double C2 = 0.0;
  double C3 = 0.0;
  /// Scalar bound |1-lambda|^p sum n^beta |lambda|^{np} over sampled symbol values.
  std::size_t scalar_points = 0;
  double scalar_max = 0.0;
  double scalar_max_tail = 0.0;
  bool scalar_ok = false;
  /// Statement (ii) on the probes.
  std::vector<double> probe_sums;
  double C_hat = 0.0;
  bool sums_ok = false;
  /// Statement (i) and the round trip (ii) => decay.
  DecayProfile decay;
  double decay_exponent = 0.0;
  bool decay_ok = false;
  SumToDecayReport round_trip;
  bool equivalent = false;
  bool pass = false;
  std::uint64_t seed = 0;
};

/// Multiplication operator by `symbol` on l^q with 1 <= q <= p.
MultOpReport mult_op_summability_equiv(const DiagonalSymbol& symbol, double alpha, double p, double q,
                                       long long n_max, const ProbeSet& probes = {},
                                       std::size_t scalar_points = 1000);

struct SumToResolventReport {
  double p = 2.0;
  double q = 2.0;
  int k = 1;
  std::vector<double> radii;
  /// ||S1 R(lambda,T)^k S2|| (r^q - 1)^{k - 1/p} f(1/(r^q - 1))^{1/p}
  SideReport weighted;
  /// Max over probes of the full weighted sum (the summability hypothesis).
  double hypothesis_sum = 0.0;
  Trend hypothesis_trend = Trend::Undetermined;
  bool pass = false;
};

SumToResolventReport sum_to_resolvent(const LinearOperator& T, const LinearOperator* S1, const LinearOperator* S2,
                                      const RVFunction& f, double p, int k, const SpectralGrid& grid,
                                      long long n_max = 1 << 12, const ProbeSet& probes = {});

}  // namespace semidecay
