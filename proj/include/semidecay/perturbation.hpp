#pragma once

#include <optional>
#include <string>
#include <vector>

#include "semidecay/asymptotics.hpp"
#include "semidecay/conditions.hpp"
#include "semidecay/operators.hpp"
#include "semidecay/resolvent.hpp"
#include "semidecay/rvfunctions.hpp"

namespace semidecay {

struct SmwResult {
  ComplexVector value;
  /// ||(I - C R(lambda,A) B) z - C R(lambda,A) x|| relative to the right-hand side.
  double inner_residual = 0.0;
  /// ||(lambda - A - BC) value - x|| / ||x||
  double identity_residual = 0.0;
  /// ||C R(lambda,A) B||
  double inner_norm = 0.0;
};

/// R(lambda, A + BC) x = R x + R B (I - C R B)^{-1} C R x with R = R(lambda, A).
/// Finite operators only; B maps C^m into the space of A and C back.
SmwResult smw_resolvent(const LinearOperator& A, const LinearOperator& B, const LinearOperator& C, Complex lambda,
                        const ComplexVector& x);

/// T and a commuting perturbation D, with the operator S of the decay
/// statement (identity when absent).
struct PerturbationSetup {
  LinearOperator T;
  LinearOperator D;
  std::optional<LinearOperator> S;
};

struct DeltaEstimate {
  double value = 0.0;
  double r = 0.0;
  double theta = 0.0;
};

/// sup ||R(lambda,T) D|| over the grid circles and |lambda| = 2.
DeltaEstimate estimate_delta_hat(const LinearOperator& T, const LinearOperator& D, const SpectralGrid& grid);

struct RobustnessReport {
  DeltaEstimate delta;
  /// (1 - delta)^{-k}
  double blowup = 0.0;
  std::optional<double> commutator;
  bool hypothesis_ok = false;
  /// Set when D vanishes and T itself stands in for T + D.
  bool zero_perturbation = false;

  std::optional<ConditionReport> gsf_base;
  std::optional<ConditionReport> gsf_perturbed;
  double gsf_ratio = 0.0;
  bool gsf_ok = false;

  DecayProfile decay_base;
  DecayProfile decay_perturbed;
  double exponent_gap = 0.0;
  bool exponent_ok = false;
  /// f(n) ||(T+D)^n S|| along the schedule.
  SideReport decay_side_base;
  SideReport decay_side_perturbed;

  /// Max of ||R(lambda,T+D)^k S y|| / ||R(lambda,T)^k S y|| at the spot points.
  double spot_max_ratio = 0.0;
  /// Same for k = 1 and S = I.
  double spot_max_ratio_plain = 0.0;
  std::size_t spot_points = 0;
  bool spot_ok = false;

  std::vector<std::string> flags;
  bool pass = false;
};

/// Runs the delta estimate, the integral check on T and T + D, the decay
/// exponents of (T+D)^n S and T^n S, and spot checks of the k-th resolvent
/// bound. Stops after the delta estimate when delta >= 1 or T, D do not commute.
RobustnessReport perturbation_robustness(const PerturbationSetup& setup, const RVFunction& f, int k,
                                         const SpectralGrid& grid, long long n_max, int probes = 8,
                                         std::uint64_t seed = 1);

}  // namespace semidecay
