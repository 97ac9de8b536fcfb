#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "semidecay/kernel.hpp"
#include "semidecay/operators.hpp"

namespace semidecay {

/// g(z) = z^power * (1 - z)^complement * (lambda - z)^{-resolvent_power}
struct ScalarMap {
  long long power = 0;
  long long complement = 0;
  Complex lambda{0.0, 0.0};
  int resolvent_power = 0;

  static ScalarMap identity() { return {}; }
  static ScalarMap pow(long long n) { return {n, 0, {}, 0}; }
  static ScalarMap resolvent(Complex lambda, int k) { return {0, 0, lambda, k}; }

  Complex operator()(Complex z) const;
  bool is_identity() const { return power == 0 && complement == 0 && resolvent_power == 0; }
};

struct NormOptions {
  double tol = 1e-10;
  KernelOptions kernel;
};

struct NormResult {
  double value = 0.0;
  /// value + error bounds the true norm.
  double error = 0.0;
  bool exact = false;
  std::uint64_t argmax = 0;
  /// Reciprocal condition estimate of lambda - T for dense resolvents.
  double rcond = 1.0;
  std::string method;
};

/// || left * g(T) * right ||, either operator may be absent (identity).
///
/// Diagonal T: a kernel sup (or an l^{p'} sum when `left` is a functional).
/// Dense or finite T: spectral norm of the assembled matrix. Unweighted
/// left shift on c_0 with a non-increasing diagonal on the right: closed
/// forms for powers and resolvent powers.
NormResult composed_norm(const LinearOperator* left, const LinearOperator& T, const ScalarMap& g,
                         const LinearOperator* right, const NormOptions& options = {});

NormResult operator_norm(const LinearOperator& op, double tol = 1e-10);

/// g(T) for a square matrix; rcond receives the reciprocal condition of
/// lambda - T when g has a resolvent factor.
DenseMatrix scalar_map_dense(const DenseMatrix& T, const ScalarMap& g, double* rcond = nullptr);

/// Largest singular value.
double spectral_norm(const DenseMatrix& m);

/// Power iteration on the Gram operator A*A. Kept as an independent
/// matrix-free estimate; returns the estimate and the iteration count.
std::pair<double, int> power_iteration_norm(const std::function<ComplexVector(const ComplexVector&)>& apply,
                                            const std::function<ComplexVector(const ComplexVector&)>& adjoint_apply,
                                            std::size_t dim, double tol = 1e-12, int max_iter = 10000,
                                            std::uint64_t seed = 1);

/// Random complex vector with unit l^p norm (normal real and imaginary parts).
ComplexVector random_unit_vector(std::size_t dim, std::uint64_t seed, double p = 2.0);

}  // namespace semidecay
