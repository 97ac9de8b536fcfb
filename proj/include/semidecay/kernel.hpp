#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "semidecay/symbols.hpp"
#include "semidecay/types.hpp"

namespace semidecay {

/// One factor |value_j|^exponent, or |shift - value_j|^exponent.
struct KernelFactor {
  DiagonalSymbol symbol;
  double exponent = 1.0;
  bool shifted = false;
  Complex shift{0.0, 0.0};
};

struct KernelOptions {
  /// Largest index visited by brute force when no closed form applies.
  std::uint64_t brute_limit = kDefaultJMax;
  /// Cap for the brute-force stretch used alongside logarithmic factors.
  std::uint64_t log_brute_cap = std::uint64_t{1} << 26;
  std::uint64_t first_index = 1;
};

struct KernelSup {
  double value = 0.0;
  /// value + error bounds the true sup; 0 for closed-form maximization.
  double error = 0.0;
  /// Index of the maximizing entry; 0 when the sup is a limit j -> infinity.
  std::uint64_t argmax = 0;
  bool exact = false;
  std::string method;
};

struct KernelSum {
  double value = 0.0;
  double error = 0.0;
  bool exact = false;
  std::string method;
};

/// k_j = scale * prod_i |factor_i(j)|^{e_i}, j >= 1.
///
/// When every factor is a power-log form sharing one decay exponent the
/// sup is found from the real critical points of a polynomial in
/// u = j^{-gamma} and their integer neighbours. Otherwise brute force plus
/// a tail enclosure.
class DiagonalKernel {
 public:
  DiagonalKernel() = default;
  explicit DiagonalKernel(double scale) : scale_(scale) {}

  DiagonalKernel& times(const DiagonalSymbol& symbol, double exponent);
  DiagonalKernel& times_shifted(Complex shift, const DiagonalSymbol& symbol, double exponent);
  DiagonalKernel& scale_by(double factor);

  double at(std::uint64_t j) const;
  std::optional<std::uint64_t> length() const;
  const std::vector<KernelFactor>& factors() const { return factors_; }
  double scale() const { return scale_; }

  KernelSup sup(const KernelOptions& options = {}) const;
  /// sum_{j >= first_index} k_j, with a certified error for the tail.
  KernelSum sum(const KernelOptions& options = {}) const;

 private:
  double scale_ = 1.0;
  std::vector<KernelFactor> factors_;
};

}  // namespace semidecay
