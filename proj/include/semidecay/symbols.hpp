#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "semidecay/types.hpp"

namespace semidecay {

/// value_j = offset - slope * j^{-gamma} * log(e + j)^{-log_power}
///
/// A nonzero log_power is only allowed together with a zero offset, which
/// keeps every closed-form kernel a power of u = j^{-gamma} times a
/// monotone logarithmic factor.
struct PowerLogForm {
  Complex offset{0.0, 0.0};
  Complex slope{0.0, 0.0};
  double gamma = 1.0;
  double log_power = 0.0;

  double decay(double j) const;
  Complex at(double j) const { return offset - slope * decay(j); }
  bool is_constant() const { return slope == Complex(0.0, 0.0); }
};

/// Disk {|z - center| <= radius} containing every value with index j > J,
/// plus a separate bound on the modulus of those values.
struct TailEnclosure {
  Complex center{0.0, 0.0};
  double radius = 0.0;
  double max_modulus = 0.0;
  bool empty = false;
};

class SymbolImpl {
 public:
  virtual ~SymbolImpl() = default;

  virtual Complex value(std::uint64_t j) const = 0;
  virtual std::optional<std::uint64_t> length() const { return std::nullopt; }
  /// Product representation value_j = prod_i form_i(j), when one exists.
  virtual std::optional<std::vector<PowerLogForm>> factors() const { return std::nullopt; }
  virtual TailEnclosure tail(std::uint64_t J) const = 0;
  /// Lower bound on |z - value_j| over j > J. The default reads it off tail(J).
  virtual double tail_distance(Complex z, std::uint64_t J) const;
  virtual bool real_nonnegative() const { return false; }
  virtual bool modulus_nonincreasing() const { return false; }
  virtual std::vector<Complex> limit_points() const { return {}; }
  virtual std::string describe() const = 0;

  /// First min(length, kPrefixCache) values, computed once on first use.
  const std::vector<Complex>& prefix() const;

  static constexpr std::uint64_t kPrefixCache = std::uint64_t{1} << 20;

 private:
  mutable std::once_flag prefix_once_;
  mutable std::vector<Complex> prefix_;
};

/// Symbol (d_j)_{j>=1} of a diagonal (multiplication) operator on a
/// sequence space. Cheap to copy; the implementation is shared and immutable.
class DiagonalSymbol {
 public:
  explicit DiagonalSymbol(std::shared_ptr<const SymbolImpl> impl);

  static DiagonalSymbol power_log(const PowerLogForm& form);
  static DiagonalSymbol constant(Complex value);
  static DiagonalSymbol explicit_values(std::vector<Complex> values);
  static DiagonalSymbol one_minus_inv_j();
  static DiagonalSymbol one_minus_inv_sqrt_j();
  static DiagonalSymbol inv_j_pow(double alpha);
  /// (1 - 1/j) * exp(i j^{-alpha}): a symbol approaching 1 tangentially.
  static DiagonalSymbol stolz_curve(double alpha);
  /// 1 / (j * log(j+1)^alpha), the left-shift weight sequence.
  static DiagonalSymbol inv_j_log(double alpha);

  /// Parses the operator-spec symbol strings, e.g. "one_minus_inv_j",
  /// "inv_j_pow:0.5", "explicit:[1, 0.5]", "affine_pow:1,1,0.5".
  static DiagonalSymbol parse(std::string_view spec);

  static DiagonalSymbol sum(const DiagonalSymbol& a, const DiagonalSymbol& b);
  static DiagonalSymbol product(const DiagonalSymbol& a, const DiagonalSymbol& b);
  DiagonalSymbol scaled(Complex factor) const;
  /// a + b * value_j
  DiagonalSymbol affine(Complex a, Complex b) const;
  DiagonalSymbol conjugate() const;

  Complex value_at(std::uint64_t j) const;
  std::optional<std::uint64_t> length() const { return impl_->length(); }
  std::optional<std::vector<PowerLogForm>> factors() const { return impl_->factors(); }
  std::optional<PowerLogForm> affine_form() const;
  TailEnclosure tail_enclosure(std::uint64_t J) const { return impl_->tail(J); }
  bool real_nonnegative() const { return impl_->real_nonnegative(); }
  bool modulus_nonincreasing() const { return impl_->modulus_nonincreasing(); }
  std::vector<Complex> limit_points() const { return impl_->limit_points(); }
  std::string describe() const { return impl_->describe(); }
  bool is_constant(Complex* value = nullptr) const;

  const SymbolImpl& impl() const { return *impl_; }

 private:
  std::shared_ptr<const SymbolImpl> impl_;
};

}  // namespace semidecay
