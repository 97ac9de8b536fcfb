#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "semidecay/symbols.hpp"
#include "semidecay/types.hpp"

namespace semidecay {

inline constexpr double kSupNorm = std::numeric_limits<double>::infinity();

enum class OperatorKind { DenseMatrix, Diagonal, WeightedShift, RankOneFunctional, Composite };

const char* to_string(OperatorKind kind) noexcept;

/// Bounded operator on C^n or on a sequence space l^p / c_0.
///
/// Sequence-space operators act on finite vectors as their truncation to
/// the first x.size() coordinates. Diagonal and shift operators leave
/// span{e_1..e_N} invariant, so the truncation is exact for finitely
/// supported vectors. Values are immutable and cheap to copy.
class LinearOperator {
 public:
  static LinearOperator dense(DenseMatrix matrix);
  static LinearOperator diagonal(DiagonalSymbol symbol, double space_exponent = 2.0);
  /// (Tx)_j = w_j x_{j+1}; unit weights when `weights` is empty.
  static LinearOperator left_shift(std::optional<DiagonalSymbol> weights = std::nullopt,
                                   double space_exponent = kSupNorm);
  /// x -> sum_j row_j x_j, a map into C.
  static LinearOperator functional(DiagonalSymbol row, double space_exponent = 2.0);
  /// parts[0] * parts[1] * ... (the last factor acts first).
  static LinearOperator composite(std::vector<LinearOperator> parts);
  static LinearOperator identity(std::optional<std::size_t> dim = std::nullopt);

  OperatorKind kind() const;
  /// Domain dimension; empty for sequence spaces.
  std::optional<std::size_t> dimension() const;
  std::optional<std::size_t> range_dimension() const;
  bool finite() const { return dimension().has_value(); }
  double space_exponent() const;

  const DenseMatrix& matrix() const;
  const DiagonalSymbol& symbol() const;
  bool has_weights() const;
  const std::vector<LinearOperator>& parts() const;

  ComplexVector apply(const ComplexVector& x) const;
  /// For maps into C the output length is taken from `out_dim`, or from a
  /// finite symbol length.
  ComplexVector adjoint_apply(const ComplexVector& y, std::size_t out_dim = 0) const;
  ComplexVector power_apply(long long n, const ComplexVector& x) const;

  LinearOperator adjoint() const;
  LinearOperator identity_minus() const;
  LinearOperator plus(const LinearOperator& other) const;
  LinearOperator scaled(Complex factor) const;

  /// Matrix of the operator restricted to the first n coordinates.
  DenseMatrix to_dense(std::size_t n = 0) const;

  /// Eigenvalues (dense) or symbol values plus limit points (diagonal).
  std::vector<Complex> spectrum_points(std::uint64_t max_points = kDefaultJMax) const;
  double spectral_radius_bound() const;
  std::string describe() const;

 private:
  struct Data;
  explicit LinearOperator(std::shared_ptr<const Data> data);
  std::shared_ptr<const Data> data_;
};

/// exp(M) by scaling and squaring with the degree-13 Pade approximant.
DenseMatrix matrix_exponential(const DenseMatrix& m);

/// T = e^{A tau} + (int_0^tau e^{At} dt) B F, both blocks read off one
/// exponential of the augmented matrix [[A, I], [0, 0]] tau.
LinearOperator sampled_data_operator(const DenseMatrix& A, const DenseMatrix& B, const DenseMatrix& F, double tau);

/// l^p norm of a vector; p = kSupNorm gives the max norm.
double vector_norm(const ComplexVector& x, double p = 2.0);

/// Conjugate exponent; 1 <-> infinity.
double conjugate_exponent(double p);

}  // namespace semidecay
