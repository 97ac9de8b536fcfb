#include "semidecay/norms.hpp"

#include <cmath>
#include <limits>
#include <random>

#include <Eigen/LU>
#include <Eigen/SVD>

namespace semidecay {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

DenseMatrix matrix_power(const DenseMatrix& m, long long n) {
  DenseMatrix result = DenseMatrix::Identity(m.rows(), m.cols());
  DenseMatrix base = m;
  while (n > 0) {
    if (n & 1) result = result * base;
    n >>= 1;
    if (n > 0) base = base * base;
  }
  return result;
}

void validate(const ScalarMap& g) {
  if (g.power < 0 || g.complement < 0 || g.resolvent_power < 0) {
    fail(ErrorCode::InvalidArgument, "scalar map exponents must be non-negative");
  }
}

/// Diagonal symbol of an operator that acts coordinatewise, if any.
std::optional<DiagonalSymbol> coordinatewise_symbol(const LinearOperator& op) {
  if (op.kind() == OperatorKind::Diagonal) return op.symbol();
  if (op.kind() == OperatorKind::Composite) {
    std::optional<DiagonalSymbol> acc;
    for (const auto& part : op.parts()) {
      auto s = coordinatewise_symbol(part);
      if (!s) return std::nullopt;
      acc = acc ? DiagonalSymbol::product(*acc, *s) : *s;
    }
    return acc;
  }
  return std::nullopt;
}

/// A functional possibly followed by diagonal factors, folded to one row.
std::optional<DiagonalSymbol> functional_row(const LinearOperator& op) {
  if (op.kind() == OperatorKind::RankOneFunctional) return op.symbol();
  if (op.kind() == OperatorKind::Composite && op.parts().front().kind() == OperatorKind::RankOneFunctional) {
    DiagonalSymbol row = op.parts().front().symbol();
    for (std::size_t i = 1; i < op.parts().size(); ++i) {
      auto s = coordinatewise_symbol(op.parts()[i]);
      if (!s) return std::nullopt;
      row = DiagonalSymbol::product(row, *s);
    }
    return row;
  }
  return std::nullopt;
}

std::vector<KernelFactor> map_factors(const DiagonalSymbol& d, const ScalarMap& g) {
  std::vector<KernelFactor> out;
  if (g.power) out.push_back({d, static_cast<double>(g.power), false, {}});
  if (g.complement) out.push_back({d, static_cast<double>(g.complement), true, Complex(1.0, 0.0)});
  if (g.resolvent_power) out.push_back({d, -static_cast<double>(g.resolvent_power), true, g.lambda});
  return out;
}

NormResult diagonal_path(const std::optional<DiagonalSymbol>& left_diag, const std::optional<DiagonalSymbol>& left_row,
                         const DiagonalSymbol& d, double space, const ScalarMap& g,
                         const std::optional<DiagonalSymbol>& right_diag, const NormOptions& options) {
  std::vector<KernelFactor> fs = map_factors(d, g);
  if (left_diag) fs.push_back({*left_diag, 1.0, false, {}});
  if (right_diag) fs.push_back({*right_diag, 1.0, false, {}});
  if (left_row) fs.push_back({*left_row, 1.0, false, {}});

  NormResult out;
  const double dual = left_row ? conjugate_exponent(space) : kSupNorm;
  try {
    if (dual == kSupNorm) {
      DiagonalKernel k;
      for (const auto& f : fs) {
        if (f.shifted) k.times_shifted(f.shift, f.symbol, f.exponent);
        else k.times(f.symbol, f.exponent);
      }
      const KernelSup s = k.sup(options.kernel);
      out.value = s.value;
      out.error = s.error;
      out.exact = s.exact;
      out.argmax = s.argmax;
      out.method = "diagonal sup: " + s.method;
      return out;
    }
    DiagonalKernel k;
    for (const auto& f : fs) {
      if (f.shifted) k.times_shifted(f.shift, f.symbol, f.exponent * dual);
      else k.times(f.symbol, f.exponent * dual);
    }
    const KernelSum s = k.sum(options.kernel);
    out.value = std::pow(s.value, 1.0 / dual);
    out.error = std::pow(s.value + s.error, 1.0 / dual) - out.value;
    out.exact = s.exact;
    out.method = "row l^" + std::to_string(dual) + " norm: " + s.method;
    return out;
  } catch (const Error& e) {
    if (g.resolvent_power && e.code() == ErrorCode::Divergence) {
      fail(ErrorCode::Domain, "lambda lies in the closure of the spectrum: " + std::string(e.what()));
    }
    throw;
  }
}

NormResult shift_path(const LinearOperator& T, const ScalarMap& g, const LinearOperator* right,
                      const NormOptions& options) {
  if (T.has_weights()) fail(ErrorCode::Unsupported, "closed-form norms need the unweighted shift");
  if (g.complement != 0) fail(ErrorCode::Unsupported, "shift norms with an (I - T) factor are not implemented");
  std::optional<DiagonalSymbol> b;
  if (right) {
    b = coordinatewise_symbol(*right);
    if (!b) fail(ErrorCode::Unsupported, "shift norms need a diagonal right factor");
    if (b->length() || !b->modulus_nonincreasing()) {
      fail(ErrorCode::Unsupported, "shift norms need an infinite diagonal with non-increasing modulus");
    }
  }
  auto weight = [&](std::uint64_t j) {
    if (!b) return 1.0;
    const auto& pre = b->impl().prefix();
    return std::abs(j <= pre.size() ? pre[j - 1] : b->value_at(j));
  };
  NormResult out;
  out.exact = true;
  if (g.resolvent_power == 0) {
    // ||T^n S|| = sup_{m > n} |b_m| = |b_{n+1}|
    out.value = weight(static_cast<std::uint64_t>(g.power) + 1);
    out.argmax = static_cast<std::uint64_t>(g.power) + 1;
    out.method = "shift closed form sup_{m>n}|b_m|";
    return out;
  }
  if (g.power != 0) fail(ErrorCode::Unsupported, "shift norms of T^n R(lambda,T)^k are not implemented");
  if (T.space_exponent() != kSupNorm) {
    fail(ErrorCode::Unsupported, "resolvent closed form for the shift holds on c_0 only");
  }
  const double modulus = std::abs(g.lambda);
  if (!(modulus > 1.0)) fail(ErrorCode::Domain, "|lambda| must exceed 1 for the shift resolvent");
  const int k = g.resolvent_power;
  const double rho = 1.0 / modulus;
  if (!b) {
    out.value = std::pow(modulus - 1.0, -static_cast<double>(k));
    out.method = "shift closed form (|lambda|-1)^-k";
    return out;
  }
  // sum_{n>=0} binom(n+k-1, k-1) |b_{n+1}| / |lambda|^{n+k}
  Accumulator acc;
  double coeff = 1.0;
  double rho_pow = std::pow(rho, k);
  const std::uint64_t max_terms = std::uint64_t{1} << 34;
  for (std::uint64_t n = 0;; ++n) {
    acc.add(coeff * rho_pow * weight(n + 1));
    const double next_coeff = coeff * static_cast<double>(n + k) / static_cast<double>(n + 1);
    const double next = next_coeff * rho_pow * rho * weight(n + 1);
    const double ratio = static_cast<double>(n + 1 + k) / static_cast<double>(n + 2) * rho;
    if (ratio < 1.0) {
      const double tail = next / (1.0 - ratio);
      if (tail <= 1e-3 * options.tol * acc.value() || tail == 0.0) {
        out.value = acc.value();
        out.error = tail;
        out.exact = false;
        out.method = "shift resolvent series, " + std::to_string(n + 1) + " terms + geometric tail";
        return out;
      }
    }
    if (n > max_terms) fail(ErrorCode::Divergence, "shift resolvent series did not reach its tolerance");
    coeff = next_coeff;
    rho_pow *= rho;
  }
}

NormResult dense_path(const LinearOperator* left, const LinearOperator& T, const ScalarMap& g,
                      const LinearOperator* right) {
  std::size_t n = 0;
  if (auto d = T.dimension()) n = *d;
  else if (right && right->range_dimension()) n = *right->range_dimension();
  else if (left && left->dimension()) n = *left->dimension();
  if (n == 0) fail(ErrorCode::Unsupported, "cannot assemble a finite matrix for " + T.describe());
  const DenseMatrix t = T.to_dense(n);
  if (t.rows() != t.cols()) fail(ErrorCode::DimensionMismatch, "T must map a space into itself");
  NormResult out;
  DenseMatrix m = scalar_map_dense(t, g, &out.rcond);
  if (right) {
    const DenseMatrix r = right->to_dense(right->finite() ? 0 : n);
    if (r.rows() != m.cols()) {
      fail(ErrorCode::DimensionMismatch, "right factor has " + std::to_string(r.rows()) + " rows, T has dimension " +
                                             std::to_string(m.cols()));
    }
    m = m * r;
  }
  if (left) {
    const DenseMatrix l = left->to_dense(n);
    if (l.cols() != m.rows()) {
      fail(ErrorCode::DimensionMismatch, "left factor has " + std::to_string(l.cols()) +
                                             " columns, T has dimension " + std::to_string(m.rows()));
    }
    m = l * m;
  }
  out.value = spectral_norm(m);
  out.error = 8.0 * kEps * static_cast<double>(n) * out.value;
  out.exact = true;
  out.method = "dense singular value";
  return out;
}

}  // namespace

Complex ScalarMap::operator()(Complex z) const {
  Complex v(1.0, 0.0);
  if (power) v *= std::pow(z, static_cast<double>(power));
  if (complement) v *= std::pow(1.0 - z, static_cast<double>(complement));
  if (resolvent_power) v /= std::pow(lambda - z, static_cast<double>(resolvent_power));
  return v;
}

DenseMatrix scalar_map_dense(const DenseMatrix& T, const ScalarMap& g, double* rcond) {
  validate(g);
  if (T.rows() != T.cols()) fail(ErrorCode::DimensionMismatch, "scalar map needs a square matrix");
  const Eigen::Index n = T.rows();
  DenseMatrix result = g.power ? matrix_power(T, g.power) : DenseMatrix::Identity(n, n);
  if (g.complement) result = result * matrix_power(DenseMatrix::Identity(n, n) - T, g.complement);
  if (g.resolvent_power) {
    const DenseMatrix shifted = g.lambda * DenseMatrix::Identity(n, n) - T;
    Eigen::PartialPivLU<DenseMatrix> lu(shifted);
    const double rc = lu.rcond();
    if (rcond) *rcond = rc;
    if (!(rc > 0.0) || !std::isfinite(rc)) fail(ErrorCode::Domain, "lambda I - T is singular");
    for (int i = 0; i < g.resolvent_power; ++i) result = lu.solve(result);
  }
  return result;
}

double spectral_norm(const DenseMatrix& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == 1 || m.cols() == 1) return m.norm();
  Eigen::JacobiSVD<DenseMatrix> svd(m);
  return svd.singularValues()(0);
}

NormResult composed_norm(const LinearOperator* left, const LinearOperator& T, const ScalarMap& g,
                         const LinearOperator* right, const NormOptions& options) {
  validate(g);
  if (g.resolvent_power && !std::isfinite(std::abs(g.lambda))) fail(ErrorCode::InvalidArgument, "lambda is not finite");

  const auto t_diag = coordinatewise_symbol(T);
  if (t_diag) {
    std::optional<DiagonalSymbol> l_diag;
    std::optional<DiagonalSymbol> l_row;
    std::optional<DiagonalSymbol> r_diag;
    bool ok = true;
    if (left) {
      l_diag = coordinatewise_symbol(*left);
      if (!l_diag) l_row = functional_row(*left);
      ok = l_diag || l_row;
    }
    if (ok && right) {
      r_diag = coordinatewise_symbol(*right);
      ok = r_diag.has_value();
    }
    if (ok) return diagonal_path(l_diag, l_row, *t_diag, T.space_exponent(), g, r_diag, options);
  }
  if (T.kind() == OperatorKind::WeightedShift) {
    if (left && !(coordinatewise_symbol(*left) && coordinatewise_symbol(*left)->is_constant())) {
      fail(ErrorCode::Unsupported, "shift norms with a left factor are not implemented");
    }
    NormResult r = shift_path(T, g, right, options);
    if (left) {
      Complex c;
      coordinatewise_symbol(*left)->is_constant(&c);
      r.value *= std::abs(c);
      r.error *= std::abs(c);
    }
    return r;
  }
  const bool any_finite = T.finite() || (left && left->kind() == OperatorKind::DenseMatrix) ||
                          (right && right->kind() == OperatorKind::DenseMatrix);
  if (any_finite) return dense_path(left, T, g, right);
  fail(ErrorCode::UnboundedTruncation,
       "no closed form or certified tail for the norm of this sequence-space composite (" + T.describe() + ")");
}

NormResult operator_norm(const LinearOperator& op, double tol) {
  if (!(tol > 0.0)) fail(ErrorCode::InvalidArgument, "tolerance must be positive");
  NormOptions options;
  options.tol = tol;
  switch (op.kind()) {
    case OperatorKind::DenseMatrix: {
      NormResult r;
      r.value = spectral_norm(op.matrix());
      r.error = 8.0 * kEps * static_cast<double>(op.matrix().cols()) * r.value;
      r.exact = true;
      r.method = "dense singular value";
      return r;
    }
    case OperatorKind::RankOneFunctional: {
      const LinearOperator id = LinearOperator::identity();
      const LinearOperator as_diag = LinearOperator::diagonal(DiagonalSymbol::constant(1.0), op.space_exponent());
      if (op.finite()) return dense_path(&op, LinearOperator::identity(*op.dimension()), ScalarMap::identity(), nullptr);
      return composed_norm(&op, as_diag, ScalarMap::identity(), nullptr, options);
    }
    case OperatorKind::WeightedShift: {
      if (!op.has_weights()) {
        NormResult r;
        r.value = 1.0;
        r.exact = true;
        r.method = "unit shift";
        return r;
      }
      DiagonalKernel k;
      k.times(op.symbol(), 1.0);
      const KernelSup s = k.sup(options.kernel);
      return {s.value, s.error, s.exact, s.argmax, 1.0, "weighted shift sup|w|: " + s.method};
    }
    case OperatorKind::Composite: {
      if (auto row = functional_row(op)) {
        const LinearOperator as_diag = LinearOperator::diagonal(DiagonalSymbol::constant(1.0), op.space_exponent());
        const LinearOperator f = LinearOperator::functional(*row, op.space_exponent());
        return composed_norm(&f, as_diag, ScalarMap::identity(), nullptr, options);
      }
      if (!coordinatewise_symbol(op) && op.finite()) {
        return dense_path(nullptr, LinearOperator::identity(*op.range_dimension()), ScalarMap::identity(), &op);
      }
      [[fallthrough]];
    }
    default:
      return composed_norm(nullptr, op, ScalarMap::pow(1), nullptr, options);
  }
}

std::pair<double, int> power_iteration_norm(const std::function<ComplexVector(const ComplexVector&)>& apply,
                                            const std::function<ComplexVector(const ComplexVector&)>& adjoint_apply,
                                            std::size_t dim, double tol, int max_iter, std::uint64_t seed) {
  ComplexVector x = random_unit_vector(dim, seed);
  double estimate = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    ComplexVector y = adjoint_apply(apply(x));
    const double ny = y.norm();
    if (ny == 0.0) return {0.0, it};
    const double next = std::sqrt(ny);
    x = y / ny;
    if (std::abs(next - estimate) <= tol * next) return {next, it};
    estimate = next;
  }
  return {estimate, max_iter};
}

ComplexVector random_unit_vector(std::size_t dim, std::uint64_t seed, double p) {
  if (dim == 0) fail(ErrorCode::InvalidArgument, "probe dimension must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  ComplexVector x(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim; ++i) x[static_cast<Eigen::Index>(i)] = Complex(normal(rng), normal(rng));
  return x / vector_norm(x, p);
}

}  // namespace semidecay
