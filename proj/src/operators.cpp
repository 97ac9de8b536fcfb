#include "semidecay/operators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

namespace semidecay {

const char* to_string(OperatorKind kind) noexcept {
  switch (kind) {
    case OperatorKind::DenseMatrix: return "dense";
    case OperatorKind::Diagonal: return "diagonal";
    case OperatorKind::WeightedShift: return "left_shift";
    case OperatorKind::RankOneFunctional: return "functional";
    case OperatorKind::Composite: return "composite";
  }
  return "unknown";
}

struct LinearOperator::Data {
  OperatorKind kind = OperatorKind::DenseMatrix;
  DenseMatrix matrix;
  std::optional<DiagonalSymbol> symbol;
  double space = 2.0;
  std::vector<LinearOperator> parts;
};

LinearOperator::LinearOperator(std::shared_ptr<const Data> data) : data_(std::move(data)) {}

namespace {

void check_finite(const DenseMatrix& m) {
  if (!m.allFinite()) fail(ErrorCode::InvalidArgument, "matrix has non-finite entries");
}

void check_vector(const ComplexVector& x) {
  if (x.size() < 1) fail(ErrorCode::DimensionMismatch, "vector must have at least one entry");
  if (!x.allFinite()) fail(ErrorCode::InvalidArgument, "vector has non-finite entries");
}

void check_space(double p) {
  if (!(p >= 1.0)) fail(ErrorCode::InvalidArgument, "sequence-space exponent must be >= 1");
}

[[noreturn]] void mismatch(const std::string& what, std::size_t expected, std::size_t got) {
  fail(ErrorCode::DimensionMismatch,
       what + ": operator expects dimension " + std::to_string(expected) + ", vector has " + std::to_string(got));
}

Complex symbol_at(const DiagonalSymbol& s, std::uint64_t j) {
  const auto& pre = s.impl().prefix();
  return j <= pre.size() ? pre[j - 1] : s.value_at(j);
}

}  // namespace

LinearOperator LinearOperator::dense(DenseMatrix matrix) {
  if (matrix.rows() < 1 || matrix.cols() < 1) fail(ErrorCode::InvalidArgument, "empty matrix");
  check_finite(matrix);
  auto d = std::make_shared<Data>();
  d->kind = OperatorKind::DenseMatrix;
  d->matrix = std::move(matrix);
  return LinearOperator(d);
}

LinearOperator LinearOperator::diagonal(DiagonalSymbol symbol, double space_exponent) {
  check_space(space_exponent);
  auto d = std::make_shared<Data>();
  d->kind = OperatorKind::Diagonal;
  d->symbol = std::move(symbol);
  d->space = space_exponent;
  return LinearOperator(d);
}

LinearOperator LinearOperator::left_shift(std::optional<DiagonalSymbol> weights, double space_exponent) {
  check_space(space_exponent);
  if (weights && weights->length()) fail(ErrorCode::InvalidArgument, "shift weights must be an infinite symbol");
  auto d = std::make_shared<Data>();
  d->kind = OperatorKind::WeightedShift;
  d->symbol = std::move(weights);
  d->space = space_exponent;
  return LinearOperator(d);
}

LinearOperator LinearOperator::functional(DiagonalSymbol row, double space_exponent) {
  check_space(space_exponent);
  auto d = std::make_shared<Data>();
  d->kind = OperatorKind::RankOneFunctional;
  d->symbol = std::move(row);
  d->space = space_exponent;
  return LinearOperator(d);
}

LinearOperator LinearOperator::composite(std::vector<LinearOperator> parts) {
  if (parts.empty()) fail(ErrorCode::InvalidArgument, "composite needs at least one factor");
  if (parts.size() == 1) return parts.front();
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    const auto dom = parts[i].dimension();
    const auto rng = parts[i + 1].range_dimension();
    if (dom && rng && *dom != *rng) mismatch("composite factor " + std::to_string(i), *dom, *rng);
  }
  auto d = std::make_shared<Data>();
  d->kind = OperatorKind::Composite;
  d->space = parts.back().space_exponent();
  d->parts = std::move(parts);
  return LinearOperator(d);
}

LinearOperator LinearOperator::identity(std::optional<std::size_t> dim) {
  if (dim) return dense(DenseMatrix::Identity(static_cast<Eigen::Index>(*dim), static_cast<Eigen::Index>(*dim)));
  return diagonal(DiagonalSymbol::constant(1.0));
}

OperatorKind LinearOperator::kind() const { return data_->kind; }

std::optional<std::size_t> LinearOperator::dimension() const {
  switch (data_->kind) {
    case OperatorKind::DenseMatrix: return static_cast<std::size_t>(data_->matrix.cols());
    case OperatorKind::Diagonal:
    case OperatorKind::RankOneFunctional:
      if (auto l = data_->symbol->length()) return static_cast<std::size_t>(*l);
      return std::nullopt;
    case OperatorKind::WeightedShift: return std::nullopt;
    case OperatorKind::Composite: return data_->parts.back().dimension();
  }
  return std::nullopt;
}

std::optional<std::size_t> LinearOperator::range_dimension() const {
  switch (data_->kind) {
    case OperatorKind::DenseMatrix: return static_cast<std::size_t>(data_->matrix.rows());
    case OperatorKind::RankOneFunctional: return 1;
    case OperatorKind::Composite: return data_->parts.front().range_dimension();
    default: return dimension();
  }
}

double LinearOperator::space_exponent() const { return data_->space; }

const DenseMatrix& LinearOperator::matrix() const {
  if (data_->kind != OperatorKind::DenseMatrix) fail(ErrorCode::InvalidArgument, "operator is not a dense matrix");
  return data_->matrix;
}

const DiagonalSymbol& LinearOperator::symbol() const {
  if (!data_->symbol) fail(ErrorCode::InvalidArgument, "operator has no symbol");
  return *data_->symbol;
}

bool LinearOperator::has_weights() const {
  return data_->kind == OperatorKind::WeightedShift && data_->symbol.has_value();
}

const std::vector<LinearOperator>& LinearOperator::parts() const { return data_->parts; }

ComplexVector LinearOperator::apply(const ComplexVector& x) const {
  check_vector(x);
  const auto n = static_cast<std::size_t>(x.size());
  switch (data_->kind) {
    case OperatorKind::DenseMatrix:
      if (n != static_cast<std::size_t>(data_->matrix.cols())) mismatch("apply", data_->matrix.cols(), n);
      return data_->matrix * x;
    case OperatorKind::Diagonal: {
      if (auto l = dimension(); l && *l != n) mismatch("apply", *l, n);
      ComplexVector y(x.size());
      for (std::size_t j = 0; j < n; ++j) y[j] = symbol_at(*data_->symbol, j + 1) * x[j];
      return y;
    }
    case OperatorKind::WeightedShift: {
      ComplexVector y = ComplexVector::Zero(x.size());
      for (std::size_t j = 0; j + 1 < n; ++j) {
        const Complex w = data_->symbol ? symbol_at(*data_->symbol, j + 1) : Complex(1.0, 0.0);
        y[j] = w * x[j + 1];
      }
      return y;
    }
    case OperatorKind::RankOneFunctional: {
      if (auto l = dimension(); l && *l < n) mismatch("apply", *l, n);
      Complex s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += symbol_at(*data_->symbol, j + 1) * x[j];
      ComplexVector y(1);
      y[0] = s;
      return y;
    }
    case OperatorKind::Composite: {
      ComplexVector y = x;
      for (auto it = data_->parts.rbegin(); it != data_->parts.rend(); ++it) y = it->apply(y);
      return y;
    }
  }
  fail(ErrorCode::Internal, "unknown operator kind");
}

ComplexVector LinearOperator::adjoint_apply(const ComplexVector& y, std::size_t out_dim) const {
  check_vector(y);
  const auto n = static_cast<std::size_t>(y.size());
  switch (data_->kind) {
    case OperatorKind::DenseMatrix:
      if (n != static_cast<std::size_t>(data_->matrix.rows())) mismatch("adjoint_apply", data_->matrix.rows(), n);
      return data_->matrix.adjoint() * y;
    case OperatorKind::Diagonal: {
      if (auto l = dimension(); l && *l != n) mismatch("adjoint_apply", *l, n);
      ComplexVector x(y.size());
      for (std::size_t j = 0; j < n; ++j) x[j] = std::conj(symbol_at(*data_->symbol, j + 1)) * y[j];
      return x;
    }
    case OperatorKind::WeightedShift: {
      ComplexVector x = ComplexVector::Zero(y.size());
      for (std::size_t j = 0; j + 1 < n; ++j) {
        const Complex w = data_->symbol ? symbol_at(*data_->symbol, j + 1) : Complex(1.0, 0.0);
        x[j + 1] = std::conj(w) * y[j];
      }
      return x;
    }
    case OperatorKind::RankOneFunctional: {
      if (n != 1) mismatch("adjoint_apply", 1, n);
      std::size_t m = out_dim;
      if (m == 0) {
        if (auto l = dimension()) m = *l;
        else fail(ErrorCode::InvalidArgument, "adjoint of a sequence-space functional needs an output length");
      }
      ComplexVector x(static_cast<Eigen::Index>(m));
      for (std::size_t j = 0; j < m; ++j) x[j] = std::conj(symbol_at(*data_->symbol, j + 1)) * y[0];
      return x;
    }
    case OperatorKind::Composite: {
      ComplexVector x = y;
      for (const auto& part : data_->parts) x = part.adjoint_apply(x, out_dim);
      return x;
    }
  }
  fail(ErrorCode::Internal, "unknown operator kind");
}

ComplexVector LinearOperator::power_apply(long long n, const ComplexVector& x) const {
  if (n < 0) fail(ErrorCode::InvalidArgument, "power must be non-negative, got " + std::to_string(n));
  check_vector(x);
  if (n == 0) return x;
  switch (data_->kind) {
    case OperatorKind::DenseMatrix: {
      const auto& m = data_->matrix;
      if (m.rows() != m.cols()) fail(ErrorCode::DimensionMismatch, "powers need a square matrix");
      if (static_cast<std::size_t>(x.size()) != static_cast<std::size_t>(m.cols())) {
        mismatch("power_apply", m.cols(), x.size());
      }
      ComplexVector y = x;
      DenseMatrix base = m;
      long long e = n;
      while (e > 0) {
        if (e & 1) y = base * y;
        e >>= 1;
        if (e > 0) base = base * base;
      }
      return y;
    }
    case OperatorKind::Diagonal: {
      if (auto l = dimension(); l && *l != static_cast<std::size_t>(x.size())) mismatch("power_apply", *l, x.size());
      ComplexVector y(x.size());
      for (Eigen::Index j = 0; j < x.size(); ++j) {
        Complex d = symbol_at(*data_->symbol, static_cast<std::uint64_t>(j) + 1);
        Complex acc(1.0, 0.0);
        long long e = n;
        while (e > 0) {
          if (e & 1) acc *= d;
          e >>= 1;
          if (e > 0) d *= d;
        }
        y[j] = acc * x[j];
      }
      return y;
    }
    case OperatorKind::WeightedShift: {
      if (!data_->symbol) {
        ComplexVector y = ComplexVector::Zero(x.size());
        const auto shift = static_cast<Eigen::Index>(std::min<long long>(n, x.size()));
        if (shift < x.size()) y.head(x.size() - shift) = x.tail(x.size() - shift);
        return y;
      }
      [[fallthrough]];
    }
    default: {
      if (range_dimension() != dimension() && finite()) {
        fail(ErrorCode::DimensionMismatch, "powers need an operator from a space into itself");
      }
      if (data_->kind == OperatorKind::RankOneFunctional) {
        fail(ErrorCode::DimensionMismatch, "a functional maps into C and has no powers");
      }
      ComplexVector y = x;
      for (long long i = 0; i < n; ++i) y = apply(y);
      return y;
    }
  }
}

LinearOperator LinearOperator::adjoint() const {
  switch (data_->kind) {
    case OperatorKind::DenseMatrix: return dense(data_->matrix.adjoint());
    case OperatorKind::Diagonal: return diagonal(data_->symbol->conjugate(), conjugate_exponent(data_->space));
    case OperatorKind::RankOneFunctional:
      if (auto l = dimension()) return dense(to_dense(*l).adjoint());
      break;
    case OperatorKind::Composite: {
      std::vector<LinearOperator> adj;
      for (auto it = data_->parts.rbegin(); it != data_->parts.rend(); ++it) adj.push_back(it->adjoint());
      return composite(std::move(adj));
    }
    default: break;
  }
  fail(ErrorCode::Unsupported, std::string("no exact adjoint for ") + to_string(data_->kind) + " operators");
}

LinearOperator LinearOperator::identity_minus() const {
  switch (data_->kind) {
    case OperatorKind::DenseMatrix: {
      const auto& m = data_->matrix;
      if (m.rows() != m.cols()) fail(ErrorCode::DimensionMismatch, "I - T needs a square matrix");
      return dense(DenseMatrix::Identity(m.rows(), m.cols()) - m);
    }
    case OperatorKind::Diagonal:
      return diagonal(data_->symbol->affine(1.0, -1.0), data_->space);
    case OperatorKind::Composite:
      if (auto n = dimension(); n && range_dimension() == n) {
        return dense(DenseMatrix::Identity(static_cast<Eigen::Index>(*n), static_cast<Eigen::Index>(*n)) -
                     to_dense(*n));
      }
      break;
    default: break;
  }
  fail(ErrorCode::Unsupported, std::string("I - T is not available for ") + to_string(data_->kind) + " operators");
}

LinearOperator LinearOperator::plus(const LinearOperator& other) const {
  if (data_->kind == OperatorKind::DenseMatrix && other.kind() == OperatorKind::DenseMatrix) {
    if (data_->matrix.rows() != other.matrix().rows() || data_->matrix.cols() != other.matrix().cols()) {
      mismatch("plus", data_->matrix.cols(), other.matrix().cols());
    }
    return dense(data_->matrix + other.matrix());
  }
  if (data_->kind == OperatorKind::Diagonal && other.kind() == OperatorKind::Diagonal) {
    return diagonal(DiagonalSymbol::sum(*data_->symbol, other.symbol()), data_->space);
  }
  if (finite() && other.finite() && range_dimension() == other.range_dimension() &&
      dimension() == other.dimension()) {
    return dense(to_dense(*dimension()) + other.to_dense(*dimension()));
  }
  fail(ErrorCode::Unsupported, std::string("cannot add ") + to_string(data_->kind) + " and " +
                                   to_string(other.kind()) + " operators");
}

LinearOperator LinearOperator::scaled(Complex factor) const {
  switch (data_->kind) {
    case OperatorKind::DenseMatrix: return dense(data_->matrix * factor);
    case OperatorKind::Diagonal: return diagonal(data_->symbol->scaled(factor), data_->space);
    case OperatorKind::RankOneFunctional: return functional(data_->symbol->scaled(factor), data_->space);
    default: return composite({diagonal(DiagonalSymbol::constant(factor), data_->space), *this});
  }
}

DenseMatrix LinearOperator::to_dense(std::size_t n) const {
  switch (data_->kind) {
    case OperatorKind::DenseMatrix:
      if (n != 0 && n != static_cast<std::size_t>(data_->matrix.cols())) mismatch("to_dense", data_->matrix.cols(), n);
      return data_->matrix;
    case OperatorKind::Diagonal: {
      if (auto l = dimension()) {
        if (n != 0 && n != *l) mismatch("to_dense", *l, n);
        n = *l;
      }
      if (n == 0) fail(ErrorCode::InvalidArgument, "sequence-space operator needs a truncation length");
      DenseMatrix m = DenseMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
      for (std::size_t j = 0; j < n; ++j) m(j, j) = symbol_at(*data_->symbol, j + 1);
      return m;
    }
    case OperatorKind::WeightedShift: {
      if (n == 0) fail(ErrorCode::InvalidArgument, "sequence-space operator needs a truncation length");
      DenseMatrix m = DenseMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
      for (std::size_t j = 0; j + 1 < n; ++j) {
        m(j, j + 1) = data_->symbol ? symbol_at(*data_->symbol, j + 1) : Complex(1.0, 0.0);
      }
      return m;
    }
    case OperatorKind::RankOneFunctional: {
      if (auto l = dimension()) {
        if (n == 0) n = *l;
        if (n > *l) mismatch("to_dense", *l, n);
      }
      if (n == 0) fail(ErrorCode::InvalidArgument, "sequence-space functional needs a truncation length");
      DenseMatrix m(1, static_cast<Eigen::Index>(n));
      for (std::size_t j = 0; j < n; ++j) m(0, j) = symbol_at(*data_->symbol, j + 1);
      return m;
    }
    case OperatorKind::Composite: {
      DenseMatrix m = data_->parts.back().to_dense(n);
      for (auto it = data_->parts.rbegin() + 1; it != data_->parts.rend(); ++it) {
        m = it->to_dense(static_cast<std::size_t>(m.rows())) * m;
      }
      return m;
    }
  }
  fail(ErrorCode::Internal, "unknown operator kind");
}

std::vector<Complex> LinearOperator::spectrum_points(std::uint64_t max_points) const {
  std::vector<Complex> out;
  if (data_->kind == OperatorKind::Diagonal) {
    const auto& s = *data_->symbol;
    const std::uint64_t n = s.length() ? std::min(*s.length(), max_points) : max_points;
    out.reserve(n + 2);
    for (std::uint64_t j = 1; j <= n; ++j) out.push_back(symbol_at(s, j));
    for (auto p : s.limit_points()) out.push_back(p);
    return out;
  }
  if (finite() && range_dimension() == dimension()) {
    const DenseMatrix m = to_dense(*dimension());
    Eigen::ComplexEigenSolver<DenseMatrix> es(m, false);
    if (es.info() != Eigen::Success) fail(ErrorCode::Internal, "eigenvalue solver did not converge");
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) out.push_back(es.eigenvalues()[i]);
    return out;
  }
  fail(ErrorCode::Unsupported, std::string("spectrum of ") + to_string(data_->kind) + " operators is not enumerable");
}

double LinearOperator::spectral_radius_bound() const {
  switch (data_->kind) {
    case OperatorKind::Diagonal: {
      const auto& s = *data_->symbol;
      const auto& pre = s.impl().prefix();
      double m = 0.0;
      for (const auto& v : pre) m = std::max(m, std::abs(v));
      if (!s.length() || *s.length() > pre.size()) {
        const auto enc = s.tail_enclosure(pre.size());
        if (!enc.empty) m = std::max(m, enc.max_modulus);
      }
      return m;
    }
    case OperatorKind::WeightedShift: {
      if (!data_->symbol) return 1.0;
      const auto& pre = data_->symbol->impl().prefix();
      double m = 0.0;
      for (const auto& v : pre) m = std::max(m, std::abs(v));
      const auto enc = data_->symbol->tail_enclosure(pre.size());
      return std::max(m, enc.max_modulus);
    }
    default: {
      double m = 0.0;
      for (const auto& v : spectrum_points()) m = std::max(m, std::abs(v));
      return m;
    }
  }
}

std::string LinearOperator::describe() const {
  std::ostringstream os;
  switch (data_->kind) {
    case OperatorKind::DenseMatrix:
      os << "dense " << data_->matrix.rows() << "x" << data_->matrix.cols();
      break;
    case OperatorKind::Diagonal: os << "diagonal[" << data_->symbol->describe() << "]"; break;
    case OperatorKind::WeightedShift:
      os << "left_shift";
      if (data_->symbol) os << "[" << data_->symbol->describe() << "]";
      break;
    case OperatorKind::RankOneFunctional: os << "functional[" << data_->symbol->describe() << "]"; break;
    case OperatorKind::Composite:
      os << "product(";
      for (std::size_t i = 0; i < data_->parts.size(); ++i) os << (i ? ", " : "") << data_->parts[i].describe();
      os << ")";
      break;
  }
  return os.str();
}

DenseMatrix matrix_exponential(const DenseMatrix& m) {
  if (m.rows() != m.cols()) fail(ErrorCode::DimensionMismatch, "matrix exponential needs a square matrix");
  check_finite(m);
  static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                 1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                 670442572800.0,      33522128640.0,       1323241920.0,
                                 40840800.0,          960960.0,            16380.0,
                                 182.0,               1.0};
  constexpr double theta13 = 5.371920351148152;
  const Eigen::Index n = m.rows();
  const double norm1 = m.cwiseAbs().colwise().sum().maxCoeff();
  int s = 0;
  if (norm1 > theta13) s = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
  const DenseMatrix a = m / std::ldexp(1.0, s);
  const DenseMatrix id = DenseMatrix::Identity(n, n);
  const DenseMatrix a2 = a * a;
  const DenseMatrix a4 = a2 * a2;
  const DenseMatrix a6 = a4 * a2;
  const DenseMatrix u =
      a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
  const DenseMatrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
  DenseMatrix r = (v - u).partialPivLu().solve(v + u);
  for (int i = 0; i < s; ++i) r = r * r;
  return r;
}

LinearOperator sampled_data_operator(const DenseMatrix& A, const DenseMatrix& B, const DenseMatrix& F, double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) fail(ErrorCode::InvalidArgument, "sampling period tau must be > 0");
  if (A.rows() != A.cols()) fail(ErrorCode::DimensionMismatch, "A must be square");
  if (B.rows() != A.rows()) mismatch("B rows", A.rows(), B.rows());
  if (F.cols() != A.cols()) mismatch("F columns", A.cols(), F.cols());
  if (F.rows() != B.cols()) mismatch("F rows", B.cols(), F.rows());
  const Eigen::Index n = A.rows();
  DenseMatrix aug = DenseMatrix::Zero(2 * n, 2 * n);
  aug.topLeftCorner(n, n) = A * tau;
  aug.topRightCorner(n, n) = DenseMatrix::Identity(n, n) * tau;
  const DenseMatrix e = matrix_exponential(aug);
  return LinearOperator::dense(e.topLeftCorner(n, n) + e.topRightCorner(n, n) * B * F);
}

double vector_norm(const ComplexVector& x, double p) {
  if (p == kSupNorm) return x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff();
  if (p == 2.0) return x.norm();
  if (p == 1.0) return x.cwiseAbs().sum();
  const double scale = x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) s += std::pow(std::abs(x[i]) / scale, p);
  return scale * std::pow(s, 1.0 / p);
}

double conjugate_exponent(double p) {
  if (p == kSupNorm) return 1.0;
  if (p == 1.0) return kSupNorm;
  return p / (p - 1.0);
}

}  // namespace semidecay
