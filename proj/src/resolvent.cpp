#include "semidecay/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "semidecay/parallel.hpp"
#include "text_util.hpp"

namespace semidecay {

namespace {

constexpr double kTwoPi = 2.0 * kPi;

double dense_spectral_radius(const DenseMatrix& t) {
  if (t.rows() == 0) return 0.0;
  Eigen::ComplexEigenSolver<DenseMatrix> es(t, false);
  if (es.info() != Eigen::Success) fail(ErrorCode::Internal, "eigenvalue computation failed");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// lambda_i^{power} for the i-th of n equispaced nodes on |lambda| = r,
/// with the phase reduced exactly modulo n.
Complex node_power(double r, long long power, std::size_t i, std::size_t n) {
  const auto idx = static_cast<unsigned long long>(i) * static_cast<unsigned long long>(power) % n;
  return std::polar(std::pow(r, static_cast<double>(power)), kTwoPi * static_cast<double>(idx) / static_cast<double>(n));
}

Complex node(double r, std::size_t i, std::size_t n) {
  return std::polar(r, kTwoPi * static_cast<double>(i) / static_cast<double>(n));
}

DenseMatrix resolvent_power_dense(const DenseMatrix& t, Complex lambda, int m, const DenseMatrix& rhs) {
  const Eigen::Index n = t.rows();
  Eigen::PartialPivLU<DenseMatrix> lu(lambda * DenseMatrix::Identity(n, n) - t);
  if (!(lu.rcond() > 0.0)) fail(ErrorCode::Domain, "lambda I - T is singular");
  DenseMatrix out = rhs;
  for (int i = 0; i < m; ++i) out = lu.solve(out);
  return out;
}

/// Polynomial binom(n, k) evaluated at real n.
double binom_poly(double n, int k) {
  double v = 1.0;
  for (int i = 0; i < k; ++i) v *= (n - i) / (i + 1);
  return v;
}

/// sum_{t >= 0} Q(t) x^t for a polynomial Q given by its values at 0..D.
double polynomial_series(std::vector<double> values, double x) {
  double total = 0.0;
  const double inv = 1.0 / (1.0 - x);
  double xi = 1.0;
  double scale = inv;
  for (std::size_t i = 0; i < values.size(); ++i) {
    total += values[0] * xi * scale;
    for (std::size_t j = 0; j + 1 < values.size() - i; ++j) values[j] = values[j + 1] - values[j];
    xi *= x;
    scale *= inv;
  }
  return total;
}

/// X = sum_k (A^k)* Q A^k by repeated squaring.
DenseMatrix stein_sum(DenseMatrix a, const DenseMatrix& q) {
  DenseMatrix x = q;
  for (int it = 0; it < 80; ++it) {
    const DenseMatrix y = a.adjoint() * x * a;
    x += y;
    if (y.norm() <= 1e-17 * x.norm()) return x;
    a = a * a;
  }
  fail(ErrorCode::Divergence, "Stein series did not converge");
}

DenseMatrix stein_gram(const DenseMatrix& t, double r, const CircleForm& form) {
  const Eigen::Index n = t.rows();
  const DenseMatrix id = DenseMatrix::Identity(n, n);
  const int m = form.resolvent_power;
  if (form.complement == 1 && m == 1) {
    const DenseMatrix x = stein_sum(t / r, id);
    const DenseMatrix c = t - id;
    return kTwoPi * (id + c.adjoint() * x * c / (r * r));
  }
  const Eigen::Index nb = n * m;
  DenseMatrix j = DenseMatrix::Zero(nb, nb);
  for (int b = 0; b < m; ++b) {
    j.block(b * n, b * n, n, n) = t;
    if (b + 1 < m) j.block(b * n, (b + 1) * n, n, n) = id;
  }
  DenseMatrix q = DenseMatrix::Zero(nb, nb);
  q.block(0, 0, n, n) = id;
  const DenseMatrix x = stein_sum(j / r, q);
  DenseMatrix b = DenseMatrix::Zero(nb, n);
  if (form.complement == 0) {
    b.block((m - 1) * n, 0, n, n) = id;
  } else {
    b.block((m - 2) * n, 0, n, n) = id;
    b.block((m - 1) * n, 0, n, n) = -(id - t);
  }
  return (kTwoPi / (r * r)) * (b.adjoint() * x * b);
}

double integral_at(const DiagonalSymbol& d, const std::optional<DiagonalSymbol>& s, std::uint64_t j, double r,
                   const CircleForm& form) {
  const auto& pre = d.impl().prefix();
  const Complex dj = j <= pre.size() ? pre[j - 1] : d.value_at(j);
  double w = 1.0;
  if (s) w = std::norm(s->value_at(j));
  return w == 0.0 ? 0.0 : w * scalar_circle_integral(dj, r, form);
}

void check_form(const CircleForm& form) {
  if (form.resolvent_power < 1) fail(ErrorCode::InvalidArgument, "resolvent power must be at least 1");
  if (form.complement < 0 || form.complement > 1) fail(ErrorCode::InvalidArgument, "(lambda-1) power must be 0 or 1");
}

std::optional<DiagonalSymbol> diagonal_of(const LinearOperator* op) {
  if (!op) return std::nullopt;
  if (op->kind() == OperatorKind::Diagonal) return op->symbol();
  return std::nullopt;
}

}  // namespace

double resolvent_coefficient(long long n, int k) {
  double v = 1.0;
  for (int i = 1; i < k; ++i) v *= static_cast<double>(n + i) / i;
  return v;
}

std::vector<double> SpectralGrid::radii() const {
  std::vector<double> out;
  for (int j = j_min; j <= j_max; ++j) out.push_back(1.0 + std::ldexp(1.0, -j));
  return out;
}

void SpectralGrid::validate() const {
  if (j_min < 0 || j_max < j_min || j_max > 52) {
    fail(ErrorCode::InvalidArgument, "radius schedule needs 0 <= j_min <= j_max <= 52");
  }
  if (n_theta < 64 || (n_theta & (n_theta - 1)) != 0) {
    fail(ErrorCode::InvalidArgument, "n_theta must be a power of two and at least 64");
  }
  if (max_theta < n_theta) fail(ErrorCode::InvalidArgument, "max_theta below n_theta");
  if (!(tolerance > 0.0)) fail(ErrorCode::InvalidArgument, "refinement tolerance must be positive");
}

SpectralGrid SpectralGrid::parse(std::string_view text) {
  SpectralGrid g;
  const auto parts = text::split(text, ':');
  if (parts.empty() || parts.size() > 3) fail(ErrorCode::Parse, "grid must look like jmin:jmax:ntheta");
  g.j_min = static_cast<int>(text::parse_int(parts[0], "grid j_min"));
  if (parts.size() > 1) g.j_max = static_cast<int>(text::parse_int(parts[1], "grid j_max"));
  if (parts.size() > 2) g.n_theta = static_cast<int>(text::parse_int(parts[2], "grid n_theta"));
  if (g.max_theta < g.n_theta) g.max_theta = g.n_theta;
  g.validate();
  return g;
}

ComplexVector resolvent_apply(const LinearOperator& T, Complex lambda, int k, const ComplexVector& x) {
  if (k < 1) fail(ErrorCode::InvalidArgument, "resolvent power k must be at least 1");
  if (!(std::abs(lambda) > 1.0)) fail(ErrorCode::Domain, "resolvent points must satisfy |lambda| > 1");
  switch (T.kind()) {
    case OperatorKind::DenseMatrix: {
      if (static_cast<std::size_t>(x.size()) != *T.dimension()) {
        fail(ErrorCode::DimensionMismatch, "vector length does not match the matrix");
      }
      return resolvent_power_dense(T.matrix(), lambda, k, x);
    }
    case OperatorKind::Diagonal: {
      const auto& d = T.symbol();
      if (d.length() && static_cast<std::size_t>(x.size()) != *d.length()) {
        fail(ErrorCode::DimensionMismatch, "vector length does not match the diagonal");
      }
      ComplexVector out(x.size());
      for (Eigen::Index j = 0; j < x.size(); ++j) {
        const Complex gap = lambda - d.value_at(static_cast<std::uint64_t>(j) + 1);
        if (gap == Complex(0.0, 0.0)) fail(ErrorCode::Domain, "lambda is an eigenvalue");
        out[j] = x[j] / std::pow(gap, static_cast<double>(k));
      }
      return out;
    }
    default:
      break;
  }
  // sum_n binom(n+k-1, k-1) T^n x / lambda^{n+k}
  const double p = T.space_exponent();
  const NormResult tn = operator_norm(T);
  const double bound = tn.value + tn.error;
  const double modulus = std::abs(lambda);
  if (bound >= modulus) {
    fail(ErrorCode::Divergence, "Neumann series needs ||T|| < |lambda| (||T|| <= " + std::to_string(bound) + ")");
  }
  ComplexVector v = x;
  ComplexVector sum = ComplexVector::Zero(x.size());
  Complex scale = std::pow(lambda, -static_cast<double>(k));
  double coeff = 1.0;
  for (long long n = 0; n < 100000000; ++n) {
    sum += (coeff * scale) * v;
    const double next_coeff = coeff * static_cast<double>(n + k) / static_cast<double>(n + 1);
    const double ratio = static_cast<double>(n + 1 + k) / static_cast<double>(n + 2) * bound / modulus;
    v = T.apply(v);
    const double next = next_coeff * vector_norm(v, p) * std::pow(modulus, -static_cast<double>(n + 1 + k));
    if (ratio < 1.0 && next / (1.0 - ratio) <= 1e-16 * std::max(vector_norm(sum, p), 1e-300)) return sum;
    if (next == 0.0) return sum;
    coeff = next_coeff;
    scale /= lambda;
  }
  fail(ErrorCode::Divergence, "Neumann series did not converge");
}

DenseMatrix reconstruct_power(const LinearOperator& T, long long n, int k, double r, int n_theta) {
  if (!T.finite()) fail(ErrorCode::Unsupported, "power reconstruction needs a finite-dimensional operator");
  if (n < 0 || k < 1 || n_theta < 1) fail(ErrorCode::InvalidArgument, "need n >= 0, k >= 1, n_theta >= 1");
  if (!(r > 1.0)) fail(ErrorCode::Domain, "contour radius must exceed 1");
  const DenseMatrix t = T.to_dense();
  if (!(r > dense_spectral_radius(t))) fail(ErrorCode::Domain, "contour radius must exceed the spectral radius");
  const Eigen::Index dim = t.rows();
  const auto nodes = static_cast<std::size_t>(n_theta);
  DenseMatrix acc = DenseMatrix::Zero(dim, dim);
  const DenseMatrix id = DenseMatrix::Identity(dim, dim);
  for (std::size_t i = 0; i < nodes; ++i) {
    const Complex lambda = node(r, i, nodes);
    acc += node_power(r, n + k, i, nodes) * resolvent_power_dense(t, lambda, k, id);
  }
  return acc / (static_cast<double>(nodes) * resolvent_coefficient(n, k));
}

ParsevalReport parseval_check(const LinearOperator& T, const LinearOperator* S, int k, double r,
                              const ComplexVector& x, int n_theta, long long n_trunc) {
  if (k < 1 || n_theta < 1 || n_trunc < 0) fail(ErrorCode::InvalidArgument, "need k >= 1, n_theta >= 1, n_trunc >= 0");
  if (!(r > 1.0)) fail(ErrorCode::Domain, "radius must exceed 1");
  const auto N = static_cast<std::size_t>(x.size());
  if (N == 0) fail(ErrorCode::InvalidArgument, "empty probe vector");
  if (T.finite() && *T.dimension() != N) fail(ErrorCode::DimensionMismatch, "probe length does not match T");
  const DenseMatrix t = T.to_dense(N);
  const DenseMatrix s = S ? S->to_dense(N) : DenseMatrix::Identity(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
  if (static_cast<std::size_t>(s.cols()) != N) fail(ErrorCode::DimensionMismatch, "S does not act on the probe");
  if (!(r > dense_spectral_radius(t))) fail(ErrorCode::Domain, "radius must exceed the spectral radius of T");

  ParsevalReport rep;
  rep.n_theta = n_theta;
  rep.n_trunc = n_trunc;
  const auto nodes = static_cast<std::size_t>(n_theta);
  std::vector<double> values(nodes);
  parallel_for(nodes, [&](std::size_t i) {
    const ComplexVector y = s * resolvent_power_dense(t, node(r, i, nodes), k, x);
    values[i] = y.squaredNorm();
  });
  Accumulator lhs;
  for (double v : values) lhs.add(v);
  rep.lhs = lhs.value() / static_cast<double>(nodes);

  Accumulator rhs;
  ComplexVector v = x;
  const double log_r = std::log(r);
  for (long long n = 0; n <= n_trunc; ++n) {
    const double y = (s * v).norm();
    if (y > 0.0) {
      rhs.add(std::exp(2.0 * (std::log(resolvent_coefficient(n, k)) + std::log(y) - static_cast<double>(n + k) * log_r)));
    }
    v = t * v;
  }
  rep.rhs = rhs.value();
  rep.residual = std::abs(rep.lhs - rep.rhs);

  // Tail: ||T^j|| <= c rate^j from a block P with ||T^P||^{1/P} < r.
  std::vector<double> norms{1.0};
  DenseMatrix power = DenseMatrix::Identity(t.rows(), t.cols());
  int block = 0;
  double rate = 0.0;
  for (int P = 1; P <= 64; ++P) {
    power = power * t;
    const double np = spectral_norm(power);
    norms.push_back(np);
    if (std::pow(np, 1.0 / P) < r) {
      block = P;
      rate = std::pow(np, 1.0 / P);
      break;
    }
  }
  if (block == 0) fail(ErrorCode::Hypothesis, "no power bound ||T^P||^{1/P} < r for P <= 64; tail not certifiable");
  rep.power_block = block;
  rep.power_rate = rate;
  const double c_small = *std::max_element(norms.begin(), norms.begin() + block);
  const double s_norm = spectral_norm(s);
  const double v_norm = v.norm();
  const long long first = n_trunc + 1;
  if (v_norm == 0.0 || s_norm == 0.0) {
    rep.tail_bound = 0.0;
    return rep;
  }
  if (rate == 0.0) {
    Accumulator tail;
    for (int i = 0; i < block; ++i) {
      const double c = resolvent_coefficient(first + i, k);
      tail.add(std::exp(2.0 * (std::log(c * c_small * s_norm * v_norm) - static_cast<double>(first + i + k) * log_r)));
    }
    rep.tail_bound = tail.value();
    return rep;
  }
  const double c_all = c_small * std::max(1.0, std::pow(rate, -(block - 1)));
  const double growth = static_cast<double>(first + k) / static_cast<double>(first + 1);
  const double q = growth * growth * rate * rate / (r * r);
  if (q >= 1.0) fail(ErrorCode::Hypothesis, "tail ratio is not below 1; increase n_trunc");
  const double lead = std::exp(2.0 * (std::log(resolvent_coefficient(first, k) * c_all * s_norm * v_norm) -
                                      static_cast<double>(first + k) * log_r));
  rep.tail_bound = lead / (1.0 - q);
  return rep;
}

CircleSup circle_sup(const std::function<NormResult(double theta)>& value, const SpectralGrid& grid,
                     bool theta_independent) {
  grid.validate();
  CircleSup out;
  if (theta_independent) {
    const NormResult v = value(0.0);
    out.value = v.value;
    out.n_theta = 1;
    out.min_rcond = v.rcond;
    return out;
  }
  std::size_t n = static_cast<std::size_t>(grid.n_theta);
  auto evaluate = [&](std::size_t count, std::size_t stride, std::size_t offset, std::size_t total) {
    std::vector<NormResult> vals(count);
    parallel_for(count, [&](std::size_t i) {
      vals[i] = value(kTwoPi * static_cast<double>(offset + i * stride) / static_cast<double>(total));
    });
    for (std::size_t i = 0; i < count; ++i) {
      out.min_rcond = std::min(out.min_rcond, vals[i].rcond);
      if (vals[i].value > out.value) {
        out.value = vals[i].value;
        out.theta = kTwoPi * static_cast<double>(offset + i * stride) / static_cast<double>(total);
      }
    }
  };
  evaluate(n, 1, 0, n);
  out.n_theta = static_cast<int>(n);
  if (!grid.auto_refine) return out;
  out.converged = false;
  while (2 * n <= static_cast<std::size_t>(grid.max_theta)) {
    const double before = out.value;
    evaluate(n, 2, 1, 2 * n);
    n *= 2;
    out.n_theta = static_cast<int>(n);
    if (out.value - before <= grid.tolerance * out.value) {
      out.converged = true;
      break;
    }
  }
  return out;
}

bool resolvent_peaks_on_real_axis(const LinearOperator& T, const LinearOperator* left, const LinearOperator* right) {
  auto modulus_only = [](const LinearOperator* op) {
    return !op || op->kind() == OperatorKind::Diagonal || op->kind() == OperatorKind::RankOneFunctional;
  };
  if (T.kind() == OperatorKind::WeightedShift && !T.has_weights()) {
    return (!left || left->kind() == OperatorKind::Diagonal) && modulus_only(right);
  }
  return T.kind() == OperatorKind::Diagonal && T.symbol().real_nonnegative() && modulus_only(left) &&
         modulus_only(right);
}

GrowthProfile resolvent_sweep(const LinearOperator& T, const LinearOperator* right, int k, const SpectralGrid& grid,
                              const LinearOperator* left) {
  if (k < 1) fail(ErrorCode::InvalidArgument, "resolvent power k must be at least 1");
  grid.validate();
  GrowthProfile prof;
  const bool on_axis = resolvent_peaks_on_real_axis(T, left, right);
  prof.method = on_axis ? "theta = 0 (norm peaks on the positive axis)" : "equispaced angles with doubling";
  for (double r : grid.radii()) {
    std::string method;
    const CircleSup cs = circle_sup(
        [&](double theta) {
          return composed_norm(left, T, ScalarMap::resolvent(std::polar(r, theta), k), right);
        },
        grid, on_axis);
    GrowthSample s{r, cs.value, cs.theta, cs.n_theta, cs.converged ? "" : "unconverged"};
    if (cs.min_rcond < 1e-12) {
      s.flags += s.flags.empty() ? "ill-conditioned" : ";ill-conditioned";
      prof.samples.push_back(s);
      prof.truncated = true;
      break;
    }
    prof.samples.push_back(s);
  }
  return prof;
}

double scalar_circle_integral(Complex d, double r, const CircleForm& form) {
  check_form(form);
  const double ad = std::abs(d);
  if (!(ad < r)) fail(ErrorCode::Domain, "circle must enclose the spectrum");
  const int m = form.resolvent_power;
  const double x = ad * ad / (r * r);
  const int degree = 2 * (m - 1);
  std::vector<double> values(static_cast<std::size_t>(degree) + 1);
  for (int t = 0; t <= degree; ++t) {
    const double n = static_cast<double>(m + t);
    if (form.complement == 0) {
      const double b = binom_poly(n - 1.0, m - 1);
      values[static_cast<std::size_t>(t)] = b * b;
    } else {
      const double b1 = binom_poly(n, m - 1);
      const double b0 = binom_poly(n - 1.0, m - 1);
      values[static_cast<std::size_t>(t)] = b1 * b1 * ad * ad - 2.0 * d.real() * b1 * b0 + b0 * b0;
    }
  }
  const double series = polynomial_series(values, x) * std::pow(r, -2.0 * m);
  if (form.complement == 0) return kTwoPi * series;
  return kTwoPi * (std::pow(r, -2.0 * (m - 1)) + series);
}

DenseMatrix circle_gram(const DenseMatrix& t, double r, const CircleForm& form, int* n_theta_used,
                        std::string* method) {
  check_form(form);
  if (t.rows() != t.cols()) fail(ErrorCode::DimensionMismatch, "circle integrals need a square matrix");
  const double rho = dense_spectral_radius(t);
  if (!(rho < r)) fail(ErrorCode::Domain, "circle must enclose the spectrum");
  const double ratio = rho / r;
  const double needed = ratio > 0.0 ? 2.0 * std::log(1e-16) / std::log(ratio) : 64.0;
  const Eigen::Index n = t.rows();
  const DenseMatrix id = DenseMatrix::Identity(n, n);
  constexpr std::size_t kCap = std::size_t{1} << 16;
  if (needed <= static_cast<double>(kCap)) {
    std::size_t nodes = 64;
    while (static_cast<double>(nodes) < needed) nodes *= 2;
    auto sum_nodes = [&](std::size_t count, std::size_t stride, std::size_t offset, std::size_t total) {
      std::vector<DenseMatrix> parts(count);
      parallel_for(count, [&](std::size_t i) {
        const Complex lambda = node(r, offset + i * stride, total);
        DenseMatrix a = resolvent_power_dense(t, lambda, form.resolvent_power, id);
        if (form.complement) a *= (lambda - 1.0);
        parts[i] = a.adjoint() * a;
      });
      DenseMatrix g = DenseMatrix::Zero(n, n);
      for (const auto& p : parts) g += p;
      return g;
    };
    DenseMatrix sum = sum_nodes(nodes, 1, 0, nodes);
    while (2 * nodes <= kCap) {
      const DenseMatrix coarse = sum / static_cast<double>(nodes);
      sum += sum_nodes(nodes, 2, 1, 2 * nodes);
      nodes *= 2;
      const DenseMatrix fine = sum / static_cast<double>(nodes);
      if ((fine - coarse).norm() <= 1e-10 * fine.norm()) {
        if (n_theta_used) *n_theta_used = static_cast<int>(nodes);
        if (method) *method = "trapezoid, " + std::to_string(nodes) + " nodes";
        return kTwoPi * fine;
      }
    }
  }
  if (n_theta_used) *n_theta_used = 0;
  if (method) *method = "exact series (Stein doubling)";
  return stein_gram(t, r, form);
}

CircleIntegral circle_integral(const LinearOperator& T, const LinearOperator* S, double r, const CircleForm& form,
                               const ComplexVector& y, bool with_adjoint) {
  check_form(form);
  const double ny = y.squaredNorm();
  if (ny == 0.0) fail(ErrorCode::InvalidArgument, "probe vector is zero");
  CircleIntegral out;
  const auto s_diag = diagonal_of(S);
  if (T.kind() == OperatorKind::Diagonal && (!S || s_diag)) {
    Accumulator acc;
    for (Eigen::Index j = 0; j < y.size(); ++j) {
      if (y[j] == Complex(0.0, 0.0)) continue;
      acc.add(std::norm(y[j]) * integral_at(T.symbol(), s_diag, static_cast<std::uint64_t>(j) + 1, r, form));
    }
    out.value = acc.value() / ny * (with_adjoint ? 2.0 : 1.0);
    out.method = "diagonal closed form";
    return out;
  }
  const auto N = static_cast<std::size_t>(y.size());
  const DenseMatrix s = S ? S->to_dense(N) : DenseMatrix::Identity(y.size(), y.size());
  if (static_cast<std::size_t>(s.cols()) != N) fail(ErrorCode::DimensionMismatch, "S does not act on the probe");
  if (T.finite() && *T.dimension() != static_cast<std::size_t>(s.rows())) {
    fail(ErrorCode::DimensionMismatch, "S does not map into the space of T");
  }
  if (with_adjoint && !T.finite()) {
    fail(ErrorCode::Unsupported, "the adjoint of a sequence-space shift does not preserve finite sections");
  }
  const DenseMatrix t = T.to_dense(static_cast<std::size_t>(s.rows()));
  const ComplexVector w = s * y;
  DenseMatrix g = circle_gram(t, r, form, &out.n_theta, &out.method);
  if (with_adjoint) g += circle_gram(t.adjoint(), r, form);
  out.value = (w.adjoint() * g * w)(0, 0).real() / ny;
  return out;
}

CircleIntegral circle_integral_sup(const LinearOperator& T, const LinearOperator* S, double r, const CircleForm& form,
                                   bool with_adjoint) {
  check_form(form);
  CircleIntegral out;
  const auto s_diag = diagonal_of(S);
  const double factor = with_adjoint ? 2.0 : 1.0;
  if (T.kind() == OperatorKind::Diagonal && (!S || s_diag)) {
    const DiagonalSymbol& d = T.symbol();
    auto f = [&](std::uint64_t j) { return integral_at(d, s_diag, j, r, form); };
    double best = -1.0;
    auto visit = [&](std::uint64_t j) {
      const double v = f(j);
      if (v > best) {
        best = v;
        out.argmax = j;
      }
      return v;
    };
    if (auto len = d.length()) {
      for (std::uint64_t j = 1; j <= *len; ++j) visit(j);
      out.method = "diagonal closed form, exhaustive";
    } else {
      constexpr std::uint64_t kExhaustive = 4096;
      for (std::uint64_t j = 1; j <= kExhaustive; ++j) visit(j);
      std::vector<std::uint64_t> pts;
      for (double x = kExhaustive * 1.05; x < 1e12; x *= 1.05) pts.push_back(static_cast<std::uint64_t>(x));
      std::size_t best_i = pts.size();
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const double before = best;
        visit(pts[i]);
        if (best > before) best_i = i;
      }
      if (best_i < pts.size()) {
        std::uint64_t lo = best_i == 0 ? kExhaustive : pts[best_i - 1];
        std::uint64_t hi = best_i + 1 < pts.size() ? pts[best_i + 1] : pts[best_i];
        while (hi - lo > 3) {
          const std::uint64_t m1 = lo + (hi - lo) / 3;
          const std::uint64_t m2 = hi - (hi - lo) / 3;
          if (visit(m1) < visit(m2)) lo = m1;
          else hi = m2;
        }
        for (std::uint64_t j = lo; j <= hi; ++j) visit(j);
      }
      out.method = "diagonal closed form, sup over j sampled (exhaustive to 4096, geometric to 1e12)";
    }
    out.value = factor * best;
    return out;
  }
  if (!T.finite() && !(S && S->finite())) {
    fail(ErrorCode::Unsupported, "sup over probes needs a finite or diagonal operator");
  }
  const std::size_t n = T.finite() ? *T.dimension() : *S->range_dimension();
  const DenseMatrix t = T.to_dense(n);
  const DenseMatrix s = S ? S->to_dense(n) : DenseMatrix::Identity(t.rows(), t.rows());
  if (s.rows() != t.rows()) fail(ErrorCode::DimensionMismatch, "S does not map into the space of T");
  DenseMatrix g = circle_gram(t, r, form, &out.n_theta, &out.method);
  if (with_adjoint) g += circle_gram(t.adjoint(), r, form);
  const DenseMatrix gs = s.adjoint() * g * s;
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(gs, Eigen::EigenvaluesOnly);
  out.value = es.eigenvalues().maxCoeff();
  return out;
}

}  // namespace semidecay
