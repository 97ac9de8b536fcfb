#include <doctest.h>

#include <cmath>
#include <string>

#include "helpers.hpp"
#include "semidecay/norms.hpp"
#include "semidecay/operators.hpp"

using namespace semidecay;
using namespace testing_support;

namespace {

ComplexVector vec(std::initializer_list<Complex> xs) {
  ComplexVector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (Complex x : xs) v(i++) = x;
  return v;
}

DenseMatrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  DenseMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double x : r) m(i, j++) = x;
    ++i;
  }
  return m;
}

/// Operators of every kind, acting on (truncations to) length n.
std::vector<std::pair<std::string, LinearOperator>> zoo() {
  return {
      {"dense", LinearOperator::dense(random_matrix(6, 11))},
      {"diagonal", LinearOperator::diagonal(DiagonalSymbol::one_minus_inv_j())},
      {"stolz diagonal", LinearOperator::diagonal(DiagonalSymbol::stolz_curve(0.5))},
      {"shift", LinearOperator::left_shift()},
      {"weighted shift", LinearOperator::left_shift(DiagonalSymbol::inv_j_pow(0.5), 2.0)},
      {"composite", LinearOperator::composite({LinearOperator::diagonal(DiagonalSymbol::inv_j_pow(1.0)),
                                                LinearOperator::left_shift()})},
  };
}

}  // namespace

TEST_SUITE("operators") {
  TEST_CASE("apply on small examples") {
    const auto x = vec({1.0, {0.0, 2.0}});
    CHECK((LinearOperator::identity(2).apply(x) - x).norm() == 0.0);
    CHECK((LinearOperator::identity().apply(x) - x).norm() == 0.0);

    const auto T = LinearOperator::diagonal(DiagonalSymbol::one_minus_inv_j());
    const ComplexVector y = T.apply(unit(5, 2));
    CHECK(std::abs(y(2) - 2.0 / 3.0) < 1e-15);
    CHECK(y.norm() == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

    const auto N = LinearOperator::dense(mat({{0, 1}, {0, 0}}));
    CHECK((N.apply(vec({0.0, 1.0})) - vec({1.0, 0.0})).norm() == 0.0);
  }

  TEST_CASE("dimension mismatch names both dimensions") {
    const auto N = LinearOperator::dense(mat({{0, 1}, {0, 0}}));
    try {
      N.apply(vec({1.0, 2.0, 3.0}));
      FAIL("expected a dimension error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DimensionMismatch);
      const std::string msg = e.what();
      CHECK(msg.find('2') != std::string::npos);
      CHECK(msg.find('3') != std::string::npos);
    }
  }

  TEST_CASE("power_apply") {
    const auto x = random_vector(4, 3);
    const auto D = LinearOperator::dense(random_matrix(4, 5));
    CHECK((D.power_apply(0, x) - x).norm() == 0.0);

    const auto N = LinearOperator::dense(mat({{0, 1}, {0, 0}}));
    CHECK(N.power_apply(2, random_vector(2, 9)).norm() == 0.0);

    const auto T = LinearOperator::diagonal(DiagonalSymbol::one_minus_inv_j());
    const ComplexVector y = T.power_apply(10, unit(3, 1));
    CHECK(std::abs(y(1) - std::pow(0.5, 10)) < 1e-16);

    CHECK_THROWS_AS(T.power_apply(-1, unit(3, 1)), Error);
  }

  TEST_CASE("power_apply composes") {
    for (const auto& [name, op] : zoo()) {
      CAPTURE(name);
      const auto x = random_vector(6, 21);
      const ComplexVector a = op.power_apply(7, x);
      const ComplexVector b = op.power_apply(3, op.power_apply(4, x));
      CHECK((a - b).norm() <= 1e-10 * std::max(1.0, a.norm()));
    }
  }

  TEST_CASE("linearity and adjoint consistency on random probes") {
    for (const auto& [name, op] : zoo()) {
      CAPTURE(name);
      for (int t = 0; t < 100; ++t) {
        const int n = 6;
        const auto x = random_vector(n, 1000 + t);
        const auto y = random_vector(n, 2000 + t);
        const Complex a(0.3, -1.2), b(-0.7, 0.4);
        const ComplexVector lhs = op.apply(a * x + b * y);
        const ComplexVector rhs = a * op.apply(x) + b * op.apply(y);
        CHECK((lhs - rhs).norm() <= 1e-12 * std::max(1.0, rhs.norm()));

        const Complex ax_y = op.apply(x).dot(y);  // <y, Ax> conjugated consistently below
        const Complex x_aty = x.dot(op.adjoint_apply(y, n));
        CHECK(std::abs(ax_y - x_aty) <= 1e-10 * std::max(1.0, std::abs(ax_y)));
      }
    }
  }

  TEST_CASE("functional adjoint") {
    const auto S = LinearOperator::functional(DiagonalSymbol::inv_j_pow(1.0));
    const auto x = random_vector(8, 4);
    ComplexVector y(1);
    y(0) = Complex(0.5, 2.0);
    const Complex lhs = S.apply(x).dot(y);
    const Complex rhs = x.dot(S.adjoint_apply(y, 8));
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(lhs));
  }

  TEST_CASE("operator norm examples") {
    CHECK(operator_norm(LinearOperator::dense(DenseMatrix::Zero(3, 3))).value == 0.0);
    CHECK(operator_norm(LinearOperator::diagonal(DiagonalSymbol::constant(0.0))).value == 0.0);
    CHECK(operator_norm(LinearOperator::dense(mat({{0, 2}, {0, 0}}))).value == doctest::Approx(2.0).epsilon(1e-14));

    // sup_j j^{-1/2} (1 - 1/j)^4 against the calculus bound and a brute-force sup.
    const auto T = LinearOperator::diagonal(DiagonalSymbol::one_minus_inv_j());
    const auto S = LinearOperator::diagonal(DiagonalSymbol::inv_j_pow(0.5));
    const NormResult r = composed_norm(nullptr, T, ScalarMap::pow(4), &S);
    double brute = 0.0;
    for (int j = 1; j <= 1000000; ++j) brute = std::max(brute, std::pow(1.0 - 1.0 / j, 4) / std::sqrt(j));
    CHECK(r.value == doctest::Approx(brute).epsilon(1e-12));
    const double bound = std::sqrt(0.5 / 4.5) * std::pow(1.0 - 0.5 / 4.5, 4);
    CHECK(bound == doctest::Approx(4096.0 / 19683.0).epsilon(1e-14));
    // The continuous maximiser j = 9 is an integer, so the sup equals the bound.
    CHECK(r.value <= bound * (1 + 1e-14));
    CHECK(r.argmax == 9);
  }

  TEST_CASE("diagonal norm equals the sup of the symbol") {
    const auto T = LinearOperator::diagonal(DiagonalSymbol::stolz_curve(0.5));
    const NormResult r = operator_norm(T);
    double brute = 0.0;
    for (std::uint64_t j = 1; j <= 1000000; ++j) brute = std::max(brute, std::abs(T.symbol().value_at(j)));
    CHECK(brute <= r.value + r.error);
    CHECK(r.value + r.error <= 1.0 + 1e-15);
    CHECK(r.value >= brute - 1e-6);

    const auto P = LinearOperator::diagonal(DiagonalSymbol::one_minus_inv_j());
    const auto Pn = composed_norm(nullptr, P, ScalarMap{50, 1, {}, 0}, nullptr);
    double bn = 0.0;
    for (int j = 1; j <= 1000000; ++j) bn = std::max(bn, std::pow(1.0 - 1.0 / j, 50) / j);
    CHECK(std::abs(Pn.value - bn) <= Pn.error + 1e-15);
  }

  TEST_CASE("diagonal spectrum is the closure of the symbol values") {
    const auto T = LinearOperator::diagonal(DiagonalSymbol::explicit_values({0.5, {0.0, 0.25}, -1.0}));
    const auto pts = T.spectrum_points();
    CHECK(pts.size() >= 3);
    for (Complex z : {Complex(0.5), Complex(0.0, 0.25), Complex(-1.0)}) {
      bool found = false;
      for (Complex p : pts) found = found || std::abs(p - z) < 1e-15;
      CHECK(found);
    }
    const auto U = LinearOperator::diagonal(DiagonalSymbol::one_minus_inv_j());
    bool has_limit = false;
    for (Complex p : U.spectrum_points(1000)) has_limit = has_limit || std::abs(p - 1.0) < 1e-15;
    CHECK(has_limit);
  }

  TEST_CASE("symbol tail bounds dominate brute-force sups") {
    for (const auto& s : {DiagonalSymbol::one_minus_inv_j(), DiagonalSymbol::inv_j_pow(0.5), DiagonalSymbol::stolz_curve(0.5),
                          DiagonalSymbol::one_minus_inv_sqrt_j(), DiagonalSymbol::inv_j_log(1.0)}) {
      CAPTURE(s.describe());
      for (std::uint64_t J : {10u, 1000u, 20000u}) {
        const TailEnclosure t = s.tail_enclosure(J);
        double brute = 0.0;
        for (std::uint64_t j = J + 1; j <= 10 * J; ++j) {
          brute = std::max(brute, std::abs(s.value_at(j)));
          CHECK(std::abs(s.value_at(j) - t.center) <= t.radius + 1e-15);
        }
        CHECK(brute <= t.max_modulus + 1e-15);
      }
    }
  }

  TEST_CASE("symbols declaring r(T) <= 1 stay in the unit disc") {
    for (const auto& s : {DiagonalSymbol::one_minus_inv_j(), DiagonalSymbol::stolz_curve(0.25), DiagonalSymbol::one_minus_inv_sqrt_j()}) {
      for (std::uint64_t j = 1; j <= 100000; ++j) CHECK_MESSAGE(std::abs(s.value_at(j)) <= 1.0 + 1e-15, j);
    }
  }

  TEST_CASE("sampled-data operator") {
    const DenseMatrix z = DenseMatrix::Zero(2, 2);
    const auto I = sampled_data_operator(z, z, random_matrix(2, 1), 1.0);
    CHECK(max_abs(I.to_dense() - DenseMatrix::Identity(2, 2)) < 1e-15);

    const DenseMatrix one = DenseMatrix::Identity(1, 1);
    const auto three = sampled_data_operator(DenseMatrix::Zero(1, 1), one, one, 2.0);
    CHECK(std::abs(three.to_dense()(0, 0) - 3.0) < 1e-13);

    const auto decay = sampled_data_operator(-one, one, DenseMatrix::Zero(1, 1), 1.0);
    CHECK(std::abs(decay.to_dense()(0, 0) - std::exp(-1.0)) < 1e-15);

    CHECK_THROWS_AS(sampled_data_operator(one, one, one, 0.0), Error);

    // e^{A tau} + int_0^tau e^{As} ds B F against a fine Simpson rule.
    DenseMatrix A(2, 2), B(2, 1), F(1, 2);
    A << 0.0, 1.0, -1.0, -1.0;
    B << 0.0, 1.0;
    F << -0.5, -0.5;
    const double tau = 0.5;
    const int steps = 2000;
    DenseMatrix integral = DenseMatrix::Zero(2, 2);
    for (int i = 0; i <= steps; ++i) {
      const double w = (i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      integral += w * matrix_exponential(A * (tau * i / steps));
    }
    integral *= tau / steps / 3.0;
    const DenseMatrix expected = matrix_exponential(A * tau) + integral * B * F;
    CHECK(max_abs(sampled_data_operator(A, B, F, tau).to_dense() - expected) < 1e-10);
  }

  TEST_CASE("matrix exponential of a nilpotent block") {
    const DenseMatrix N = mat({{0, 3}, {0, 0}});
    const DenseMatrix e = matrix_exponential(N);
    CHECK(max_abs(e - mat({{1, 3}, {0, 1}})) < 1e-14);
  }

  TEST_CASE("vector norms") {
    const auto x = vec({3.0, {0.0, -4.0}});
    CHECK(vector_norm(x) == doctest::Approx(5.0));
    CHECK(vector_norm(x, 1.0) == doctest::Approx(7.0));
    CHECK(vector_norm(x, kSupNorm) == doctest::Approx(4.0));
    CHECK(conjugate_exponent(2.0) == doctest::Approx(2.0));
    CHECK(conjugate_exponent(1.0) == kSupNorm);
  }
}
