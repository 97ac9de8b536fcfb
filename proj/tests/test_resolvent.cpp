#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "semidecay/resolvent.hpp"

using namespace semidecay;
using namespace testing_support;

namespace {

LinearOperator example1_T() { return LinearOperator::diagonal(DiagonalSymbol::one_minus_inv_j()); }
LinearOperator example1_S() { return LinearOperator::diagonal(DiagonalSymbol::inv_j_pow(0.5)); }

}  // namespace

TEST_SUITE("resolvent") {
  TEST_CASE("resolvent_apply on small examples") {
    const auto x = random_vector(3, 1);
    const auto Z = LinearOperator::dense(DenseMatrix::Zero(3, 3));
    CHECK((resolvent_apply(Z, 2.0, 1, x) - x / 2.0).norm() < 1e-15);

    const auto T = example1_T();
    const ComplexVector y = resolvent_apply(T, 1.5, 2, unit(3, 1));
    // (1.5 - 0.5)^{-2} = 1
    CHECK((y - unit(3, 1)).norm() < 1e-14);

    CHECK_THROWS_AS(resolvent_apply(T, 1.5, 0, unit(3, 1)), Error);
  }

  TEST_CASE("resolvent identity R(a) - R(b) = (b - a) R(a) R(b)") {
    const auto T = LinearOperator::dense(with_norm(random_matrix(5, 7), 1.0));
    const auto x = random_vector(5, 8);
    for (int t = 0; t < 20; ++t) {
      const Complex a = std::polar(1.1 + 0.1 * t, 0.3 * t);
      const Complex b = std::polar(2.0 + 0.05 * t, -0.7 * t);
      const ComplexVector lhs = resolvent_apply(T, a, 1, x) - resolvent_apply(T, b, 1, x);
      const ComplexVector rhs = (b - a) * resolvent_apply(T, a, 1, resolvent_apply(T, b, 1, x));
      CHECK((lhs - rhs).norm() <= 1e-11 * std::max(1.0, lhs.norm()));
    }
  }

  TEST_CASE("reconstruct_power recovers T^n") {
    const DenseMatrix half = DenseMatrix::Constant(1, 1, 0.5);
    const DenseMatrix p = reconstruct_power(LinearOperator::dense(half), 3, 1, 2.0, 256);
    CHECK(std::abs(p(0, 0) - 0.125) < 1e-12);

    for (int seed = 1; seed <= 5; ++seed) {
      const DenseMatrix A = with_spectral_radius(random_matrix(4, 100 + seed), 0.9);
      const auto T = LinearOperator::dense(A);
      DenseMatrix An = DenseMatrix::Identity(4, 4);
      for (int i = 0; i < 6; ++i) An = An * A;
      for (int k : {1, 2, 3}) {
        CAPTURE(k);
        const DenseMatrix rec = reconstruct_power(T, 6, k, 1.5, 512);
        CHECK(max_abs(rec - An) <= 1e-8 * std::max(1.0, max_abs(An)));
      }
    }
  }

  TEST_CASE("reconstruct_power does not depend on the radius") {
    const auto T = LinearOperator::dense(with_norm(random_matrix(3, 31), 0.95));
    const DenseMatrix a = reconstruct_power(T, 5, 2, 1.2, 1024);
    const DenseMatrix b = reconstruct_power(T, 5, 2, 3.0, 1024);
    CHECK(max_abs(a - b) < 1e-9);
  }

  TEST_CASE("reconstruct_power rejects radii at or inside the unit circle") {
    const auto T = LinearOperator::dense(DenseMatrix::Identity(2, 2) * 0.5);
    CHECK_THROWS_AS(reconstruct_power(T, 2, 1, 1.0, 64), Error);
    try {
      reconstruct_power(T, 2, 1, 1.0, 64);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Domain);
    }
  }

  TEST_CASE("parseval closed forms") {
    const auto x = random_vector(3, 4);
    const auto Z = LinearOperator::dense(DenseMatrix::Zero(3, 3));
    const ParsevalReport z = parseval_check(Z, nullptr, 1, 2.0, x, 512, 64);
    CHECK(z.lhs == doctest::Approx(x.squaredNorm() / 4.0).epsilon(1e-12));
    CHECK(z.rhs == doctest::Approx(x.squaredNorm() / 4.0).epsilon(1e-12));

    // sum_n 0.25^n / 4^{n+1} = 1/4 * 1/(1 - 1/16) = 4/15
    const auto H = LinearOperator::dense(DenseMatrix::Constant(1, 1, 0.5));
    const ParsevalReport h = parseval_check(H, nullptr, 1, 2.0, ComplexVector::Ones(1), 1024, 200);
    CHECK(h.lhs == doctest::Approx(4.0 / 15.0).epsilon(1e-12));
    CHECK(h.rhs == doctest::Approx(4.0 / 15.0).epsilon(1e-12));
    CHECK(h.tail_bound < 1e-12);
  }

  TEST_CASE("parseval on random matrices") {
    for (int seed = 1; seed <= 5; ++seed) {
      const auto T = LinearOperator::dense(with_spectral_radius(random_matrix(5, 200 + seed), 0.8));
      const auto S = LinearOperator::dense(random_matrix(5, 300 + seed));
      const auto x = random_vector(5, 400 + seed);
      for (int k : {1, 2}) {
        const ParsevalReport rep = parseval_check(T, &S, k, 2.0, x, 4096, 4096);
        CHECK(rep.residual < 1e-8);
        CHECK(rep.tail_bound < 1e-12);
      }
    }
  }

  TEST_CASE("example 1 resolvent growth") {
    const auto T = example1_T();
    const auto S = example1_S();
    // sup_j j^{-1/2} / (r - 1 + 1/j) is attained at j = 1/(r-1).
    const NormResult at = composed_norm(nullptr, T, ScalarMap::resolvent(1.01, 1), &S);
    CHECK(std::abs(at.value - 5.0) < 1e-9);

    SpectralGrid grid;
    grid.j_min = 1;
    grid.j_max = 14;
    grid.n_theta = 64;
    const GrowthProfile prof = resolvent_sweep(T, &S, 1, grid);
    REQUIRE(prof.samples.size() == 14);
    for (const auto& s : prof.samples) {
      const double scaled = std::sqrt(s.r - 1.0) * s.sup_norm;
      CHECK(scaled >= 0.45);
      CHECK(scaled <= 0.5 + 1e-12);
    }
  }

  TEST_CASE("circle sup of a normal matrix is one over the distance") {
    DenseMatrix D = DenseMatrix::Zero(3, 3);
    D(0, 0) = 1.0;
    D(1, 1) = Complex(0.0, 1.0);
    D(2, 2) = -1.0;
    const auto T = LinearOperator::dense(D);
    SpectralGrid grid;
    grid.j_min = 2;
    grid.j_max = 5;
    grid.n_theta = 128;
    const GrowthProfile prof = resolvent_sweep(T, nullptr, 1, grid);
    for (const auto& s : prof.samples) CHECK(s.sup_norm == doctest::Approx(1.0 / (s.r - 1.0)).epsilon(1e-10));
  }

  TEST_CASE("spectral grid parsing and validation") {
    const SpectralGrid g = SpectralGrid::parse("2:6:128");
    CHECK(g.j_min == 2);
    CHECK(g.j_max == 6);
    CHECK(g.n_theta == 128);
    const auto radii = g.radii();
    REQUIRE(radii.size() == 5);
    CHECK(radii.front() == 1.25);
    CHECK(radii.back() == 1.0 + 1.0 / 64.0);
    CHECK_THROWS_AS(SpectralGrid::parse("5:2"), Error);
    CHECK_THROWS_AS(SpectralGrid::parse("x"), Error);
  }

  TEST_CASE("scalar circle integral against quadrature") {
    const Complex d(0.3, 0.4);
    const double r = 1.5;
    for (CircleForm form : {CircleForm{0, 1}, CircleForm{1, 2}, CircleForm{0, 3}}) {
      const int n = 20000;
      double q = 0.0;
      for (int i = 0; i < n; ++i) {
        const Complex lam = std::polar(r, 2.0 * kPi * i / n);
        q += std::norm(std::pow(lam - 1.0, form.complement) * std::pow(lam - d, -form.resolvent_power));
      }
      q *= 2.0 * kPi / n;
      CHECK(scalar_circle_integral(d, r, form) == doctest::Approx(q).epsilon(1e-10));
    }
  }

  TEST_CASE("circle gram matches the scalar integral on diagonal matrices") {
    DenseMatrix D = DenseMatrix::Zero(2, 2);
    D(0, 0) = 0.5;
    D(1, 1) = Complex(-0.2, 0.6);
    const CircleForm form{1, 2};
    const DenseMatrix G = circle_gram(D, 1.3, form);
    CHECK(std::abs(G(0, 0).real() - scalar_circle_integral(0.5, 1.3, form)) < 1e-10);
    CHECK(std::abs(G(1, 1).real() - scalar_circle_integral(D(1, 1), 1.3, form)) < 1e-10);
    CHECK(std::abs(G(0, 1)) < 1e-10);
  }

  TEST_CASE("resolvent coefficient") {
    CHECK(resolvent_coefficient(5, 1) == 1.0);
    CHECK(resolvent_coefficient(5, 2) == 6.0);
    CHECK(resolvent_coefficient(4, 3) == 15.0);
  }
}
