#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "semidecay/perturbation.hpp"

using namespace semidecay;
using namespace testing_support;

namespace {

SpectralGrid grid(int j_max = 10) {
  SpectralGrid g;
  g.j_min = 1;
  g.j_max = j_max;
  g.n_theta = 64;
  return g;
}

LinearOperator scalar(double v) { return LinearOperator::dense(DenseMatrix::Constant(1, 1, v)); }

}  // namespace

TEST_SUITE("perturbation") {
  TEST_CASE("SMW agrees with a direct solve") {
    for (int seed = 1; seed <= 10; ++seed) {
      const DenseMatrix A = with_norm(random_matrix(5, seed), 0.9);
      DenseMatrix B = random_matrix(5, 50 + seed).leftCols(2) * 0.1;
      DenseMatrix C = random_matrix(5, 90 + seed).topRows(2) * 0.1;
      const ComplexVector x = random_vector(5, 130 + seed);
      const Complex lambda = std::polar(1.7, 0.4 * seed);
      const SmwResult r = smw_resolvent(LinearOperator::dense(A), LinearOperator::dense(B), LinearOperator::dense(C), lambda, x);
      const DenseMatrix M = lambda * DenseMatrix::Identity(5, 5) - A - B * C;
      const ComplexVector direct = M.partialPivLu().solve(x);
      CHECK((r.value - direct).norm() <= 1e-10 * direct.norm());
      CHECK(r.identity_residual < 1e-10);
      CHECK(r.inner_residual < 1e-10);
    }
  }

  TEST_CASE("SMW reports lambda in the spectrum of the perturbed operator") {
    // A + BC = 1 while A = 1/2: at lambda = 1, C R B = 1.
    try {
      smw_resolvent(scalar(0.5), scalar(1.0), scalar(0.5), 1.0, ComplexVector::Ones(1));
      FAIL("expected a hypothesis error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Hypothesis);
    }
  }

  TEST_CASE("SMW argument checks") {
    const auto D = LinearOperator::diagonal(DiagonalSymbol::one_minus_inv_j());
    CHECK_THROWS_AS(smw_resolvent(D, scalar(1.0), scalar(1.0), 2.0, ComplexVector::Ones(1)), Error);
    const auto A = LinearOperator::dense(DenseMatrix::Zero(2, 2));
    CHECK_THROWS_AS(smw_resolvent(A, scalar(1.0), scalar(1.0), 2.0, ComplexVector::Ones(2)), Error);
  }

  TEST_CASE("delta estimate on scalars") {
    // |d| / (r - |t|) with t, d >= 0 peaks at theta = 0 on the innermost circle.
    const DeltaEstimate d = estimate_delta_hat(scalar(0.5), scalar(0.25), grid(12));
    CHECK(d.value == doctest::Approx(0.25 / (1.0 + std::ldexp(1.0, -12) - 0.5)).epsilon(1e-9));
    CHECK(d.theta == doctest::Approx(0.0));
  }

  TEST_CASE("small diagonal perturbation keeps the decay rate") {
    const auto T = LinearOperator::diagonal(DiagonalSymbol::one_minus_inv_j());
    const PerturbationSetup setup{T, LinearOperator::diagonal(DiagonalSymbol::parse("affine_pow:0,-0.001,1")),
                                  T.identity_minus()};
    const RobustnessReport rep = perturbation_robustness(setup, RVFunction::power(1.0), 2, grid(), 2048);
    CHECK(rep.hypothesis_ok);
    CHECK(rep.delta.value < 0.01);
    CHECK(rep.blowup == doctest::Approx(std::pow(1.0 - rep.delta.value, -2)));
    CHECK(rep.exponent_ok);
    CHECK(rep.exponent_gap < 1e-3);
    CHECK(rep.spot_ok);
    CHECK(rep.pass);
  }

  TEST_CASE("zero perturbation") {
    const auto T = LinearOperator::diagonal(DiagonalSymbol::one_minus_inv_j());
    const PerturbationSetup setup{T, LinearOperator::diagonal(DiagonalSymbol::constant(0.0)), T.identity_minus()};
    const RobustnessReport rep = perturbation_robustness(setup, RVFunction::power(1.0), 2, grid(), 1024);
    CHECK(rep.zero_perturbation);
    CHECK(rep.delta.value == 0.0);
    CHECK(rep.exponent_gap == 0.0);
    CHECK(rep.pass);
  }

  TEST_CASE("delta at or above one stops the analysis") {
    const PerturbationSetup setup{scalar(0.5), scalar(0.6), std::nullopt};
    const RobustnessReport rep = perturbation_robustness(setup, RVFunction::power(1.0), 2, grid(), 256);
    CHECK(rep.delta.value > 1.0);
    CHECK_FALSE(rep.hypothesis_ok);
    CHECK_FALSE(rep.pass);
  }

  TEST_CASE("perturbation towards the unit circle loses geometric decay") {
    // T + D = 0.995: powers decay geometrically but not at the rate of T.
    const PerturbationSetup setup{scalar(0.5), scalar(0.495), std::nullopt};
    const RobustnessReport rep = perturbation_robustness(setup, RVFunction::power(1.0), 2, grid(), 1024);
    CHECK(rep.hypothesis_ok);
    CHECK_FALSE(rep.pass);
  }

  TEST_CASE("commutation is part of the hypothesis") {
    DenseMatrix N(2, 2);
    N << 0.0, 0.1, 0.0, 0.0;
    const PerturbationSetup commuting{LinearOperator::dense(DenseMatrix::Identity(2, 2) * 0.5), LinearOperator::dense(N),
                                      std::nullopt};
    const RobustnessReport a = perturbation_robustness(commuting, RVFunction::power(1.0), 2, grid(), 256);
    REQUIRE(a.commutator);
    CHECK(*a.commutator < 1e-14);

    DenseMatrix T(2, 2);
    T << 0.5, 0.0, 0.0, 0.2;
    const PerturbationSetup other{LinearOperator::dense(T), LinearOperator::dense(N), std::nullopt};
    const RobustnessReport b = perturbation_robustness(other, RVFunction::power(1.0), 2, grid(), 256);
    REQUIRE(b.commutator);
    CHECK(*b.commutator > 1e-3);
    CHECK_FALSE(b.hypothesis_ok);
    CHECK_FALSE(b.pass);
  }
}
