#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "semidecay/conditions.hpp"

using namespace semidecay;
using namespace testing_support;

namespace {

SpectralGrid grid(int j_max = 10, int n_theta = 128) {
  SpectralGrid g;
  g.j_min = 1;
  g.j_max = j_max;
  g.n_theta = n_theta;
  return g;
}

LinearOperator unitary_diag() {
  DenseMatrix D = DenseMatrix::Zero(3, 3);
  D(0, 0) = 1.0;
  D(1, 1) = Complex(0.0, 1.0);
  D(2, 2) = -1.0;
  return LinearOperator::dense(D);
}

LinearOperator jordan() {
  DenseMatrix J(2, 2);
  J << 1.0, 1.0, 0.0, 1.0;
  return LinearOperator::dense(J);
}

LinearOperator harmonic() { return LinearOperator::diagonal(DiagonalSymbol::one_minus_inv_j()); }

}  // namespace

TEST_SUITE("conditions") {
  TEST_CASE("Kreiss constant of a unitary diagonal is 1") {
    const ConditionReport rep = kreiss_constant(unitary_diag(), grid(), 3);
    CHECK(rep.constant == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(rep.constant <= 1.0 + 1e-9);
    CHECK(rep.trend == Trend::Stable);
    REQUIRE(rep.rows.size() == 3);
    for (const auto& row : rep.rows) CHECK(row.constant == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(rep.metrics.at("strong_kreiss") == doctest::Approx(1.0).epsilon(1e-9));
  }

  TEST_CASE("Kreiss witness reproduces the constant") {
    const auto T = LinearOperator::dense(with_norm(random_matrix(4, 5), 1.0));
    const ConditionReport rep = kreiss_constant(T, grid(8));
    REQUIRE_FALSE(rep.witnesses.empty());
    const Witness w = rep.witnesses.front();
    const double v = (w.r - 1.0) * composed_norm(nullptr, T, ScalarMap::resolvent(std::polar(w.r, w.theta), 1), nullptr).value;
    CHECK(v == doctest::Approx(w.value).epsilon(1e-9));
    CHECK(rep.constant >= w.value - 1e-12);
  }

  TEST_CASE("Kreiss on the Jordan block grows") {
    CHECK(kreiss_constant(jordan(), grid(14)).trend == Trend::Growing);
  }

  TEST_CASE("Kreiss of the zero matrix") {
    const ConditionReport rep = kreiss_constant(LinearOperator::dense(DenseMatrix::Zero(2, 2)), grid());
    // (r - 1) / r, largest at the outermost radius 1.5
    CHECK(rep.constant < 1.0);
    CHECK(rep.constant == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  }

  TEST_CASE("Kreiss bounds normal resolvents by one over the distance") {
    const ConditionReport rep = kreiss_constant(harmonic(), grid());
    CHECK(rep.constant <= 1.0 + 1e-12);
    CHECK(rep.constant >= 0.99);
  }

  TEST_CASE("spectral radius above one is rejected") {
    const auto T = LinearOperator::dense(DenseMatrix::Identity(2, 2) * 1.01);
    try {
      require_spectral_radius_at_most_one(T);
      FAIL("expected a hypothesis error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Hypothesis);
    }
    CHECK_NOTHROW(require_spectral_radius_at_most_one(unitary_diag()));
  }

  TEST_CASE("Ritt constants") {
    const ConditionReport h = ritt_constant(harmonic(), grid(12), 1024);
    CHECK(h.trend != Trend::Growing);
    CHECK(h.constant >= 1.0);
    CHECK(h.constant < 3.0);
    // ||T^n (I - T)|| ~ 1/(e n)
    CHECK(h.metrics.at("complement_decay_exponent") == doctest::Approx(-1.0).epsilon(1e-2));

    CHECK(ritt_constant(jordan(), grid(12), 256).trend == Trend::Growing);
    DenseMatrix m1 = DenseMatrix::Constant(1, 1, -1.0);
    CHECK(ritt_constant(LinearOperator::dense(m1), grid(12), 256).trend == Trend::Growing);
  }

  TEST_CASE("Ritt power-resolvent and integral variants agree on the harmonic diagonal") {
    CHECK(ritt_power_resolvent_check(harmonic(), 2, grid(12)).trend != Trend::Growing);
    CHECK(ritt_integral_check(harmonic(), 1, grid(12), {}).trend != Trend::Growing);
  }

  TEST_CASE("Stolz domain points") {
    const StolzDomain d{1.0, 2.0};
    CHECK(d.contains(0.5));
    CHECK(d.contains(1.0));
    CHECK_FALSE(d.contains(Complex(0.0, 0.9)));
    CHECK_FALSE(d.contains(1.5));
    CHECK(d.ratio(1.0) == 0.0);
    CHECK(d.ratio(0.5) == doctest::Approx(1.0));
    CHECK(std::isinf(d.ratio(2.0)));
    CHECK_THROWS_AS((StolzDomain{0.5, 2.0}.validate()), Error);
    CHECK_THROWS_AS((StolzDomain{1.0, 0.5}.validate()), Error);
  }

  TEST_CASE("Stolz containment") {
    const StolzReport a = stolz_containment(harmonic(), {1.0, 2.0});
    CHECK(a.member);
    CHECK(a.max_ratio == doctest::Approx(1.0));

    const StolzReport b = stolz_containment(unitary_diag(), {1.0, 2.0});
    CHECK_FALSE(b.member);
    CHECK_FALSE(b.violators.empty());

    // |1 - d_j| ~ j^{-1/2} against 1 - |d_j| = 1/j
    const auto curve = LinearOperator::diagonal(DiagonalSymbol::stolz_curve(0.5));
    CHECK_FALSE(stolz_containment(curve, {1.0, 2.0}).member);
    CHECK(stolz_containment(curve, {2.0, 2.0}).member);
  }

  TEST_CASE("quasi-multiplicative bound") {
    CHECK(quasi_mult_bound(1, 1.0) == doctest::Approx(0.25));
    for (long long n : {1LL, 5LL, 100LL}) {
      for (double a : {0.25, 0.5, 0.9}) {
        double brute = 0.0;
        for (int i = 1; i < 200000; ++i) {
          const double s = i / 200000.0;
          brute = std::max(brute, std::pow(s, static_cast<double>(n)) * std::pow(1.0 - s, a));
        }
        CHECK(quasi_mult_bound(n, a) >= brute);
        CHECK(quasi_mult_bound(n, a) == doctest::Approx(brute).epsilon(1e-6));
      }
    }
    CHECK_THROWS_AS(quasi_mult_bound(0, 0.5), Error);
  }

  TEST_CASE("quasi-multiplicative decay on the harmonic diagonal") {
    const QuasiMultReport rep = quasi_mult_decay_check(harmonic(), 0.5, 1024);
    CHECK(rep.containment.member);
    CHECK(rep.pass);
    CHECK(rep.c >= 2.0);
    CHECK_THROWS_AS(quasi_mult_decay_check(jordan(), 0.5, 1024), Error);
  }

  TEST_CASE("integral condition on a unitary matrix") {
    // (r - 1) * 2 * 2 pi / (r^2 - 1) per unit vector
    const ConditionReport rep = gsf_integral_check(unitary_diag(), grid(8), {}, 256);
    REQUIRE(rep.rows.size() == 1);
    REQUIRE(rep.rows[0].values.size() == rep.radii.size());
    for (std::size_t i = 0; i < rep.radii.size(); ++i) {
      CHECK(rep.rows[0].values[i] == doctest::Approx(4.0 * kPi / (rep.radii[i] + 1.0)).epsilon(1e-9));
    }
    CHECK(rep.trend == Trend::Stable);
    CHECK(gsf_integral_check(jordan(), grid(12), {}, 256).trend == Trend::Growing);
  }

  TEST_CASE("resolvent-growth bound on the tangential curve") {
    const auto curve = LinearOperator::diagonal(DiagonalSymbol::stolz_curve(0.5));
    const ConditionReport rep = rk_bounded_check(curve, 1.0, 0.5, grid(10, 64));
    CHECK(rep.trend != Trend::Growing);
    CHECK(std::isfinite(rep.constant));
  }
}
