#include <doctest.h>

#include <cmath>

#include "semidecay/rvfunctions.hpp"
#include "semidecay/types.hpp"

using namespace semidecay;

TEST_SUITE("rvfunctions") {
  TEST_CASE("power functions have constant phi") {
    for (double a : {0.0, 0.5, 1.0, 2.5}) {
      CAPTURE(a);
      const RVFunction f = RVFunction::power(a);
      for (double t : {1.0, 7.0, 1e4}) CHECK(f.phi(t) == doctest::Approx(a).epsilon(1e-12));
      CHECK(f(4.0) == doctest::Approx(std::pow(4.0, a)));
      const BrvReport rep = check_brv(f);
      CHECK(rep.pass);
      CHECK(rep.monotone);
    }
  }

  TEST_CASE("check_brv flags an index below the sampled phi") {
    const BrvReport rep = check_brv(RVFunction::power(1.0), 1e8, 1.05, 0.5);
    CHECK_FALSE(rep.pass);
    CHECK(rep.max_phi == doctest::Approx(1.0));
  }

  TEST_CASE("log index") {
    const double a = log_index();
    // sup of t / ((e + t) log(e + t)) lies strictly inside (0, 1/e]
    CHECK(a > 0.2);
    CHECK(a < 1.0 / kEuler + 1e-12);
    const RVFunction f = RVFunction::log();
    CHECK(f.alpha() == doctest::Approx(a));
    double brute = 0.0;
    for (double t = 0.01; t < 1e6; t *= 1.001) brute = std::max(brute, f.phi(t));
    CHECK(brute <= a + 1e-12);
    CHECK(brute >= a - 1e-6);
  }

  TEST_CASE("power bound and doubling") {
    for (const char* spec : {"pow:0.5", "pow:1", "pow_log:0.5,1", "log", "const"}) {
      CAPTURE(spec);
      const RVFunction f = RVFunction::parse(spec);
      const PowerBound b = power_bound(f);
      CHECK(b.verified);
      CHECK(b.doubling_ok);
      CHECK(b.doubling_ratio <= std::pow(2.0, b.alpha) * (1 + 1e-12));
    }
  }

  TEST_CASE("gamma power scales the index") {
    const RVFunction f = gamma_power(RVFunction::power_log(0.5, 1.0), 2.0);
    CHECK(f.alpha() == doctest::Approx(2.0 * RVFunction::power_log(0.5, 1.0).alpha()));
    CHECK(f(10.0) == doctest::Approx(std::pow(RVFunction::power_log(0.5, 1.0)(10.0), 2.0)).epsilon(1e-12));
    CHECK(check_brv(f).pass);
    CHECK_THROWS_AS(gamma_power(f, 0.0), Error);
  }

  TEST_CASE("representation formula") {
    for (const char* spec : {"pow:0.5", "pow_log:0.5,1", "log"}) {
      CAPTURE(spec);
      const RVFunction f = RVFunction::parse(spec);
      for (double t : {2.0, 50.0, 1e5}) CHECK(representation_value(f, t) == doctest::Approx(f(t)).epsilon(1e-6));
    }
  }

  TEST_CASE("h_alpha") {
    const double s = std::exp(-8.0);
    CHECK(h_alpha(0.5, s) == doctest::Approx(std::sqrt(8.0)));
    CHECK(h_alpha(1.0, s) == doctest::Approx(std::log(8.0)));
    CHECK(h_alpha(2.0, s) == 1.0);
    CHECK_THROWS_AS(h_alpha(0.5, 0.5), Error);
  }

  TEST_CASE("cn_sum_bound with the geometric series") {
    // c(n) = 1, f = 1, beta = 0: (r - 1) sum r^{-n} = r exactly.
    const std::vector<double> radii{1.5, 1.1, 1.01, 1.001};
    const SumBoundReport rep =
        cn_sum_bound_check(RVFunction::constant(), 0.0, [](long long) { return 1.0; }, radii);
    REQUIRE(rep.samples.size() == radii.size());
    for (const auto& s : rep.samples) CHECK(s.ratio == doctest::Approx(s.r).epsilon(1e-12));
    CHECK(rep.pass);
  }

  TEST_CASE("cn_sum_bound default sequence stays bounded") {
    std::vector<double> radii;
    for (int j = 1; j <= 12; ++j) radii.push_back(1.0 + std::ldexp(1.0, -j));
    const SumBoundReport rep = cn_sum_bound_check(RVFunction::power(0.5), 0.0, nullptr, radii);
    CHECK(rep.pass);
    CHECK(rep.trend != Trend::Growing);
    CHECK_THROWS_AS(cn_sum_bound_check(RVFunction::power(1.0), -0.5, nullptr, radii), Error);
  }

  TEST_CASE("int_bound stays under Gamma(beta + 1) + 1/(1 - delta)") {
    std::vector<double> s;
    for (int i = 1; i <= 20; ++i) s.push_back(std::ldexp(1.0, -i));
    const IntBoundReport rep = int_bound_check(RVFunction::power(0.5), 0.0, s);
    CHECK(rep.pass);
    CHECK(rep.bound == doctest::Approx(3.0));
    CHECK(rep.sup_ratio <= 3.0);
    // f = t^{1/2}, t0 = 1: the rescaled integral is Gamma(1/2) minus int_0^s tau^{-1/2} e^{-tau}.
    const double sl = rep.samples.back().s;
    const double cut = 2.0 * std::sqrt(sl) * (1.0 - sl / 3.0);
    CHECK(rep.samples.back().ratio == doctest::Approx(std::tgamma(0.5) - cut).epsilon(1e-8));
  }

  TEST_CASE("square staircase") {
    const RVFunction f = RVFunction::square_staircase();
    CHECK(f.alpha() == 1.0);
    for (int n = 1; n <= 5; ++n) {
      CAPTURE(n);
      // no growth across the gap [n^2, (n+1)^2 - 1)
      const double t = std::ldexp(1.0, n * n);
      CHECK(std::exp(f.log_value(t * std::ldexp(1.0, 2 * n)) - f.log_value(t)) == doctest::Approx(1.0));
      // full doubling across the stripe [(n+1)^2 - 1, (n+1)^2)
      const double u = std::ldexp(1.0, (n + 1) * (n + 1) - 1);
      CHECK(std::exp(f.log_value(2.0 * u) - f.log_value(u)) == doctest::Approx(2.0));
    }
    const BrvReport rep = check_brv(f, 1e12);
    CHECK(rep.pass);
    CHECK(rep.min_phi == 0.0);
    CHECK(rep.max_phi == 1.0);

    for (const char* name : {"staircase", "paper_example_2_2"}) {
      CAPTURE(name);
      const RVFunction g = RVFunction::parse(name);
      CHECK(g.name() == "staircase");
      CHECK(g.log_value(1e9) == f.log_value(1e9));
    }
    CHECK_THROWS_AS(RVFunction::parse("staircase:1"), Error);
  }

  TEST_CASE("parse errors") {
    CHECK_THROWS_AS(RVFunction::parse("pow"), Error);
    CHECK_THROWS_AS(RVFunction::parse("nope:1"), Error);
    CHECK_THROWS_AS(RVFunction::power(-1.0), Error);
  }
}
