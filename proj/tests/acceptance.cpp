// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "helpers.hpp"
#include "semidecay/asymptotics.hpp"
#include "semidecay/conditions.hpp"
#include "semidecay/perturbation.hpp"
#include "semidecay/resolvent.hpp"
#include "semidecay/rvfunctions.hpp"
#include "semidecay/spec_io.hpp"
#include "semidecay/summability.hpp"

using namespace semidecay;
using namespace testing_support;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  /// Records a failed sub-check; only the first few are kept in the detail.
  void require(bool ok, const std::string& what) {
    if (ok) return;
    if (pass || failures < 4) detail << " [" << what << "]";
    pass = false;
    ++failures;
  }
  int failures = 0;
};

OperatorBundle spec(const std::string& name) {
  return load_bundle(std::string(SEMIDECAY_OPERATORS_DIR) + "/" + name + ".json");
}

SpectralGrid grid(int j_min, int j_max, int n_theta) {
  SpectralGrid g;
  g.j_min = j_min;
  g.j_max = j_max;
  g.n_theta = n_theta;
  return g;
}

/// Random r(T) = 0.9 matrices shared by the first two criteria.
std::vector<DenseMatrix> contour_family() {
  std::vector<DenseMatrix> out;
  for (int s = 1; s <= 20; ++s) out.push_back(with_spectral_radius(random_matrix(4, 1000 + s), 0.9));
  return out;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

double rel_change(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

// 1
void power_reconstruction(Outcome& o) {
  double worst = 0.0;
  double worst_radius_gap = 0.0;
  for (const DenseMatrix& A : contour_family()) {
    const auto T = LinearOperator::dense(A);
    DenseMatrix An = DenseMatrix::Identity(4, 4);
    for (long long n = 0; n <= 20; ++n) {
      for (int k : {1, 2, 3}) {
        const DenseMatrix a = reconstruct_power(T, n, k, 1.1, 512);
        const DenseMatrix b = reconstruct_power(T, n, k, 1.3, 512);
        worst = std::max({worst, max_abs(a - An), max_abs(b - An)});
        worst_radius_gap = std::max(worst_radius_gap, max_abs(a - b));
      }
      An = An * A;
    }
  }
  o.require(worst <= 1e-8, "entry error " + fmt(worst));
  o.require(worst_radius_gap <= 1e-8, "radius gap " + fmt(worst_radius_gap));
  o.detail << " max entry error " << fmt(worst) << ", radius gap " << fmt(worst_radius_gap);
}

// 2
void parseval(Outcome& o) {
  // r = 1.01 keeps the 256-node aliasing error above roundoff, so the
  // refinement ratio is observable.
  const double r = 1.01;
  double worst_res = 0.0;
  double worst_tail = 0.0;
  double min_gain = std::numeric_limits<double>::infinity();
  int s = 0;
  for (const DenseMatrix& A : contour_family()) {
    const auto T = LinearOperator::dense(A);
    const ComplexVector x = random_vector(4, 2000 + ++s);
    for (int k : {1, 2, 3}) {
      const ParsevalReport full = parseval_check(T, nullptr, k, r, x, 4096, 4096);
      worst_res = std::max(worst_res, full.residual / std::max(1.0, full.lhs));
      worst_tail = std::max(worst_tail, full.tail_bound);
      const double r256 = parseval_check(T, nullptr, k, r, x, 256, 4096).residual;
      const double r512 = parseval_check(T, nullptr, k, r, x, 512, 4096).residual;
      min_gain = std::min(min_gain, r256 / std::max(r512, std::numeric_limits<double>::min()));
    }
  }
  o.require(worst_res < 1e-8, "residual " + fmt(worst_res));
  o.require(worst_tail < 1e-12, "tail " + fmt(worst_tail));
  o.require(min_gain >= 10.0, "refinement gain " + fmt(min_gain));
  o.detail << " residual " << fmt(worst_res) << ", tail " << fmt(worst_tail) << ", min 256->512 gain " << fmt(min_gain);
}

// 3
void example_one(Outcome& o) {
  const OperatorBundle b = spec("example1_pair");
  const Sandwich s{b.T, std::nullopt, *b.S};
  const DecayProfile prof = decay_profile(s, 1 << 14);
  int outside = 0;
  for (const auto& smp : prof.samples) {
    const double n = static_cast<double>(smp.n);
    const double scaled = std::sqrt(n) * smp.norm;
    const double lo = std::pow(1.0 - 1.0 / n, n);
    const double u = 0.5 / (n + 0.5);
    const double hi = std::sqrt(u) * std::pow(1.0 - u, n) * std::sqrt(n);
    if (scaled < lo * (1 - 1e-12) || scaled > hi * (1 + 1e-12)) ++outside;
  }
  o.require(outside == 0, std::to_string(outside) + " samples outside the bracket");
  o.require(prof.fit && std::abs(prof.fit->slope + 0.5) <= 0.02, "exponent");
  const double at = s.norm(ScalarMap::resolvent(1.01, 1)).value;
  o.require(std::abs(at - 5.0) <= 1e-9, "R(1.01) = " + fmt(at));
  double lo = 1e300, hi = 0.0;
  for (int j = 2; j <= 14; ++j) {
    const double r = 1.0 + std::ldexp(1.0, -j);
    const double v = std::sqrt(r - 1.0) * s.norm(ScalarMap::resolvent(r, 1)).value;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  o.require(lo >= 0.45 && hi <= 0.5 + 1e-9, "scaled resolvent in [" + fmt(lo) + ", " + fmt(hi) + "]");
  o.detail << " " << prof.samples.size() << " samples in bracket, exponent " << fmt(prof.fit ? prof.fit->slope : 0.0)
           << ", ||R(1.01)S|| = " << fmt(at) << ", sqrt(r-1)||RS|| in [" << fmt(lo) << ", " << fmt(hi) << "]";
}

// 4
void example_two(Outcome& o) {
  const OperatorBundle b = spec("example2_pair");
  const Sandwich s{b.T, *b.S1, std::nullopt};
  // I(n) = int_1^inf x^{-2} (1 - x^{-1/2})^{2n} dx = 2 int_0^1 y (1-y)^{2n} dy
  auto I = [](long long n) { return 1.0 / ((n + 1.0) * (2.0 * n + 1.0)); };
  double quad_err = 0.0;
  for (long long n : {1LL, 7LL, 100LL, 4096LL}) {
    const double q = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [n](double y) { return 2.0 * y * std::pow(1.0 - y, 2.0 * static_cast<double>(n)); }, 0.0, 1.0, 30, 1e-14);
    quad_err = std::max(quad_err, std::abs(q - I(n)) / I(n));
  }
  o.require(std::abs(I(1) - 1.0 / 6.0) < 1e-16, "I(1)");
  o.require(quad_err <= 1e-10, "quadrature " + fmt(quad_err));
  const DecayProfile prof = decay_profile(s, 1 << 14);
  int below = 0;
  for (const auto& smp : prof.samples) {
    if (smp.norm * smp.norm < 0.25 * I(smp.n)) ++below;
  }
  o.require(below == 0, std::to_string(below) + " samples below I(n)/4");
  o.require(prof.fit && std::abs(prof.fit->slope + 1.0) <= 0.05, "exponent");
  double lo = 1e300, hi = 0.0;
  for (int j = 4; j <= 14; ++j) {
    const double r = 1.0 + std::ldexp(1.0, -j);
    const double v = s.norm(ScalarMap::resolvent(r, 1)).value / std::sqrt(std::abs(std::log(r - 1.0)));
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  o.require(hi <= 2.0 * lo, "band " + fmt(hi / lo));
  o.detail << " exponent " << fmt(prof.fit ? prof.fit->slope : 0.0) << ", quadrature rel err " << fmt(quad_err)
           << ", resolvent band ratio " << fmt(hi / lo);
}

// 5
void example_three(Outcome& o) {
  const OperatorBundle b = spec("example3_shift");
  const Sandwich s{b.T, std::nullopt, *b.S};
  // ||R(r,T)S|| = sum_{n>=1} r^{-n}/n; truncated with the tail bound r^{-(N+1)} / ((N+1)(1 - 1/r)).
  auto oracle = [](double r, double* tail) {
    Accumulator acc;
    long long n = 1;
    double t = 0.0;
    for (;; ++n) {
      acc.add(std::exp(-static_cast<double>(n) * std::log(r)) / static_cast<double>(n));
      t = std::exp(-static_cast<double>(n + 1) * std::log(r)) / (static_cast<double>(n + 1) * (1.0 - 1.0 / r));
      if (t <= 1e-15 * acc.value()) break;
    }
    *tail = t;
    return acc.value();
  };
  std::vector<double> ratios;
  double agree = 0.0;
  for (int j = 2; j <= 20; ++j) {
    const double r = 1.0 + std::ldexp(1.0, -j);
    double tail = 0.0;
    const double exact = oracle(r, &tail);
    const double v = s.norm(ScalarMap::resolvent(r, 1)).value;
    agree = std::max(agree, std::abs(v - exact) / exact);
    ratios.push_back(v / std::abs(std::log(r - 1.0)));
  }
  const double mn = *std::min_element(ratios.begin(), ratios.end());
  const double mx = *std::max_element(ratios.begin(), ratios.end());
  o.require(agree <= 1e-10, "oracle mismatch " + fmt(agree));
  o.require(mn > 0.05, "liminf estimate " + fmt(mn));
  o.require(classify_trend(ratios) != Trend::Growing && std::isfinite(mx), "sup growing");
  o.detail << " ratio in [" << fmt(mn) << ", " << fmt(mx) << "], oracle rel err " << fmt(agree);
}

// 6
void ritt_suite(Outcome& o) {
  const SpectralGrid g = grid(1, 16, 256);
  const auto T = spec("diag_one_minus_inv_j").T;
  const auto J = spec("jordan_at_one").T;
  const ConditionReport rc = ritt_constant(T, g);
  o.require(rc.trend == Trend::Stable, "ritt_constant " + std::string(to_string(rc.trend)));
  for (int k : {1, 2}) {
    const ConditionReport pr = ritt_power_resolvent_check(T, k, g);
    o.require(pr.trend == Trend::Stable, "power-resolvent k=" + std::to_string(k));
  }
  const ConditionReport ri = ritt_integral_check(T, 1, g, {});
  o.require(ri.trend == Trend::Stable, "integral " + std::string(to_string(ri.trend)));
  const DecayProfile d = decay_profile({T, std::nullopt, std::nullopt}, 1 << 14, 1);
  o.require(d.fit && std::abs(d.fit->slope + 1.0) <= 0.02, "complement exponent");

  const bool jc = ritt_constant(J, g, 1 << 10).trend == Trend::Growing;
  const bool jp = ritt_power_resolvent_check(J, 1, g).trend == Trend::Growing;
  const bool ji = ritt_integral_check(J, 1, g, {}).trend == Trend::Growing;
  o.require(jc && jp && ji, "Jordan control");
  o.detail << " constant " << fmt(rc.constant) << ", complement exponent " << fmt(d.fit ? d.fit->slope : 0.0)
           << ", Jordan growing on constant/power-resolvent/integral: " << jc << jp << ji;
}

// 7
void gsf(Outcome& o) {
  const SpectralGrid g = grid(1, 14, 256);
  int stable = 0;
  double worst = 0.0;
  for (int s = 1; s <= 20; ++s) {
    const auto T = LinearOperator::dense(with_norm(random_matrix(5, 3000 + s), 0.95));
    const ConditionReport rep = gsf_integral_check(T, g, {});
    if (rep.trend == Trend::Stable) ++stable;
    worst = std::max(worst, rep.constant);
  }
  o.require(stable == 20, std::to_string(stable) + "/20 stable");
  const ConditionReport j = gsf_integral_check(spec("jordan_at_one").T, g, {});
  o.require(j.trend == Trend::Growing, "Jordan integral");
  o.require(j.metrics.at("power_bounded") == 0.0, "Jordan powers");
  o.detail << " " << stable << "/20 stable, max constant " << fmt(worst) << ", Jordan integral "
           << to_string(j.trend) << ", power sup " << fmt(j.metrics.at("power_sup"));
}

// 8
void equivalence(Outcome& o) {
  struct Case {
    const char* spec;
    const char* f;
    int k;
    int k_integral;
  };
  const Case cases[] = {{"example1_pair", "pow:0.5", 1, 2}, {"ritt_pair", "pow:1", 2, 2}, {"pow_log_pair", "pow_log:0.5,1", 1, 2}};
  const SpectralGrid coarse = grid(1, 12, 128);
  const SpectralGrid fine = grid(1, 13, 256);
  for (const Case& c : cases) {
    const OperatorBundle b = spec(c.spec);
    const RVFunction f = RVFunction::parse(c.f);
    const Sandwich s{b.T, std::nullopt, *b.S};
    const EquivalenceReport a = equivalence_check_resolvent(s, f, c.k, 1 << 12, coarse);
    const EquivalenceReport r = equivalence_check_resolvent(s, f, c.k, 1 << 13, fine);
    const double dd = rel_change(a.decay_side.sup, r.decay_side.sup);
    const double dg = rel_change(a.growth_side.sup, r.growth_side.sup);
    o.require(a.pass && r.pass, std::string(c.f) + " equivalence");
    o.require(std::isfinite(a.decay_side.sup) && std::isfinite(a.growth_side.sup), std::string(c.f) + " finite");
    o.require(dd <= 0.1 && dg <= 0.1, std::string(c.f) + " refinement " + fmt(std::max(dd, dg)));

    const IntegralEquivalenceReport ia = integral_equivalence_check(s, f, c.k_integral, coarse, {}, 1 << 12);
    const IntegralEquivalenceReport ir = integral_equivalence_check(s, f, c.k_integral, fine, {}, 1 << 13);
    const double di = rel_change(ia.integral_side.sup, ir.integral_side.sup);
    o.require(ia.pass && ir.pass, std::string(c.f) + " integral");
    o.require(di <= 0.1, std::string(c.f) + " integral refinement " + fmt(di));
    o.detail << " " << c.f << ": k=" << c.k << " change " << fmt(std::max(dd, dg)) << ", k=" << c.k_integral
             << " integral change " << fmt(di) << ";";
  }
}

// 9
void smw_and_robustness(Outcome& o) {
  double worst = 0.0;
  for (int s = 1; s <= 100; ++s) {
    const DenseMatrix A = with_norm(random_matrix(5, 4000 + s), 0.9);
    const DenseMatrix B = random_matrix(5, 5000 + s).leftCols(2) * 0.2;
    const DenseMatrix C = random_matrix(5, 6000 + s).topRows(2) * 0.2;
    const ComplexVector x = random_vector(5, 7000 + s);
    const Complex lambda = std::polar(1.2 + 0.01 * s, 0.37 * s);
    const SmwResult r = smw_resolvent(LinearOperator::dense(A), LinearOperator::dense(B), LinearOperator::dense(C), lambda, x);
    const ComplexVector direct = (lambda * DenseMatrix::Identity(5, 5) - A - B * C).fullPivLu().solve(x);
    worst = std::max(worst, (r.value - direct).cwiseAbs().maxCoeff() / std::max(1.0, direct.cwiseAbs().maxCoeff()));
  }
  o.require(worst <= 1e-10, "SMW " + fmt(worst));

  const SpectralGrid g = grid(1, 12, 128);
  const OperatorBundle small = spec("perturb_small");
  const RVFunction f = RVFunction::parse(small.defaults.at("f"));
  const int k = std::stoi(small.defaults.at("k"));
  const RobustnessReport rs = perturbation_robustness({small.T, *small.D, small.S}, f, k, g, 1 << 12);
  o.require(rs.delta.value <= 0.5, "delta " + fmt(rs.delta.value));
  o.require(rs.exponent_gap <= 0.05, "exponent gap " + fmt(rs.exponent_gap));

  const OperatorBundle zero = spec("perturb_zero");
  const RobustnessReport rz = perturbation_robustness({zero.T, *zero.D, zero.S}, f, k, g, 1 << 12);
  const DecayProfile baseline = decay_profile({zero.T, std::nullopt, zero.S}, 1 << 12);
  bool same = rz.decay_perturbed.samples.size() == baseline.samples.size();
  for (std::size_t i = 0; same && i < baseline.samples.size(); ++i) {
    same = rz.decay_perturbed.samples[i].norm == baseline.samples[i].norm &&
           rz.decay_base.samples[i].norm == baseline.samples[i].norm;
  }
  same = same && rz.gsf_base && rz.gsf_perturbed && rz.gsf_base->rows[0].values == rz.gsf_perturbed->rows[0].values;
  o.require(same && rz.exponent_gap == 0.0, "D = 0 differs from baseline");
  o.detail << " SMW max err " << fmt(worst) << ", delta " << fmt(rs.delta.value) << ", exponent gap "
           << fmt(rs.exponent_gap) << ", D = 0 identical: " << same;
}

// 10
void summability(Outcome& o) {
  const auto T = spec("diag_one_minus_inv_j").T;
  const MultOpReport m = mult_op_summability_equiv(T.symbol(), 0.5, 2.0, 2.0, 1 << 12, {50, 1, 256}, 1000);
  o.require(m.scalar_points >= 1000 && m.scalar_ok, "scalar bound");
  o.require(m.sums_ok, "partial sums");
  o.require(m.round_trip.pass && m.pass, "round trip");

  const OperatorBundle b = spec("summability_pair");
  const DecayToSumReport d = decay_to_sum(b.T, &*b.S, RVFunction::parse(b.defaults.at("f")), RVFunction::constant(),
                                          std::stod(b.defaults.at("p")), 1 << 14, {50, 1, 256}, 1 << 8);
  o.require(d.C_hat_trend == Trend::Stable, "log bound trend " + std::string(to_string(d.C_hat_trend)));
  o.require(d.pass, "log bound");
  o.detail << " scalar max " << fmt(m.scalar_max) << " (" << m.scalar_points << " points), C_hat " << fmt(m.C_hat)
           << ", log-bound C_hat sup " << fmt(d.C_hat_sup) << " " << to_string(d.C_hat_trend);
}

// 11
void rv_calculus(Outcome& o) {
  const std::pair<const char*, RVFunction> builtins[] = {
      {"pow:0.5", RVFunction::power(0.5)},          {"pow:1", RVFunction::power(1.0)},
      {"pow_log:0.5,1", RVFunction::power_log(0.5, 1.0)}, {"log", RVFunction::log()},
      {"const", RVFunction::constant()},            {"staircase", RVFunction::square_staircase()}};
  for (const auto& [name, f] : builtins) o.require(check_brv(f).pass, std::string("brv ") + name);

  std::vector<double> radii;
  for (int j = 1; j <= 20; ++j) radii.push_back(1.0 + std::ldexp(1.0, -j));
  const SumBoundReport cn = cn_sum_bound_check(RVFunction::constant(), 0.0, [](long long) { return 1.0; }, radii);
  double gap = 0.0;
  for (const auto& s : cn.samples) gap = std::max(gap, std::abs(s.ratio - s.r));
  o.require(gap <= 1e-12, "cn ratio gap " + fmt(gap));

  std::vector<double> sv;
  for (int i = 1; i <= 30; ++i) sv.push_back(std::ldexp(1.0, -i));
  const IntBoundReport ib = int_bound_check(RVFunction::power(0.5), 0.0, sv);
  o.require(ib.sup_ratio <= 3.0 && ib.pass, "int bound " + fmt(ib.sup_ratio));
  o.detail << " cn ratio gap " << fmt(gap) << ", int bound sup " << fmt(ib.sup_ratio) << " <= " << fmt(ib.bound);
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<void(Outcome&)>> criteria[] = {
      {"power reconstruction", power_reconstruction},
      {"parseval identity", parseval},
      {"example 1 decay and resolvent", example_one},
      {"example 2 decay and resolvent", example_two},
      {"example 3 shift resolvent", example_three},
      {"ritt suite", ritt_suite},
      {"integral condition", gsf},
      {"equivalence harnesses", equivalence},
      {"smw and perturbation robustness", smw_and_robustness},
      {"summability", summability},
      {"rv calculus", rv_calculus},
  };
  int failed = 0;
  int index = 0;
  for (const auto& [name, body] : criteria) {
    ++index;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      body(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " threw: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failed;
    std::printf("%s %2d %s:%s (%.1fs)\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.str().c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", index - failed, index);
  return failed == 0 ? 0 : 1;
}
