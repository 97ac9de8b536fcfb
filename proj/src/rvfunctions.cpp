#include "semidecay/rvfunctions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "semidecay/types.hpp"
#include "text_util.hpp"

namespace semidecay {

namespace {

/// t / ((e + t) log(e + t))
double log_phi(double t) { return t / ((kEuler + t) * std::log(kEuler + t)); }

/// Measure of [0, x] within the union of [k^2 - 1, k^2).
double staircase_measure(double x) {
  if (x <= 0.0) return 0.0;
  auto k = static_cast<long long>(std::floor(std::sqrt(x)));
  while (static_cast<double>(k * k) > x) --k;
  while (static_cast<double>((k + 1) * (k + 1)) <= x) ++k;
  const double next = static_cast<double>((k + 1) * (k + 1));
  return static_cast<double>(k) + std::clamp(x - (next - 1.0), 0.0, 1.0);
}

bool in_stripe(double x) {
  const auto base = static_cast<long long>(std::floor(std::sqrt(x + 1.0)));
  for (long long k = std::max(1LL, base - 1); k <= base + 1; ++k) {
    const double sq = static_cast<double>(k * k);
    if (x >= sq - 1.0 && x < sq) return true;
  }
  return false;
}

}  // namespace

struct RVFunction::Data {
  std::string name;
  std::function<double(double)> log_f;
  std::function<double(double)> phi;
  double alpha = 0.0;
  double t0 = 1.0;
};

RVFunction::RVFunction(std::shared_ptr<const Data> data) : data_(std::move(data)) {}

RVFunction RVFunction::custom(std::string name, std::function<double(double)> log_f,
                              std::function<double(double)> phi, double alpha, double t0) {
  if (!log_f) fail(ErrorCode::InvalidArgument, "function needs a log-value closure");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) fail(ErrorCode::InvalidArgument, "index bound alpha must be >= 0");
  if (!(t0 > 0.0)) fail(ErrorCode::InvalidArgument, "threshold t0 must be positive");
  auto d = std::make_shared<Data>();
  d->name = std::move(name);
  d->log_f = std::move(log_f);
  d->phi = std::move(phi);
  d->alpha = alpha;
  d->t0 = t0;
  return RVFunction(std::move(d));
}

RVFunction RVFunction::power(double a) {
  if (!(a >= 0.0)) fail(ErrorCode::InvalidArgument, "pow exponent must be >= 0");
  return custom(
      "pow:" + std::to_string(a), [a](double t) { return a * std::log(t); }, [a](double) { return a; }, a);
}

RVFunction RVFunction::power_log(double a, double q) {
  const double alpha = a + std::max(q, 0.0) * log_index();
  if (!(alpha >= 0.0)) fail(ErrorCode::InvalidArgument, "pow_log index must be >= 0");
  return custom(
      "pow_log:" + std::to_string(a) + "," + std::to_string(q),
      [a, q](double t) { return a * std::log(t) + q * std::log(std::log(kEuler + t)); },
      [a, q](double t) { return a + q * log_phi(t); }, alpha);
}

RVFunction RVFunction::log() {
  return custom(
      "log", [](double t) { return std::log(std::log(kEuler + t)); }, [](double t) { return log_phi(t); },
      log_index());
}

RVFunction RVFunction::constant(double c) {
  if (!(c > 0.0)) fail(ErrorCode::InvalidArgument, "constant function must be positive");
  const double lc = std::log(c);
  return custom(
      "const", [lc](double) { return lc; }, [](double) { return 0.0; }, 0.0);
}

RVFunction RVFunction::square_staircase() {
  return custom(
      "staircase",
      [](double t) { return t < 1.0 ? std::log(t) : staircase_measure(std::log2(t)) * std::log(2.0); },
      [](double t) { return t < 1.0 || in_stripe(std::log2(t)) ? 1.0 : 0.0; }, 1.0, 1.0);
}

RVFunction RVFunction::parse(std::string_view spec) {
  const std::string s = text::trim(spec);
  const auto colon = s.find(':');
  const std::string head = s.substr(0, colon);
  const std::string args = colon == std::string::npos ? "" : s.substr(colon + 1);
  if (head == "pow") return power(text::parse_double(args, "pow exponent"));
  if (head == "pow_log") {
    const auto v = text::split_numbers(args, "pow_log parameters");
    if (v.size() != 2) fail(ErrorCode::Parse, "pow_log needs a,q");
    return power_log(v[0], v[1]);
  }
  if (head == "log" && args.empty()) return log();
  if (head == "const") return constant(args.empty() ? 1.0 : text::parse_double(args, "constant value"));
  // The long name is kept for compatibility with existing scripts.
  if ((head == "staircase" || head == "paper_example_2_2") && args.empty()) return square_staircase();
  fail(ErrorCode::Parse, "unknown function spec '" + s + "'");
}

double RVFunction::log_value(double t) const {
  if (!(t > 0.0)) fail(ErrorCode::Domain, "functions are defined for t > 0");
  return data_->log_f(t);
}

double RVFunction::operator()(double t) const { return std::exp(log_value(t)); }

double RVFunction::phi(double t) const {
  if (!(t > 0.0)) fail(ErrorCode::Domain, "functions are defined for t > 0");
  if (data_->phi) return data_->phi(t);
  constexpr double h = 1e-6;
  return (data_->log_f(t * (1.0 + h)) - data_->log_f(t * (1.0 - h))) / (std::log1p(h) - std::log1p(-h));
}

double RVFunction::derivative(double t) const { return (*this)(t)*phi(t) / t; }
double RVFunction::alpha() const { return data_->alpha; }
double RVFunction::t0() const { return data_->t0; }
const std::string& RVFunction::name() const { return data_->name; }

RVFunction RVFunction::with_alpha(double alpha) const {
  return custom(data_->name, data_->log_f, data_->phi, alpha, data_->t0);
}

RVFunction RVFunction::power_of(double gamma) const {
  if (!(gamma > 0.0)) fail(ErrorCode::InvalidArgument, "gamma must be positive");
  const auto base = *this;
  std::function<double(double)> phi = [base, gamma](double t) { return gamma * base.phi(t); };
  return custom(
      data_->name + "^" + std::to_string(gamma), [base, gamma](double t) { return gamma * base.log_value(t); },
      phi, data_->alpha * gamma, data_->t0);
}

RVFunction gamma_power(const RVFunction& f, double gamma) { return f.power_of(gamma); }

double log_index() {
  static const double value = [] {
    // log_phi is unimodal in log t; golden section on [-5, 40].
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = -5.0;
    double b = 40.0;
    double c = b - g * (b - a);
    double d = a + g * (b - a);
    for (int i = 0; i < 200; ++i) {
      if (log_phi(std::exp(c)) > log_phi(std::exp(d))) b = d;
      else a = c;
      c = b - g * (b - a);
      d = a + g * (b - a);
    }
    return log_phi(std::exp(0.5 * (a + b)));
  }();
  return value;
}

std::vector<double> geometric_grid(double t0, double t_max, double ratio) {
  if (!(t0 > 0.0) || !(t_max >= t0) || !(ratio > 1.0)) {
    fail(ErrorCode::InvalidArgument, "grid needs 0 < t0 <= t_max and ratio > 1");
  }
  std::vector<double> out;
  for (double t = t0; t < t_max; t *= ratio) out.push_back(t);
  out.push_back(t_max);
  return out;
}

BrvReport check_brv(const RVFunction& f, double t_max, double ratio, std::optional<double> alpha,
                    std::optional<double> t_min) {
  BrvReport rep;
  rep.alpha = alpha.value_or(f.alpha());
  const double start = std::max(f.t0(), t_min.value_or(f.t0()));
  const auto grid = geometric_grid(start, t_max, ratio);
  rep.points = grid.size();
  rep.max_phi = -std::numeric_limits<double>::infinity();
  rep.min_phi = std::numeric_limits<double>::infinity();
  double prev = -std::numeric_limits<double>::infinity();
  for (double t : grid) {
    const double lf = f.log_value(t);
    const double p = f.phi(t);
    if (!std::isfinite(lf) || !std::isfinite(p)) {
      fail(ErrorCode::InvalidArgument, "f is not positive and finite at t = " + std::to_string(t));
    }
    if (lf < prev - 1e-12 * std::max(1.0, std::abs(prev))) rep.monotone = false;
    prev = lf;
    if (p > rep.max_phi) {
      rep.max_phi = p;
      rep.witness_t = t;
    }
    rep.min_phi = std::min(rep.min_phi, p);
  }
  rep.pass = rep.monotone && rep.max_phi <= rep.alpha + 1e-9;
  return rep;
}

PowerBound power_bound(const RVFunction& f, double t_max, std::optional<double> alpha) {
  PowerBound out;
  out.alpha = alpha.value_or(f.alpha());
  out.t0 = f.t0();
  const double log_c = f.log_value(out.t0) - out.alpha * std::log(out.t0);
  out.constant = std::exp(log_c);
  double sup_log = -std::numeric_limits<double>::infinity();
  double doubling = -std::numeric_limits<double>::infinity();
  for (double t : geometric_grid(out.t0, t_max)) {
    const double lf = f.log_value(t);
    sup_log = std::max(sup_log, lf - out.alpha * std::log(t));
    doubling = std::max(doubling, f.log_value(2.0 * t) - lf);
  }
  out.grid_sup = std::exp(sup_log);
  out.verified = sup_log <= log_c + 1e-12;
  out.doubling_ratio = std::exp(doubling);
  out.doubling_ok = doubling <= out.alpha * std::log(2.0) + 1e-12;
  return out;
}

double representation_value(const RVFunction& f, double t) {
  if (!(t > 0.0)) fail(ErrorCode::Domain, "t must be positive");
  const double x = std::log(t);
  double err = 0.0;
  const double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [&f](double y) { return f.phi(std::exp(y)); }, 0.0, x, 20, 1e-13, &err);
  return std::exp(f.log_value(1.0) + integral);
}

SumBoundReport cn_sum_bound_check(const RVFunction& f, double beta, std::function<double(long long)> c,
                                  const std::vector<double>& radii, long long n0) {
  if (!(beta > f.alpha() - 1.0)) {
    fail(ErrorCode::Hypothesis, "beta must exceed alpha - 1 (beta = " + std::to_string(beta) +
                                    ", alpha = " + std::to_string(f.alpha()) + ")");
  }
  if (n0 < 1) fail(ErrorCode::InvalidArgument, "n0 must be at least 1");
  if (!c) {
    c = [f, beta](long long n) {
      const double m = static_cast<double>(std::max(n, 1LL));
      return std::exp(beta * std::log(m) - f.log_value(m));
    };
  }
  SumBoundReport rep;
  rep.beta = beta;
  const long long start = std::max(n0, static_cast<long long>(std::ceil(f.t0())));
  for (double t : geometric_grid(static_cast<double>(start), 1e7, 1.05)) {
    const auto n = static_cast<long long>(t);
    const double cn = c(n);
    if (!(cn >= 0.0) || !std::isfinite(cn)) fail(ErrorCode::InvalidArgument, "c(n) must be finite and >= 0");
    rep.c0 = std::max(rep.c0, cn * std::exp(f.log_value(static_cast<double>(n)) - beta * std::log(static_cast<double>(n))));
  }
  std::vector<double> ratios;
  for (double r : radii) {
    if (!(r > 1.0)) fail(ErrorCode::Domain, "radii must exceed 1");
    const double log_r = std::log(r);
    SumBoundSample s;
    s.r = r;
    Accumulator acc;
    constexpr long long kMaxTerms = 2'000'000'000LL;
    for (long long n = 0;; ++n) {
      acc.add(c(n) * std::exp(-static_cast<double>(n) * log_r));
      if (n >= start && (n & 1023) == 1023) {
        const double next = static_cast<double>(n + 1);
        // c(m) <= c0 m^beta / f(n) for m > n, then a geometric bound
        const double q = beta >= 0.0 ? std::pow((next + 1.0) / next, beta) / r : 1.0 / r;
        const double lead = std::exp(beta * std::log(next) - next * log_r);
        const double tail = q < 1.0 ? rep.c0 * std::exp(-f.log_value(static_cast<double>(n))) * lead / (1.0 - q)
                                    : std::numeric_limits<double>::infinity();
        if (tail <= 1e-15 * acc.value()) {
          s.terms = n + 1;
          s.tail_bound = tail;
          break;
        }
      }
      if (n > kMaxTerms) fail(ErrorCode::Divergence, "series did not reach its tail tolerance");
    }
    s.series = acc.value() + s.tail_bound;
    s.ratio = s.series * std::exp((beta + 1.0) * std::log(r - 1.0) + f.log_value(1.0 / (r - 1.0)));
    rep.sup_ratio = std::max(rep.sup_ratio, s.ratio);
    ratios.push_back(s.ratio);
    rep.samples.push_back(s);
  }
  rep.trend = classify_trend(ratios);
  rep.pass = std::isfinite(rep.sup_ratio) && rep.trend != Trend::Growing;
  return rep;
}

IntBoundReport int_bound_check(const RVFunction& f, double beta, const std::vector<double>& s_values) {
  if (beta <= -1.0 && f.alpha() == 0.0) fail(ErrorCode::Divergence, "int t^beta / f(t) diverges for beta <= -1");
  if (!(beta > f.alpha() - 1.0)) {
    fail(ErrorCode::Hypothesis, "beta must exceed alpha - 1 (beta = " + std::to_string(beta) +
                                    ", alpha = " + std::to_string(f.alpha()) + ")");
  }
  IntBoundReport rep;
  rep.beta = beta;
  rep.delta = f.alpha() - beta;
  rep.bound = std::tgamma(beta + 1.0) + 1.0 / (1.0 - rep.delta);
  boost::math::quadrature::tanh_sinh<double> ts;
  boost::math::quadrature::exp_sinh<double> es;
  rep.pass = true;
  for (double s : s_values) {
    if (!(s > 0.0) || !(s * f.t0() < 1.0)) fail(ErrorCode::Domain, "s must lie in (0, 1/t0)");
    // tau = s t: ratio = f(1/s) int_{s t0}^inf tau^beta e^{-tau} / f(tau/s) dtau
    const double lf_top = f.log_value(1.0 / s);
    auto integrand = [&](double tau) {
      if (tau <= 0.0) return 0.0;
      return std::exp(beta * std::log(tau) - tau + lf_top - f.log_value(tau / s));
    };
    const double lo = s * f.t0();
    double err_a = 0.0;
    double err_b = 0.0;
    double value = 0.0;
    if (lo < 1.0) value += ts.integrate(integrand, lo, 1.0, 1e-10, &err_a);
    value += es.integrate([&](double tau) { return integrand(std::max(tau, lo)); }, std::max(lo, 1.0),
                          std::numeric_limits<double>::infinity(), 1e-10, &err_b);
    IntBoundSample smp;
    smp.s = s;
    smp.ratio = value;
    smp.error = err_a + err_b;
    smp.integral = std::exp(std::log(value) - (beta + 1.0) * std::log(s) - lf_top);
    rep.sup_ratio = std::max(rep.sup_ratio, value);
    if (value > rep.bound) rep.pass = false;
    rep.samples.push_back(smp);
  }
  return rep;
}

double h_alpha(double alpha, double s) {
  if (!(s > 0.0 && s < std::exp(-1.0))) fail(ErrorCode::Domain, "h_alpha needs 0 < s < 1/e");
  if (!(alpha >= 0.0)) fail(ErrorCode::InvalidArgument, "alpha must be >= 0");
  const double l = std::abs(std::log(s));
  if (alpha < 1.0) return std::pow(l, 1.0 - alpha);
  if (alpha == 1.0) return std::log(l);
  return 1.0;
}

}  // namespace semidecay
