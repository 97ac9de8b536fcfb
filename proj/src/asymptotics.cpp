#include "semidecay/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "semidecay/parallel.hpp"

namespace semidecay {

namespace {

SideReport side(std::vector<double> values) {
  SideReport out;
  for (double v : values) out.sup = std::max(out.sup, v);
  out.trend = classify_trend(values);
  out.values = std::move(values);
  return out;
}

}  // namespace

NormResult Sandwich::norm(const ScalarMap& g, const NormOptions& options) const {
  return composed_norm(left_ptr(), T, g, right_ptr(), options);
}

std::vector<long long> decay_schedule(long long n_max) {
  if (n_max < 1) fail(ErrorCode::InvalidArgument, "n_max must be positive");
  std::vector<long long> out;
  for (long long n = 1; n <= std::min(32LL, n_max); ++n) out.push_back(n);
  for (long long base = 64; base <= n_max; base *= 2) {
    for (int q = 0; q < 4; ++q) {
      const auto n = static_cast<long long>(std::llround(static_cast<double>(base) * std::exp2(q / 4.0)));
      if (n <= n_max && n > out.back()) out.push_back(n);
    }
  }
  if (out.back() != n_max) out.push_back(n_max);
  return out;
}

FitResult fit_loglog(const std::vector<double>& x, const std::vector<double>& y, double x_lo, double x_hi) {
  if (x.size() != y.size()) fail(ErrorCode::DimensionMismatch, "fit needs paired samples");
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < x_lo || x[i] > x_hi) continue;
    if (!(y[i] > 0.0) || !std::isfinite(y[i])) {
      fail(ErrorCode::InvalidArgument, "cannot fit a non-positive norm (sample at x = " + std::to_string(x[i]) + ")");
    }
    if (!(x[i] > 0.0)) fail(ErrorCode::InvalidArgument, "fit abscissae must be positive");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  if (lx.size() < 8) {
    fail(ErrorCode::InvalidArgument, "fit window holds " + std::to_string(lx.size()) + " samples, need at least 8");
  }
  const double n = static_cast<double>(lx.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (sxx == 0.0) fail(ErrorCode::InvalidArgument, "fit window has a single abscissa");
  FitResult out;
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  out.count = lx.size();
  for (std::size_t i = 0; i < lx.size(); ++i) {
    out.residual = std::max(out.residual, std::abs(ly[i] - (out.intercept + out.slope * lx[i])));
  }
  return out;
}

FitResult fit_exponent(const DecayProfile& profile, long long n_lo, long long n_hi) {
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& s : profile.samples) {
    x.push_back(static_cast<double>(s.n));
    y.push_back(s.norm);
  }
  return fit_loglog(x, y, static_cast<double>(n_lo), static_cast<double>(n_hi));
}

FitResult fit_exponent(const GrowthProfile& profile) {
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& s : profile.samples) {
    x.push_back(s.r - 1.0);
    y.push_back(s.sup_norm);
  }
  return fit_loglog(x, y, 0.0, std::numeric_limits<double>::infinity());
}

DecayProfile decay_profile(const Sandwich& s, long long n_max, int complement) {
  if (n_max < 16) fail(ErrorCode::InvalidArgument, "n_max must be at least 16");
  if (complement < 0) fail(ErrorCode::InvalidArgument, "(I - T) power must be non-negative");
  const auto schedule = decay_schedule(n_max);
  DecayProfile prof;
  prof.samples.resize(schedule.size());
  std::vector<std::string> methods(schedule.size());
  parallel_for(schedule.size(), [&](std::size_t i) {
    const NormResult r = s.norm(ScalarMap{schedule[i], complement, {}, 0});
    prof.samples[i] = {schedule[i], r.value, r.error};
    methods[i] = r.method;
  });
  prof.method = methods.back();
  const long long lo = std::max(1LL, n_max / 4);
  bool zero = false;
  for (const auto& smp : prof.samples) {
    if (smp.n >= lo && !(smp.norm > 0.0)) zero = true;
  }
  if (zero) {
    prof.flags.emplace_back("exponent undefined: zero norms in the fit window");
  } else {
    prof.fit = fit_exponent(prof, lo, n_max);
  }
  return prof;
}

std::optional<double> commutator_norm(const LinearOperator& T, const LinearOperator& S, std::size_t dim, int probes,
                                      std::uint64_t seed) {
  if (S.range_dimension() != S.dimension()) return std::nullopt;
  if (T.finite()) dim = *T.dimension();
  if (S.finite() && *S.dimension() != dim) return std::nullopt;
  double worst = 0.0;
  for (int i = 0; i < probes; ++i) {
    const ComplexVector x = random_unit_vector(dim, seed + static_cast<std::uint64_t>(i));
    const ComplexVector d = T.apply(S.apply(x)) - S.apply(T.apply(x));
    worst = std::max(worst, d.norm() / x.norm());
  }
  return worst;
}

EquivalenceReport equivalence_check_resolvent(const Sandwich& s, const RVFunction& f, int k, long long n_max,
                                              const SpectralGrid& grid) {
  if (!(static_cast<double>(k) > f.alpha())) {
    fail(ErrorCode::Hypothesis, "resolvent power k must exceed the index alpha of f (k = " + std::to_string(k) +
                                    ", alpha = " + std::to_string(f.alpha()) + ")");
  }
  EquivalenceReport rep;
  rep.k = k;
  rep.alpha = f.alpha();
  const LinearOperator* S = s.right ? &*s.right : (s.left ? &*s.left : nullptr);
  if (S) {
    if (auto c = commutator_norm(s.T, *S, 64)) {
      rep.commutator = *c;
      rep.commutes = *c <= 1e-10;
    }
  } else {
    rep.commutes = true;
  }
  rep.decay = decay_profile(s, n_max);
  std::vector<double> dv;
  for (const auto& smp : rep.decay.samples) dv.push_back(f(static_cast<double>(smp.n)) * smp.norm);
  rep.decay_side = side(std::move(dv));
  rep.growth = resolvent_sweep(s.T, s.right_ptr(), k, grid, s.left_ptr());
  std::vector<double> gv;
  for (const auto& smp : rep.growth.samples) {
    const double d = smp.r - 1.0;
    gv.push_back(std::exp(k * std::log(d) + f.log_value(1.0 / d)) * smp.sup_norm);
  }
  rep.growth_side = side(std::move(gv));
  rep.pass = std::isfinite(rep.decay_side.sup) && std::isfinite(rep.growth_side.sup) &&
             rep.decay_side.trend == Trend::Stable && rep.growth_side.trend == Trend::Stable;
  return rep;
}

NlognReport nlogn_resolvent_check(const Sandwich& s, double alpha, const SpectralGrid& grid, long long n_max) {
  if (!(alpha >= 0.0)) fail(ErrorCode::InvalidArgument, "alpha must be >= 0");
  NlognReport rep;
  rep.alpha = alpha;
  SpectralGrid g = grid;
  g.validate();
  // r = 1 + 2^{-j} < 4/3 needs j >= 2
  if (g.j_min < 2) {
    rep.excluded_radii = static_cast<std::size_t>(std::min(2, g.j_max + 1) - g.j_min);
    g.j_min = 2;
  }
  if (g.j_max < g.j_min) fail(ErrorCode::InvalidArgument, "no radius of the grid lies in (1, 4/3)");
  const GrowthProfile prof = resolvent_sweep(s.T, s.right_ptr(), 1, g, s.left_ptr());
  std::vector<double> ratios;
  rep.inf_ratio = std::numeric_limits<double>::infinity();
  for (const auto& smp : prof.samples) {
    NlognSample n;
    n.r = smp.r;
    n.norm = smp.sup_norm;
    n.h = h_alpha(alpha, smp.r - 1.0);
    n.ratio = n.norm / n.h;
    rep.sup_ratio = std::max(rep.sup_ratio, n.ratio);
    rep.inf_ratio = std::min(rep.inf_ratio, n.ratio);
    ratios.push_back(n.ratio);
    rep.samples.push_back(n);
  }
  rep.trend = classify_trend(ratios);
  const DecayProfile decay = decay_profile(s, n_max);
  std::vector<double> dv;
  for (const auto& smp : decay.samples) {
    if (smp.n < 2) continue;
    const double n = static_cast<double>(smp.n);
    dv.push_back(n * std::pow(std::log(n), alpha) * smp.norm);
  }
  rep.decay_side = side(std::move(dv));
  return rep;
}

double f_k(const RVFunction& f, int k, double s) {
  if (!(s > 0.0)) fail(ErrorCode::Domain, "F_k needs s > 0");
  return std::exp((2.0 * k - 1.0) * std::log(s) + 2.0 * f.log_value(1.0 / s));
}

IntegralEquivalenceReport integral_equivalence_check(const Sandwich& s, const RVFunction& f, int k,
                                                     const SpectralGrid& grid, const std::vector<ComplexVector>& probes,
                                                     long long n_max) {
  if (s.left) fail(ErrorCode::Unsupported, "the integral condition takes S on the right of the resolvent");
  if (!(static_cast<double>(k) > f.alpha() + 0.5)) {
    fail(ErrorCode::Hypothesis, "resolvent power k must exceed alpha + 1/2 (k = " + std::to_string(k) +
                                    ", alpha = " + std::to_string(f.alpha()) + ")");
  }
  grid.validate();
  IntegralEquivalenceReport rep;
  rep.k = k;
  rep.radii = grid.radii();
  std::vector<double> values(rep.radii.size());
  std::vector<std::string> methods(rep.radii.size());
  const CircleForm form{0, k};
  for (std::size_t i = 0; i < rep.radii.size(); ++i) {
    const double r = rep.radii[i];
    double best = 0.0;
    if (probes.empty()) {
      const CircleIntegral ci = circle_integral_sup(s.T, s.right_ptr(), r, form);
      best = ci.value;
      methods[i] = ci.method;
    } else {
      for (const auto& y : probes) {
        const CircleIntegral ci = circle_integral(s.T, s.right_ptr(), r, form, y);
        best = std::max(best, ci.value);
        methods[i] = ci.method;
      }
    }
    values[i] = f_k(f, k, r * r - 1.0) * best;
  }
  rep.method = methods.empty() ? "" : methods.back();
  rep.integral_side = side(std::move(values));

  const DecayProfile decay = decay_profile(s, n_max);
  std::vector<double> dv;
  for (const auto& smp : decay.samples) dv.push_back(f(static_cast<double>(smp.n)) * smp.norm);
  rep.decay_side = side(std::move(dv));

  const DecayProfile powers = decay_profile(Sandwich{s.T, std::nullopt, std::nullopt}, n_max);
  std::vector<double> pv;
  for (const auto& smp : powers.samples) pv.push_back(smp.norm);
  rep.power_side = side(std::move(pv));

  rep.pass = std::isfinite(rep.integral_side.sup) && rep.integral_side.trend == Trend::Stable &&
             rep.decay_side.trend == Trend::Stable;
  return rep;
}

}  // namespace semidecay
