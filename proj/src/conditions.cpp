#include "semidecay/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "semidecay/parallel.hpp"

namespace semidecay {

namespace {

using Weight = std::function<double(Complex lambda)>;

/// sup over each circle of weight(lambda) ||R(lambda,T)^k|| (plus the corner
/// angles when given); stops at the first ill-conditioned radius.
ConditionRow weighted_row(const LinearOperator& T, int k, const SpectralGrid& grid, const Weight& weight,
                          const std::vector<double>& corner_angles, std::vector<std::string>& notes) {
  ConditionRow row;
  row.k = k;
  for (double r : grid.radii()) {
    auto eval = [&](double theta) {
      const Complex lambda = std::polar(r, theta);
      NormResult n = composed_norm(nullptr, T, ScalarMap::resolvent(lambda, k), nullptr);
      n.value *= weight(lambda);
      return n;
    };
    const CircleSup cs = circle_sup(eval, grid, false);
    double best = cs.value;
    double best_theta = cs.theta;
    double min_rcond = cs.min_rcond;
    std::vector<NormResult> corner(corner_angles.size());
    parallel_for(corner_angles.size(), [&](std::size_t i) { corner[i] = eval(corner_angles[i]); });
    for (std::size_t i = 0; i < corner.size(); ++i) {
      min_rcond = std::min(min_rcond, corner[i].rcond);
      if (corner[i].value > best) {
        best = corner[i].value;
        best_theta = corner_angles[i];
      }
    }
    row.values.push_back(best);
    if (best > row.constant || row.values.size() == 1) {
      row.constant = best;
      row.witness = {r, best_theta, best};
    }
    if (!cs.converged) notes.push_back("angle refinement unconverged at r = " + std::to_string(r));
    if (min_rcond < 1e-12) {
      notes.push_back("ill-conditioned resolvent at r = " + std::to_string(r) + "; radius schedule cut");
      row.values.back() = std::numeric_limits<double>::infinity();
      break;
    }
  }
  row.trend = classify_trend(row.values);
  return row;
}

std::vector<double> corner_angles(int count) {
  std::vector<double> out;
  for (int i = 1; i <= count; ++i) {
    out.push_back(std::ldexp(1.0, -i));
    out.push_back(-std::ldexp(1.0, -i));
  }
  return out;
}

ConditionReport from_row(std::string name, const SpectralGrid& grid, ConditionRow row, std::vector<std::string> notes) {
  ConditionReport rep;
  rep.condition = std::move(name);
  rep.grid = grid;
  rep.radii = grid.radii();
  rep.k = row.k;
  rep.constant = row.constant;
  rep.trend = row.trend;
  rep.witnesses.push_back(row.witness);
  rep.notes = std::move(notes);
  rep.rows.push_back(std::move(row));
  return rep;
}

double sup_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

}  // namespace

void StolzDomain::validate() const {
  if (!(delta >= 1.0)) fail(ErrorCode::InvalidArgument, "Stolz exponent delta must be >= 1");
  if (!(c >= 1.0)) fail(ErrorCode::InvalidArgument, "Stolz constant c must be >= 1");
}

double StolzDomain::ratio(Complex lambda) const {
  if (lambda == Complex(1.0, 0.0)) return 0.0;
  const double gap = 1.0 - std::abs(lambda);
  const double num = std::pow(std::abs(1.0 - lambda), delta);
  if (gap <= 0.0) return std::numeric_limits<double>::infinity();
  return num / gap;
}

bool StolzDomain::contains(Complex lambda, double slack) const {
  if (lambda == Complex(1.0, 0.0)) return true;
  return std::pow(std::abs(1.0 - lambda), delta) <= c * (1.0 - std::abs(lambda)) + slack;
}

void require_spectral_radius_at_most_one(const LinearOperator& T) {
  const double rho = T.spectral_radius_bound();
  if (rho > 1.0 + 1e-6) {
    fail(ErrorCode::Hypothesis, "spectral radius " + std::to_string(rho) + " exceeds 1");
  }
}

ConditionReport kreiss_constant(const LinearOperator& T, const SpectralGrid& grid, int k_max) {
  if (k_max < 1) fail(ErrorCode::InvalidArgument, "k_max must be at least 1");
  grid.validate();
  require_spectral_radius_at_most_one(T);
  ConditionReport rep;
  rep.condition = k_max == 1 ? "kreiss" : "strong_kreiss";
  rep.grid = grid;
  rep.radii = grid.radii();
  double strong = 0.0;
  Trend worst = Trend::Stable;
  for (int k = 1; k <= k_max; ++k) {
    const GrowthProfile g = resolvent_sweep(T, nullptr, k, grid);
    ConditionRow row;
    row.k = k;
    for (const auto& s : g.samples) {
      const double v = std::pow(s.r - 1.0, k) * s.sup_norm;
      row.values.push_back(v);
      if (v > row.constant || row.values.size() == 1) {
        row.constant = v;
        row.witness = {s.r, s.theta, v};
      }
    }
    if (g.truncated) {
      row.values.push_back(std::numeric_limits<double>::infinity());
      rep.notes.push_back("ill-conditioned resolvent at k = " + std::to_string(k) + "; radius schedule cut");
    }
    row.trend = classify_trend(row.values);
    if (row.trend == Trend::Growing) worst = Trend::Growing;
    else if (row.trend == Trend::Undetermined && worst == Trend::Stable) worst = Trend::Undetermined;
    strong = std::max(strong, row.constant);
    rep.witnesses.push_back(row.witness);
    rep.rows.push_back(std::move(row));
  }
  rep.k = 1;
  rep.constant = rep.rows.front().constant;
  rep.trend = k_max == 1 ? rep.rows.front().trend : worst;
  rep.metrics["strong_kreiss"] = strong;
  return rep;
}

ConditionReport ritt_constant(const LinearOperator& T, const SpectralGrid& grid, long long n_max) {
  grid.validate();
  require_spectral_radius_at_most_one(T);
  std::vector<std::string> notes;
  ConditionRow row = weighted_row(
      T, 1, grid, [](Complex l) { return std::abs(l - 1.0); }, corner_angles(grid.j_max + 4), notes);
  ConditionReport rep = from_row("ritt", grid, std::move(row), std::move(notes));

  const DecayProfile d = decay_profile(Sandwich{T, std::nullopt, T.identity_minus()}, n_max);
  if (d.fit) {
    rep.metrics["complement_decay_exponent"] = d.fit->slope;
    rep.metrics["complement_fit_residual"] = d.fit->residual;
  } else {
    rep.notes.push_back("||T^n (I-T)|| vanishes; exponent undefined");
  }
  const DecayProfile p = decay_profile(Sandwich{T, std::nullopt, std::nullopt}, n_max);
  std::vector<double> pv;
  for (const auto& s : p.samples) pv.push_back(s.norm);
  rep.metrics["power_sup"] = sup_of(pv);
  rep.metrics["power_bounded"] = classify_trend(pv) == Trend::Growing ? 0.0 : 1.0;
  return rep;
}

ConditionReport ritt_power_resolvent_check(const LinearOperator& T, int k, const SpectralGrid& grid) {
  if (k < 1) fail(ErrorCode::InvalidArgument, "k must be at least 1");
  grid.validate();
  require_spectral_radius_at_most_one(T);
  std::vector<std::string> notes;
  const double kk = k;
  ConditionRow row = weighted_row(
      T, k + 1, grid, [kk](Complex l) { return std::abs(l - 1.0) * std::pow(std::abs(l) - 1.0, kk); },
      corner_angles(grid.j_max + 4), notes);
  row.k = k;
  ConditionReport rep = from_row("ritt_power_resolvent", grid, std::move(row), std::move(notes));
  return rep;
}

ConditionReport rk_bounded_check(const LinearOperator& T, double alpha, double beta, const SpectralGrid& grid) {
  if (!(alpha > 0.0)) fail(ErrorCode::InvalidArgument, "alpha must be positive");
  if (!std::isfinite(beta)) fail(ErrorCode::InvalidArgument, "beta must be finite");
  grid.validate();
  require_spectral_radius_at_most_one(T);
  std::vector<std::string> notes;
  ConditionRow row = weighted_row(
      T, 1, grid,
      [alpha, beta](Complex l) {
        const double m = std::abs(l);
        return std::pow(std::abs(l - 1.0), alpha) * std::pow(m - 1.0, beta) / std::pow(m, alpha + beta - 1.0);
      },
      corner_angles(grid.j_max + 4), notes);
  ConditionReport rep = from_row("rk", grid, std::move(row), std::move(notes));
  rep.metrics["alpha"] = alpha;
  rep.metrics["beta"] = beta;

  // toward the boundary: theta = 2^{-i}, i = 0..14, at r = 1 + 2^{-14}
  const double rb = 1.0 + std::ldexp(1.0, -14);
  std::vector<double> angles;
  for (int i = 0; i <= 14; ++i) angles.push_back(std::ldexp(1.0, -i));
  std::vector<double> bvals(angles.size());
  parallel_for(angles.size(), [&](std::size_t i) {
    double v = 0.0;
    for (double sgn : {1.0, -1.0}) {
      const NormResult n = composed_norm(nullptr, T, ScalarMap::resolvent(std::polar(rb, sgn * angles[i]), 1), nullptr);
      v = std::max(v, std::pow(angles[i], 1.0 / alpha) * n.value);
    }
    bvals[i] = v;
  });
  rep.metrics["boundary_radius"] = rb;
  rep.metrics["boundary_sup"] = sup_of(bvals);
  rep.metrics["boundary_stable"] = classify_trend(bvals) == Trend::Stable ? 1.0 : 0.0;
  return rep;
}

StolzReport stolz_containment(const LinearOperator& T, const StolzDomain& domain, std::uint64_t max_points) {
  domain.validate();
  StolzReport rep;
  rep.domain = domain;
  const auto points = T.spectrum_points(max_points);
  rep.points_checked = points.size();
  for (const auto& p : points) {
    if (p != Complex(1.0, 0.0)) rep.max_ratio = std::max(rep.max_ratio, domain.ratio(p));
    if (!domain.contains(p)) rep.violators.push_back(p);
  }
  rep.member = rep.violators.empty();
  return rep;
}

double quasi_mult_bound(long long n, double alpha) {
  if (n < 1) fail(ErrorCode::InvalidArgument, "n must be at least 1");
  if (!(alpha > 0.0)) fail(ErrorCode::InvalidArgument, "alpha must be positive");
  const double nn = static_cast<double>(n);
  return std::exp(nn * std::log(nn / (nn + alpha)) + alpha * std::log(alpha / (nn + alpha)));
}

QuasiMultReport quasi_mult_decay_check(const LinearOperator& T, double alpha, long long n_max,
                                       std::optional<double> c) {
  if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
  if (T.kind() != OperatorKind::Diagonal) {
    fail(ErrorCode::Unsupported, "the quasi-multiplication check takes diagonal operators");
  }
  QuasiMultReport rep;
  rep.alpha = alpha;
  if (c) {
    rep.c = *c;
  } else {
    const StolzReport probe = stolz_containment(T, StolzDomain{1.0 / alpha, 2.0});
    rep.c = std::max(2.0, probe.max_ratio);
  }
  rep.containment = stolz_containment(T, StolzDomain{1.0 / alpha, rep.c});
  if (!rep.containment.member) return rep;
  rep.profile = decay_profile(Sandwich{T, std::nullopt, std::nullopt}, n_max, 1);
  for (const auto& s : rep.profile.samples) {
    const double r = s.norm / (rep.c * quasi_mult_bound(s.n, alpha));
    rep.ratios.push_back(r);
    rep.max_ratio = std::max(rep.max_ratio, r);
  }
  rep.pass = rep.max_ratio <= 1.0 + 1e-9;
  return rep;
}

ConditionReport gsf_integral_check(const LinearOperator& T, const SpectralGrid& grid,
                                   const std::vector<ComplexVector>& probes, long long n_max) {
  grid.validate();
  require_spectral_radius_at_most_one(T);
  ConditionReport rep;
  rep.condition = "gsf";
  rep.grid = grid;
  rep.radii = grid.radii();
  ConditionRow row;
  row.k = 1;
  const CircleForm form{0, 1};
  for (double r : rep.radii) {
    double v = 0.0;
    if (probes.empty()) {
      v = circle_integral_sup(T, nullptr, r, form, true).value;
    } else {
      for (const auto& x : probes) v = std::max(v, circle_integral(T, nullptr, r, form, x, true).value);
    }
    v *= r - 1.0;
    row.values.push_back(v);
    if (v > row.constant || row.values.size() == 1) {
      row.constant = v;
      row.witness = {r, 0.0, v};
    }
  }
  row.trend = classify_trend(row.values);
  rep.constant = row.constant;
  rep.trend = row.trend;
  rep.witnesses.push_back(row.witness);
  rep.rows.push_back(std::move(row));

  const DecayProfile p = decay_profile(Sandwich{T, std::nullopt, std::nullopt}, n_max);
  std::vector<double> pv;
  for (const auto& s : p.samples) pv.push_back(s.norm);
  const Trend pt = classify_trend(pv);
  rep.metrics["power_sup"] = sup_of(pv);
  rep.metrics["power_bounded"] = pt == Trend::Growing ? 0.0 : 1.0;
  const bool bounded = rep.trend != Trend::Growing;
  rep.metrics["sides_agree"] = bounded == (pt != Trend::Growing) ? 1.0 : 0.0;
  return rep;
}

ConditionReport ritt_integral_check(const LinearOperator& T, int k, const SpectralGrid& grid,
                                    const std::vector<ComplexVector>& probes) {
  if (k < 1) fail(ErrorCode::InvalidArgument, "k must be at least 1");
  grid.validate();
  require_spectral_radius_at_most_one(T);
  ConditionReport rep;
  rep.condition = "ritt_integral";
  rep.grid = grid;
  rep.radii = grid.radii();
  rep.k = k;
  ConditionRow row;
  row.k = k;
  const CircleForm form{1, k + 1};
  for (double r : rep.radii) {
    double v = 0.0;
    if (probes.empty()) {
      v = circle_integral_sup(T, nullptr, r, form).value;
    } else {
      for (const auto& x : probes) v = std::max(v, circle_integral(T, nullptr, r, form, x).value);
    }
    v *= std::pow(r - 1.0, 2.0 * k - 1.0);
    row.values.push_back(v);
    if (v > row.constant || row.values.size() == 1) {
      row.constant = v;
      row.witness = {r, 0.0, v};
    }
  }
  row.trend = classify_trend(row.values);
  rep.constant = row.constant;
  rep.trend = row.trend;
  rep.witnesses.push_back(row.witness);
  rep.rows.push_back(std::move(row));
  return rep;
}

}  // namespace semidecay
