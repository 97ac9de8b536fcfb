#include "semidecay/summability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/gamma.hpp>

#include "semidecay/parallel.hpp"

namespace semidecay {

namespace {

using Weight = std::function<double(long long)>;

constexpr double kOverflow = 1e300;
constexpr double kTiny = 1e-280;

std::vector<double> weight_table(const Weight& w, long long n_max) {
  std::vector<double> out(static_cast<std::size_t>(n_max) + 1, 0.0);
  for (long long m = 1; m <= n_max; ++m) out[static_cast<std::size_t>(m)] = w(m);
  return out;
}

WeightedSumTrace trace_vector(const LinearOperator& T, const LinearOperator* S, const LinearOperator* left,
                              const std::vector<double>& w, double p, const ComplexVector& y, long long n_max) {
  const double space = left ? left->space_exponent() : T.space_exponent();
  WeightedSumTrace out;
  out.sums.assign(static_cast<std::size_t>(n_max), 0.0);
  ComplexVector v = S ? S->apply(y) : y;
  // diagonal T: multiply by the cached symbol values
  ComplexVector d;
  if (T.kind() == OperatorKind::Diagonal) {
    d.resize(v.size());
    for (Eigen::Index j = 0; j < v.size(); ++j) d[j] = T.symbol().value_at(static_cast<std::uint64_t>(j) + 1);
  }
  double sum = 0.0;
  // split real arithmetic avoids the library complex multiply in the hot loop
  Eigen::ArrayXd vr = v.real().array();
  Eigen::ArrayXd vi = v.imag().array();
  const Eigen::ArrayXd dr = d.real().array();
  const Eigen::ArrayXd di = d.imag().array();
  for (long long m = 1; m <= n_max; ++m) {
    double nrm = 0.0;
    if (d.size() > 0) {
      double sq = 0.0;
      for (Eigen::Index j = 0; j < vr.size(); ++j) {
        double a = vr[j] * dr[j] - vi[j] * di[j];
        double b = vr[j] * di[j] + vi[j] * dr[j];
        // keep out of the subnormal range, which is slow and contributes nothing
        if (std::abs(a) < kTiny) a = 0.0;
        if (std::abs(b) < kTiny) b = 0.0;
        vr[j] = a;
        vi[j] = b;
        sq += a * a + b * b;
      }
      if (left) {
        v.real() = vr.matrix();
        v.imag() = vi.matrix();
        nrm = vector_norm(left->apply(v), space);
      } else if (space == 2.0) {
        nrm = std::sqrt(sq);
      } else {
        v.real() = vr.matrix();
        v.imag() = vi.matrix();
        nrm = vector_norm(v, space);
      }
    } else {
      v = T.apply(v);
      nrm = left ? vector_norm(left->apply(v), space) : vector_norm(v, space);
    }
    sum += w[static_cast<std::size_t>(m)] * (p == 2.0 ? nrm * nrm : std::pow(nrm, p));
    if (!(sum <= kOverflow)) {
      out.diverged = true;
      out.diverged_at = m;
      std::fill(out.sums.begin() + (m - 1), out.sums.end(), std::numeric_limits<double>::infinity());
      return out;
    }
    out.sums[static_cast<std::size_t>(m - 1)] = sum;
    if (nrm == 0.0 && d.size() > 0) {
      std::fill(out.sums.begin() + m, out.sums.end(), sum);
      return out;
    }
  }
  return out;
}

/// e_j probe for diagonal T and diagonal S: the trace is a scalar series.
WeightedSumTrace trace_unit(Complex d, Complex s, const std::vector<double>& w, double p, long long n_max) {
  WeightedSumTrace out;
  out.sums.assign(static_cast<std::size_t>(n_max), 0.0);
  const double x = std::pow(std::abs(d), p);
  double term = std::pow(std::abs(s), p);
  double sum = 0.0;
  for (long long m = 1; m <= n_max; ++m) {
    term *= x;
    sum += w[static_cast<std::size_t>(m)] * term;
    if (!(sum <= kOverflow)) {
      out.diverged = true;
      out.diverged_at = m;
      std::fill(out.sums.begin() + (m - 1), out.sums.end(), std::numeric_limits<double>::infinity());
      return out;
    }
    out.sums[static_cast<std::size_t>(m - 1)] = sum;
  }
  return out;
}

bool diagonal_pair(const LinearOperator& T, const LinearOperator* S, const LinearOperator* left) {
  return !left && T.kind() == OperatorKind::Diagonal && (!S || S->kind() == OperatorKind::Diagonal);
}

/// Traces for every probe: random vectors first, then e_1..e_dim when the
/// pair is diagonal.
std::vector<WeightedSumTrace> all_traces(const LinearOperator& T, const LinearOperator* S,
                                         const LinearOperator* left, const std::vector<double>& w, double p,
                                         long long n_max, const ProbeSet& probes) {
  const std::size_t dim = T.finite() ? *T.dimension() : probes.dim;
  std::vector<ComplexVector> ys;
  for (int i = 0; i < probes.count; ++i) {
    ys.push_back(random_unit_vector(dim, probes.seed + static_cast<std::uint64_t>(i), T.space_exponent()));
  }
  const bool unit = diagonal_pair(T, S, left);
  const std::size_t total = ys.size() + (unit ? dim : 0);
  std::vector<WeightedSumTrace> out(total);
  parallel_for(total, [&](std::size_t i) {
    if (i < ys.size()) {
      out[i] = trace_vector(T, S, left, w, p, ys[i], n_max);
    } else {
      const std::uint64_t j = i - ys.size() + 1;
      const Complex d = T.symbol().value_at(j);
      const Complex s = S ? S->symbol().value_at(j) : Complex(1.0, 0.0);
      out[i] = trace_unit(d, s, w, p, n_max);
    }
  });
  return out;
}

double final_value(const WeightedSumTrace& t) { return t.sums.empty() ? 0.0 : t.sums.back(); }

SumToDecayReport sum_to_decay_impl(const LinearOperator& T, const LinearOperator* S, const Weight& weight, double p,
                                   long long n_max, const ProbeSet& probes) {
  if (!(p > 0.0)) fail(ErrorCode::InvalidArgument, "p must be positive");
  if (n_max < 16) fail(ErrorCode::InvalidArgument, "n_max must be at least 16");
  SumToDecayReport rep;
  rep.p = p;
  rep.seed = probes.seed;
  const LinearOperator Tt = truncated(T, probes.dim);
  const std::optional<LinearOperator> St = S ? std::optional<LinearOperator>(truncated(*S, probes.dim)) : std::nullopt;
  const LinearOperator* Sp = St ? &*St : nullptr;
  rep.dim = Tt.finite() ? *Tt.dimension() : probes.dim;

  const auto w = weight_table(weight, n_max);
  const auto traces = all_traces(Tt, Sp, nullptr, w, p, n_max, probes);
  rep.hypothesis_ok = true;
  for (const auto& t : traces) {
    rep.probe_sums.push_back(final_value(t));
    if (t.diverged) rep.hypothesis_ok = false;
    rep.C_hat = std::max(rep.C_hat, final_value(t));
  }
  if (!rep.hypothesis_ok) return rep;

  const DecayProfile powers = decay_profile(Sandwich{Tt, std::nullopt, std::nullopt}, n_max);
  for (const auto& s : powers.samples) rep.K = std::max(rep.K, s.norm);
  const auto F = partial_sums(weight, n_max);
  const DecayProfile d = decay_profile(Sandwich{Tt, std::nullopt, St}, n_max);
  const double rhs = rep.K * std::pow(rep.C_hat, 1.0 / p);
  for (const auto& s : d.samples) {
    const double lhs = s.norm * std::pow(F[static_cast<std::size_t>(s.n)], 1.0 / p);
    const double ratio = rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    rep.n.push_back(s.n);
    rep.ratios.push_back(ratio);
    rep.max_ratio = std::max(rep.max_ratio, ratio);
  }
  rep.pass = rep.max_ratio <= 1.0 + 1e-9;
  return rep;
}

}  // namespace

std::vector<double> partial_sums(const std::function<double(long long)>& w, long long n_max) {
  if (n_max < 0) fail(ErrorCode::InvalidArgument, "n_max must be non-negative");
  std::vector<double> F(static_cast<std::size_t>(n_max) + 1, 0.0);
  for (long long n = 1; n <= n_max; ++n) {
    F[static_cast<std::size_t>(n)] = F[static_cast<std::size_t>(n - 1)] + w(n);
  }
  return F;
}

WeightedSumTrace weighted_sum(const LinearOperator& T, const LinearOperator* S, const RVFunction& f, double p,
                              const ComplexVector& y, long long n_max, const LinearOperator* left) {
  if (n_max < 1) fail(ErrorCode::InvalidArgument, "n_max must be at least 1");
  if (!(p > 0.0)) fail(ErrorCode::InvalidArgument, "p must be positive");
  const auto w = weight_table([&f](long long m) { return f(static_cast<double>(m)); }, n_max);
  return trace_vector(T, S, left, w, p, y, n_max);
}

std::vector<ComplexVector> summability_probes(const LinearOperator& T, const ProbeSet& probes) {
  const std::size_t dim = T.finite() ? *T.dimension() : probes.dim;
  std::vector<ComplexVector> out;
  for (int i = 0; i < probes.count; ++i) {
    out.push_back(random_unit_vector(dim, probes.seed + static_cast<std::uint64_t>(i), T.space_exponent()));
  }
  if (T.kind() == OperatorKind::Diagonal) {
    for (std::size_t j = 0; j < dim; ++j) out.push_back(ComplexVector::Unit(static_cast<Eigen::Index>(dim), j));
  }
  return out;
}

LinearOperator truncated(const LinearOperator& op, std::size_t n) {
  if (op.finite()) return op;
  if (n == 0) fail(ErrorCode::InvalidArgument, "truncation length must be positive");
  switch (op.kind()) {
    case OperatorKind::Diagonal: {
      std::vector<Complex> values(n);
      for (std::size_t j = 0; j < n; ++j) values[j] = op.symbol().value_at(j + 1);
      return LinearOperator::diagonal(DiagonalSymbol::explicit_values(std::move(values)), op.space_exponent());
    }
    case OperatorKind::RankOneFunctional: {
      std::vector<Complex> values(n);
      for (std::size_t j = 0; j < n; ++j) values[j] = op.symbol().value_at(j + 1);
      return LinearOperator::functional(DiagonalSymbol::explicit_values(std::move(values)), op.space_exponent());
    }
    default: return LinearOperator::dense(op.to_dense(n));
  }
}

SumToDecayReport sum_to_decay(const LinearOperator& T, const LinearOperator* S, const RVFunction& f, double p,
                              long long n_max, const ProbeSet& probes) {
  return sum_to_decay_impl(T, S, [&f](long long m) { return f(static_cast<double>(m)); }, p, n_max, probes);
}

DecayToSumReport decay_to_sum(const LinearOperator& T, const LinearOperator* S, const RVFunction& f,
                              const RVFunction& g, double p, long long n_max, const ProbeSet& probes,
                              long long window_lo) {
  if (!(p > 0.0)) fail(ErrorCode::InvalidArgument, "p must be positive");
  if (n_max < 16) fail(ErrorCode::InvalidArgument, "n_max must be at least 16");
  DecayToSumReport rep;
  rep.p = p;
  rep.seed = probes.seed;
  const auto Ffg = partial_sums([&](long long m) { return f(static_cast<double>(m)) * g(static_cast<double>(m)); },
                                n_max);
  const auto G = partial_sums([&](long long m) { return 1.0 / (static_cast<double>(m) * g(static_cast<double>(m))); },
                              n_max);

  const DecayProfile d = decay_profile(Sandwich{T, std::nullopt, S ? std::optional<LinearOperator>(*S) : std::nullopt},
                                       n_max);
  std::vector<double> dv;
  for (const auto& s : d.samples) dv.push_back(std::pow(s.norm, p) * Ffg[static_cast<std::size_t>(s.n)]);
  for (double v : dv) rep.decay_constant = std::max(rep.decay_constant, v);
  rep.decay_trend = classify_trend(dv);
  rep.decay_ok = rep.decay_trend == Trend::Stable;

  const LinearOperator Tt = truncated(T, probes.dim);
  const std::optional<LinearOperator> St = S ? std::optional<LinearOperator>(truncated(*S, probes.dim)) : std::nullopt;
  const auto w = weight_table([&f](long long m) { return f(static_cast<double>(m)); }, n_max);
  const auto traces = all_traces(Tt, St ? &*St : nullptr, nullptr, w, p, n_max, probes);

  for (long long n = 2; n <= n_max; n *= 2) rep.checkpoints.push_back(n);
  if (rep.checkpoints.back() != n_max) rep.checkpoints.push_back(n_max);
  std::vector<double> window;
  for (long long n : rep.checkpoints) {
    double c = 0.0;
    for (const auto& t : traces) c = std::max(c, t.sums[static_cast<std::size_t>(n - 1)]);
    rep.C_hat.push_back(c / G[static_cast<std::size_t>(n)]);
    rep.C_hat_log.push_back(c / std::log(static_cast<double>(n)));
    if (n >= window_lo) window.push_back(rep.C_hat.back());
  }
  for (double c : rep.C_hat) rep.C_hat_sup = std::max(rep.C_hat_sup, c);
  rep.C_hat_trend = classify_trend(window);

  if (g.name().rfind("const", 0) == 0 && g(1.0) == 1.0) {
    bool ok = true;
    for (long long n = 2; n <= n_max; ++n) {
      if (G[static_cast<std::size_t>(n)] > 2.0 * std::log(static_cast<double>(n) + 1.0)) ok = false;
    }
    rep.harmonic_bound_ok = ok;
  }
  rep.pass = rep.decay_ok && rep.C_hat_trend == Trend::Stable && rep.harmonic_bound_ok.value_or(true);
  return rep;
}

SeriesValue power_weighted_geometric(double beta, double x, double rel_tol) {
  if (!(x >= 0.0 && x < 1.0)) fail(ErrorCode::Domain, "series needs 0 <= x < 1");
  SeriesValue out;
  if (x == 0.0) return out;
  const double lx = std::log(x);
  auto term = [&](double n) { return beta == 0.0 ? std::exp(n * lx) : std::exp(beta * std::log(n) + n * lx); };
  Accumulator acc;
  constexpr long long kMaxTerms = 2'000'000'000LL;
  double t = x;  // n^beta x^n at n = 1
  for (long long n = 1; n <= kMaxTerms; ++n) {
    acc.add(t);
    const double nn = static_cast<double>(n);
    const double next = beta == 0.0 ? t * x : term(nn + 1.0);
    if ((n & 63) == 0 || next < 1e-3 * acc.value()) {
      // consecutive term ratio beyond n is at most rho
      const double rho = x * (beta > 0.0 ? std::pow((nn + 2.0) / (nn + 1.0), beta) : 1.0);
      if (rho < 1.0) {
        const double tail = next / (1.0 - rho);
        if (tail <= rel_tol * acc.value()) {
          out.value = acc.value();
          out.tail_bound = tail;
          out.terms = n;
          return out;
        }
      }
    }
    t = next;
  }
  fail(ErrorCode::UnboundedTruncation, "series did not reach its tail tolerance");
}

MultOpReport mult_op_summability_equiv(const DiagonalSymbol& symbol, double alpha, double p, double q,
                                       long long n_max, const ProbeSet& probes, std::size_t scalar_points) {
  if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
  if (!(q >= 1.0 && p >= 1.0)) fail(ErrorCode::InvalidArgument, "need p, q >= 1");
  if (q > p) fail(ErrorCode::Hypothesis, "need q <= p: the averaging step requires p / q >= 1");
  MultOpReport rep;
  rep.alpha = alpha;
  rep.p = p;
  rep.q = q;
  rep.beta = alpha * p - 1.0;
  rep.seed = probes.seed;
  const LinearOperator T = LinearOperator::diagonal(symbol, q);

  // (a) Stolz containment, c estimated from the symbol
  const StolzReport probe = stolz_containment(T, StolzDomain{1.0 / alpha, 2.0});
  rep.c = std::max(2.0, probe.max_ratio);
  rep.containment = stolz_containment(T, StolzDomain{1.0 / alpha, rep.c});

  // (b) scalar bound
  const SeriesValue c1 = power_weighted_geometric(rep.beta, std::exp(-p));
  rep.C1 = c1.value + c1.tail_bound;
  rep.C2 = std::exp(p) * boost::math::tgamma(rep.beta + 1.0) * std::pow(2.0 / p, rep.beta + 1.0);
  rep.C3 = std::max(rep.C1, std::pow(rep.c, alpha * p) * rep.C2);
  std::vector<std::uint64_t> js;
  const std::uint64_t top = symbol.length() ? *symbol.length() : 10'000;
  for (std::size_t i = 0; i < scalar_points && js.size() < scalar_points; ++i) {
    const double t = scalar_points > 1 ? static_cast<double>(i) / static_cast<double>(scalar_points - 1) : 0.0;
    auto j = static_cast<std::uint64_t>(std::floor(std::pow(static_cast<double>(top), t)));
    if (!js.empty()) j = std::max(j, js.back() + 1);
    if (j > top && symbol.length()) break;
    js.push_back(j);
  }
  std::vector<double> vals(js.size());
  std::vector<double> tails(js.size());
  parallel_for(js.size(), [&](std::size_t i) {
    const Complex l = symbol.value_at(js[i]);
    const double gap = std::abs(1.0 - l);
    if (gap == 0.0) return;
    const double m = std::abs(l);
    if (!(m < 1.0)) {
      vals[i] = std::numeric_limits<double>::infinity();
      return;
    }
    const SeriesValue s = power_weighted_geometric(rep.beta, std::pow(m, p));
    const double scale = std::pow(gap, p);
    vals[i] = scale * (s.value + s.tail_bound);
    tails[i] = scale * s.tail_bound;
  });
  rep.scalar_points = js.size();
  for (std::size_t i = 0; i < vals.size(); ++i) {
    rep.scalar_max = std::max(rep.scalar_max, vals[i]);
    rep.scalar_max_tail = std::max(rep.scalar_max_tail, tails[i]);
  }
  rep.scalar_ok = rep.scalar_max <= rep.C3;

  // (c) statement (ii) on probes, truncated to probes.dim coordinates
  const double beta = rep.beta;
  const Weight weight = [beta](long long m) { return std::pow(static_cast<double>(m), beta); };
  const LinearOperator Tt = truncated(T, probes.dim);
  const LinearOperator St = Tt.identity_minus();
  const auto w = weight_table(weight, n_max);
  const auto traces = all_traces(Tt, &St, nullptr, w, p, n_max, probes);
  bool diverged = false;
  for (std::size_t i = 0; i < static_cast<std::size_t>(probes.count) && i < traces.size(); ++i) {
    rep.probe_sums.push_back(final_value(traces[i]));
    rep.C_hat = std::max(rep.C_hat, final_value(traces[i]));
    diverged = diverged || traces[i].diverged;
  }
  rep.sums_ok = !diverged && rep.C_hat <= rep.C3 * (1.0 + 1e-9);

  // (d) statement (i) on the full operator and the round trip (ii) => (i)
  rep.decay = decay_profile(Sandwich{T, std::nullopt, T.identity_minus()}, n_max);
  if (rep.decay.fit) {
    rep.decay_exponent = rep.decay.fit->slope;
    rep.decay_ok = rep.decay_exponent <= -alpha + 0.02;
  }
  rep.round_trip = sum_to_decay_impl(Tt, &St, weight, p, n_max, probes);

  const bool summable = rep.containment.member && rep.scalar_ok && rep.sums_ok;
  rep.equivalent = summable == rep.decay_ok;
  rep.pass = summable && rep.decay_ok && rep.round_trip.pass;
  return rep;
}

SumToResolventReport sum_to_resolvent(const LinearOperator& T, const LinearOperator* S1, const LinearOperator* S2,
                                      const RVFunction& f, double p, int k, const SpectralGrid& grid,
                                      long long n_max, const ProbeSet& probes) {
  if (p == 1.0) fail(ErrorCode::Unsupported, "p = 1 is outside the transfer to resolvent estimates (needs p > 1)");
  if (!(p > 1.0)) fail(ErrorCode::InvalidArgument, "p must exceed 1");
  if (!(static_cast<double>(k) > (f.alpha() + 1.0) / p)) {
    fail(ErrorCode::Hypothesis, "resolvent power k must exceed (alpha + 1) / p (k = " + std::to_string(k) +
                                    ", alpha = " + std::to_string(f.alpha()) + ")");
  }
  grid.validate();
  SumToResolventReport rep;
  rep.p = p;
  rep.q = p / (p - 1.0);
  rep.k = k;
  SpectralGrid g = grid;
  g.j_min = std::max(g.j_min, 1);
  const GrowthProfile prof = resolvent_sweep(T, S2, k, g, S1);
  std::vector<double> values;
  for (const auto& s : prof.samples) {
    const double u = std::pow(s.r, rep.q) - 1.0;
    rep.radii.push_back(s.r);
    values.push_back(s.sup_norm * std::exp((k - 1.0 / p) * std::log(u) + f.log_value(1.0 / u) / p));
  }
  if (prof.truncated) values.push_back(std::numeric_limits<double>::infinity());
  for (double v : values) rep.weighted.sup = std::max(rep.weighted.sup, v);
  rep.weighted.trend = classify_trend(values);
  rep.weighted.values = std::move(values);

  const LinearOperator Tt = truncated(T, probes.dim);
  std::optional<LinearOperator> S1t;
  std::optional<LinearOperator> S2t;
  if (S1) S1t = truncated(*S1, probes.dim);
  if (S2) S2t = truncated(*S2, probes.dim);
  const auto w = weight_table([&f](long long m) { return f(static_cast<double>(m)); }, n_max);
  const auto traces = all_traces(Tt, S2t ? &*S2t : nullptr, S1t ? &*S1t : nullptr, w, p, n_max, probes);
  std::vector<double> running;
  for (long long n = 2; n <= n_max; n *= 2) {
    double c = 0.0;
    for (const auto& t : traces) c = std::max(c, t.sums[static_cast<std::size_t>(n - 1)]);
    running.push_back(c);
  }
  for (const auto& t : traces) rep.hypothesis_sum = std::max(rep.hypothesis_sum, final_value(t));
  rep.hypothesis_trend = classify_trend(running);
  rep.pass = rep.weighted.trend == Trend::Stable && rep.hypothesis_trend != Trend::Growing;
  return rep;
}

}  // namespace semidecay
