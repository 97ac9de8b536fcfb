#include "semidecay/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <unsupported/Eigen/Polynomials>

namespace semidecay {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFarIndex = 1e15;
constexpr std::uint64_t kDirectSumSpan = std::uint64_t{1} << 16;

using Poly = std::vector<double>;  // coefficients, lowest degree first

Poly poly_mul(const Poly& a, const Poly& b) {
  Poly out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t k = 0; k < b.size(); ++k) out[i + k] += a[i] * b[k];
  }
  return out;
}

void poly_add_into(Poly& acc, const Poly& b) {
  if (acc.size() < b.size()) acc.resize(b.size(), 0.0);
  for (std::size_t i = 0; i < b.size(); ++i) acc[i] += b[i];
}

/// Real parts of the roots with positive real part.
std::vector<double> positive_roots(Poly p) {
  double biggest = 0.0;
  for (double c : p) biggest = std::max(biggest, std::abs(c));
  if (biggest == 0.0) return {};
  while (p.size() > 1 && std::abs(p.back()) <= 1e-13 * biggest) p.pop_back();
  std::vector<double> out;
  const std::size_t degree = p.size() - 1;
  if (degree == 0) return out;
  if (degree == 1) {
    out.push_back(-p[0] / p[1]);
  } else if (degree == 2) {
    const Complex disc = std::sqrt(Complex(p[1] * p[1] - 4.0 * p[2] * p[0], 0.0));
    // Stable form: avoid cancellation between -b and the root of the discriminant.
    const Complex qq = -0.5 * (Complex(p[1], 0.0) + (p[1] >= 0 ? disc : -disc));
    if (std::abs(qq) > 0.0) {
      out.push_back((qq / p[2]).real());
      out.push_back((Complex(p[0], 0.0) / qq).real());
    } else {
      out.push_back(0.0);
    }
  } else {
    Eigen::VectorXd coeffs(static_cast<Eigen::Index>(p.size()));
    for (std::size_t i = 0; i < p.size(); ++i) coeffs[static_cast<Eigen::Index>(i)] = p[i];
    Eigen::PolynomialSolver<double, Eigen::Dynamic> solver;
    solver.compute(coeffs);
    for (Eigen::Index i = 0; i < solver.roots().size(); ++i) out.push_back(solver.roots()[i].real());
  }
  out.erase(std::remove_if(out.begin(), out.end(), [](double u) { return !(u > 0.0) || !std::isfinite(u); }),
            out.end());
  return out;
}

struct AffineTerm {
  Complex a;
  Complex b;
  double e;
};

/// scale * u^p * prod |a_i + b_i u|^{e_i} * log(e + j)^{-q},  u = j^{-gamma}
struct PolyForm {
  double gamma = 1.0;
  double log_scale = 0.0;
  double p = 0.0;
  double q = 0.0;
  std::vector<AffineTerm> terms;
  bool zero = false;

  // Both evaluators take x = log j so that huge indices stay finite.
  double log_nonlog_x(double x) const {
    const double log_u = -gamma * x;
    const double u = std::exp(log_u);
    double v = log_scale;
    if (p != 0.0) v += p * log_u;
    for (const auto& t : terms) {
      const double m = std::abs(t.a + t.b * u);
      if (m == 0.0) return t.e > 0 ? -kInf : kInf;
      v += t.e * std::log(m);
    }
    return v;
  }

  double log_factor_x(double x) const {
    if (q == 0.0) return 0.0;
    const double log_e_plus_t = x > 40.0 ? x + std::log1p(kEuler * std::exp(-x)) : std::log(kEuler + std::exp(x));
    return -q * std::log(log_e_plus_t);
  }

  double log_value_x(double x) const { return log_nonlog_x(x) + log_factor_x(x); }
  double log_value(double j) const { return log_value_x(std::log(j)); }

  /// Limit of the non-logarithmic part as j -> infinity (log scale).
  double log_nonlog_limit() const {
    if (p > 0.0) return -kInf;
    if (p < 0.0) return kInf;
    double v = log_scale;
    for (const auto& t : terms) v += t.e * std::log(std::abs(t.a));
    return v;
  }

  double log_limit() const {
    const double g = log_nonlog_limit();
    if (g == -kInf) return -kInf;
    if (q > 0.0) return -kInf;
    if (q < 0.0) return kInf;
    return g;
  }

  /// Roots in u of p_eff * prod Q_i + u * sum_i e_i L_i prod_{l != i} Q_l,
  /// i.e. of d/du [p_eff log u + sum_i e_i log|a_i + b_i u|] = 0 times u prod Q.
  std::vector<double> critical_u(double p_eff) const {
    Poly prod{1.0};
    std::vector<Poly> quad;
    std::vector<Poly> lin;
    for (const auto& t : terms) {
      const double ab = (std::conj(t.a) * t.b).real();
      quad.push_back({std::norm(t.a), 2.0 * ab, std::norm(t.b)});
      lin.push_back({ab, std::norm(t.b)});
      prod = poly_mul(prod, quad.back());
    }
    Poly total = prod;
    for (double& c : total) c *= p_eff;
    for (std::size_t i = 0; i < terms.size(); ++i) {
      Poly piece{0.0, terms[i].e * lin[i][0], terms[i].e * lin[i][1]};
      for (std::size_t l = 0; l < terms.size(); ++l) {
        if (l != i) piece = poly_mul(piece, quad[l]);
      }
      poly_add_into(total, piece);
    }
    auto roots = positive_roots(total);
    // Real zeros of a factor are poles (e < 0) or zeros of the kernel; either
    // way monotonicity can change there.
    for (const auto& t : terms) {
      if (std::abs(t.b) == 0.0) continue;
      const Complex z = -t.a / t.b;
      if (z.real() > 0.0 && std::abs(z.imag()) <= 1e-12 * std::abs(z)) roots.push_back(z.real());
    }
    return roots;
  }

  double index_of(double u) const { return std::pow(u, -1.0 / gamma); }
};

std::optional<PolyForm> build_polyform(double scale, const std::vector<KernelFactor>& factors) {
  PolyForm pf;
  if (scale < 0.0) fail(ErrorCode::InvalidArgument, "kernel scale must be non-negative");
  if (scale == 0.0) {
    pf.zero = true;
    return pf;
  }
  pf.log_scale = std::log(scale);
  double pure_index_power = 0.0;
  std::optional<double> gamma;
  bool ok = true;

  auto handle = [&](Complex a, Complex b, double g, double log_power, double e) {
    if (e == 0.0) return;
    if (b == Complex(0.0, 0.0)) {
      if (a == Complex(0.0, 0.0)) {
        if (e > 0.0) {
          pf.zero = true;
          return;
        }
        fail(ErrorCode::Divergence, "kernel has a vanishing factor with negative exponent");
      }
      pf.log_scale += e * std::log(std::abs(a));
      return;
    }
    if (a == Complex(0.0, 0.0)) {
      pf.log_scale += e * std::log(std::abs(b));
      pure_index_power += e * g;
      pf.q += e * log_power;
      return;
    }
    if (log_power != 0.0 || (gamma && *gamma != g)) {
      ok = false;
      return;
    }
    gamma = g;
    pf.terms.push_back({a, b, e});
  };

  for (const auto& f : factors) {
    if (!ok) break;
    if (!f.shifted) {
      const auto forms = f.symbol.factors();
      if (!forms || f.symbol.length()) return std::nullopt;
      for (const auto& form : *forms) handle(form.offset, -form.slope, form.gamma, form.log_power, f.exponent);
    } else {
      const auto form = f.symbol.affine_form();
      if (!form || f.symbol.length()) return std::nullopt;
      handle(f.shift - form->offset, form->slope, form->gamma, form->log_power, f.exponent);
    }
  }
  if (!ok) return std::nullopt;
  if (pf.q < 0.0) return std::nullopt;
  pf.gamma = gamma.value_or(1.0);
  pf.p = pure_index_power / pf.gamma;
  return pf;
}

struct Candidates {
  std::set<std::uint64_t> indices;
  double far_log = -kInf;  // continuous values at candidates beyond kFarIndex
  std::uint64_t last = 0;
};

Candidates integer_candidates(const PolyForm& pf, std::uint64_t j_lo) {
  Candidates c;
  c.indices.insert(j_lo);
  c.last = j_lo;
  for (double u : pf.critical_u(pf.p)) {
    const double j = pf.index_of(u);
    if (!std::isfinite(j) || j > kFarIndex) {
      if (std::isfinite(j)) c.far_log = std::max(c.far_log, pf.log_nonlog_x(std::log(j)));
      continue;
    }
    if (j + 1.0 < static_cast<double>(j_lo)) continue;
    const auto lo = static_cast<std::uint64_t>(std::max(static_cast<double>(j_lo), std::floor(j) - 1.0));
    const auto hi = static_cast<std::uint64_t>(std::ceil(j) + 1.0);
    for (std::uint64_t i = lo; i <= hi; ++i) c.indices.insert(i);
    c.last = std::max(c.last, hi);
  }
  return c;
}

KernelSup polyform_sup(const PolyForm& pf, const KernelOptions& options) {
  KernelSup out;
  out.exact = true;
  if (pf.zero) {
    out.method = "closed-form (zero kernel)";
    out.argmax = options.first_index;
    return out;
  }
  const std::uint64_t j_lo = options.first_index;
  const double limit = pf.log_limit();
  if (limit == kInf) fail(ErrorCode::Divergence, "kernel grows without bound as j -> infinity");
  const Candidates cand = integer_candidates(pf, j_lo);

  if (pf.q == 0.0) {
    double best = -kInf;
    for (std::uint64_t j : cand.indices) {
      const double v = pf.log_value(static_cast<double>(j));
      if (v > best) {
        best = v;
        out.argmax = j;
      }
    }
    if (limit > best) {
      best = limit;
      out.argmax = 0;
    }
    if (best == kInf) fail(ErrorCode::Divergence, "kernel has a pole at an integer index");
    out.value = std::exp(best);
    if (cand.far_log > best) {
      out.error = std::exp(cand.far_log) - out.value;
      out.exact = false;
    }
    out.method = "closed-form critical points";
    return out;
  }

  // Logarithmic factor: brute force past the last critical point of the
  // power part, then bound the monotone remainder.
  const std::uint64_t stop = std::min(cand.last + 2, options.log_brute_cap);
  double best = -kInf;
  for (std::uint64_t j = j_lo; j <= stop; ++j) {
    const double v = pf.log_value(static_cast<double>(j));
    if (v > best) {
      best = v;
      out.argmax = j;
    }
  }
  const double next = static_cast<double>(stop + 1);
  double tail_g = pf.log_nonlog_x(std::log(next));
  for (std::uint64_t j : cand.indices) {
    if (j > stop) tail_g = std::max(tail_g, pf.log_nonlog_x(std::log(static_cast<double>(j))));
  }
  tail_g = std::max({tail_g, pf.log_nonlog_limit(), cand.far_log});
  const double tail = tail_g + pf.log_factor_x(std::log(next));
  out.value = std::exp(best);
  if (tail > best) {
    out.error = std::exp(tail) - out.value;
    out.exact = false;
  }
  out.method = "brute force to last critical point, monotone tail";
  return out;
}

KernelSum polyform_sum(const PolyForm& pf, const KernelOptions& options) {
  KernelSum out;
  if (pf.zero) {
    out.exact = true;
    out.method = "closed-form (zero kernel)";
    return out;
  }
  const double decay = pf.gamma * pf.p;
  if (!(decay > 1.0 || (decay == 1.0 && pf.q > 1.0))) {
    fail(ErrorCode::Divergence, "kernel series diverges (decay exponent " + std::to_string(decay) + ")");
  }
  const std::uint64_t j_lo = options.first_index;
  const std::uint64_t last_direct = j_lo + kDirectSumSpan - 1;
  Accumulator acc;
  for (std::uint64_t j = j_lo; j <= last_direct; ++j) acc.add(std::exp(pf.log_value(static_cast<double>(j))));

  const double a = static_cast<double>(last_direct);
  const double xa = std::log(a);
  std::vector<double> splits;
  std::size_t interior_critical = 0;
  double tail_max_log = pf.log_value_x(xa);
  auto add_points = [&](double p_eff, bool count) {
    for (double u : pf.critical_u(p_eff)) {
      const double t = pf.index_of(u);
      if (!(t > a) || !std::isfinite(t)) continue;
      const double x = std::log(t);
      splits.push_back(x);
      if (count) {
        ++interior_critical;
        tail_max_log = std::max(tail_max_log, pf.log_nonlog_x(x) + pf.log_factor_x(xa));
      }
    }
  };
  add_points(pf.p, true);
  add_points(pf.p - 1.0 / pf.gamma, false);
  std::sort(splits.begin(), splits.end());
  splits.erase(std::unique(splits.begin(), splits.end()), splits.end());

  auto integrand = [&pf](double x) { return std::exp(pf.log_value_x(x) + x); };
  double integral = 0.0;
  double quad_error = 0.0;
  double left = xa;
  for (double x : splits) {
    if (x <= left) continue;
    double err = 0.0;
    integral += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, left, x, 15, 1e-13, &err);
    quad_error += err;
    left = x;
  }
  {
    boost::math::quadrature::exp_sinh<double> es;
    double err = 0.0;
    integral += es.integrate(integrand, left, kInf, 1e-13, &err);
    quad_error += err;
  }
  const double k_a = std::exp(pf.log_value_x(xa));
  out.value = acc.value() + integral - 0.5 * k_a;
  out.error = (static_cast<double>(interior_critical) + 1.5) * std::exp(tail_max_log) + quad_error;
  out.exact = false;
  out.method = "direct sum + log-variable quadrature tail";
  return out;
}

double generic_log_value(double log_scale, const std::vector<KernelFactor>& factors, std::uint64_t j) {
  double v = log_scale;
  for (const auto& f : factors) {
    if (f.exponent == 0.0) continue;
    const auto& pre = f.symbol.impl().prefix();
    const Complex s = j <= pre.size() ? pre[j - 1] : f.symbol.value_at(j);
    const double m = f.shifted ? std::abs(f.shift - s) : std::abs(s);
    if (m == 0.0) return f.exponent > 0 ? -kInf : kInf;
    v += f.exponent * std::log(m);
  }
  return v;
}

double generic_tail_log_bound(double log_scale, const std::vector<KernelFactor>& factors, std::uint64_t J) {
  double v = log_scale;
  for (const auto& f : factors) {
    if (f.exponent == 0.0) continue;
    const TailEnclosure enc = f.symbol.tail_enclosure(J);
    if (enc.empty) return -kInf;
    double upper;
    double lower;
    if (f.shifted) {
      const double d = std::abs(f.shift - enc.center);
      upper = d + enc.radius;
      lower = f.symbol.impl().tail_distance(f.shift, J);
    } else {
      upper = enc.max_modulus;
      lower = std::max(0.0, std::abs(enc.center) - enc.radius);
    }
    const double m = f.exponent > 0 ? upper : lower;
    if (m == 0.0) {
      if (f.exponent > 0) return -kInf;
      return kInf;
    }
    v += f.exponent * std::log(m);
  }
  return v;
}

}  // namespace

DiagonalKernel& DiagonalKernel::times(const DiagonalSymbol& symbol, double exponent) {
  factors_.push_back({symbol, exponent, false, {}});
  return *this;
}

DiagonalKernel& DiagonalKernel::times_shifted(Complex shift, const DiagonalSymbol& symbol, double exponent) {
  factors_.push_back({symbol, exponent, true, shift});
  return *this;
}

DiagonalKernel& DiagonalKernel::scale_by(double factor) {
  scale_ *= factor;
  return *this;
}

std::optional<std::uint64_t> DiagonalKernel::length() const {
  std::optional<std::uint64_t> len;
  for (const auto& f : factors_) {
    if (auto l = f.symbol.length()) len = len ? std::min(*len, *l) : *l;
  }
  return len;
}

double DiagonalKernel::at(std::uint64_t j) const {
  if (scale_ == 0.0) return 0.0;
  return std::exp(generic_log_value(std::log(scale_), factors_, j));
}

KernelSup DiagonalKernel::sup(const KernelOptions& options) const {
  if (options.first_index < 1) fail(ErrorCode::InvalidArgument, "kernel index starts at 1");
  if (auto pf = build_polyform(scale_, factors_)) return polyform_sup(*pf, options);

  KernelSup out;
  if (scale_ == 0.0) {
    out.exact = true;
    out.method = "closed-form (zero kernel)";
    return out;
  }
  const double log_scale = std::log(scale_);
  const auto len = length();
  std::uint64_t stop = len ? *len : options.brute_limit;
  if (len && *len < options.first_index) {
    out.exact = true;
    out.method = "empty range";
    return out;
  }
  // When every factor converges, k_j tends to the kernel at the limit
  // points, so the sup is at least that value.
  double limit = -kInf;
  if (!len) {
    limit = log_scale;
    for (const auto& f : factors_) {
      if (f.exponent == 0.0) continue;
      const auto pts = f.symbol.limit_points();
      if (pts.size() != 1) {
        limit = -kInf;
        break;
      }
      const double m = f.shifted ? std::abs(f.shift - pts[0]) : std::abs(pts[0]);
      limit += m == 0.0 ? (f.exponent > 0 ? -kInf : kInf) : f.exponent * std::log(m);
    }
    if (limit == kInf) fail(ErrorCode::Divergence, "kernel is unbounded along j -> infinity");
  }
  // Brute force in stages; stop as soon as the tail enclosure is dominated.
  double best = -kInf;
  double tail = kInf;
  std::uint64_t next_check = len ? stop : std::min<std::uint64_t>(stop, std::max<std::uint64_t>(1024, options.first_index));
  for (std::uint64_t j = options.first_index; j <= stop; ++j) {
    const double v = generic_log_value(log_scale, factors_, j);
    if (v > best) {
      best = v;
      out.argmax = j;
    }
    if (j == next_check && !len) {
      tail = generic_tail_log_bound(log_scale, factors_, j);
      if (tail <= std::max(best, limit) + 1e-13 || j == stop) {
        stop = j;
        break;
      }
      next_check = std::min(stop, next_check * 4);
    }
  }
  if (best == kInf) fail(ErrorCode::Divergence, "kernel has a pole at index " + std::to_string(out.argmax));
  if (len) {
    out.value = std::exp(best);
    out.exact = true;
    out.method = "exhaustive (finite symbol)";
    return out;
  }
  if (limit > best) {
    best = limit;
    out.argmax = 0;
  }
  out.value = std::exp(best);
  if (tail == kInf) {
    fail(ErrorCode::UnboundedTruncation,
         "no finite tail bound past index " + std::to_string(stop) + "; refusing to truncate the sup");
  }
  out.error = tail > best + 1e-13 ? std::exp(tail) - out.value : 0.0;
  out.exact = out.error == 0.0;
  out.method = "brute force to " + std::to_string(stop) + " + tail enclosure";
  return out;
}

KernelSum DiagonalKernel::sum(const KernelOptions& options) const {
  if (options.first_index < 1) fail(ErrorCode::InvalidArgument, "kernel index starts at 1");
  const auto len = length();
  if (len || scale_ == 0.0) {
    KernelSum out;
    out.exact = true;
    out.method = "direct (finite symbol)";
    if (scale_ == 0.0) return out;
    Accumulator acc;
    const double log_scale = std::log(scale_);
    for (std::uint64_t j = options.first_index; j <= *len; ++j) {
      acc.add(std::exp(generic_log_value(log_scale, factors_, j)));
    }
    out.value = acc.value();
    return out;
  }
  if (auto pf = build_polyform(scale_, factors_)) return polyform_sum(*pf, options);
  fail(ErrorCode::UnboundedTruncation, "infinite kernel series without a closed-form tail");
}

}  // namespace semidecay
