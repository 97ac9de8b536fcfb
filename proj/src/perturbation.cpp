#include "semidecay/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/LU>

#include "semidecay/parallel.hpp"

namespace semidecay {

namespace {

constexpr double kSpotSlack = 1e-6;

DenseMatrix finite_matrix(const LinearOperator& op, const char* name) {
  if (!op.finite()) fail(ErrorCode::Unsupported, std::string("SMW needs a finite ") + name);
  return op.to_dense(*op.dimension());
}

}  // namespace

SmwResult smw_resolvent(const LinearOperator& A, const LinearOperator& B, const LinearOperator& C, Complex lambda,
                        const ComplexVector& x) {
  const DenseMatrix a = finite_matrix(A, "A");
  const DenseMatrix b = finite_matrix(B, "B");
  const DenseMatrix c = finite_matrix(C, "C");
  const Eigen::Index n = a.rows();
  if (a.cols() != n || b.rows() != n || c.cols() != n || c.rows() != b.cols() || x.size() != n) {
    fail(ErrorCode::DimensionMismatch, "SMW needs A n x n, B n x m, C m x n and x of length n");
  }
  const DenseMatrix shifted = lambda * DenseMatrix::Identity(n, n) - a;
  Eigen::PartialPivLU<DenseMatrix> lu(shifted);
  if (!(lu.rcond() > 1e-14)) fail(ErrorCode::Hypothesis, "lambda lies in the spectrum of A");
  const ComplexVector y = lu.solve(x);
  const DenseMatrix w = lu.solve(b);
  const DenseMatrix inner = DenseMatrix::Identity(c.rows(), c.rows()) - c * w;
  const ComplexVector rhs = c * y;
  Eigen::PartialPivLU<DenseMatrix> inner_lu(inner);
  const ComplexVector z = inner_lu.solve(rhs);

  SmwResult out;
  out.inner_norm = spectral_norm(c * w);
  const double scale = std::max(rhs.norm(), 1e-300);
  out.inner_residual = rhs.size() == 0 ? 0.0 : (inner * z - rhs).norm() / scale;
  if (!(inner_lu.rcond() > 1e-14) || !(out.inner_residual < 1e-10) || !z.allFinite()) {
    fail(ErrorCode::Hypothesis, "SMW hypothesis violated: 1 is not in the resolvent set of C R(lambda,A) B "
                                "(inner residual " + std::to_string(out.inner_residual) + ")");
  }
  out.value = y + w * z;
  const DenseMatrix full = shifted - b * c;
  out.identity_residual = (full * out.value - x).norm() / std::max(x.norm(), 1e-300);
  if (!(out.identity_residual <= 1e-9)) {
    fail(ErrorCode::Hypothesis, "SMW output misses the resolvent identity (residual " +
                                    std::to_string(out.identity_residual) + ")");
  }
  return out;
}

DeltaEstimate estimate_delta_hat(const LinearOperator& T, const LinearOperator& D, const SpectralGrid& grid) {
  grid.validate();
  SpectralGrid outer = grid;
  outer.j_min = 0;
  outer.j_max = 0;
  DeltaEstimate est;
  for (const GrowthProfile& g : {resolvent_sweep(T, &D, 1, outer), resolvent_sweep(T, &D, 1, grid)}) {
    for (const auto& s : g.samples) {
      if (s.sup_norm > est.value || est.r == 0.0) est = {s.sup_norm, s.r, s.theta};
    }
    if (g.truncated) est.value = std::numeric_limits<double>::infinity();
  }
  return est;
}

RobustnessReport perturbation_robustness(const PerturbationSetup& setup, const RVFunction& f, int k,
                                         const SpectralGrid& grid, long long n_max, int probes,
                                         std::uint64_t seed) {
  if (k < 1) fail(ErrorCode::InvalidArgument, "k must be at least 1");
  if (probes < 1) fail(ErrorCode::InvalidArgument, "need at least one probe");
  grid.validate();
  const LinearOperator& T = setup.T;
  RobustnessReport rep;
  rep.commutator = commutator_norm(T, setup.D, 64, 20, seed);
  if (rep.commutator && *rep.commutator > 1e-10) {
    rep.flags.emplace_back("T and D do not commute on the probes");
  }
  rep.delta = estimate_delta_hat(T, setup.D, grid);
  rep.hypothesis_ok = rep.delta.value < 1.0 && (!rep.commutator || *rep.commutator <= 1e-10);
  if (rep.delta.value >= 1.0) rep.flags.emplace_back("delta_hat >= 1: no robustness claim");
  if (!rep.hypothesis_ok) return rep;
  rep.flags.emplace_back("delta_hat is grid-certified only");
  rep.blowup = std::pow(1.0 - rep.delta.value, -k);
  if (rep.blowup > 10.0) rep.flags.emplace_back("large blow-up factor (1 - delta_hat)^{-k}");

  rep.zero_perturbation = operator_norm(setup.D).value == 0.0;
  const LinearOperator TD = rep.zero_perturbation ? T : T.plus(setup.D);

  // integral condition on both operators
  rep.gsf_base = gsf_integral_check(T, grid, {});
  rep.gsf_perturbed = gsf_integral_check(TD, grid, {});
  const double gb = rep.gsf_base->constant;
  const double gp = rep.gsf_perturbed->constant;
  rep.gsf_ratio = gb > 0.0 ? gp / gb : (gp == 0.0 ? 1.0 : std::numeric_limits<double>::infinity());
  const double gsf_limit = std::pow(1.0 - rep.delta.value, -2.0) * (1.0 + kSpotSlack);
  rep.gsf_ok = rep.gsf_ratio <= gsf_limit && rep.gsf_perturbed->trend != Trend::Growing;

  // decay exponents
  rep.decay_base = decay_profile(Sandwich{T, std::nullopt, setup.S}, n_max);
  rep.decay_perturbed = decay_profile(Sandwich{TD, std::nullopt, setup.S}, n_max);
  if (rep.decay_base.fit && rep.decay_perturbed.fit) {
    rep.exponent_gap = std::abs(rep.decay_base.fit->slope - rep.decay_perturbed.fit->slope);
    rep.exponent_ok = rep.exponent_gap <= 0.05;
  } else {
    rep.exponent_ok = !rep.decay_base.fit && !rep.decay_perturbed.fit;
    if (!rep.exponent_ok) rep.flags.emplace_back("decay exponent defined for one operator only");
  }
  auto weighted = [&f](const DecayProfile& d) {
    SideReport s;
    for (const auto& smp : d.samples) {
      const double v = f(static_cast<double>(smp.n)) * smp.norm;
      s.values.push_back(v);
      s.sup = std::max(s.sup, v);
    }
    s.trend = classify_trend(s.values);
    return s;
  };
  rep.decay_side_base = weighted(rep.decay_base);
  rep.decay_side_perturbed = weighted(rep.decay_perturbed);

  // spot checks of the k-th resolvent bound
  const std::size_t dim = T.finite() ? *T.dimension() : 64;
  std::vector<ComplexVector> ys;
  for (int i = 0; i < probes; ++i) ys.push_back(random_unit_vector(dim, seed + 1000 + static_cast<std::uint64_t>(i)));
  std::vector<Complex> points;
  for (double r : grid.radii()) {
    for (double theta : {0.0, 0.5 * kPi, kPi, 1.5 * kPi, r - 1.0}) points.push_back(std::polar(r, theta));
  }
  if (rep.delta.r > 1.0) points.push_back(std::polar(rep.delta.r, rep.delta.theta));
  std::vector<double> ratio(points.size(), 0.0);
  std::vector<double> ratio_plain(points.size(), 0.0);
  parallel_for(points.size(), [&](std::size_t i) {
    for (const auto& y : ys) {
      const ComplexVector sy = setup.S ? setup.S->apply(y) : y;
      const double base = resolvent_apply(T, points[i], k, sy).norm();
      const double pert = resolvent_apply(TD, points[i], k, sy).norm();
      if (base > 0.0) ratio[i] = std::max(ratio[i], pert / base);
      const double base1 = resolvent_apply(T, points[i], 1, y).norm();
      const double pert1 = resolvent_apply(TD, points[i], 1, y).norm();
      if (base1 > 0.0) ratio_plain[i] = std::max(ratio_plain[i], pert1 / base1);
    }
  });
  rep.spot_points = points.size() * ys.size();
  for (std::size_t i = 0; i < points.size(); ++i) {
    rep.spot_max_ratio = std::max(rep.spot_max_ratio, ratio[i]);
    rep.spot_max_ratio_plain = std::max(rep.spot_max_ratio_plain, ratio_plain[i]);
  }
  rep.spot_ok = rep.spot_max_ratio <= rep.blowup * (1.0 + kSpotSlack) &&
                rep.spot_max_ratio_plain <= (1.0 / (1.0 - rep.delta.value)) * (1.0 + kSpotSlack);

  rep.pass = rep.gsf_ok && rep.exponent_ok && rep.spot_ok;
  return rep;
}

}  // namespace semidecay
