#include "semidecay/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "semidecay/asymptotics.hpp"
#include "semidecay/conditions.hpp"
#include "semidecay/parallel.hpp"
#include "semidecay/perturbation.hpp"
#include "semidecay/resolvent.hpp"
#include "semidecay/rvfunctions.hpp"
#include "semidecay/spec_io.hpp"
#include "semidecay/summability.hpp"
#include "text_util.hpp"

namespace semidecay {

namespace {

using nlohmann::ordered_json;
using Json = ordered_json;

Json num(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

Json num_list(const std::vector<double>& xs) {
  Json out = Json::array();
  for (double x : xs) out.push_back(num(x));
  return out;
}

Json complex_json(Complex z) { return Json::array({num(z.real()), num(z.imag())}); }

std::string fmt(double x) {
  if (!std::isfinite(x)) return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// CSV table with a fixed header.
class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : width_(header.size()) { line(header); }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != width_) fail(ErrorCode::Internal, "csv row width");
    line(cells);
  }
  std::string str() const { return out_.str(); }

 private:
  void line(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << "\n";
  }
  std::size_t width_;
  std::ostringstream out_;
};

class Plot {
 public:
  void add(double x, double y, const std::string& series) { rows_.row({fmt(x), fmt(y), series}); ++count_; }
  std::string str() const { return count_ ? rows_.str() : std::string(); }

 private:
  Csv rows_{{"x", "y", "series"}};
  std::size_t count_ = 0;
};

/// Parameter lookup that records every resolved value for the report.
class Params {
 public:
  Params(const std::map<std::string, std::string>& flags) : flags_(flags) {}

  void set_defaults(const std::map<std::string, std::string>& d) { defaults_ = d; }

  bool has(const std::string& key) const { return flags_.count(key) || defaults_.count(key); }

  std::string text(const std::string& key, const std::string& fallback) {
    const std::string v = lookup(key).value_or(fallback);
    used_[key] = v;
    return v;
  }
  std::string required(const std::string& key) {
    auto v = lookup(key);
    if (!v) fail(ErrorCode::InvalidArgument, "--" + key + " is required for this command");
    used_[key] = *v;
    return *v;
  }
  double number(const std::string& key, double fallback) {
    auto v = lookup(key);
    if (!v) {
      used_[key] = fmt(fallback);
      return fallback;
    }
    used_[key] = *v;
    return text::parse_double(*v, "--" + key);
  }
  long long integer(const std::string& key, long long fallback) {
    auto v = lookup(key);
    if (!v) {
      used_[key] = std::to_string(fallback);
      return fallback;
    }
    used_[key] = *v;
    return text::parse_int(*v, "--" + key);
  }
  Json config() const {
    Json out = Json::object();
    for (const auto& [k, v] : used_) out[k] = v;
    return out;
  }

 private:
  std::optional<std::string> lookup(const std::string& key) const {
    if (auto it = flags_.find(key); it != flags_.end()) return it->second;
    if (auto it = defaults_.find(key); it != defaults_.end()) return it->second;
    return std::nullopt;
  }
  const std::map<std::string, std::string>& flags_;
  std::map<std::string, std::string> defaults_;
  std::map<std::string, std::string> used_;
};

struct Context {
  explicit Context(const std::map<std::string, std::string>& flags) : params(flags) {}

  Params params;
  std::optional<OperatorBundle> bundle;
  Json result = Json::object();
  Csv* profile = nullptr;
  Plot plot;
  Verdict verdict = Verdict::Estimate;
  std::string label = "computed";

  const OperatorBundle& ops() const { return *bundle; }
  void set_profile(std::vector<std::string> header) {
    owned_profile = std::make_unique<Csv>(std::move(header));
    profile = owned_profile.get();
  }
  void judge(bool pass) {
    verdict = pass ? Verdict::Pass : Verdict::HypothesisFailed;
    label = pass ? "pass" : "fail";
  }
  void estimate(Trend t) {
    verdict = Verdict::Estimate;
    label = to_string(t);
  }
  std::unique_ptr<Csv> owned_profile;
};

const LinearOperator& require_role(const OperatorBundle& b, const char* role) {
  if (const auto* op = b.get(role)) return *op;
  fail(ErrorCode::InvalidArgument, b.source + ": operator role \"" + role + "\" is required for this command");
}

SpectralGrid grid_of(Params& p) { return SpectralGrid::parse(p.text("grid", "1:14:1024")); }

std::uint64_t seed_of(Params& p) { return static_cast<std::uint64_t>(p.integer("seed", 1)); }

int int_param(Params& p, const std::string& key, long long fallback, long long lo) {
  const long long v = p.integer(key, fallback);
  if (v < lo) fail(ErrorCode::InvalidArgument, "--" + key + " must be at least " + std::to_string(lo));
  return static_cast<int>(v);
}

/// Smallest integer strictly above x.
int next_integer_above(double x) { return static_cast<int>(std::floor(x)) + 1; }

Json trend_json(const SideReport& s) {
  return Json{{"sup", num(s.sup)}, {"trend", to_string(s.trend)}, {"values", num_list(s.values)}};
}

Json fit_json(const std::optional<FitResult>& f) {
  if (!f) return nullptr;
  return Json{{"slope", num(f->slope)}, {"intercept", num(f->intercept)}, {"residual", num(f->residual)},
              {"count", f->count}};
}

Json decay_json(const DecayProfile& d, bool with_samples = true) {
  Json out{{"method", d.method}, {"fit", fit_json(d.fit)}, {"flags", d.flags}};
  if (with_samples) {
    Json s = Json::array();
    for (const auto& x : d.samples) s.push_back(Json{{"n", x.n}, {"norm", num(x.norm)}, {"error", num(x.error)}});
    out["samples"] = s;
  }
  return out;
}

Json growth_json(const GrowthProfile& g) {
  Json s = Json::array();
  for (const auto& x : g.samples) {
    s.push_back(Json{{"r", num(x.r)}, {"sup_norm", num(x.sup_norm)}, {"theta", num(x.theta)},
                     {"n_theta", x.n_theta_used}, {"flags", x.flags}});
  }
  return Json{{"method", g.method}, {"truncated", g.truncated}, {"samples", s}};
}

Json condition_json(const ConditionReport& c) {
  Json rows = Json::array();
  for (const auto& r : c.rows) {
    rows.push_back(Json{{"k", r.k},
                        {"constant", num(r.constant)},
                        {"trend", to_string(r.trend)},
                        {"witness", Json{{"r", num(r.witness.r)}, {"theta", num(r.witness.theta)}, {"value", num(r.witness.value)}}},
                        {"values", num_list(r.values)}});
  }
  Json metrics = Json::object();
  for (const auto& [k, v] : c.metrics) metrics[k] = num(v);
  Json witnesses = Json::array();
  for (const auto& w : c.witnesses) witnesses.push_back(Json{{"r", num(w.r)}, {"theta", num(w.theta)}, {"value", num(w.value)}});
  return Json{{"condition", c.condition}, {"constant", num(c.constant)}, {"k", c.k},
              {"trend", to_string(c.trend)}, {"radii", num_list(c.radii)}, {"rows", rows},
              {"witnesses", witnesses}, {"metrics", metrics}, {"notes", c.notes}};
}

Json stolz_json(const StolzReport& s) {
  Json v = Json::array();
  for (std::size_t i = 0; i < s.violators.size() && i < 20; ++i) v.push_back(complex_json(s.violators[i]));
  return Json{{"delta", num(s.domain.delta)}, {"c", num(s.domain.c)}, {"member", s.member},
              {"points_checked", s.points_checked}, {"violator_count", s.violators.size()},
              {"violators", v}, {"max_ratio", num(s.max_ratio)}};
}

void decay_profile_csv(Context& cx, const DecayProfile& d, const std::string& series) {
  cx.set_profile({"n", "norm", "error"});
  for (const auto& s : d.samples) {
    cx.profile->row({std::to_string(s.n), fmt(s.norm), fmt(s.error)});
    cx.plot.add(static_cast<double>(s.n), s.norm, series);
  }
}

void condition_csv(Context& cx, const ConditionReport& c) {
  cx.set_profile({"k", "r", "value"});
  for (const auto& row : c.rows) {
    for (std::size_t i = 0; i < row.values.size() && i < c.radii.size(); ++i) {
      cx.profile->row({std::to_string(row.k), fmt(c.radii[i]), fmt(row.values[i])});
      cx.plot.add(c.radii[i] - 1.0, row.values[i], c.condition + "_k" + std::to_string(row.k));
    }
  }
}

std::vector<ComplexVector> probe_vectors(const LinearOperator& T, int count, std::size_t dim, std::uint64_t seed) {
  std::vector<ComplexVector> out;
  const std::size_t n = T.finite() ? *T.dimension() : dim;
  for (int i = 0; i < count; ++i) out.push_back(random_unit_vector(n, seed + static_cast<std::uint64_t>(i)));
  return out;
}

Sandwich sandwich_of(const OperatorBundle& b) { return Sandwich{b.T, b.S1, b.S}; }

// ---------------------------------------------------------------- commands

void cmd_powers(Context& cx) {
  auto& p = cx.params;
  const long long n_max = p.integer("n-max", 1 << 14);
  const int complement = int_param(p, "complement", 0, 0);
  const DecayProfile d = decay_profile(sandwich_of(cx.ops()), n_max, complement);
  cx.result = decay_json(d);
  decay_profile_csv(cx, d, "norm");
  if (d.fit) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "exponent %.4f", d.fit->slope);
    cx.label = buf;
  } else {
    cx.label = "no exponent";
  }
}

void cmd_resolvent_sweep(Context& cx) {
  auto& p = cx.params;
  const int k = int_param(p, "k", 1, 1);
  const SpectralGrid grid = grid_of(p);
  const auto& b = cx.ops();
  const GrowthProfile g = resolvent_sweep(b.T, b.get("S"), k, grid, b.get("S1"));
  cx.result = growth_json(g);
  std::size_t positive = 0;
  for (const auto& s : g.samples) positive += s.sup_norm > 0.0 && std::isfinite(s.sup_norm);
  cx.result["fit"] = positive >= 8 && positive == g.samples.size() ? fit_json(fit_exponent(g)) : Json(nullptr);
  cx.set_profile({"r", "sup_norm", "theta", "n_theta"});
  std::vector<double> scaled;
  for (const auto& s : g.samples) {
    cx.profile->row({fmt(s.r), fmt(s.sup_norm), fmt(s.theta), std::to_string(s.n_theta_used)});
    cx.plot.add(s.r - 1.0, s.sup_norm, "sup_norm");
    scaled.push_back(std::pow(s.r - 1.0, k) * s.sup_norm);
  }
  const Trend t = classify_trend(scaled);
  cx.result["kreiss_scaled"] = Json{{"values", num_list(scaled)}, {"trend", to_string(t)}};
  cx.label = g.truncated ? "truncated" : "computed";
}

void cmd_reconstruct(Context& cx) {
  auto& p = cx.params;
  const long long n_max = p.integer("n-max", 20);
  const int k = int_param(p, "k", 1, 1);
  const double r = p.number("r", 1.1);
  const int n_theta = int_param(p, "n-theta", 512, 1);
  const double tol = p.number("tol", 1e-8);
  const LinearOperator& T = cx.ops().T;
  if (!T.finite()) fail(ErrorCode::Unsupported, "reconstruct needs a finite-dimensional operator");
  const DenseMatrix t = T.to_dense();
  std::vector<double> errors(static_cast<std::size_t>(n_max + 1), 0.0);
  parallel_for(errors.size(), [&](std::size_t n) {
    DenseMatrix direct = DenseMatrix::Identity(t.rows(), t.cols());
    for (std::size_t i = 0; i < n; ++i) direct = direct * t;
    errors[n] = (reconstruct_power(T, static_cast<long long>(n), k, r, n_theta) - direct).cwiseAbs().maxCoeff();
  });
  double worst = 0.0;
  cx.set_profile({"n", "max_abs_error"});
  for (std::size_t n = 0; n < errors.size(); ++n) {
    worst = std::max(worst, errors[n]);
    cx.profile->row({std::to_string(n), fmt(errors[n])});
    cx.plot.add(static_cast<double>(n), errors[n], "max_abs_error");
  }
  cx.result = Json{{"k", k}, {"r", num(r)}, {"n_theta", n_theta}, {"max_abs_error", num(worst)},
                   {"tolerance", num(tol)}, {"errors", num_list(errors)}};
  cx.judge(worst <= tol);
}

void cmd_parseval(Context& cx) {
  auto& p = cx.params;
  const int k = int_param(p, "k", 1, 1);
  const double r = p.number("r", 2.0);
  const int n_theta = int_param(p, "n-theta", 4096, 1);
  const long long n_trunc = p.integer("n-max", 4096);
  const double tol = p.number("tol", 1e-8);
  const std::size_t dim = static_cast<std::size_t>(int_param(p, "dim", 64, 1));
  const std::uint64_t seed = seed_of(p);
  const auto& b = cx.ops();
  const std::size_t n = b.T.finite() ? *b.T.dimension() : dim;
  const ParsevalReport rep = parseval_check(b.T, b.get("S"), k, r, random_unit_vector(n, seed), n_theta, n_trunc);
  cx.result = Json{{"lhs", num(rep.lhs)}, {"rhs", num(rep.rhs)}, {"residual", num(rep.residual)},
                   {"tail_bound", num(rep.tail_bound)}, {"n_theta", rep.n_theta}, {"n_trunc", rep.n_trunc},
                   {"power_block", rep.power_block}, {"power_rate", num(rep.power_rate)}};
  cx.set_profile({"quantity", "value"});
  cx.profile->row({"lhs", fmt(rep.lhs)});
  cx.profile->row({"rhs", fmt(rep.rhs)});
  cx.profile->row({"residual", fmt(rep.residual)});
  cx.profile->row({"tail_bound", fmt(rep.tail_bound)});
  cx.judge(rep.residual < tol && rep.tail_bound < 1e-12);
}

void cmd_kreiss(Context& cx) {
  auto& p = cx.params;
  const int k_max = int_param(p, "k", 1, 1);
  const ConditionReport c = kreiss_constant(cx.ops().T, grid_of(p), k_max);
  cx.result = condition_json(c);
  condition_csv(cx, c);
  cx.estimate(c.trend);
}

void cmd_ritt(Context& cx) {
  auto& p = cx.params;
  const std::string variant = p.text("variant", "constant");
  const SpectralGrid grid = grid_of(p);
  const LinearOperator& T = cx.ops().T;
  ConditionReport c;
  if (variant == "constant") {
    c = ritt_constant(T, grid, p.integer("n-max", 1 << 12));
  } else if (variant == "power-resolvent") {
    c = ritt_power_resolvent_check(T, int_param(p, "k", 1, 1), grid);
  } else if (variant == "integral") {
    const int k = int_param(p, "k", 1, 1);
    const int probes = int_param(p, "probes", 0, 0);
    c = ritt_integral_check(T, k, grid, probe_vectors(T, probes, 256, seed_of(p)));
  } else {
    fail(ErrorCode::InvalidArgument, "--variant must be constant, power-resolvent or integral");
  }
  cx.result = condition_json(c);
  condition_csv(cx, c);
  cx.estimate(c.trend);
}

void cmd_rk(Context& cx) {
  auto& p = cx.params;
  const double alpha = p.number("alpha", 1.0);
  const double beta = p.number("beta", 0.0);
  const ConditionReport c = rk_bounded_check(cx.ops().T, alpha, beta, grid_of(p));
  cx.result = condition_json(c);
  condition_csv(cx, c);
  cx.estimate(c.trend);
}

void cmd_stolz(Context& cx) {
  auto& p = cx.params;
  const std::string variant = p.text("variant", "containment");
  const LinearOperator& T = cx.ops().T;
  if (variant == "containment") {
    const StolzDomain dom{p.number("delta", 1.0), p.number("c", 2.0)};
    dom.validate();
    const auto max_points = static_cast<std::uint64_t>(p.integer("j-max", static_cast<long long>(kDefaultJMax)));
    const StolzReport s = stolz_containment(T, dom, max_points);
    cx.result = stolz_json(s);
    cx.set_profile({"quantity", "value"});
    cx.profile->row({"member", s.member ? "1" : "0"});
    cx.profile->row({"points_checked", std::to_string(s.points_checked)});
    cx.profile->row({"max_ratio", fmt(s.max_ratio)});
    cx.verdict = s.member ? Verdict::Pass : Verdict::HypothesisFailed;
    cx.label = s.member ? "member" : "not member";
    return;
  }
  if (variant != "quasi-mult") fail(ErrorCode::InvalidArgument, "--variant must be containment or quasi-mult");
  const double alpha = p.number("alpha", 0.5);
  std::optional<double> c;
  if (p.has("c")) c = p.number("c", 2.0);
  const QuasiMultReport q = quasi_mult_decay_check(T, alpha, p.integer("n-max", 1 << 12), c);
  cx.result = Json{{"alpha", num(q.alpha)}, {"c", num(q.c)}, {"containment", stolz_json(q.containment)},
                   {"max_ratio", num(q.max_ratio)}, {"ratios", num_list(q.ratios)}, {"profile", decay_json(q.profile)},
                   {"pass", q.pass}};
  cx.set_profile({"n", "norm", "ratio"});
  for (std::size_t i = 0; i < q.profile.samples.size(); ++i) {
    const auto& s = q.profile.samples[i];
    const double ratio = i < q.ratios.size() ? q.ratios[i] : 0.0;
    cx.profile->row({std::to_string(s.n), fmt(s.norm), fmt(ratio)});
    cx.plot.add(static_cast<double>(s.n), ratio, "ratio");
  }
  cx.judge(q.pass);
}

void cmd_gsf(Context& cx) {
  auto& p = cx.params;
  const LinearOperator& T = cx.ops().T;
  const int probes = int_param(p, "probes", 0, 0);
  const ConditionReport c = gsf_integral_check(T, grid_of(p), probe_vectors(T, probes, 256, seed_of(p)),
                                               p.integer("n-max", 1 << 10));
  cx.result = condition_json(c);
  condition_csv(cx, c);
  cx.estimate(c.trend);
}

RVFunction f_of(Params& p) { return RVFunction::parse(p.required("f")); }

void cmd_integral_equiv(Context& cx) {
  auto& p = cx.params;
  const RVFunction f = f_of(p);
  const int k = int_param(p, "k", next_integer_above(f.alpha() + 0.5), 1);
  const auto& b = cx.ops();
  const int probes = int_param(p, "probes", 0, 0);
  const IntegralEquivalenceReport r = integral_equivalence_check(
      sandwich_of(b), f, k, grid_of(p), probe_vectors(b.T, probes, 256, seed_of(p)), p.integer("n-max", 1 << 14));
  cx.result = Json{{"k", r.k}, {"alpha", num(f.alpha())}, {"method", r.method}, {"radii", num_list(r.radii)},
                   {"integral_side", trend_json(r.integral_side)}, {"decay_side", trend_json(r.decay_side)},
                   {"power_side", trend_json(r.power_side)}, {"pass", r.pass}};
  cx.set_profile({"r", "integral_side"});
  for (std::size_t i = 0; i < r.radii.size() && i < r.integral_side.values.size(); ++i) {
    cx.profile->row({fmt(r.radii[i]), fmt(r.integral_side.values[i])});
    cx.plot.add(r.radii[i] - 1.0, r.integral_side.values[i], "integral_side");
  }
  cx.judge(r.pass);
}

void cmd_equiv(Context& cx) {
  auto& p = cx.params;
  const RVFunction f = f_of(p);
  const int k = int_param(p, "k", next_integer_above(f.alpha()), 1);
  const EquivalenceReport r = equivalence_check_resolvent(sandwich_of(cx.ops()), f, k, p.integer("n-max", 1 << 14), grid_of(p));
  cx.result = Json{{"k", r.k}, {"alpha", num(r.alpha)}, {"commutes", r.commutes ? Json(*r.commutes) : Json(nullptr)},
                   {"commutator", num(r.commutator)}, {"decay_side", trend_json(r.decay_side)},
                   {"growth_side", trend_json(r.growth_side)}, {"decay", decay_json(r.decay)},
                   {"growth", growth_json(r.growth)}, {"pass", r.pass}};
  cx.set_profile({"side", "index", "value"});
  for (std::size_t i = 0; i < r.decay.samples.size() && i < r.decay_side.values.size(); ++i) {
    const auto n = static_cast<double>(r.decay.samples[i].n);
    cx.profile->row({"decay", std::to_string(r.decay.samples[i].n), fmt(r.decay_side.values[i])});
    cx.plot.add(n, r.decay_side.values[i], "decay_side");
  }
  for (std::size_t i = 0; i < r.growth.samples.size() && i < r.growth_side.values.size(); ++i) {
    cx.profile->row({"growth", fmt(r.growth.samples[i].r), fmt(r.growth_side.values[i])});
    cx.plot.add(r.growth.samples[i].r - 1.0, r.growth_side.values[i], "growth_side");
  }
  cx.judge(r.pass);
}

void cmd_nlogn(Context& cx) {
  auto& p = cx.params;
  const double alpha = p.number("alpha", 0.0);
  const NlognReport r = nlogn_resolvent_check(sandwich_of(cx.ops()), alpha, grid_of(p), p.integer("n-max", 1 << 14));
  Json samples = Json::array();
  cx.set_profile({"r", "norm", "h", "ratio"});
  for (const auto& s : r.samples) {
    samples.push_back(Json{{"r", num(s.r)}, {"norm", num(s.norm)}, {"h", num(s.h)}, {"ratio", num(s.ratio)}});
    cx.profile->row({fmt(s.r), fmt(s.norm), fmt(s.h), fmt(s.ratio)});
    cx.plot.add(s.r - 1.0, s.ratio, "ratio");
  }
  cx.result = Json{{"alpha", num(r.alpha)}, {"sup_ratio", num(r.sup_ratio)}, {"inf_ratio", num(r.inf_ratio)},
                   {"trend", to_string(r.trend)}, {"excluded_radii", r.excluded_radii},
                   {"decay_side", trend_json(r.decay_side)}, {"samples", samples}};
  cx.estimate(r.trend);
}

void cmd_perturb(Context& cx) {
  auto& p = cx.params;
  const auto& b = cx.ops();
  const RVFunction f = f_of(p);
  const int k = int_param(p, "k", next_integer_above(f.alpha()), 1);
  const PerturbationSetup setup{b.T, require_role(b, "D"), b.S};
  const RobustnessReport r = perturbation_robustness(setup, f, k, grid_of(p), p.integer("n-max", 1 << 12),
                                                     int_param(p, "probes", 8, 1), seed_of(p));
  Json out{{"delta_hat", Json{{"value", num(r.delta.value)}, {"r", num(r.delta.r)}, {"theta", num(r.delta.theta)}}},
           {"blowup", num(r.blowup)},
           {"commutator", r.commutator ? num(*r.commutator) : Json(nullptr)},
           {"hypothesis_ok", r.hypothesis_ok},
           {"zero_perturbation", r.zero_perturbation},
           {"flags", r.flags}};
  if (r.hypothesis_ok) {
    out["gsf_base"] = condition_json(*r.gsf_base);
    out["gsf_perturbed"] = condition_json(*r.gsf_perturbed);
    out["gsf_ratio"] = num(r.gsf_ratio);
    out["gsf_ok"] = r.gsf_ok;
    out["decay_base"] = decay_json(r.decay_base, false);
    out["decay_perturbed"] = decay_json(r.decay_perturbed, false);
    out["exponent_gap"] = num(r.exponent_gap);
    out["exponent_ok"] = r.exponent_ok;
    out["decay_side_base"] = trend_json(r.decay_side_base);
    out["decay_side_perturbed"] = trend_json(r.decay_side_perturbed);
    out["spot_max_ratio"] = num(r.spot_max_ratio);
    out["spot_max_ratio_plain"] = num(r.spot_max_ratio_plain);
    out["spot_points"] = r.spot_points;
    out["spot_ok"] = r.spot_ok;
  }
  out["pass"] = r.pass;
  cx.result = out;
  cx.set_profile({"n", "norm_base", "norm_perturbed"});
  for (std::size_t i = 0; i < r.decay_base.samples.size() && i < r.decay_perturbed.samples.size(); ++i) {
    const auto& a = r.decay_base.samples[i];
    const auto& c = r.decay_perturbed.samples[i];
    cx.profile->row({std::to_string(a.n), fmt(a.norm), fmt(c.norm)});
    cx.plot.add(static_cast<double>(a.n), a.norm, "base");
    cx.plot.add(static_cast<double>(c.n), c.norm, "perturbed");
  }
  if (!r.hypothesis_ok) {
    cx.verdict = Verdict::HypothesisFailed;
    cx.label = "hypothesis failed";
    return;
  }
  cx.judge(r.pass);
}

ProbeSet probe_set(Params& p) {
  ProbeSet s;
  s.count = int_param(p, "probes", 50, 1);
  s.seed = seed_of(p);
  s.dim = static_cast<std::size_t>(int_param(p, "dim", 256, 1));
  return s;
}

void cmd_summability(Context& cx) {
  auto& p = cx.params;
  const auto& b = cx.ops();
  const std::string mode = p.text("mode", "decay-to-sum");
  const RVFunction f = f_of(p);
  const double pp = p.number("p", 1.0);
  if (mode == "sum-to-decay") {
    const long long n_max = p.integer("n-max", 1 << 12);
    const SumToDecayReport r = sum_to_decay(b.T, b.get("S"), f, pp, n_max, probe_set(p));
    cx.result = Json{{"p", num(r.p)}, {"K", num(r.K)}, {"C_hat", num(r.C_hat)}, {"probe_sums", num_list(r.probe_sums)},
                     {"max_ratio", num(r.max_ratio)}, {"hypothesis_ok", r.hypothesis_ok}, {"seed", r.seed},
                     {"dim", r.dim}, {"pass", r.pass}};
    cx.set_profile({"n", "ratio"});
    for (std::size_t i = 0; i < r.n.size() && i < r.ratios.size(); ++i) {
      cx.profile->row({std::to_string(r.n[i]), fmt(r.ratios[i])});
      cx.plot.add(static_cast<double>(r.n[i]), r.ratios[i], "ratio");
    }
    if (!r.hypothesis_ok) {
      cx.verdict = Verdict::HypothesisFailed;
      cx.label = "hypothesis failed";
      return;
    }
    cx.judge(r.pass);
  } else if (mode == "decay-to-sum") {
    const RVFunction g = RVFunction::parse(p.text("g", "const"));
    const long long n_max = p.integer("n-max", 1 << 14);
    const DecayToSumReport r =
        decay_to_sum(b.T, b.get("S"), f, g, pp, n_max, probe_set(p), p.integer("window-lo", 256));
    Json checkpoints = Json::array();
    for (auto n : r.checkpoints) checkpoints.push_back(n);
    cx.result = Json{{"p", num(r.p)},
                     {"decay_constant", num(r.decay_constant)},
                     {"decay_trend", to_string(r.decay_trend)},
                     {"decay_ok", r.decay_ok},
                     {"checkpoints", checkpoints},
                     {"C_hat", num_list(r.C_hat)},
                     {"C_hat_log", num_list(r.C_hat_log)},
                     {"C_hat_sup", num(r.C_hat_sup)},
                     {"C_hat_trend", to_string(r.C_hat_trend)},
                     {"harmonic_bound_ok", r.harmonic_bound_ok ? Json(*r.harmonic_bound_ok) : Json(nullptr)},
                     {"seed", r.seed},
                     {"pass", r.pass}};
    cx.set_profile({"n", "C_hat", "C_hat_log"});
    for (std::size_t i = 0; i < r.checkpoints.size(); ++i) {
      const double a = i < r.C_hat.size() ? r.C_hat[i] : 0.0;
      const double l = i < r.C_hat_log.size() ? r.C_hat_log[i] : 0.0;
      cx.profile->row({std::to_string(r.checkpoints[i]), fmt(a), fmt(l)});
      cx.plot.add(static_cast<double>(r.checkpoints[i]), a, "C_hat");
    }
    if (!r.decay_ok) {
      cx.verdict = Verdict::HypothesisFailed;
      cx.label = "hypothesis failed";
      return;
    }
    cx.judge(r.pass);
  } else if (mode == "sum-to-resolvent") {
    const int k = int_param(p, "k", next_integer_above((f.alpha() + 1.0) / pp), 1);
    const SumToResolventReport r = sum_to_resolvent(b.T, b.get("S1"), b.get("S2"), f, pp, k, grid_of(p),
                                                    p.integer("n-max", 1 << 12), probe_set(p));
    cx.result = Json{{"p", num(r.p)}, {"q", num(r.q)}, {"k", r.k}, {"radii", num_list(r.radii)},
                     {"weighted", trend_json(r.weighted)}, {"hypothesis_sum", num(r.hypothesis_sum)},
                     {"hypothesis_trend", to_string(r.hypothesis_trend)}, {"pass", r.pass}};
    cx.set_profile({"r", "weighted"});
    for (std::size_t i = 0; i < r.radii.size() && i < r.weighted.values.size(); ++i) {
      cx.profile->row({fmt(r.radii[i]), fmt(r.weighted.values[i])});
      cx.plot.add(r.radii[i] - 1.0, r.weighted.values[i], "weighted");
    }
    cx.judge(r.pass);
  } else {
    fail(ErrorCode::InvalidArgument, "--mode must be sum-to-decay, decay-to-sum or sum-to-resolvent");
  }
}

void cmd_mult_op(Context& cx) {
  auto& p = cx.params;
  const LinearOperator& T = cx.ops().T;
  if (T.kind() != OperatorKind::Diagonal) fail(ErrorCode::InvalidArgument, "mult-op needs a diagonal operator T");
  const double alpha = p.number("alpha", 0.5);
  const double pp = p.number("p", 2.0);
  const double q = p.number("q", pp);
  const auto points = static_cast<std::size_t>(int_param(p, "scalar-points", 1000, 1));
  const MultOpReport r = mult_op_summability_equiv(T.symbol(), alpha, pp, q, p.integer("n-max", 1 << 12),
                                                   probe_set(p), points);
  cx.result = Json{{"alpha", num(r.alpha)},
                   {"p", num(r.p)},
                   {"q", num(r.q)},
                   {"beta", num(r.beta)},
                   {"c", num(r.c)},
                   {"containment", stolz_json(r.containment)},
                   {"C1", num(r.C1)},
                   {"C2", num(r.C2)},
                   {"C3", num(r.C3)},
                   {"scalar_points", r.scalar_points},
                   {"scalar_max", num(r.scalar_max)},
                   {"scalar_max_tail", num(r.scalar_max_tail)},
                   {"scalar_ok", r.scalar_ok},
                   {"C_hat", num(r.C_hat)},
                   {"probe_sums", num_list(r.probe_sums)},
                   {"sums_ok", r.sums_ok},
                   {"decay", decay_json(r.decay)},
                   {"decay_exponent", num(r.decay_exponent)},
                   {"decay_ok", r.decay_ok},
                   {"round_trip_max_ratio", num(r.round_trip.max_ratio)},
                   {"round_trip_pass", r.round_trip.pass},
                   {"equivalent", r.equivalent},
                   {"seed", r.seed},
                   {"pass", r.pass}};
  decay_profile_csv(cx, r.decay, "norm");
  if (!r.containment.member) {
    cx.verdict = Verdict::HypothesisFailed;
    cx.label = "hypothesis failed";
    return;
  }
  cx.judge(r.pass);
}

void cmd_rv_check(Context& cx) {
  auto& p = cx.params;
  const RVFunction f = f_of(p);
  const double t_max = p.number("t-max", 1e8);
  // Default weight exponent keeps beta > alpha - 1, as the integral bound needs.
  const double beta = p.number("beta", std::max(0.0, f.alpha() - 0.5));
  const BrvReport brv = check_brv(f, t_max);
  const PowerBound pb = power_bound(f, t_max);
  std::vector<double> s_values;
  for (int i = 1; i <= 24; ++i) s_values.push_back(std::ldexp(1.0, -i) / std::max(1.0, f.t0()));
  const IntBoundReport ib = int_bound_check(f, beta, s_values);
  const SumBoundReport sb = cn_sum_bound_check(f, beta, {}, grid_of(p).radii());
  cx.result = Json{{"name", f.name()},
                   {"alpha", num(f.alpha())},
                   {"t0", num(f.t0())},
                   {"brv", Json{{"alpha", num(brv.alpha)}, {"max_phi", num(brv.max_phi)}, {"witness_t", num(brv.witness_t)},
                                {"min_phi", num(brv.min_phi)}, {"monotone", brv.monotone}, {"points", brv.points},
                                {"pass", brv.pass}}},
                   {"power_bound", Json{{"constant", num(pb.constant)}, {"grid_sup", num(pb.grid_sup)},
                                        {"verified", pb.verified}, {"doubling_ratio", num(pb.doubling_ratio)},
                                        {"doubling_ok", pb.doubling_ok}}},
                   {"int_bound", Json{{"beta", num(ib.beta)}, {"delta", num(ib.delta)}, {"bound", num(ib.bound)},
                                      {"sup_ratio", num(ib.sup_ratio)}, {"pass", ib.pass}}},
                   {"cn_sum_bound", Json{{"beta", num(sb.beta)}, {"c0", num(sb.c0)}, {"sup_ratio", num(sb.sup_ratio)},
                                         {"trend", to_string(sb.trend)}, {"pass", sb.pass}}}};
  cx.set_profile({"check", "x", "value"});
  for (const auto& s : ib.samples) {
    cx.profile->row({"int_bound", fmt(s.s), fmt(s.ratio)});
    cx.plot.add(s.s, s.ratio, "int_bound");
  }
  for (const auto& s : sb.samples) {
    cx.profile->row({"cn_sum_bound", fmt(s.r), fmt(s.ratio)});
    cx.plot.add(s.r - 1.0, s.ratio, "cn_sum_bound");
  }
  cx.judge(brv.pass && pb.verified && ib.pass && sb.pass);
}

void cmd_sampled_data(Context& cx) {
  auto& p = cx.params;
  const LinearOperator& T = cx.ops().T;
  if (!T.finite()) fail(ErrorCode::InvalidArgument, "sampled-data needs a finite-dimensional operator");
  const DenseMatrix m = T.to_dense();
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(complex_json(m(i, j)));
    rows.push_back(row);
  }
  Json eig = Json::array();
  double rho = 0.0;
  for (Complex z : T.spectrum_points()) {
    eig.push_back(complex_json(z));
    rho = std::max(rho, std::abs(z));
  }
  const DecayProfile d = decay_profile(Sandwich{T, std::nullopt, std::nullopt}, p.integer("n-max", 1 << 10));
  double sup = 0.0;
  std::vector<double> norms;
  for (const auto& s : d.samples) {
    sup = std::max(sup, s.norm);
    norms.push_back(s.norm);
  }
  const Trend t = classify_trend(norms);
  cx.result = Json{{"matrix", rows}, {"eigenvalues", eig}, {"spectral_radius", num(rho)},
                   {"norm", num(operator_norm(T).value)}, {"power_sup", num(sup)},
                   {"power_trend", to_string(t)}, {"decay", decay_json(d)}};
  decay_profile_csv(cx, d, "power_norm");
  cx.estimate(t);
}

struct CommandEntry {
  const char* name;
  bool needs_op;
  void (*run)(Context&);
};

const CommandEntry kCommands[] = {
    {"powers", true, cmd_powers},
    {"resolvent-sweep", true, cmd_resolvent_sweep},
    {"reconstruct", true, cmd_reconstruct},
    {"parseval", true, cmd_parseval},
    {"kreiss", true, cmd_kreiss},
    {"ritt", true, cmd_ritt},
    {"rk", true, cmd_rk},
    {"stolz", true, cmd_stolz},
    {"gsf", true, cmd_gsf},
    {"integral-equiv", true, cmd_integral_equiv},
    {"equiv", true, cmd_equiv},
    {"nlogn", true, cmd_nlogn},
    {"perturb", true, cmd_perturb},
    {"summability", true, cmd_summability},
    {"mult-op", true, cmd_mult_op},
    {"rv-check", false, cmd_rv_check},
    {"sampled-data", true, cmd_sampled_data},
};

bool reported_as_hypothesis(ErrorCode code) {
  return code == ErrorCode::Hypothesis || code == ErrorCode::Domain || code == ErrorCode::Divergence ||
         code == ErrorCode::UnboundedTruncation;
}

}  // namespace

const char* to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Estimate: return "estimate";
    case Verdict::HypothesisFailed: return "hypothesis_failed";
  }
  return "unknown";
}

int AnalysisReport::exit_code() const { return verdict == Verdict::HypothesisFailed ? 2 : 0; }

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& c : kCommands) out.emplace_back(c.name);
    return out;
  }();
  return names;
}

AnalysisReport run_analysis(const RunConfig& config) {
  const CommandEntry* entry = nullptr;
  for (const auto& c : kCommands) {
    if (config.command == c.name) entry = &c;
  }
  if (!entry) fail(ErrorCode::InvalidArgument, "unknown subcommand \"" + config.command + "\"");

  if (auto it = config.params.find("workers"); it != config.params.end()) {
    const long long w = text::parse_int(it->second, "--workers");
    if (w < 0) fail(ErrorCode::InvalidArgument, "--workers must be non-negative");
    set_worker_count(static_cast<unsigned>(w));
  }
  std::map<std::string, std::string> flags = config.params;
  flags.erase("workers");
  flags.erase("out");

  Context cx(flags);
  if (entry->needs_op) {
    auto it = flags.find("op");
    if (it == flags.end()) fail(ErrorCode::InvalidArgument, "--op is required for " + config.command);
    cx.bundle = load_bundle(it->second);
    cx.params.set_defaults(cx.bundle->defaults);
  }
  // Seed is part of every report even when the command draws no probes.
  seed_of(cx.params);
  if (entry->needs_op) {
    cx.params.text("op", "");
  }

  Json error = nullptr;
  try {
    entry->run(cx);
  } catch (const Error& e) {
    if (!reported_as_hypothesis(e.code())) throw;
    error = Json{{"code", to_string(e.code())}, {"message", e.what()}};
    cx.result = Json::object();
    cx.verdict = Verdict::HypothesisFailed;
    cx.label = "hypothesis failed";
    cx.set_profile({"quantity", "value"});
    cx.plot = Plot();
  }

  Json body;
  body["command"] = config.command;
  body["config"] = cx.params.config();
  if (cx.bundle) {
    Json ops = Json::object();
    for (const char* role : {"T", "S", "S1", "S2", "D"}) {
      if (const auto* op = cx.bundle->get(role)) ops[role] = op->describe();
    }
    body["operators"] = ops;
  }
  body["verdict"] = to_string(cx.verdict);
  body["label"] = cx.label;
  if (!error.is_null()) body["error"] = error;
  body["result"] = cx.result;

  AnalysisReport out;
  out.command = config.command;
  out.verdict = cx.verdict;
  out.label = cx.label;
  out.body = body.dump(2);
  out.profile_csv = cx.profile ? cx.profile->str() : Csv({"quantity", "value"}).str();
  out.plotdata_csv = cx.plot.str();
  return out;
}

const char* library_version() noexcept { return "0.1.0"; }

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string report_json(const AnalysisReport& report, const std::string& timestamp) {
  Json doc;
  doc["header"] = Json{{"tool", "semidecay"}, {"version", library_version()}, {"timestamp", timestamp}};
  doc["report"] = Json::parse(report.body);
  return doc.dump(2) + "\n";
}

void write_report(const AnalysisReport& report, const std::string& dir, const std::string& timestamp) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::Io, "cannot create output directory " + dir + ": " + ec.message());
  auto put = [&](const std::string& name, const std::string& text) {
    std::ofstream out(fs::path(dir) / name, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::Io, "cannot write " + (fs::path(dir) / name).string());
    out << text;
  };
  put("report.json", report_json(report, timestamp));
  put("profile.csv", report.profile_csv);
  if (!report.plotdata_csv.empty()) {
    put("plotdata.csv", report.plotdata_csv);
  } else {
    fs::remove(fs::path(dir) / "plotdata.csv", ec);
  }
}

}  // namespace semidecay
