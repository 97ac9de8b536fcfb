#include "semidecay/symbols.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "text_util.hpp"

namespace semidecay {

namespace {

bool is_zero(Complex z) { return z == Complex(0.0, 0.0); }

std::string fmt_complex(Complex z) {
  std::ostringstream os;
  os.precision(17);
  if (z.imag() == 0.0) {
    os << z.real();
  } else {
    os << "(" << z.real() << (z.imag() < 0 ? "" : "+") << z.imag() << "i)";
  }
  return os.str();
}

std::string fmt_real(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

// Modulus bound over the segment between two points: the max is at an end.
double segment_max_modulus(Complex a, Complex b) { return std::max(std::abs(a), std::abs(b)); }

class PowerLogSymbol final : public SymbolImpl {
 public:
  explicit PowerLogSymbol(PowerLogForm form) : form_(form) {
    if (!is_zero(form_.slope) && !(form_.gamma > 0.0)) {
      fail(ErrorCode::InvalidArgument, "power-log symbol needs gamma > 0");
    }
    if (form_.log_power != 0.0 && !is_zero(form_.offset)) {
      fail(ErrorCode::InvalidArgument, "logarithmic factor requires zero offset");
    }
    if (form_.log_power < 0.0) {
      fail(ErrorCode::InvalidArgument, "log power must be non-negative");
    }
  }

  Complex value(std::uint64_t j) const override { return form_.at(static_cast<double>(j)); }

  std::optional<std::vector<PowerLogForm>> factors() const override {
    return std::vector<PowerLogForm>{form_};
  }

  TailEnclosure tail(std::uint64_t J) const override {
    if (form_.is_constant()) {
      return {form_.offset, 0.0, std::abs(form_.offset), false};
    }
    const double t_max = form_.decay(static_cast<double>(J) + 1.0);
    const Complex end = form_.offset - form_.slope * t_max;
    TailEnclosure enc;
    enc.center = 0.5 * (form_.offset + end);
    enc.radius = 0.5 * std::abs(form_.slope) * t_max;
    enc.max_modulus = segment_max_modulus(form_.offset, end);
    return enc;
  }

  bool real_nonnegative() const override {
    if (form_.offset.imag() != 0.0 || form_.slope.imag() != 0.0) return false;
    const Complex first = form_.at(1.0);
    return form_.offset.real() >= 0.0 && first.real() >= 0.0;
  }

  bool modulus_nonincreasing() const override {
    return is_zero(form_.offset) || form_.is_constant();
  }

  std::vector<Complex> limit_points() const override { return {form_.offset}; }

  std::string describe() const override {
    if (form_.is_constant()) return "const:" + fmt_complex(form_.offset);
    std::string s = fmt_complex(form_.offset) + " - " + fmt_complex(form_.slope) + "*j^-" +
                    fmt_real(form_.gamma);
    if (form_.log_power != 0.0) s += "*log(e+j)^-" + fmt_real(form_.log_power);
    return s;
  }

 private:
  PowerLogForm form_;
};

class ExplicitSymbol final : public SymbolImpl {
 public:
  explicit ExplicitSymbol(std::vector<Complex> values) : values_(std::move(values)) {
    if (values_.empty()) fail(ErrorCode::InvalidArgument, "explicit symbol needs at least one value");
    for (const auto& v : values_) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        fail(ErrorCode::InvalidArgument, "explicit symbol has a non-finite entry");
      }
    }
  }

  Complex value(std::uint64_t j) const override {
    if (j < 1 || j > values_.size()) {
      fail(ErrorCode::DimensionMismatch, "index " + std::to_string(j) + " outside explicit symbol of length " +
                                             std::to_string(values_.size()));
    }
    return values_[j - 1];
  }

  std::optional<std::uint64_t> length() const override { return values_.size(); }

  TailEnclosure tail(std::uint64_t J) const override {
    TailEnclosure enc;
    if (J >= values_.size()) {
      enc.empty = true;
      return enc;
    }
    double m = 0.0;
    for (std::size_t i = J; i < values_.size(); ++i) m = std::max(m, std::abs(values_[i]));
    enc.radius = m;
    enc.max_modulus = m;
    return enc;
  }

  bool real_nonnegative() const override {
    return std::all_of(values_.begin(), values_.end(),
                       [](Complex v) { return v.imag() == 0.0 && v.real() >= 0.0; });
  }

  bool modulus_nonincreasing() const override {
    for (std::size_t i = 1; i < values_.size(); ++i) {
      if (std::abs(values_[i]) > std::abs(values_[i - 1])) return false;
    }
    return true;
  }

  std::vector<Complex> limit_points() const override { return {}; }

  std::string describe() const override {
    std::string s = "explicit:[";
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (i) s += ",";
      s += fmt_complex(values_[i]);
    }
    return s + "]";
  }

 private:
  std::vector<Complex> values_;
};

class StolzCurveSymbol final : public SymbolImpl {
 public:
  explicit StolzCurveSymbol(double alpha) : alpha_(alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) fail(ErrorCode::InvalidArgument, "stolz_curve needs alpha in (0,1]");
  }

  Complex value(std::uint64_t j) const override {
    const double jd = static_cast<double>(j);
    return (1.0 - 1.0 / jd) * std::polar(1.0, std::pow(jd, -alpha_));
  }

  // |1 - d_j| <= (1 - |d_j|) + |1 - e^{i phi}| <= 1/j + j^{-alpha}
  TailEnclosure tail(std::uint64_t J) const override {
    const double jd = static_cast<double>(J) + 1.0;
    return {Complex(1.0, 0.0), 1.0 / jd + std::pow(jd, -alpha_), 1.0, false};
  }

  // Values past J lie in the annular sector |d| in [1 - 1/(J+1), 1),
  // arg d in (0, (J+1)^{-alpha}].
  double tail_distance(Complex z, std::uint64_t J) const override {
    const double jd = static_cast<double>(J) + 1.0;
    const double rho_min = 1.0 - 1.0 / jd;
    const double phi_max = std::pow(jd, -alpha_);
    const double rho = std::abs(z);
    const double phi = std::arg(z);
    double sector;
    if (phi >= 0.0 && phi <= phi_max) {
      sector = std::max({0.0, rho_min - rho, rho - 1.0});
    } else {
      auto segment = [&](double angle) {
        const Complex u = std::polar(1.0, angle);
        const double t = std::clamp((z * std::conj(u)).real(), rho_min, 1.0);
        return std::abs(z - t * u);
      };
      sector = std::min(segment(0.0), segment(phi_max));
    }
    // With w = z - 1 and d = 1 - delta, |z - d| >= |w| + Re(conj(w) delta)/|w|.
    // Along the curve Re delta <= 1/s + phi^2/2 and -Im delta >= (1 - 1/s)(phi - phi^3/6),
    // which keeps Re(conj(w) delta) >= 0 for z below the axis once J is large.
    const Complex w = z - 1.0;
    if (w.imag() <= 0.0) {
      const double lead = -w.imag() * (1.0 - 1.0 / jd) * (1.0 - phi_max * phi_max / 6.0);
      const double drag = w.real() < 0.0 ? -w.real() * (std::pow(jd, alpha_ - 1.0) + 0.5 * phi_max) : 0.0;
      if (lead >= drag) return std::max(sector, std::abs(w));
    }
    return sector;
  }

  std::vector<Complex> limit_points() const override { return {Complex(1.0, 0.0)}; }

  std::string describe() const override { return "stolz_curve:" + fmt_real(alpha_); }

 private:
  double alpha_;
};

class InvJLogSymbol final : public SymbolImpl {
 public:
  explicit InvJLogSymbol(double alpha) : alpha_(alpha) {
    if (!(alpha >= 0.0)) fail(ErrorCode::InvalidArgument, "inv_j_log needs alpha >= 0");
  }

  Complex value(std::uint64_t j) const override {
    const double jd = static_cast<double>(j);
    return {1.0 / (jd * std::pow(std::log(jd + 1.0), alpha_)), 0.0};
  }

  TailEnclosure tail(std::uint64_t J) const override {
    const double b = value(J + 1).real();
    return {Complex(0.5 * b, 0.0), 0.5 * b, b, false};
  }

  bool real_nonnegative() const override { return true; }
  bool modulus_nonincreasing() const override { return true; }
  std::vector<Complex> limit_points() const override { return {Complex(0.0, 0.0)}; }
  std::string describe() const override { return "inv_j_log:" + fmt_real(alpha_); }

 private:
  double alpha_;
};

enum class Combine { Sum, Product };

class ComposedSymbol final : public SymbolImpl {
 public:
  ComposedSymbol(Combine op, DiagonalSymbol a, DiagonalSymbol b) : op_(op), a_(std::move(a)), b_(std::move(b)) {}

  Complex value(std::uint64_t j) const override {
    const Complex x = a_.value_at(j);
    const Complex y = b_.value_at(j);
    return op_ == Combine::Sum ? x + y : x * y;
  }

  std::optional<std::uint64_t> length() const override {
    const auto la = a_.length();
    const auto lb = b_.length();
    if (la && lb) return std::min(*la, *lb);
    return la ? la : lb;
  }

  std::optional<std::vector<PowerLogForm>> factors() const override {
    if (op_ != Combine::Product) return std::nullopt;
    auto fa = a_.factors();
    auto fb = b_.factors();
    if (!fa || !fb) return std::nullopt;
    fa->insert(fa->end(), fb->begin(), fb->end());
    return fa;
  }

  TailEnclosure tail(std::uint64_t J) const override {
    const TailEnclosure x = a_.tail_enclosure(J);
    const TailEnclosure y = b_.tail_enclosure(J);
    TailEnclosure enc;
    if (x.empty || y.empty) {
      enc.empty = true;
      return enc;
    }
    if (op_ == Combine::Sum) {
      enc.center = x.center + y.center;
      enc.radius = x.radius + y.radius;
      enc.max_modulus = x.max_modulus + y.max_modulus;
    } else {
      enc.center = x.center * y.center;
      enc.radius = std::abs(x.center) * y.radius + std::abs(y.center) * x.radius + x.radius * y.radius;
      enc.max_modulus = x.max_modulus * y.max_modulus;
    }
    return enc;
  }

  bool real_nonnegative() const override { return a_.real_nonnegative() && b_.real_nonnegative(); }

  bool modulus_nonincreasing() const override {
    return op_ == Combine::Product && a_.modulus_nonincreasing() && b_.modulus_nonincreasing();
  }

  std::vector<Complex> limit_points() const override {
    const auto la = a_.limit_points();
    const auto lb = b_.limit_points();
    if (la.size() != 1 || lb.size() != 1) return {};
    return {op_ == Combine::Sum ? la[0] + lb[0] : la[0] * lb[0]};
  }

  std::string describe() const override {
    return std::string(op_ == Combine::Sum ? "sum(" : "product(") + a_.describe() + ", " + b_.describe() + ")";
  }

 private:
  Combine op_;
  DiagonalSymbol a_;
  DiagonalSymbol b_;
};

class ConjugatedSymbol final : public SymbolImpl {
 public:
  explicit ConjugatedSymbol(DiagonalSymbol base) : base_(std::move(base)) {}

  Complex value(std::uint64_t j) const override { return std::conj(base_.value_at(j)); }
  std::optional<std::uint64_t> length() const override { return base_.length(); }

  std::optional<std::vector<PowerLogForm>> factors() const override {
    auto f = base_.factors();
    if (!f) return std::nullopt;
    for (auto& form : *f) {
      form.offset = std::conj(form.offset);
      form.slope = std::conj(form.slope);
    }
    return f;
  }

  TailEnclosure tail(std::uint64_t J) const override {
    TailEnclosure enc = base_.tail_enclosure(J);
    enc.center = std::conj(enc.center);
    return enc;
  }

  bool real_nonnegative() const override { return base_.real_nonnegative(); }
  bool modulus_nonincreasing() const override { return base_.modulus_nonincreasing(); }

  std::vector<Complex> limit_points() const override {
    auto pts = base_.limit_points();
    for (auto& p : pts) p = std::conj(p);
    return pts;
  }

  std::string describe() const override { return "conj(" + base_.describe() + ")"; }

 private:
  DiagonalSymbol base_;
};

// Two single forms merge into one when they share gamma and carry no log factor.
std::optional<PowerLogForm> merge_sum(const PowerLogForm& x, const PowerLogForm& y) {
  if (x.is_constant()) {
    PowerLogForm out = y;
    out.offset += x.offset;
    if (out.log_power != 0.0 && !is_zero(out.offset)) return std::nullopt;
    return out;
  }
  if (y.is_constant()) return merge_sum(y, x);
  if (x.gamma != y.gamma || x.log_power != y.log_power) return std::nullopt;
  PowerLogForm out = x;
  out.offset += y.offset;
  out.slope += y.slope;
  if (out.log_power != 0.0 && !is_zero(out.offset)) return std::nullopt;
  return out;
}

Complex parse_complex_json(const nlohmann::json& v) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  fail(ErrorCode::Parse, "expected a number or a [re, im] pair, got " + v.dump());
}

}  // namespace

double PowerLogForm::decay(double j) const {
  double t = std::pow(j, -gamma);
  if (log_power != 0.0) t *= std::pow(std::log(kEuler + j), -log_power);
  return t;
}

double SymbolImpl::tail_distance(Complex z, std::uint64_t J) const {
  const TailEnclosure enc = tail(J);
  if (enc.empty) return std::numeric_limits<double>::infinity();
  return std::max({0.0, std::abs(z - enc.center) - enc.radius, std::abs(z) - enc.max_modulus});
}

const std::vector<Complex>& SymbolImpl::prefix() const {
  std::call_once(prefix_once_, [this] {
    const auto len = length();
    const std::uint64_t n = len ? std::min(*len, kPrefixCache) : kPrefixCache;
    prefix_.resize(n);
    for (std::uint64_t j = 1; j <= n; ++j) prefix_[j - 1] = value(j);
  });
  return prefix_;
}

DiagonalSymbol::DiagonalSymbol(std::shared_ptr<const SymbolImpl> impl) : impl_(std::move(impl)) {
  if (!impl_) fail(ErrorCode::Internal, "null symbol implementation");
}

DiagonalSymbol DiagonalSymbol::power_log(const PowerLogForm& form) {
  return DiagonalSymbol(std::make_shared<PowerLogSymbol>(form));
}

DiagonalSymbol DiagonalSymbol::constant(Complex value) {
  PowerLogForm f;
  f.offset = value;
  return power_log(f);
}

DiagonalSymbol DiagonalSymbol::explicit_values(std::vector<Complex> values) {
  return DiagonalSymbol(std::make_shared<ExplicitSymbol>(std::move(values)));
}

DiagonalSymbol DiagonalSymbol::one_minus_inv_j() { return power_log({{1.0, 0.0}, {1.0, 0.0}, 1.0, 0.0}); }

DiagonalSymbol DiagonalSymbol::one_minus_inv_sqrt_j() { return power_log({{1.0, 0.0}, {1.0, 0.0}, 0.5, 0.0}); }

DiagonalSymbol DiagonalSymbol::inv_j_pow(double alpha) {
  if (alpha == 0.0) return constant(1.0);
  return power_log({{0.0, 0.0}, {-1.0, 0.0}, alpha, 0.0});
}

DiagonalSymbol DiagonalSymbol::stolz_curve(double alpha) {
  return DiagonalSymbol(std::make_shared<StolzCurveSymbol>(alpha));
}

DiagonalSymbol DiagonalSymbol::inv_j_log(double alpha) {
  if (alpha == 0.0) return inv_j_pow(1.0);
  return DiagonalSymbol(std::make_shared<InvJLogSymbol>(alpha));
}

DiagonalSymbol DiagonalSymbol::parse(std::string_view spec) {
  const std::string s = text::trim(spec);
  const auto colon = s.find(':');
  const std::string head = colon == std::string::npos ? s : s.substr(0, colon);
  const std::string arg = colon == std::string::npos ? std::string() : s.substr(colon + 1);

  if (head == "one_minus_inv_j") return one_minus_inv_j();
  if (head == "one_minus_inv_sqrt_j") return one_minus_inv_sqrt_j();
  if (head == "identity") return constant(1.0);
  if (head == "zero") return constant(0.0);
  if (head == "inv_j_pow") return inv_j_pow(text::parse_double(arg, "inv_j_pow exponent"));
  if (head == "stolz_curve") return stolz_curve(text::parse_double(arg, "stolz_curve alpha"));
  if (head == "inv_j_log") return inv_j_log(text::parse_double(arg, "inv_j_log alpha"));
  if (head == "const") {
    const auto parts = text::split_numbers(arg, "const");
    if (parts.empty() || parts.size() > 2) fail(ErrorCode::Parse, "const expects re[,im]");
    return constant({parts[0], parts.size() == 2 ? parts[1] : 0.0});
  }
  if (head == "affine_pow") {
    const auto parts = text::split_numbers(arg, "affine_pow");
    if (parts.size() != 3) fail(ErrorCode::Parse, "affine_pow expects offset,slope,gamma");
    return power_log({{parts[0], 0.0}, {parts[1], 0.0}, parts[2], 0.0});
  }
  if (head == "pow_log") {
    const auto parts = text::split_numbers(arg, "pow_log");
    if (parts.size() != 2) fail(ErrorCode::Parse, "pow_log expects beta,q");
    return power_log({{0.0, 0.0}, {-1.0, 0.0}, parts[0], parts[1]});
  }
  if (head == "explicit") {
    nlohmann::json arr;
    try {
      arr = nlohmann::json::parse(arg);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::Parse, std::string("explicit symbol: ") + e.what());
    }
    if (!arr.is_array()) fail(ErrorCode::Parse, "explicit symbol expects a JSON array");
    std::vector<Complex> values;
    for (const auto& v : arr) values.push_back(parse_complex_json(v));
    return explicit_values(std::move(values));
  }
  fail(ErrorCode::Parse, "unknown symbol '" + s + "'");
}

DiagonalSymbol DiagonalSymbol::sum(const DiagonalSymbol& a, const DiagonalSymbol& b) {
  const auto fa = a.affine_form();
  const auto fb = b.affine_form();
  if (fa && fb) {
    if (auto merged = merge_sum(*fa, *fb)) return power_log(*merged);
  }
  return DiagonalSymbol(std::make_shared<ComposedSymbol>(Combine::Sum, a, b));
}

DiagonalSymbol DiagonalSymbol::product(const DiagonalSymbol& a, const DiagonalSymbol& b) {
  Complex ka;
  Complex kb;
  if (a.is_constant(&ka)) return b.scaled(ka);
  if (b.is_constant(&kb)) return a.scaled(kb);
  return DiagonalSymbol(std::make_shared<ComposedSymbol>(Combine::Product, a, b));
}

DiagonalSymbol DiagonalSymbol::scaled(Complex factor) const {
  if (factor == Complex(1.0, 0.0)) return *this;
  if (auto form = affine_form()) {
    PowerLogForm f = *form;
    f.offset *= factor;
    f.slope *= factor;
    if (factor == Complex(0.0, 0.0)) f = PowerLogForm{};
    return power_log(f);
  }
  if (auto len = length(); len && impl_->factors() == std::nullopt) {
    std::vector<Complex> v(*len);
    for (std::uint64_t j = 1; j <= *len; ++j) v[j - 1] = factor * value_at(j);
    return explicit_values(std::move(v));
  }
  return DiagonalSymbol(std::make_shared<ComposedSymbol>(Combine::Product, constant(factor), *this));
}

DiagonalSymbol DiagonalSymbol::affine(Complex a, Complex b) const { return sum(constant(a), scaled(b)); }

DiagonalSymbol DiagonalSymbol::conjugate() const {
  if (auto form = affine_form()) {
    PowerLogForm f = *form;
    f.offset = std::conj(f.offset);
    f.slope = std::conj(f.slope);
    return power_log(f);
  }
  if (real_nonnegative()) return *this;
  return DiagonalSymbol(std::make_shared<ConjugatedSymbol>(*this));
}

Complex DiagonalSymbol::value_at(std::uint64_t j) const {
  if (j < 1) fail(ErrorCode::InvalidArgument, "symbol index starts at 1");
  return impl_->value(j);
}

std::optional<PowerLogForm> DiagonalSymbol::affine_form() const {
  auto f = impl_->factors();
  if (!f || f->size() != 1) return std::nullopt;
  return f->front();
}

bool DiagonalSymbol::is_constant(Complex* value) const {
  auto f = affine_form();
  if (!f || !f->is_constant()) return false;
  if (value) *value = f->offset;
  return true;
}

}  // namespace semidecay
