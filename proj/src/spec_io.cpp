#include "semidecay/spec_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace semidecay {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& path, const std::string& what) {
  fail(ErrorCode::Parse, path + ": " + what);
}

const json& field(const json& obj, const std::string& key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) bad(path + "." + key, "missing field");
  return *it;
}

Complex complex_value(const json& v, const std::string& path) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  bad(path, "expected a number or a [re, im] pair, got " + v.dump());
}

double positive_number(const json& v, const std::string& path) {
  if (!v.is_number()) bad(path, "expected a number");
  const double x = v.get<double>();
  if (!(x > 0.0) || !std::isfinite(x)) bad(path, "expected a positive finite number");
  return x;
}

std::size_t dimension(const json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<long long>() < 1) bad(path, "expected a positive integer");
  return static_cast<std::size_t>(v.get<long long>());
}

DenseMatrix matrix_value(const json& v, const std::string& path) {
  if (v.is_number()) {
    DenseMatrix m(1, 1);
    m(0, 0) = v.get<double>();
    return m;
  }
  if (!v.is_array() || v.empty() || !v[0].is_array()) bad(path, "expected a non-empty array of rows");
  const std::size_t cols = v[0].size();
  DenseMatrix m(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string row_path = path + "[" + std::to_string(i) + "]";
    if (!v[i].is_array() || v[i].size() != cols) bad(row_path, "rows must all have " + std::to_string(cols) + " entries");
    for (std::size_t j = 0; j < cols; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          complex_value(v[i][j], row_path + "[" + std::to_string(j) + "]");
    }
  }
  if (cols == 0) bad(path, "rows must not be empty");
  return m;
}

double space_value(const json& obj, const std::string& path, double fallback) {
  auto it = obj.find("space");
  if (it == obj.end()) return fallback;
  if (it->is_string()) {
    const auto s = it->get<std::string>();
    if (s == "c0" || s == "inf" || s == "sup") return kSupNorm;
    bad(path + ".space", "expected a number >= 1, \"c0\" or \"inf\"");
  }
  if (!it->is_number() || !(it->get<double>() >= 1.0)) bad(path + ".space", "expected a number >= 1");
  return it->get<double>();
}

DiagonalSymbol symbol_value(const json& v, const std::string& path) {
  if (v.is_array()) {
    std::vector<Complex> values;
    for (std::size_t i = 0; i < v.size(); ++i) values.push_back(complex_value(v[i], path + "[" + std::to_string(i) + "]"));
    if (values.empty()) bad(path, "explicit symbol needs at least one value");
    return DiagonalSymbol::explicit_values(std::move(values));
  }
  if (!v.is_string()) bad(path, "expected a symbol string or an array of values");
  try {
    return DiagonalSymbol::parse(v.get<std::string>());
  } catch (const Error& e) {
    bad(path, e.what());
  }
}

LinearOperator build(const json& v, const std::string& path, const LinearOperator* t_ref);

LinearOperator build_ref(const json& v, const std::string& path, const LinearOperator* t_ref) {
  if (v.is_string()) {
    if (v.get<std::string>() == "T" && t_ref) return *t_ref;
    bad(path, "only \"T\" may be referenced by name, and only outside T");
  }
  return build(v, path, t_ref);
}

LinearOperator build(const json& v, const std::string& path, const LinearOperator* t_ref) {
  if (!v.is_object()) bad(path, "expected an operator object");
  const std::string kind = field(v, "kind", path).is_string() ? v["kind"].get<std::string>() : "";
  if (kind == "diagonal") {
    return LinearOperator::diagonal(symbol_value(field(v, "symbol", path), path + ".symbol"), space_value(v, path, 2.0));
  }
  if (kind == "dense") {
    const json& m = v.contains("rows") ? v["rows"] : field(v, "matrix", path);
    return LinearOperator::dense(matrix_value(m, path + (v.contains("rows") ? ".rows" : ".matrix")));
  }
  if (kind == "left_shift") {
    std::optional<DiagonalSymbol> weights;
    if (v.contains("weights")) weights = symbol_value(v["weights"], path + ".weights");
    return LinearOperator::left_shift(weights, space_value(v, path, kSupNorm));
  }
  if (kind == "functional") {
    return LinearOperator::functional(symbol_value(field(v, "row", path), path + ".row"), space_value(v, path, 2.0));
  }
  if (kind == "identity") {
    if (v.contains("dim")) return LinearOperator::identity(dimension(v["dim"], path + ".dim"));
    return LinearOperator::diagonal(DiagonalSymbol::constant(1.0), space_value(v, path, 2.0));
  }
  if (kind == "zero") {
    if (v.contains("dim")) {
      const auto n = static_cast<Eigen::Index>(dimension(v["dim"], path + ".dim"));
      return LinearOperator::dense(DenseMatrix::Zero(n, n));
    }
    return LinearOperator::diagonal(DiagonalSymbol::constant(0.0), space_value(v, path, 2.0));
  }
  if (kind == "identity_minus") {
    return build_ref(field(v, "of", path), path + ".of", t_ref).identity_minus();
  }
  if (kind == "scaled") {
    const Complex factor = complex_value(field(v, "factor", path), path + ".factor");
    return build_ref(field(v, "of", path), path + ".of", t_ref).scaled(factor);
  }
  if (kind == "sum") {
    const json& terms = field(v, "terms", path);
    if (!terms.is_array() || terms.empty()) bad(path + ".terms", "expected a non-empty array");
    LinearOperator out = build_ref(terms[0], path + ".terms[0]", t_ref);
    for (std::size_t i = 1; i < terms.size(); ++i) {
      out = out.plus(build_ref(terms[i], path + ".terms[" + std::to_string(i) + "]", t_ref));
    }
    return out;
  }
  if (kind == "product") {
    const json& factors = field(v, "factors", path);
    if (!factors.is_array() || factors.empty()) bad(path + ".factors", "expected a non-empty array");
    std::vector<LinearOperator> parts;
    for (std::size_t i = 0; i < factors.size(); ++i) {
      parts.push_back(build_ref(factors[i], path + ".factors[" + std::to_string(i) + "]", t_ref));
    }
    if (parts.size() == 1) return parts.front();
    return LinearOperator::composite(std::move(parts));
  }
  if (kind == "sampled_data") {
    const DenseMatrix a = matrix_value(field(v, "A", path), path + ".A");
    const DenseMatrix b = matrix_value(field(v, "B", path), path + ".B");
    const DenseMatrix f = matrix_value(field(v, "F", path), path + ".F");
    const double tau = positive_number(field(v, "tau", path), path + ".tau");
    return sampled_data_operator(a, b, f, tau);
  }
  bad(path + ".kind", "unknown operator kind \"" + kind +
                          "\" (expected diagonal, dense, left_shift, functional, identity, zero, identity_minus, "
                          "scaled, sum, product or sampled_data)");
}

json parse_json(std::string_view text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, source + ": " + e.what());
  }
}

std::string scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

}  // namespace

const LinearOperator* OperatorBundle::get(std::string_view role) const {
  if (role == "T") return &T;
  if (role == "S") return S ? &*S : nullptr;
  if (role == "S1") return S1 ? &*S1 : nullptr;
  if (role == "S2") return S2 ? &*S2 : nullptr;
  if (role == "D") return D ? &*D : nullptr;
  return nullptr;
}

OperatorBundle parse_bundle(std::string_view text, const std::string& source) {
  const json doc = parse_json(text, source);
  if (!doc.is_object()) fail(ErrorCode::Parse, source + ": expected a JSON object");
  OperatorBundle out;
  out.source = source;
  if (doc.contains("kind")) {
    out.T = build(doc, "T", nullptr);
    return out;
  }
  out.T = build(field(doc, "T", source), "T", nullptr);
  for (const char* role : {"S", "S1", "S2", "D"}) {
    if (!doc.contains(role)) continue;
    LinearOperator op = build_ref(doc[role], role, &out.T);
    if (std::string_view(role) == "S") out.S = op;
    if (std::string_view(role) == "S1") out.S1 = op;
    if (std::string_view(role) == "S2") out.S2 = op;
    if (std::string_view(role) == "D") out.D = op;
  }
  if (doc.contains("defaults")) {
    const json& d = doc["defaults"];
    if (!d.is_object()) fail(ErrorCode::Parse, "defaults: expected an object");
    for (auto it = d.begin(); it != d.end(); ++it) out.defaults[it.key()] = scalar_text(it.value());
  }
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    static const char* known[] = {"T", "S", "S1", "S2", "D", "defaults", "description"};
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) fail(ErrorCode::Parse, it.key() + ": unknown field");
  }
  return out;
}

OperatorBundle load_bundle(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open operator spec " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_bundle(buf.str(), path);
}

LinearOperator parse_operator(std::string_view text, const LinearOperator* t_ref) {
  return build_ref(parse_json(text, "<operator>"), "operator", t_ref);
}

}  // namespace semidecay
