#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <string>

#include "helpers.hpp"
#include "semidecay/norms.hpp"
#include "semidecay/spec_io.hpp"

using namespace semidecay;
using namespace testing_support;

namespace {

std::string operators_dir() { return SEMIDECAY_OPERATORS_DIR; }

std::string parse_error(std::string_view text) {
  try {
    parse_bundle(text);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Parse);
    return e.what();
  }
  FAIL("expected a parse error");
  return {};
}

}  // namespace

TEST_SUITE("spec_io") {
  TEST_CASE("bare operator object is T") {
    const OperatorBundle b = parse_bundle(R"({"kind": "dense", "rows": [[1, [0, 2]], [0, 1]]})");
    CHECK(b.T.kind() == OperatorKind::DenseMatrix);
    CHECK(b.T.matrix()(0, 1) == Complex(0.0, 2.0));
    CHECK_FALSE(b.S);
    CHECK(b.get("S") == nullptr);
    CHECK(b.get("T") == &b.T);
  }

  TEST_CASE("roles, references to T and defaults") {
    const OperatorBundle b = parse_bundle(R"({
      "T": {"kind": "diagonal", "symbol": "one_minus_inv_j"},
      "S": {"kind": "identity_minus", "of": "T"},
      "S1": {"kind": "scaled", "factor": 2, "of": "T"},
      "D": {"kind": "zero"},
      "defaults": {"f": "pow:1", "k": 2},
      "description": "test"
    })");
    REQUIRE(b.S);
    REQUIRE(b.S1);
    REQUIRE(b.D);
    const ComplexVector e = unit(4, 3);
    CHECK(std::abs(b.S->apply(e)(3) - 0.25) < 1e-15);
    CHECK(std::abs(b.S1->apply(e)(3) - 1.5) < 1e-15);
    CHECK(operator_norm(*b.D).value == 0.0);
    CHECK(b.defaults.at("f") == "pow:1");
    CHECK(b.defaults.at("k") == "2");
  }

  TEST_CASE("operator kinds") {
    CHECK(parse_operator(R"({"kind": "diagonal", "symbol": [1, 0.5], "space": "c0"})").space_exponent() == kSupNorm);
    CHECK(parse_operator(R"({"kind": "diagonal", "symbol": "inv_j_pow:0.5", "space": 3})").space_exponent() == 3.0);
    CHECK(parse_operator(R"({"kind": "left_shift"})").kind() == OperatorKind::WeightedShift);
    CHECK(parse_operator(R"({"kind": "functional", "row": "inv_j_pow:1"})").kind() == OperatorKind::RankOneFunctional);
    CHECK(*parse_operator(R"({"kind": "identity", "dim": 3})").dimension() == 3);
    CHECK(*parse_operator(R"({"kind": "zero", "dim": 2})").dimension() == 2);

    const auto sum = parse_operator(R"({"kind": "sum", "terms": [
        {"kind": "dense", "rows": [[1, 0], [0, 1]]}, {"kind": "dense", "rows": [[0, 1], [0, 0]]}]})");
    CHECK(max_abs(sum.to_dense() - (DenseMatrix(2, 2) << 1, 1, 0, 1).finished()) < 1e-15);

    const auto prod = parse_operator(R"({"kind": "product", "factors": [
        {"kind": "dense", "rows": [[2]]}, {"kind": "dense", "rows": [[3]]}]})");
    CHECK(std::abs(prod.to_dense()(0, 0) - 6.0) < 1e-15);

    const auto sd = parse_operator(R"({"kind": "sampled_data", "A": [[-1]], "B": [[1]], "F": [[0]], "tau": 1})");
    CHECK(std::abs(sd.to_dense()(0, 0) - std::exp(-1.0)) < 1e-15);
  }

  TEST_CASE("errors carry the field path") {
    CHECK(parse_error(R"({"T": {"kind": "diagonal", "symbol": "nonsense"}})").find("T.symbol") != std::string::npos);
    CHECK(parse_error(R"({"T": {"kind": "dense", "rows": [[1, 2], [3]]}})").find("T.rows[1]") != std::string::npos);
    CHECK(parse_error(R"({"T": {"kind": "blob"}})").find("T.kind") != std::string::npos);
    CHECK(parse_error(R"({"T": {"kind": "dense"}})").find("T.matrix") != std::string::npos);
    CHECK(parse_error(R"({"T": {"kind": "zero"}, "X": 1})").find("X") != std::string::npos);
    CHECK(parse_error(R"({"S": {"kind": "zero"}})").find("T") != std::string::npos);
    CHECK(parse_error(R"({"T": "T"})").find("T") != std::string::npos);
    CHECK(parse_error(R"({"T": {"kind": "sampled_data", "A": [[0]], "B": [[0]], "F": [[0]], "tau": -1}})")
              .find("T.tau") != std::string::npos);
    CHECK(parse_error("{not json").size() > 0);
    CHECK(parse_error("[1, 2]").find("object") != std::string::npos);
  }

  TEST_CASE("missing file is an io error") {
    try {
      load_bundle("/nonexistent/spec.json");
      FAIL("expected an io error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Io);
    }
  }

  TEST_CASE("shipped operator specs all load") {
    int count = 0;
    for (const auto& entry : std::filesystem::directory_iterator(operators_dir())) {
      if (entry.path().extension() != ".json") continue;
      CAPTURE(entry.path().string());
      CHECK_NOTHROW(load_bundle(entry.path().string()));
      ++count;
    }
    CHECK(count >= 10);
  }

  TEST_CASE("shipped example pair") {
    const OperatorBundle b = load_bundle(operators_dir() + "/example1_pair.json");
    REQUIRE(b.S);
    CHECK(b.defaults.at("f") == "pow:0.5");
    CHECK(std::abs(b.S->apply(unit(4, 3))(3) - 0.5) < 1e-15);
  }
}
