#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "semidecay/operators.hpp"

namespace semidecay {

/// Operators of one analysis, read from an operator-spec file.
///
/// The file holds either a single operator object (taken as T) or an object
/// with the roles "T", "S", "S1", "S2", "D" and an optional "defaults" table
/// of command parameters ("f": "pow:0.5", "k": 1, ...).
struct OperatorBundle {
  LinearOperator T = LinearOperator::identity(1);
  std::optional<LinearOperator> S;
  std::optional<LinearOperator> S1;
  std::optional<LinearOperator> S2;
  std::optional<LinearOperator> D;
  /// Parameter defaults as strings, overridden by explicit flags.
  std::map<std::string, std::string> defaults;
  std::string source;

  const LinearOperator* get(std::string_view role) const;
};

/// Parse failures carry the JSON path of the offending field.
OperatorBundle parse_bundle(std::string_view text, const std::string& source = "<memory>");
OperatorBundle load_bundle(const std::string& path);

/// One operator object; "T" inside it refers to `t_ref` when given.
LinearOperator parse_operator(std::string_view text, const LinearOperator* t_ref = nullptr);

}  // namespace semidecay
