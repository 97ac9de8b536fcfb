#pragma once

#include <map>
#include <string>
#include <vector>

namespace semidecay {

/// Pass: the checked statement holds on the sample. Estimate: a constant or
/// profile was computed and its trend is reported. HypothesisFailed: a
/// hypothesis, precondition or checked inequality failed.
enum class Verdict { Pass, Estimate, HypothesisFailed };

const char* to_string(Verdict v) noexcept;

/// Command name plus its parameters as flag-name -> text ("op", "k",
/// "alpha", "p", "f", "n-max", "grid", "seed", ...). Values missing here fall
/// back to the "defaults" table of the operator spec, then to built-in defaults.
struct RunConfig {
  std::string command;
  std::map<std::string, std::string> params;
};

struct AnalysisReport {
  std::string command;
  Verdict verdict = Verdict::Estimate;
  /// Short outcome word: "pass", "fail", "stable", "growing", "member", ...
  std::string label;
  /// Deterministic report body (no timestamp), pretty-printed JSON.
  std::string body;
  /// profile.csv with a header row.
  std::string profile_csv;
  /// x,y,series rows; empty when the command has nothing to plot.
  std::string plotdata_csv;

  /// 0 for Pass and Estimate, 2 for HypothesisFailed.
  int exit_code() const;
};

const std::vector<std::string>& command_names();

/// Runs one analysis. Hypothesis, domain and divergence errors raised by the
/// analysis become a HypothesisFailed report; argument and parse errors
/// propagate as semidecay::Error.
AnalysisReport run_analysis(const RunConfig& config);

/// report.json text: {"header": {tool, version, timestamp}, "report": body}.
std::string report_json(const AnalysisReport& report, const std::string& timestamp);

/// Writes report.json, profile.csv and (when non-empty) plotdata.csv.
void write_report(const AnalysisReport& report, const std::string& dir, const std::string& timestamp);

/// UTC time in ISO 8601.
std::string utc_timestamp();

const char* library_version() noexcept;

}  // namespace semidecay
