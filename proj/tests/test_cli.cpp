#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string op(const char* name) { return std::string(SEMIDECAY_OPERATORS_DIR) + "/" + name + ".json"; }

/// Runs the CLI with `args`, discarding output; returns its exit status.
int cli(const std::string& args) {
  const std::string cmd = std::string("\"") + SEMIDECAY_CLI + "\" " + args + " >cli_stdout.txt 2>cli_stderr.txt";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("usage errors exit 1") {
  CHECK(cli("") == 1);
  CHECK(cli("powers") == 1);
  CHECK(cli("powers --op /nonexistent.json --out cli_out_missing") == 1);
  CHECK(slurp("cli_stderr.txt").find("nonexistent") != std::string::npos);
  CHECK(cli("powers --op " + op("example1_pair") + " --n-max ten") == 1);
  CHECK(cli("no-such-command") == 1);
}

TEST_CASE("help exits 0") { CHECK(cli("--help") == 0); }

TEST_CASE("estimate writes the report files") {
  fs::remove_all("cli_out_powers");
  CHECK(cli("powers --op " + op("example1_pair") + " --n-max 1024 --out cli_out_powers") == 0);
  CHECK(fs::exists("cli_out_powers/report.json"));
  CHECK(fs::exists("cli_out_powers/profile.csv"));
  const json doc = json::parse(slurp("cli_out_powers/report.json"));
  CHECK(doc["header"]["tool"] == "semidecay");
  CHECK(doc["report"]["command"] == "powers");
  CHECK(doc["report"]["config"]["n-max"] == "1024");
  CHECK(slurp("cli_stdout.txt").find("powers") != std::string::npos);
}

TEST_CASE("failed hypothesis exits 2") {
  CHECK(cli("stolz --op " + op("unitary_diag") + " --out cli_out_stolz") == 2);
  const json doc = json::parse(slurp("cli_out_stolz/report.json"));
  CHECK(doc["report"]["verdict"] == "hypothesis_failed");
  CHECK(cli("perturb --op " + op("perturb_shift_c") + " --grid 1:10:64 --out cli_out_perturb") == 2);
}

TEST_CASE("passing check exits 0") {
  CHECK(cli("equiv --op " + op("example1_pair") + " --n-max 1024 --grid 1:10:64 --out cli_out_equiv") == 0);
  CHECK(json::parse(slurp("cli_out_equiv/report.json"))["report"]["verdict"] == "pass");
}

TEST_CASE("reruns are identical apart from the header") {
  const std::string args = "equiv --op " + op("example1_pair") + " --n-max 512 --grid 1:8:64 --seed 7";
  REQUIRE(cli(args + " --out cli_out_a") == 0);
  REQUIRE(cli(args + " --workers 2 --out cli_out_b") == 0);
  const json a = json::parse(slurp("cli_out_a/report.json"));
  const json b = json::parse(slurp("cli_out_b/report.json"));
  CHECK(a["report"] == b["report"]);
  CHECK(a["report"]["config"]["seed"] == "7");
  CHECK(slurp("cli_out_a/profile.csv") == slurp("cli_out_b/profile.csv"));
  CHECK(slurp("cli_out_a/plotdata.csv") == slurp("cli_out_b/plotdata.csv"));

  // Byte-level: everything after the header block matches.
  const std::string ta = slurp("cli_out_a/report.json");
  const std::string tb = slurp("cli_out_b/report.json");
  CHECK(ta.substr(ta.find("\"report\"")) == tb.substr(tb.find("\"report\"")));
}

TEST_CASE("every subcommand runs on a shipped spec") {
  const std::pair<std::string, std::string> runs[] = {
      {"resolvent-sweep", "--op " + op("example1_pair") + " --grid 1:8:64"},
      {"reconstruct", "--op " + op("jordan_at_one") + " --r 2.5"},
      {"parseval", "--op " + op("zero")},
      {"kreiss", "--op " + op("unitary_diag") + " --grid 1:8:64"},
      {"ritt", "--op " + op("diag_one_minus_inv_j") + " --grid 1:8:64"},
      {"rk", "--op " + op("rk_stolz_curve") + " --grid 1:6:64"},
      {"gsf", "--op " + op("zero") + " --grid 1:8:64 --n-max 64"},
      {"integral-equiv", "--op " + op("example1_pair") + " --k 2 --grid 1:8:64 --n-max 512"},
      {"nlogn", "--op " + op("example3_shift") + " --grid 1:10:64 --n-max 512"},
      {"perturb", "--op " + op("perturb_zero") + " --grid 1:8:64 --n-max 512"},
      {"summability", "--op " + op("summability_pair")},
      {"mult-op", "--op " + op("mult_op") + " --n-max 512 --probes 5 --dim 32 --scalar-points 100"},
      {"rv-check", "--f pow:0.5 --grid 1:8:64"},
      {"sampled-data", "--op " + op("sampled_data")},
  };
  for (const auto& [cmd, args] : runs) {
    CAPTURE(cmd);
    const std::string dir = "cli_out_" + cmd;
    CHECK(cli(cmd + " " + args + " --out " + dir) == 0);
    CHECK(fs::exists(dir + "/report.json"));
  }
}
