// Command-line front end: parses flags, hands them to the library through the
// C interface and writes the report files.

#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "semidecay.h"

namespace {

enum class Kind { Text, Integer, Real };

struct Flag {
  const char* name;
  Kind kind;
  const char* help;
};

const Flag kCommon[] = {
    {"op", Kind::Text, "operator-spec JSON file"},
    {"k", Kind::Integer, "resolvent power (or k_max for kreiss)"},
    {"alpha", Kind::Real, "decay index"},
    {"p", Kind::Real, "summability exponent"},
    {"f", Kind::Text, "rate function: pow:a, pow_log:a,q, log, const, staircase"},
    {"n-max", Kind::Integer, "largest power n"},
    {"grid", Kind::Text, "spectral grid jmin:jmax:ntheta, radii 1+2^-j"},
    {"seed", Kind::Integer, "probe seed"},
    {"workers", Kind::Integer, "worker threads (0: hardware default)"},
};

struct Command {
  const char* name;
  const char* help;
  std::vector<Flag> extra;
};

const std::vector<Command>& commands() {
  static const std::vector<Command> list = {
      {"powers", "decay profile of ||S1 T^n (I-T)^m S||", {{"complement", Kind::Integer, "power m of I - T"}}},
      {"resolvent-sweep", "sup over circles of ||S1 R(lambda,T)^k S||", {}},
      {"reconstruct", "T^n from the contour integral against direct powers",
       {{"r", Kind::Real, "contour radius"}, {"n-theta", Kind::Integer, "quadrature nodes"},
        {"tol", Kind::Real, "entrywise tolerance"}}},
      {"parseval", "circle integral of ||S R^k x||^2 against the power series",
       {{"r", Kind::Real, "circle radius"}, {"n-theta", Kind::Integer, "quadrature nodes"},
        {"tol", Kind::Real, "residual tolerance"}, {"dim", Kind::Integer, "probe length for sequence operators"}}},
      {"kreiss", "Kreiss and strong Kreiss constants", {}},
      {"ritt", "Ritt resolvent condition",
       {{"variant", Kind::Text, "constant | power-resolvent | integral"}, {"probes", Kind::Integer, "probe count (0: sup)"}}},
      {"rk", "(alpha, beta)-RK boundedness", {{"beta", Kind::Real, "exponent of |lambda| - 1"}}},
      {"stolz", "spectrum inside a Stolz domain, or quasi-multiplication decay",
       {{"delta", Kind::Real, "Stolz exponent"}, {"c", Kind::Real, "Stolz constant"},
        {"variant", Kind::Text, "containment | quasi-mult"}, {"j-max", Kind::Integer, "symbol points checked"}}},
      {"gsf", "integral condition for power boundedness", {{"probes", Kind::Integer, "probe count (0: sup)"}}},
      {"integral-equiv", "decay against the circle-integral condition", {{"probes", Kind::Integer, "probe count (0: sup)"}}},
      {"equiv", "decay against resolvent growth", {}},
      {"nlogn", "||S1 R(r,T) S|| against H_alpha(r - 1)", {}},
      {"perturb", "robustness under a commuting perturbation D", {{"probes", Kind::Integer, "spot-check probes"}}},
      {"summability", "weighted summability and decay",
       {{"mode", Kind::Text, "sum-to-decay | decay-to-sum | sum-to-resolvent"}, {"g", Kind::Text, "second rate function"},
        {"probes", Kind::Integer, "probe count"}, {"dim", Kind::Integer, "truncation length"},
        {"window-lo", Kind::Integer, "first checkpoint of the stability window"}}},
      {"mult-op", "multiplication operator: summability against decay",
       {{"q", Kind::Real, "space exponent"}, {"probes", Kind::Integer, "probe count"},
        {"dim", Kind::Integer, "truncation length"}, {"scalar-points", Kind::Integer, "sampled symbol values"}}},
      {"rv-check", "regular-variation checks of a rate function",
       {{"beta", Kind::Real, "weight exponent"}, {"t-max", Kind::Real, "largest sampled t"}}},
      {"sampled-data", "sampled-data system operator and its powers", {}},
  };
  return list;
}

void add_flag(CLI::App* sub, const Flag& flag, std::map<std::string, std::string>& values) {
  auto* opt = sub->add_option(std::string("--") + flag.name, values[flag.name], flag.help);
  if (flag.kind == Kind::Integer) opt->check(CLI::TypeValidator<long long>("INT"));
  if (flag.kind == Kind::Real) opt->check(CLI::Number);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semidecay: decay of operator powers and resolvent growth"};
  app.require_subcommand(1);
  app.set_version_flag("--version", sd_version());

  std::string out_dir = "semidecay_out";
  struct Bound {
    CLI::App* app;
    std::map<std::string, std::string> values;
  };
  std::vector<Bound> bound(commands().size());
  for (std::size_t i = 0; i < commands().size(); ++i) {
    const Command& c = commands()[i];
    bound[i].app = app.add_subcommand(c.name, c.help);
    for (const Flag& f : kCommon) add_flag(bound[i].app, f, bound[i].values);
    for (const Flag& f : c.extra) add_flag(bound[i].app, f, bound[i].values);
    bound[i].app->add_option("--out", out_dir, "output directory");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  for (std::size_t i = 0; i < bound.size(); ++i) {
    if (!bound[i].app->parsed()) continue;
    sd_params* params = nullptr;
    sd_params_create(&params);
    for (const auto& [key, value] : bound[i].values) {
      if (bound[i].app->count("--" + key) > 0) sd_params_set(params, key.c_str(), value.c_str());
    }
    sd_report* report = nullptr;
    const sd_status status = sd_run(commands()[i].name, params, &report);
    sd_params_free(params);
    if (status != SD_OK) {
      std::fprintf(stderr, "semidecay %s: %s error: %s\n", commands()[i].name, sd_status_name(status), sd_last_error());
      std::fprintf(stderr, "run 'semidecay %s --help' for usage\n", commands()[i].name);
      return 1;
    }
    if (sd_report_write(report, out_dir.c_str(), nullptr) != SD_OK) {
      std::fprintf(stderr, "semidecay: %s\n", sd_last_error());
      sd_report_free(report);
      return 1;
    }
    const sd_verdict verdict = sd_report_verdict(report);
    std::printf("%s: %s -> %s\n", commands()[i].name, sd_report_label(report), out_dir.c_str());
    sd_report_free(report);
    return verdict == SD_VERDICT_HYPOTHESIS_FAILED ? 2 : 0;
  }
  return 1;
}
