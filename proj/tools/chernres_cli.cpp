// chernres: run residue scenarios, verification suites and oracles.
//
// Exit codes: 0 all checks passed, 1 some check failed, 2 invalid input,
// 3 numerical or internal failure.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "chernres.h"

namespace {

struct Common {
  std::string scenario;
  std::string out;
  unsigned seed = 1;
  int threads = 0;
  double tolerance_scale = 1.0;
  std::vector<double> ladder;
  std::string chi;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("scenario", c.scenario, "Scenario file (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "Directory for report.json and ladders.csv; prints the JSON report when omitted");
  cmd->add_option("--seed", c.seed, "Sampling seed of the verification suites")->capture_default_str();
  cmd->add_option("--threads", c.threads, "Worker threads; 0 uses CHERNRES_THREADS or all cores")->check(CLI::NonNegativeNumber);
  cmd->add_option("--tolerance-scale", c.tolerance_scale, "Multiplies every tolerance")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--epsilon-ladder", c.ladder, "Decreasing epsilon values, comma separated")->delimiter(',');
  cmd->add_option("--chi", c.chi, "Cutoff family")->check(CLI::IsMember({"exp", "log", "exp-step", "log-step"}));
}

int exit_code(chernres_status st) {
  switch (st) {
    case CHERNRES_OK:
      return 0;
    case CHERNRES_INVALID_ARGUMENT:
    case CHERNRES_INVALID_SCENARIO:
    case CHERNRES_IO:
      return 2;
    default:
      return 3;
  }
}

int report_error(chernres_status st) {
  std::cerr << "chernres: " << chernres_last_error() << "\n";
  return exit_code(st);
}

int execute(const std::string& command, const std::string& suite, const Common& c) {
  chernres_scenario* s = nullptr;
  chernres_status st = chernres_scenario_load(c.scenario.c_str(), &s);
  if (st != CHERNRES_OK) return report_error(st);

  chernres_run_options opt;
  chernres_run_options_init(&opt);
  opt.seed = c.seed;
  opt.threads = c.threads;
  opt.tolerance_scale = c.tolerance_scale;
  if (!c.ladder.empty()) {
    opt.ladder = c.ladder.data();
    opt.ladder_len = c.ladder.size();
  }
  if (!c.chi.empty()) opt.cutoff = c.chi.c_str();

  chernres_report* r = nullptr;
  if (command == "run")
    st = chernres_run(s, &opt, &r);
  else if (command == "verify")
    st = chernres_verify(s, suite.c_str(), &opt, &r);
  else
    st = chernres_oracle(s, &opt, &r);
  chernres_scenario_free(s);
  if (st != CHERNRES_OK) return report_error(st);

  if (c.out.empty()) {
    std::cout << chernres_report_json(r);
  } else {
    st = chernres_report_write(r, c.out.c_str());
    if (st != CHERNRES_OK) {
      chernres_report_free(r);
      return report_error(st);
    }
  }
  const bool passed = chernres_report_passed(r) != 0;
  chernres_report_free(r);
  std::cerr << "chernres " << command << ": " << (passed ? "passed" : "FAILED") << "\n";
  return passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Residue currents of characteristic forms of coherent sheaves and foliations"};
  app.set_version_flag("--version", std::string(chernres_version()));
  app.require_subcommand(1);

  Common run_opts, verify_opts, oracle_opts;
  std::string suite = "all";
  CLI::App* run = app.add_subcommand("run", "Residue pairings over the epsilon ladder, with the configured checks");
  add_common(run, run_opts);
  CLI::App* verify = app.add_subcommand("verify", "Pointwise invariant suites");
  add_common(verify, verify_opts);
  verify->add_option("--suite", suite, "Suite to run")
      ->check(CLI::IsMember({"algebra", "cech", "connections", "vanishing", "transgression", "all"}))
      ->capture_default_str();
  CLI::App* oracle = app.add_subcommand("oracle", "Independent reference values");
  add_common(oracle, oracle_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (*run) return execute("run", suite, run_opts);
  if (*verify) return execute("verify", suite, verify_opts);
  return execute("oracle", suite, oracle_opts);
}
