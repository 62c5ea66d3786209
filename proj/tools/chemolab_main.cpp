// chemolab command-line front end.
//
// Exit codes: 0 every harness passed, 1 a harness ran but failed,
// 2 configuration / validation error, 3 I/O error, 4 internal error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <utility>
#include <string>

#include "CLI11.hpp"
#include "chemolab/error.hpp"
#include "chemolab/experiment.hpp"
#include "chemolab/serialize.hpp"

namespace {

enum Exit : int { kOk = 0, kHarnessFailed = 1, kConfig = 2, kIo = 3, kInternal = 4 };

int exit_code(chemolab::ErrorKind kind) {
  using chemolab::ErrorKind;
  switch (kind) {
    case ErrorKind::Parse:
    case ErrorKind::Validation:
    case ErrorKind::InvalidDimension:
    case ErrorKind::Domain:
    case ErrorKind::Regime:
    case ErrorKind::Precondition:
      return kConfig;
    case ErrorKind::Io:
      return kIo;
    default:
      return kInternal;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chemolab: radial chemotaxis experiments"};
  app.footer("\n" + chemolab::config_help() +
             "\nExit codes: 0 pass, 1 harness failed, 2 config error, 3 I/O error, 4 internal error.");
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::size_t> workers;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "config file (key = value lines)")->required();
  app.add_option("--workers", workers, "worker threads (overrides the config)");
  app.add_option("--out", out_dir, "output directory (overrides the config)");
  app.add_option("--seed", seed, "seed (overrides the config)");

  chemolab::ConfigOverrides ov;
  using chemolab::Experiment;
  const std::pair<Experiment, const char*> commands[] = {
      {Experiment::Simulate, "one transformed-solver run from the configured data"},
      {Experiment::VerifySubsolution, "sample the analytic lower pair and check its sign"},
      {Experiment::Compare, "ordering of a scaled-down pair against the original"},
      {Experiment::Thresholds, "constants and initial-mass thresholds of the lower pair"},
      {Experiment::Sweep, "verdict grid over the (p, q) box"},
  };
  for (const auto& [e, what] : commands) {
    app.add_subcommand(std::string(chemolab::to_string(e)), what)
        ->callback([&ov, e = e] { ov.experiment = e; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    ov.workers = workers;
    ov.output_dir = out_dir;
    ov.seed = seed;
    const std::string text = chemolab::read_text_file(config_path);
    const chemolab::RunConfig cfg = chemolab::parse_config(text, ov);
    const chemolab::ExperimentOutcome outcome = chemolab::run_experiment(cfg);
    chemolab::emit_outputs(outcome, cfg, cfg.output_dir);
    std::cout << outcome.harness << ": " << (outcome.pass ? "PASS" : "FAIL") << " ("
              << cfg.output_dir << "/report.json)\n";
    return outcome.pass ? kOk : kHarnessFailed;
  } catch (const chemolab::Error& e) {
    std::cerr << "error [" << chemolab::to_string(e.kind()) << "]: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
}
