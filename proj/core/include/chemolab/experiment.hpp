#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chemolab/model.hpp"
#include "chemolab/radial.hpp"
#include "chemolab/solver.hpp"

namespace chemolab {

enum class Experiment { Simulate, VerifySubsolution, Compare, Thresholds, Sweep };

std::string_view to_string(Experiment e) noexcept;
/// Throws Error{Parse} for unknown names.
Experiment parse_experiment(std::string_view name);

struct SweepBox {
  double p_min = 0.0;
  double p_max = 0.0;
  double q_min = 0.0;
  double q_max = 0.0;
  std::size_t cells_per_axis = 0;
};

/// Initial data. "bump": u0 = w0 = A exp(-r^2/sigma^2) + eps. "subsolution":
/// generate_blowup_initial_data at (mu_u, mu_w) with the given margin.
struct DataRecipe {
  std::string kind = "bump";
  double A = 1e5;
  double sigma = 0.05;
  double eps = 0.01;
  double margin = 0.1;
  double mu_u = 3.0;
  double mu_w = 3.0;
};

struct RunConfig {
  ProblemParams params;
  SolverConfig solver;
  Experiment experiment = Experiment::Simulate;
  std::optional<SweepBox> sweep_box;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  std::size_t workers = 1;
  DataRecipe data;

  // "bump" uses `data` for every cell; "auto" tries the subsolution recipe in
  // the blow-up quadrant and falls back to the bump.
  std::string sweep_recipe = "bump";
  double sweep_band = 0.1;
  double sweep_min_agreement = 0.9;

  std::size_t verify_samples = 400;
  double verify_tolerance = 1e-9;

  double compare_lower_scale = 0.9;
  double compare_tolerance = 1e-8;

  std::string source_text;  // the config as read, echoed into report.json

  /// Throws Error{Validation} naming the offending key.
  void validate() const;
  /// key = value listing of every setting in registry order.
  std::string canonical() const;
};

struct ConfigKey {
  std::string name;
  std::string default_value;  // empty when the key has no default
  std::string help;
};

/// Every accepted key, in documentation order.
const std::vector<ConfigKey>& config_keys();
/// Text block used by `--help`.
std::string config_help();

/// Command-line values that take precedence over the file.
struct ConfigOverrides {
  std::optional<Experiment> experiment;
  std::optional<std::size_t> workers;
  std::optional<std::string> output_dir;
  std::optional<std::uint64_t> seed;
};

/// Line-oriented `key = value`; `#` starts a comment. Throws Error{Parse}
/// with the line number, or Error{Validation} naming the field.
RunConfig parse_config(std::string_view text, const ConfigOverrides& overrides = {});

struct InitialPair {
  MassProfile U0;
  MassProfile W0;
  std::string recipe;  // human-readable description
};

InitialPair bump_data(const DataRecipe& recipe, const ProblemParams& params, std::size_t nodes);
InitialPair make_initial_data(const DataRecipe& recipe, const ProblemParams& params,
                              std::size_t nodes);

struct SweepCell {
  double p = 0.0;
  double q = 0.0;
  Verdict verdict = Verdict::Inconclusive;
  double t_end = 0.0;
  double sup_growth = 0.0;
  Regime expected = Regime::Uncovered;
  bool in_band = false;
  std::string recipe;
  std::string diagnostic;
  std::vector<SeriesPoint> series;
};

struct SweepResult {
  std::size_t cells_per_axis = 0;
  std::vector<SweepCell> cells;  // row-major: p outer, q inner
  int n = 0;
  double R = 0.0;
  std::string data_recipe;
  std::string solver_digest;
  double band = 0.0;
  std::size_t scored = 0;
  std::size_t agreeing = 0;

  double agreement() const;
};

/// Grid coordinates: cells_per_axis points from min to max inclusive.
std::vector<double> sweep_axis(double lo, double hi, std::size_t cells);
bool agrees(Regime expected, Verdict verdict);

SweepResult run_sweep(const RunConfig& cfg);

std::string sweep_csv(const SweepResult& result);

/// What an experiment produced: the report body plus extra files, keyed by
/// path relative to the output directory.
struct ExperimentOutcome {
  std::string harness;
  bool pass = false;
  std::string details_json;
  std::map<std::string, std::string> files;
};

ExperimentOutcome run_experiment(const RunConfig& cfg);
ExperimentOutcome sweep_outcome(const SweepResult& result, const RunConfig& cfg);

/// Writes every file of `outcome` and report.json into `dir`.
void emit_outputs(const ExperimentOutcome& outcome, const RunConfig& cfg,
                  const std::filesystem::path& dir);

std::string inputs_digest(const RunConfig& cfg);

}  // namespace chemolab
