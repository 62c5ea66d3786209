#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "chemolab/model.hpp"
#include "chemolab/radial.hpp"
#include "chemolab/solver.hpp"
#include "chemolab/subsolution.hpp"

namespace chemolab {

struct GapViolation {
  char species;  // 'U' or 'W'
  double s;
  double t;
  double magnitude;  // lower - upper (positive)
};

struct OrderingReport {
  double min_gap_U = 0.0;
  double min_gap_W = 0.0;
  std::optional<GapViolation> first_violation;
  double tolerance = 0.0;
  std::size_t frames = 0;
  double t_end = 0.0;
  bool inconclusive = false;
  std::string note;
  bool pass = false;
};

struct ComparisonOptions {
  bool enforce_preconditions = true;
  double relative_tolerance = 1e-8;  // times the larger upper boundary value
};

/// Evolves two transformed-system pairs in lockstep (shared grid, shared dt =
/// min of the two stable steps) and records the minimum of upper - lower
/// over all record times, stopping at the first cap crossing of either pair.
OrderingReport comparison_harness(const MassProfile& lower_U, const MassProfile& lower_W,
                                  const MassProfile& upper_U, const MassProfile& upper_W,
                                  const ProblemParams& params, const SolverConfig& cfg,
                                  const ComparisonOptions& opts = {});

/// Runs the solver from generate_blowup_initial_data(spec, margin, cfg.nodes)
/// and compares with the analytic pair at each record time. The horizon is
/// cut just short of the blow-up time of the subsolution.
OrderingReport subsolution_vs_solution(const SubsolutionSpec& spec, const SolverConfig& cfg,
                                       double margin = 0.1,
                                       double relative_tolerance = 1e-3);

struct RatioPoint {
  double t;
  double ratio;
};

struct GradientDiagnostic {
  double k = 1.0;
  std::vector<RatioPoint> ratio_series;
  double sup_ratio = 0.0;
  double initial_ratio = 0.0;
  SolverReport run;
};

/// ||grad v||_{L^k} / ||w||_{L^1} for one W profile.
double gradient_ratio(const MassProfile& W, int n, double k);

GradientDiagnostic gradient_bound_diagnostic(const MassProfile& U0, const MassProfile& W0,
                                             const ProblemParams& params,
                                             const SolverConfig& cfg, double k);

struct RoundTripReport {
  std::size_t coarse_nodes = 0;
  std::size_t fine_nodes = 0;
  double error_coarse = 0.0;  // max |u_back - u| / max |u|
  double error_fine = 0.0;
  double observed_order = 0.0;
};

RoundTripReport transform_round_trip(const std::function<double(double)>& u, double R,
                                     int n, std::size_t coarse_nodes = 512,
                                     std::size_t fine_nodes = 1024);

/// Largest normalised violation max_j max(0, -P_j / scale_j) (and the Q
/// analogue) of the continuous operators on one solver step, using the
/// two-level time difference and the pre-step state for the spatial terms,
/// with mu_ref = max{mu_u, mu_w}.
struct ResidualFrame {
  double t;
  double eps_P;
  double eps_Q;
};
ResidualFrame supersolution_residual(const SolverState& now, const SolverState& prev,
                                     double dt, const ProblemParams& params);

}  // namespace chemolab
