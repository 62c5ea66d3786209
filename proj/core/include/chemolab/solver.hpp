#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "chemolab/model.hpp"
#include "chemolab/radial.hpp"

namespace chemolab {

struct SolverConfig {
  std::size_t nodes = 512;
  double cfl_safety = 0.4;
  double dt_floor = 1e-14;
  double blowup_cap = 1e8;
  double horizon = 1.0;
  double record_every = 0.1;
  // Step budget; exhausting it ends the run as Inconclusive.
  std::size_t max_steps = 20'000'000;

  void validate() const;
};

enum class Verdict { Blowup, Bounded, Inconclusive };
std::string_view to_string(Verdict v);

struct SeriesPoint {
  double t;
  double sup_u;
  double sup_w;
  double mass_u;
  double mass_w;
};

struct SolverReport {
  Verdict verdict = Verdict::Inconclusive;
  double t_end = 0.0;
  std::vector<SeriesPoint> series;
  double mass_drift = 0.0;  // max relative deviation of either mass
  std::size_t step_count = 0;
  double sup_u0 = 0.0;
  double sup_w0 = 0.0;
  double max_sup_u = 0.0;
  double max_sup_w = 0.0;
  std::string diagnostic;  // reason for Inconclusive, empty otherwise

  double sup_growth() const;
};

struct SolverState {
  double t = 0.0;
  MassProfile U;
  MassProfile W;
  double mu_u = 0.0;
  double mu_w = 0.0;

  /// Throws Structural unless both profiles share a grid and carry
  /// their Dirichlet pins.
  void validate() const;
};

SolverState make_state(MassProfile U0, MassProfile W0);

/// Grid-dependent coefficients of the transformed scheme, cached so that
/// repeated steps avoid recomputing powers of s.
class TransformedStepper {
 public:
  TransformedStepper(const std::vector<double>& s, const ProblemParams& params);

  double stable_dt(const SolverState& state, double cfl) const;
  void advance(SolverState& state, double dt);

 private:
  void drift(const MassProfile& partner, double mu, double e,
             std::vector<double>& out) const;

  int n_;
  double p_;
  double q_;
  std::vector<double> s_;
  std::vector<double> h_;        // h_[j] = s_[j+1] - s_[j]
  std::vector<double> diff_;     // n^2 s^{2-2/n}
  std::vector<double> g_;        // s^{1/n-1}
  double diffusive_bound_ = 0.0;
  mutable std::vector<double> a_u_, a_w_;
  std::vector<double> next_u_, next_w_;
};

/// Largest admissible explicit step: cfl * min(diffusive, advective bound).
double stable_dt(const SolverState& state, const ProblemParams& params,
                 const SolverConfig& cfg);
/// One forward-Euler step of size dt; endpoints re-pinned exactly.
void advance(SolverState& state, const ProblemParams& params, double dt);
SolverState step_transformed(const SolverState& state, const ProblemParams& params,
                             const SolverConfig& cfg);

/// Called for every series point: t = 0, every record time and the cap
/// crossing. `prev` is the state before the step that landed on a record
/// time and `dt` that step's size; null / 0 at t = 0 and at a crossing that
/// did not land on a record time.
using RecordObserver =
    std::function<void(const SolverState& now, const SolverState* prev, double dt)>;

SolverReport run_transformed(const MassProfile& U0, const MassProfile& W0,
                             const ProblemParams& params, const SolverConfig& cfg,
                             const RecordObserver& observer = {});

/// Primal finite-volume solver on cells [r_i, r_{i+1}]; initial cell averages
/// are n (U_{i+1} - U_i) / (s_{i+1} - s_i), so both solvers can start from the
/// same discrete state.
SolverReport run_primal(const MassProfile& U0, const MassProfile& W0,
                        const ProblemParams& params, const SolverConfig& cfg);
SolverReport run_primal(const RadialProfile& u0, const RadialProfile& w0,
                        const ProblemParams& params, const SolverConfig& cfg);

}  // namespace chemolab
