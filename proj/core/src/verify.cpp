#include "chemolab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "chemolab/error.hpp"

namespace chemolab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct GapTracker {
  explicit GapTracker(double tolerance) : tol(tolerance) {}
  double tol;
  double min_U = kInf;
  double min_W = kInf;
  std::optional<GapViolation> first;

  void visit(char species, const std::vector<double>& s, const std::vector<double>& upper,
             const std::vector<double>& lower, double t) {
    double& slot = species == 'U' ? min_U : min_W;
    for (std::size_t j = 0; j < s.size(); ++j) {
      const double gap = upper[j] - lower[j];
      slot = std::min(slot, gap);
      if (!first && gap < -tol) first = GapViolation{species, s[j], t, -gap};
    }
  }
};

void finish(OrderingReport& rep, const GapTracker& g) {
  rep.min_gap_U = g.min_U;
  rep.min_gap_W = g.min_W;
  rep.first_violation = g.first;
  rep.tolerance = g.tol;
  rep.pass = !rep.inconclusive && rep.frames > 0 && g.min_U >= -g.tol && g.min_W >= -g.tol;
}

}  // namespace

OrderingReport comparison_harness(const MassProfile& lower_U, const MassProfile& lower_W,
                                  const MassProfile& upper_U, const MassProfile& upper_W,
                                  const ProblemParams& params, const SolverConfig& cfg,
                                  const ComparisonOptions& opts) {
  params.validate();
  cfg.validate();
  SolverState lo = make_state(lower_U, lower_W);
  SolverState up = make_state(upper_U, upper_W);
  if (lo.U.s != up.U.s) throw Error(ErrorKind::Structural, "pairs live on different grids");
  if (opts.enforce_preconditions) {
    if (!(params.p < 1.0) || !(params.q < 1.0)) {
      throw Error(ErrorKind::Precondition, "comparison needs p, q < 1");
    }
    for (std::size_t j = 0; j < lo.U.size(); ++j) {
      if (lo.U.values[j] > up.U.values[j] || lo.W.values[j] > up.W.values[j]) {
        throw Error(ErrorKind::Precondition,
                    "lower data exceeds upper data at node " + std::to_string(j));
      }
    }
  }

  OrderingReport rep;
  GapTracker gaps(opts.relative_tolerance *
                  std::max(up.U.values.back(), up.W.values.back()));
  auto frame = [&]() {
    gaps.visit('U', up.U.s, up.U.values, lo.U.values, up.t);
    gaps.visit('W', up.W.s, up.W.values, lo.W.values, up.t);
    ++rep.frames;
  };
  frame();

  TransformedStepper step_lo(lo.U.s, params);
  TransformedStepper step_up(up.U.s, params);
  const int n = params.n;
  const double cap_lo_u = cfg.blowup_cap * sup_density(lo.U.s, lo.U.values, n);
  const double cap_lo_w = cfg.blowup_cap * sup_density(lo.W.s, lo.W.values, n);
  const double cap_up_u = cfg.blowup_cap * sup_density(up.U.s, up.U.values, n);
  const double cap_up_w = cfg.blowup_cap * sup_density(up.W.s, up.W.values, n);
  std::size_t steps = 0;
  std::size_t k = 1;
  while (up.t < cfg.horizon) {
    if (steps >= cfg.max_steps) {
      rep.inconclusive = true;
      rep.note = "step budget exhausted";
      break;
    }
    double dt = std::min(step_lo.stable_dt(lo, cfg.cfl_safety),
                         step_up.stable_dt(up, cfg.cfl_safety));
    if (!(dt >= cfg.dt_floor)) {
      rep.inconclusive = true;
      rep.note = "time step below dt_floor";
      break;
    }
    const double target = std::min(cfg.horizon, static_cast<double>(k) * cfg.record_every);
    const bool landing = up.t + dt >= target;
    if (landing) dt = target - up.t;
    step_lo.advance(lo, dt);
    step_up.advance(up, dt);
    if (landing) lo.t = up.t = target;
    ++steps;
    const bool crossed = sup_density(lo.U.s, lo.U.values, n) > cap_lo_u ||
                         sup_density(lo.W.s, lo.W.values, n) > cap_lo_w ||
                         sup_density(up.U.s, up.U.values, n) > cap_up_u ||
                         sup_density(up.W.s, up.W.values, n) > cap_up_w;
    if (landing || crossed) frame();
    if (crossed) {
      rep.note = "cap crossing";
      break;
    }
    if (landing) {
      while (static_cast<double>(k) * cfg.record_every <= up.t) ++k;
    }
  }
  rep.t_end = up.t;
  finish(rep, gaps);
  return rep;
}

OrderingReport subsolution_vs_solution(const SubsolutionSpec& spec, const SolverConfig& cfg,
                                       double margin, double relative_tolerance) {
  cfg.validate();
  const BlowupData data = generate_blowup_initial_data(spec, margin, cfg.nodes);
  SolverConfig run_cfg = cfg;
  const double T = spec.T();
  if (!(T > 0.0)) throw Error(ErrorKind::ConstantsOverflow, "blow-up time underflows");
  run_cfg.horizon = std::min(cfg.horizon, T * (1.0 - 1e-9));

  OrderingReport rep;
  GapTracker gaps(relative_tolerance *
                  std::max(data.U0.values.back(), data.W0.values.back()));
  std::vector<double> lu(data.U0.size()), lw(data.U0.size());
  const SolverReport run = run_transformed(
      data.U0, data.W0, spec.params, run_cfg,
      [&](const SolverState& now, const SolverState*, double) {
        for (std::size_t j = 0; j < now.U.size(); ++j) {
          lu[j] = lower_U(spec, now.U.s[j], now.t);
          lw[j] = lower_W(spec, now.U.s[j], now.t);
        }
        gaps.visit('U', now.U.s, now.U.values, lu, now.t);
        gaps.visit('W', now.W.s, now.W.values, lw, now.t);
        ++rep.frames;
      });
  rep.t_end = run.t_end;
  if (run.verdict == Verdict::Inconclusive && rep.frames <= 1) {
    rep.inconclusive = true;
    rep.note = "solver inconclusive before the first comparison time: " + run.diagnostic;
  } else {
    rep.note = std::string("solver verdict ") + std::string(to_string(run.verdict));
  }
  finish(rep, gaps);
  return rep;
}

double gradient_ratio(const MassProfile& W, int n, double k) {
  const RadialProfile v = radial_gradient(W, n);
  double integral = 0.0;
  for (std::size_t j = 0; j + 1 < v.size(); ++j) {
    const double a = std::pow(v.r[j], n - 1) * std::pow(std::abs(v.values[j]), k);
    const double b = std::pow(v.r[j + 1], n - 1) * std::pow(std::abs(v.values[j + 1]), k);
    integral += 0.5 * (a + b) * (v.r[j + 1] - v.r[j]);
  }
  const double w = omega_n(n);
  return std::pow(w * integral, 1.0 / k) / (w * W.values.back());
}

GradientDiagnostic gradient_bound_diagnostic(const MassProfile& U0, const MassProfile& W0,
                                             const ProblemParams& params,
                                             const SolverConfig& cfg, double k) {
  params.validate();
  const double upper = static_cast<double>(params.n) / (params.n - 1);
  if (!(k >= 1.0) || !(k < upper)) {
    throw Error(ErrorKind::Domain, "k must lie in [1, n/(n-1))");
  }
  GradientDiagnostic out;
  out.k = k;
  out.run = run_transformed(U0, W0, params, cfg,
                            [&](const SolverState& now, const SolverState*, double) {
                              const double r = gradient_ratio(now.W, params.n, k);
                              out.ratio_series.push_back({now.t, r});
                            });
  out.initial_ratio = out.ratio_series.empty() ? 0.0 : out.ratio_series.front().ratio;
  for (const auto& pnt : out.ratio_series) out.sup_ratio = std::max(out.sup_ratio, pnt.ratio);
  return out;
}

RoundTripReport transform_round_trip(const std::function<double(double)>& u, double R, int n,
                                     std::size_t coarse_nodes, std::size_t fine_nodes) {
  auto error = [&](std::size_t nodes) {
    const RadialProfile in = sample_radial(u, R, nodes);
    const RadialProfile back = from_mass_profile(to_mass_profile(in, n), n);
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < nodes; ++j) {
      num = std::max(num, std::abs(back.values[j] - in.values[j]));
      den = std::max(den, std::abs(in.values[j]));
    }
    return den > 0.0 ? num / den : num;
  };
  RoundTripReport rep;
  rep.coarse_nodes = coarse_nodes;
  rep.fine_nodes = fine_nodes;
  rep.error_coarse = error(coarse_nodes);
  rep.error_fine = error(fine_nodes);
  const double hc = R / static_cast<double>(coarse_nodes - 1);
  const double hf = R / static_cast<double>(fine_nodes - 1);
  if (rep.error_fine > 0.0 && rep.error_coarse > 0.0) {
    rep.observed_order = std::log(rep.error_coarse / rep.error_fine) / std::log(hc / hf);
  }
  return rep;
}

ResidualFrame supersolution_residual(const SolverState& now, const SolverState& prev,
                                     double dt, const ProblemParams& params) {
  if (!(dt > 0.0)) throw Error(ErrorKind::Domain, "residual needs a positive step");
  const std::size_t m = now.U.size();
  std::vector<double> ut(m, 0.0), wt(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    ut[j] = (now.U.values[j] - prev.U.values[j]) / dt;
    wt[j] = (now.W.values[j] - prev.W.values[j]) / dt;
  }
  const double mu_ref = std::max(prev.mu_u, prev.mu_w);
  const OperatorResidual P = eval_P(prev.U, prev.W, ut, mu_ref, params.p, params.n);
  const OperatorResidual Q = eval_Q(prev.U, prev.W, wt, mu_ref, params.q, params.n);
  // Residuals below the rounding noise of the stencils are not violations:
  // on linear profiles every term is pure cancellation and the ratio
  // value/scale would be O(1) noise.
  const double nn = params.n;
  const std::vector<double>& s = prev.U.s;
  auto worst = [&](const OperatorResidual& r, const std::vector<double>& f,
                   const std::vector<double>& ft) {
    double e = 0.0;
    for (std::size_t k = 0; k < r.values.size(); ++k) {
      const std::size_t j = k + 1;
      const double h1 = s[j] - s[j - 1], h2 = s[j + 1] - s[j];
      const double slopes = std::abs((f[j + 1] - f[j]) / h2) + std::abs((f[j] - f[j - 1]) / h1);
      const double noise =
          1e3 * std::numeric_limits<double>::epsilon() *
          (nn * nn * std::pow(s[j], 2.0 - 2.0 / nn) * 2.0 * slopes / (h1 + h2) +
           nn * slopes * (std::abs(prev.W.values[j]) + std::abs(prev.U.values[j]) + mu_ref * s[j]) +
           std::abs(ft[j]));
      if (std::abs(r.values[k]) <= noise || !(r.scale[k] > 0.0)) continue;
      e = std::max(e, -r.values[k] / r.scale[k]);
    }
    return e;
  };
  return {now.t, worst(P, prev.U.values, ut), worst(Q, prev.W.values, wt)};
}

}  // namespace chemolab
