#include "chemolab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "chemolab/error.hpp"

namespace chemolab {

void SolverConfig::validate() const {
  auto fail = [](const char* field) {
    throw Error(ErrorKind::Validation, std::string("invalid solver setting: ") + field);
  };
  if (nodes < 64) fail("nodes");
  if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) fail("cfl_safety");
  if (!(dt_floor > 0.0)) fail("dt_floor");
  if (!(blowup_cap > 0.0)) fail("blowup_cap");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) fail("horizon");
  if (!(record_every > 0.0)) fail("record_every");
  if (max_steps == 0) fail("max_steps");
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Blowup: return "Blowup";
    case Verdict::Bounded: return "Bounded";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

double SolverReport::sup_growth() const {
  double g = 0.0;
  if (sup_u0 > 0.0) g = std::max(g, max_sup_u / sup_u0);
  if (sup_w0 > 0.0) g = std::max(g, max_sup_w / sup_w0);
  return g;
}

void SolverState::validate() const {
  U.validate();
  W.validate();
  if (U.s != W.s) throw Error(ErrorKind::Structural, "U and W live on different grids");
  if (U.values.front() != 0.0 || W.values.front() != 0.0) {
    throw Error(ErrorKind::Structural, "mass profiles must vanish at s = 0");
  }
  if (U.mu != mu_u || W.mu != mu_w) {
    throw Error(ErrorKind::Structural, "state means disagree with profile means");
  }
}

SolverState make_state(MassProfile U0, MassProfile W0) {
  SolverState st;
  st.mu_u = U0.mu;
  st.mu_w = W0.mu;
  st.U = std::move(U0);
  st.W = std::move(W0);
  st.validate();
  if (!(st.mu_u > 0.0) || !(st.mu_w > 0.0)) {
    throw Error(ErrorKind::Domain, "mean densities must be positive");
  }
  return st;
}

TransformedStepper::TransformedStepper(const std::vector<double>& s,
                                       const ProblemParams& params)
    : n_(params.n), p_(params.p), q_(params.q), s_(s) {
  params.validate();
  const std::size_t m = s_.size();
  if (m < 3) throw Error(ErrorKind::Structural, "solver grid needs >= 3 nodes");
  const double nn = n_;
  h_.resize(m - 1);
  for (std::size_t j = 0; j + 1 < m; ++j) h_[j] = s_[j + 1] - s_[j];
  diff_.assign(m, 0.0);
  g_.assign(m, 0.0);
  diffusive_bound_ = std::numeric_limits<double>::infinity();
  for (std::size_t j = 1; j + 1 < m; ++j) {
    diff_[j] = nn * nn * std::pow(s_[j], 2.0 - 2.0 / nn);
    g_[j] = std::pow(s_[j], 1.0 / nn - 1.0);
    diffusive_bound_ = std::min(diffusive_bound_, h_[j - 1] * h_[j] / (2.0 * diff_[j]));
  }
  a_u_.assign(m, 0.0);
  a_w_.assign(m, 0.0);
  next_u_.assign(m, 0.0);
  next_w_.assign(m, 0.0);
}

void TransformedStepper::drift(const MassProfile& partner, double mu, double e,
                               std::vector<double>& out) const {
  const double nn = n_;
  const std::size_t m = s_.size();
  for (std::size_t j = 1; j + 1 < m; ++j) {
    const double X = partner.values[j] - mu * s_[j] / nn;
    double f = 1.0;
    if (e != 0.0) {
      const double g = g_[j] * X;
      f = std::exp(-0.5 * e * std::log1p(g * g));
    }
    out[j] = nn * X * f;
  }
}

double TransformedStepper::stable_dt(const SolverState& state, double cfl) const {
  drift(state.W, state.mu_w, p_, a_u_);
  drift(state.U, state.mu_u, q_, a_w_);
  double adv = std::numeric_limits<double>::infinity();
  const std::size_t m = s_.size();
  for (std::size_t j = 1; j + 1 < m; ++j) {
    const double a1 = a_u_[j];
    const double a2 = a_w_[j];
    if (a1 != 0.0) adv = std::min(adv, (a1 > 0.0 ? h_[j] : h_[j - 1]) / std::abs(a1));
    if (a2 != 0.0) adv = std::min(adv, (a2 > 0.0 ? h_[j] : h_[j - 1]) / std::abs(a2));
  }
  return cfl * std::min(diffusive_bound_, adv);
}

void TransformedStepper::advance(SolverState& state, double dt) {
  drift(state.W, state.mu_w, p_, a_u_);
  drift(state.U, state.mu_u, q_, a_w_);
  const std::size_t m = s_.size();
  const std::vector<double>& U = state.U.values;
  const std::vector<double>& W = state.W.values;
  for (std::size_t j = 1; j + 1 < m; ++j) {
    const double h1 = h_[j - 1];
    const double h2 = h_[j];
    const double c = 2.0 / (h1 + h2);
    {
      const double fwd = (U[j + 1] - U[j]) / h2;
      const double bwd = (U[j] - U[j - 1]) / h1;
      const double a = a_u_[j];
      next_u_[j] = U[j] + dt * (diff_[j] * c * (fwd - bwd) + a * (a > 0.0 ? fwd : bwd));
    }
    {
      const double fwd = (W[j + 1] - W[j]) / h2;
      const double bwd = (W[j] - W[j - 1]) / h1;
      const double a = a_w_[j];
      next_w_[j] = W[j] + dt * (diff_[j] * c * (fwd - bwd) + a * (a > 0.0 ? fwd : bwd));
    }
  }
  next_u_[0] = U[0];
  next_u_[m - 1] = U[m - 1];
  next_w_[0] = W[0];
  next_w_[m - 1] = W[m - 1];
  state.U.values.swap(next_u_);
  state.W.values.swap(next_w_);
  state.t += dt;
}

double stable_dt(const SolverState& state, const ProblemParams& params,
                 const SolverConfig& cfg) {
  return TransformedStepper(state.U.s, params).stable_dt(state, cfg.cfl_safety);
}

void advance(SolverState& state, const ProblemParams& params, double dt) {
  TransformedStepper(state.U.s, params).advance(state, dt);
}

SolverState step_transformed(const SolverState& state, const ProblemParams& params,
                             const SolverConfig& cfg) {
  state.validate();
  TransformedStepper stepper(state.U.s, params);
  SolverState next = state;
  const double dt = stepper.stable_dt(next, cfg.cfl_safety);
  if (!(dt >= cfg.dt_floor)) {
    throw Error(ErrorKind::NonTermination, "stable step below dt_floor");
  }
  stepper.advance(next, dt);
  return next;
}

namespace {

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Shared time loop. `Model` provides stable_dt(), advance(dt), sup_u(),
// sup_w(), mass_u(), mass_w(), finite(), t().
template <class Model, class OnRecord>
SolverReport time_loop(Model& model, const SolverConfig& cfg, OnRecord&& on_record) {
  SolverReport rep;
  rep.sup_u0 = model.sup_u();
  rep.sup_w0 = model.sup_w();
  rep.max_sup_u = rep.sup_u0;
  rep.max_sup_w = rep.sup_w0;
  const double m_u0 = model.mass_u();
  const double m_w0 = model.mass_w();
  auto push = [&]() {
    const double mu = model.mass_u();
    const double mw = model.mass_w();
    rep.series.push_back({model.t(), model.sup_u(), model.sup_w(), mu, mw});
    rep.mass_drift = std::max({rep.mass_drift, std::abs(mu - m_u0) / m_u0,
                               std::abs(mw - m_w0) / m_w0});
  };
  push();
  on_record(false, 0.0);

  std::size_t k = 1;
  bool recorded_last = true;
  while (true) {
    const double t = model.t();
    if (t >= cfg.horizon) {
      rep.verdict = Verdict::Bounded;
      break;
    }
    if (rep.step_count >= cfg.max_steps) {
      rep.verdict = Verdict::Inconclusive;
      rep.diagnostic = "step budget exhausted";
      break;
    }
    double dt = model.stable_dt();
    if (!(dt >= cfg.dt_floor)) {
      rep.verdict = Verdict::Inconclusive;
      rep.diagnostic = std::isfinite(dt) ? "time step below dt_floor" : "non-finite time step";
      break;
    }
    const double next_record = static_cast<double>(k) * cfg.record_every;
    const double target = std::min(cfg.horizon, next_record);
    const bool landing = t + dt >= target;
    if (landing) dt = target - t;
    if (landing) model.remember();
    model.advance(dt);
    if (landing) model.set_t(target);
    ++rep.step_count;
    recorded_last = false;
    if (!model.finite()) {
      rep.verdict = Verdict::Inconclusive;
      rep.diagnostic = "non-finite state";
      break;
    }
    const double su = model.sup_u();
    const double sw = model.sup_w();
    rep.max_sup_u = std::max(rep.max_sup_u, su);
    rep.max_sup_w = std::max(rep.max_sup_w, sw);
    if (su > cfg.blowup_cap * rep.sup_u0 || sw > cfg.blowup_cap * rep.sup_w0) {
      rep.verdict = Verdict::Blowup;
      push();
      on_record(landing, landing ? dt : 0.0);
      recorded_last = true;
      break;
    }
    if (landing) {
      push();
      on_record(true, dt);
      recorded_last = true;
      while (static_cast<double>(k) * cfg.record_every <= model.t()) ++k;
    }
  }
  if (!recorded_last && model.finite()) push();
  rep.t_end = model.t();
  return rep;
}

class TransformedModel {
 public:
  TransformedModel(SolverState st, const ProblemParams& params, const SolverConfig& cfg,
                   bool keep_prev)
      : state_(std::move(st)), stepper_(state_.U.s, params), cfl_(cfg.cfl_safety),
        keep_prev_(keep_prev), n_(params.n) {}

  double t() const { return state_.t; }
  void set_t(double t) { state_.t = t; }
  double stable_dt() const { return stepper_.stable_dt(state_, cfl_); }
  void advance(double dt) { stepper_.advance(state_, dt); }
  void remember() {
    if (keep_prev_) prev_ = state_;
  }
  double sup_u() const { return sup_density(state_.U.s, state_.U.values, n_); }
  double sup_w() const { return sup_density(state_.W.s, state_.W.values, n_); }
  double mass_u() const { return state_.U.values.back(); }
  double mass_w() const { return state_.W.values.back(); }
  bool finite() const { return all_finite(state_.U.values) && all_finite(state_.W.values); }
  const SolverState& state() const { return state_; }
  const SolverState& prev() const { return prev_; }

 private:
  SolverState state_;
  TransformedStepper stepper_;
  double cfl_;
  bool keep_prev_;
  int n_;
  SolverState prev_;
};

}  // namespace

SolverReport run_transformed(const MassProfile& U0, const MassProfile& W0,
                             const ProblemParams& params, const SolverConfig& cfg,
                             const RecordObserver& observer) {
  params.validate();
  cfg.validate();
  TransformedModel model(make_state(U0, W0), params, cfg, static_cast<bool>(observer));
  return time_loop(model, cfg, [&](bool has_prev, double dt) {
    if (!observer) return;
    observer(model.state(), has_prev ? &model.prev() : nullptr, dt);
  });
}

namespace {

class PrimalModel {
 public:
  PrimalModel(const MassProfile& U0, const MassProfile& W0, const ProblemParams& params,
              const SolverConfig& cfg)
      : n_(params.n), p_(params.p), q_(params.q), cfl_(cfg.cfl_safety),
        mu_u_(U0.mu), mu_w_(W0.mu) {
    const std::size_t m = U0.size();
    const std::size_t cells = m - 1;
    const double nn = n_;
    s_ = U0.s;
    vol_.resize(cells);
    u_.resize(cells);
    w_.resize(cells);
    for (std::size_t i = 0; i < cells; ++i) {
      const double ds = s_[i + 1] - s_[i];
      vol_[i] = ds / nn;
      u_[i] = nn * (U0.values[i + 1] - U0.values[i]) / ds;
      w_[i] = nn * (W0.values[i + 1] - W0.values[i]) / ds;
    }
    area_.assign(m, 0.0);
    inv_rad_.assign(m, 0.0);
    dist_.assign(m, 0.0);
    for (std::size_t j = 1; j < cells; ++j) {
      const double r = U0.r[j];
      area_[j] = std::pow(r, n_ - 1);
      inv_rad_[j] = 1.0 / area_[j];
      const double left = 0.5 * (U0.r[j - 1] + U0.r[j]);
      const double right = 0.5 * (U0.r[j] + U0.r[j + 1]);
      dist_[j] = right - left;
    }
    diffusive_bound_ = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cells; ++i) {
      double rate = 0.0;
      if (i > 0) rate += area_[i] / dist_[i];
      if (i + 1 < cells) rate += area_[i + 1] / dist_[i + 1];
      if (rate > 0.0) diffusive_bound_ = std::min(diffusive_bound_, vol_[i] / rate);
    }
    cu_.assign(m, 0.0);
    cw_.assign(m, 0.0);
    flux_.assign(m, 0.0);
  }

  double t() const { return t_; }
  void set_t(double t) { t_ = t; }
  void remember() {}

  double stable_dt() {
    velocities();
    const std::size_t cells = u_.size();
    double adv = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cells; ++i) {
      double ru = 0.0, rw = 0.0;
      if (i > 0) {
        ru += area_[i] * std::abs(cu_[i]);
        rw += area_[i] * std::abs(cw_[i]);
      }
      if (i + 1 < cells) {
        ru += area_[i + 1] * std::abs(cu_[i + 1]);
        rw += area_[i + 1] * std::abs(cw_[i + 1]);
      }
      const double r = std::max(ru, rw);
      if (r > 0.0) adv = std::min(adv, vol_[i] / r);
    }
    return cfl_ * std::min(diffusive_bound_, adv);
  }

  void advance(double dt) {
    velocities();
    update(u_, cu_, dt);
    update(w_, cw_, dt);
    t_ += dt;
  }

  double sup_u() const { return *std::max_element(u_.begin(), u_.end()); }
  double sup_w() const { return *std::max_element(w_.begin(), w_.end()); }
  double mass_u() const { return mass(u_); }
  double mass_w() const { return mass(w_); }
  bool finite() const { return all_finite(u_) && all_finite(w_); }

 private:
  double mass(const std::vector<double>& c) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) acc += vol_[i] * c[i];
    return acc;
  }

  // Face velocities f(v_r^2) v_r for u (signal from w) and the analogue for w.
  void velocities() {
    const std::size_t cells = u_.size();
    const double nn = n_;
    double Uc = 0.0, Wc = 0.0;
    for (std::size_t j = 1; j < cells; ++j) {
      Uc += vol_[j - 1] * u_[j - 1];
      Wc += vol_[j - 1] * w_[j - 1];
      const double vr = -inv_rad_[j] * (Wc - mu_w_ * s_[j] / nn);
      const double zr = -inv_rad_[j] * (Uc - mu_u_ * s_[j] / nn);
      cu_[j] = vr * (p_ == 0.0 ? 1.0 : std::exp(-0.5 * p_ * std::log1p(vr * vr)));
      cw_[j] = zr * (q_ == 0.0 ? 1.0 : std::exp(-0.5 * q_ * std::log1p(zr * zr)));
    }
  }

  void update(std::vector<double>& c, const std::vector<double>& vel, double dt) {
    const std::size_t cells = c.size();
    flux_[0] = 0.0;
    flux_[cells] = 0.0;
    for (std::size_t j = 1; j < cells; ++j) {
      const double up = vel[j] > 0.0 ? c[j - 1] : c[j];
      flux_[j] = area_[j] * (-(c[j] - c[j - 1]) / dist_[j] + vel[j] * up);
    }
    for (std::size_t i = 0; i < cells; ++i) {
      c[i] += dt * (flux_[i] - flux_[i + 1]) / vol_[i];
    }
  }

  int n_;
  double p_, q_, cfl_, mu_u_, mu_w_;
  double t_ = 0.0;
  double diffusive_bound_ = 0.0;
  std::vector<double> s_, vol_, u_, w_, area_, inv_rad_, dist_, cu_, cw_, flux_;
};

}  // namespace

SolverReport run_primal(const MassProfile& U0, const MassProfile& W0,
                        const ProblemParams& params, const SolverConfig& cfg) {
  params.validate();
  cfg.validate();
  make_state(U0, W0);  // validation only
  PrimalModel model(U0, W0, params, cfg);
  return time_loop(model, cfg, [](bool, double) {});
}

SolverReport run_primal(const RadialProfile& u0, const RadialProfile& w0,
                        const ProblemParams& params, const SolverConfig& cfg) {
  return run_primal(to_mass_profile(u0, params.n), to_mass_profile(w0, params.n), params,
                    cfg);
}

}  // namespace chemolab
