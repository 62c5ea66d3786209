#include "chemolab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <functional>
#include <set>
#include <thread>

#include "chemolab/error.hpp"
#include "chemolab/numfmt.hpp"
#include "chemolab/serialize.hpp"
#include "chemolab/subsolution.hpp"
#include "chemolab/verify.hpp"
#include "json.hpp"

namespace chemolab {

using json = nlohmann::ordered_json;

std::string_view to_string(Experiment e) noexcept {
  switch (e) {
    case Experiment::Simulate: return "simulate";
    case Experiment::VerifySubsolution: return "verify-subsolution";
    case Experiment::Compare: return "compare";
    case Experiment::Thresholds: return "thresholds";
    case Experiment::Sweep: return "sweep";
  }
  return "?";
}

Experiment parse_experiment(std::string_view name) {
  for (Experiment e : {Experiment::Simulate, Experiment::VerifySubsolution, Experiment::Compare,
                       Experiment::Thresholds, Experiment::Sweep}) {
    if (to_string(e) == name) return e;
  }
  throw Error(ErrorKind::Parse, "unknown experiment '" + std::string(name) + "'");
}

namespace {

double to_double(std::string_view v) {
  double x = 0.0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || ptr != end) throw std::invalid_argument("expected a number");
  return x;
}

std::uint64_t to_u64(std::string_view v) {
  std::uint64_t x = 0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || ptr != end) throw std::invalid_argument("expected a non-negative integer");
  return x;
}

int to_int(std::string_view v) {
  int x = 0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || ptr != end) throw std::invalid_argument("expected an integer");
  return x;
}

struct KeyDef {
  ConfigKey doc;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class T>
std::string num(T x) {
  if constexpr (std::is_floating_point_v<T>) {
    return fmt_double(x);
  } else {
    return std::to_string(x);
  }
}

SweepBox& box(RunConfig& c) {
  if (!c.sweep_box) c.sweep_box.emplace();
  return *c.sweep_box;
}

std::string box_get(const RunConfig& c, double SweepBox::*f) {
  return c.sweep_box ? fmt_double((*c.sweep_box).*f) : std::string();
}

const std::vector<KeyDef>& registry() {
  static const std::vector<KeyDef> defs = [] {
    std::vector<KeyDef> d;
    auto add = [&](std::string name, std::string help, auto set, auto get) {
      d.push_back({{std::move(name), "", std::move(help)}, set, get});
    };
#define CHEMO_DBL(key, field, help)                                                   \
  add(key, help, [](RunConfig& c, std::string_view v) { c.field = to_double(v); }, \
      [](const RunConfig& c) { return num(c.field); })
#define CHEMO_U64(key, field, help)                                                     \
  add(key, help,                                                                         \
      [](RunConfig& c, std::string_view v) {                                             \
        c.field = static_cast<decltype(c.field)>(to_u64(v));                             \
      },                                                                                 \
      [](const RunConfig& c) { return num(c.field); })
#define CHEMO_STR(key, field, help)                                                  \
  add(key, help, [](RunConfig& c, std::string_view v) { c.field = std::string(v); }, \
      [](const RunConfig& c) { return c.field; })

    add("experiment", "simulate | verify-subsolution | compare | thresholds | sweep (required)",
        [](RunConfig& c, std::string_view v) { c.experiment = parse_experiment(v); },
        [](const RunConfig& c) { return std::string(to_string(c.experiment)); });
    add("params.n", "space dimension, n >= 2",
        [](RunConfig& c, std::string_view v) { c.params.n = to_int(v); },
        [](const RunConfig& c) { return num(c.params.n); });
    CHEMO_DBL("params.R", params.R, "ball radius");
    CHEMO_DBL("params.p", params.p, "flux exponent of u");
    CHEMO_DBL("params.q", params.q, "flux exponent of w");
    CHEMO_U64("solver.nodes", solver.nodes, "radial grid nodes (>= 64)");
    CHEMO_DBL("solver.cfl_safety", solver.cfl_safety, "fraction of the stable step, in (0,1]");
    CHEMO_DBL("solver.dt_floor", solver.dt_floor, "smallest admissible step before Inconclusive");
    CHEMO_DBL("solver.blowup_cap", solver.blowup_cap, "Blowup once a sup-norm exceeds cap x its initial value");
    CHEMO_DBL("solver.horizon", solver.horizon, "final time");
    CHEMO_DBL("solver.record_every", solver.record_every, "time between recorded frames");
    CHEMO_U64("solver.max_steps", solver.max_steps, "step budget before Inconclusive");
    CHEMO_STR("data.recipe", data.kind, "bump | subsolution");
    CHEMO_DBL("data.A", data.A, "bump amplitude");
    CHEMO_DBL("data.sigma", data.sigma, "bump width");
    CHEMO_DBL("data.eps", data.eps, "bump floor (keeps the data positive)");
    CHEMO_DBL("data.margin", data.margin, "subsolution data: relative excess over the lower pair");
    CHEMO_DBL("data.mu_u", data.mu_u, "mean of u for the subsolution constants");
    CHEMO_DBL("data.mu_w", data.mu_w, "mean of w for the subsolution constants");
    add("sweep_box.p_min", "sweep: smallest p (required for sweep)",
        [](RunConfig& c, std::string_view v) { box(c).p_min = to_double(v); },
        [](const RunConfig& c) { return box_get(c, &SweepBox::p_min); });
    add("sweep_box.p_max", "sweep: largest p (required for sweep)",
        [](RunConfig& c, std::string_view v) { box(c).p_max = to_double(v); },
        [](const RunConfig& c) { return box_get(c, &SweepBox::p_max); });
    add("sweep_box.q_min", "sweep: smallest q (required for sweep)",
        [](RunConfig& c, std::string_view v) { box(c).q_min = to_double(v); },
        [](const RunConfig& c) { return box_get(c, &SweepBox::q_min); });
    add("sweep_box.q_max", "sweep: largest q (required for sweep)",
        [](RunConfig& c, std::string_view v) { box(c).q_max = to_double(v); },
        [](const RunConfig& c) { return box_get(c, &SweepBox::q_max); });
    add("sweep_box.cells", "sweep: points per axis, endpoints included (required for sweep)",
        [](RunConfig& c, std::string_view v) {
          box(c).cells_per_axis = static_cast<std::size_t>(to_u64(v));
        },
        [](const RunConfig& c) {
          return c.sweep_box ? num(c.sweep_box->cells_per_axis) : std::string();
        });
    CHEMO_STR("sweep.recipe", sweep_recipe, "bump | auto (subsolution data where admissible)");
    CHEMO_DBL("sweep.band", sweep_band, "cells within this distance of the critical exponent are not scored");
    CHEMO_DBL("sweep.min_agreement", sweep_min_agreement, "sweep passes when this fraction of scored cells agree");
    CHEMO_U64("verify.samples", verify_samples, "samples per axis and region");
    CHEMO_DBL("verify.tolerance", verify_tolerance, "allowed normalised residual");
    CHEMO_DBL("compare.lower_scale", compare_lower_scale, "lower pair = scale x upper pair, in (0,1]");
    CHEMO_DBL("compare.tolerance", compare_tolerance, "allowed gap relative to the boundary value");
    CHEMO_U64("seed", seed, "seed for randomised checks");
    CHEMO_U64("workers", workers, "worker threads");
    CHEMO_STR("output_dir", output_dir, "directory for outputs");
#undef CHEMO_DBL
#undef CHEMO_U64
#undef CHEMO_STR

    const RunConfig defaults;
    for (auto& k : d) {
      if (k.doc.name != "experiment") k.doc.default_value = k.get(defaults);
    }
    return d;
  }();
  return defs;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
  throw Error(ErrorKind::Validation, field + ": " + why);
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> out;
    for (const auto& k : registry()) out.push_back(k.doc);
    return out;
  }();
  return keys;
}

std::string config_help() {
  std::string out = "Config keys (key = value, '#' comments):\n";
  for (const auto& k : config_keys()) {
    std::string line = "  " + k.name;
    if (line.size() < 24) line.resize(24, ' ');
    line += " default: " + (k.default_value.empty() ? std::string("(none)") : k.default_value);
    out += line + "\n      " + k.help + "\n";
  }
  return out;
}

void RunConfig::validate() const {
  if (params.n < 2) invalid("params.n", "must be >= 2");
  if (!(params.R > 0.0) || !std::isfinite(params.R)) invalid("params.R", "must be positive");
  if (!std::isfinite(params.p)) invalid("params.p", "must be finite");
  if (!std::isfinite(params.q)) invalid("params.q", "must be finite");
  if (solver.nodes < 64) invalid("solver.nodes", "must be >= 64");
  if (!(solver.cfl_safety > 0.0 && solver.cfl_safety <= 1.0)) {
    invalid("solver.cfl_safety", "must lie in (0,1]");
  }
  if (!(solver.dt_floor > 0.0)) invalid("solver.dt_floor", "must be positive");
  if (!(solver.blowup_cap > 0.0)) invalid("solver.blowup_cap", "must be positive");
  if (!(solver.horizon > 0.0) || !std::isfinite(solver.horizon)) {
    invalid("solver.horizon", "must be positive");
  }
  if (!(solver.record_every > 0.0)) invalid("solver.record_every", "must be positive");
  if (solver.max_steps == 0) invalid("solver.max_steps", "must be positive");
  if (data.kind != "bump" && data.kind != "subsolution") {
    invalid("data.recipe", "must be bump or subsolution");
  }
  if (!(data.A >= 0.0) || !std::isfinite(data.A)) invalid("data.A", "must be >= 0");
  if (!(data.sigma > 0.0)) invalid("data.sigma", "must be positive");
  if (!(data.eps > 0.0)) invalid("data.eps", "must be positive");
  if (!(data.margin > 0.0)) invalid("data.margin", "must be positive");
  if (!(data.mu_u > 0.0)) invalid("data.mu_u", "must be positive");
  if (!(data.mu_w > 0.0)) invalid("data.mu_w", "must be positive");
  if (experiment == Experiment::Sweep) {
    if (!sweep_box) invalid("sweep_box", "required when experiment = sweep");
    if (params.n < 3) invalid("params.n", "sweep needs n >= 3");
    if (sweep_box->cells_per_axis > 0 &&
        (!(sweep_box->p_min <= sweep_box->p_max) || !(sweep_box->q_min <= sweep_box->q_max))) {
      invalid("sweep_box", "min must not exceed max");
    }
  } else if (sweep_box) {
    invalid("sweep_box", "only allowed when experiment = sweep");
  }
  if (sweep_recipe != "bump" && sweep_recipe != "auto") {
    invalid("sweep.recipe", "must be bump or auto");
  }
  if (!(sweep_band >= 0.0)) invalid("sweep.band", "must be >= 0");
  if (!(sweep_min_agreement >= 0.0 && sweep_min_agreement <= 1.0)) {
    invalid("sweep.min_agreement", "must lie in [0,1]");
  }
  if (verify_samples < 2) invalid("verify.samples", "must be >= 2");
  if (!(verify_tolerance >= 0.0)) invalid("verify.tolerance", "must be >= 0");
  if (!(compare_lower_scale > 0.0 && compare_lower_scale <= 1.0)) {
    invalid("compare.lower_scale", "must lie in (0,1]");
  }
  if (!(compare_tolerance >= 0.0)) invalid("compare.tolerance", "must be >= 0");
  if (workers == 0) invalid("workers", "must be >= 1");
  if (output_dir.empty()) invalid("output_dir", "must not be empty");
}

std::string RunConfig::canonical() const {
  std::string out;
  for (const auto& k : registry()) {
    const std::string v = k.get(*this);
    if (!v.empty()) out += k.doc.name + " = " + v + "\n";
  }
  return out;
}

RunConfig parse_config(std::string_view text, const ConfigOverrides& overrides) {
  RunConfig cfg;
  cfg.source_text = std::string(text);
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  std::size_t box_keys = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (eq == std::string_view::npos) {
      throw Error(ErrorKind::Parse, where + "expected key = value");
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto& defs = registry();
    const auto it = std::find_if(defs.begin(), defs.end(),
                                 [&](const KeyDef& d) { return d.doc.name == key; });
    if (it == defs.end()) {
      throw Error(ErrorKind::Parse, where + "unknown key '" + std::string(key) + "'");
    }
    if (!seen.insert(std::string(key)).second) {
      throw Error(ErrorKind::Parse, where + "duplicate key '" + std::string(key) + "'");
    }
    if (value.empty()) {
      throw Error(ErrorKind::Parse, where + "missing value for '" + std::string(key) + "'");
    }
    try {
      it->set(cfg, value);
    } catch (const Error& e) {
      throw Error(ErrorKind::Parse, where + std::string(key) + ": " + e.what());
    } catch (const std::exception& e) {
      throw Error(ErrorKind::Parse, where + std::string(key) + ": " + e.what());
    }
    if (key.substr(0, 10) == "sweep_box.") ++box_keys;
  }
  if (box_keys > 0 && box_keys < 5) {
    invalid("sweep_box", "needs all of p_min, p_max, q_min, q_max, cells");
  }
  const bool has_experiment = seen.count("experiment") > 0;
  if (overrides.experiment) {
    if (has_experiment && cfg.experiment != *overrides.experiment) {
      invalid("experiment", "config says '" + std::string(to_string(cfg.experiment)) +
                                "' but '" + std::string(to_string(*overrides.experiment)) +
                                "' was requested");
    }
    cfg.experiment = *overrides.experiment;
  } else if (!has_experiment) {
    invalid("experiment", "missing");
  }
  if (overrides.workers) cfg.workers = *overrides.workers;
  if (overrides.output_dir) cfg.output_dir = *overrides.output_dir;
  if (overrides.seed) cfg.seed = *overrides.seed;
  cfg.validate();
  return cfg;
}

InitialPair bump_data(const DataRecipe& d, const ProblemParams& params, std::size_t nodes) {
  const double A = d.A, sig2 = d.sigma * d.sigma, eps = d.eps;
  const RadialProfile u =
      sample_radial([=](double r) { return A * std::exp(-r * r / sig2) + eps; }, params.R, nodes);
  InitialPair out;
  out.U0 = to_mass_profile(u, params.n);
  out.W0 = out.U0;
  out.recipe = "bump A=" + fmt_double(d.A) + " sigma=" + fmt_double(d.sigma) +
               " eps=" + fmt_double(d.eps);
  return out;
}

InitialPair make_initial_data(const DataRecipe& d, const ProblemParams& params,
                              std::size_t nodes) {
  if (d.kind == "bump") return bump_data(d, params, nodes);
  const SubsolutionSpec spec = assemble_constants(params, d.mu_u, d.mu_w);
  BlowupData b = generate_blowup_initial_data(spec, d.margin, nodes);
  InitialPair out;
  out.U0 = std::move(b.U0);
  out.W0 = std::move(b.W0);
  out.recipe = "subsolution mu_u=" + fmt_double(d.mu_u) + " mu_w=" + fmt_double(d.mu_w) +
               " margin=" + fmt_double(d.margin);
  return out;
}

std::vector<double> sweep_axis(double lo, double hi, std::size_t cells) {
  std::vector<double> x(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    x[i] = cells == 1 ? lo
                      : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(cells - 1);
  }
  if (cells > 1) x.back() = hi;
  return x;
}

bool agrees(Regime expected, Verdict verdict) {
  return (expected == Regime::BlowupCandidate && verdict == Verdict::Blowup) ||
         (expected == Regime::GlobalBounded && verdict == Verdict::Bounded);
}

double SweepResult::agreement() const {
  return scored == 0 ? 1.0 : static_cast<double>(agreeing) / static_cast<double>(scored);
}

namespace {

std::string solver_digest(const RunConfig& cfg) {
  std::string s;
  for (const auto& k : registry()) {
    if (k.doc.name.rfind("solver.", 0) == 0) s += k.doc.name + "=" + k.get(cfg) + "\n";
  }
  return fnv1a_hex(s);
}

SweepCell run_cell(const RunConfig& cfg, double p, double q) {
  SweepCell cell;
  cell.p = p;
  cell.q = q;
  ProblemParams pp = cfg.params;
  pp.p = p;
  pp.q = q;
  cell.expected = classify(pp);
  const double kappa = critical_exponent(pp.n);
  const double band = cfg.sweep_band + kCriticalBand;
  cell.in_band = std::abs(p - kappa) <= band || std::abs(q - kappa) <= band;
  try {
    InitialPair data;
    bool have = false;
    if (cfg.sweep_recipe == "auto" && cell.expected == Regime::BlowupCandidate) {
      try {
        DataRecipe sub = cfg.data;
        sub.kind = "subsolution";
        data = make_initial_data(sub, pp, cfg.solver.nodes);
        have = true;
      } catch (const Error&) {
        // constants out of range: fall back to the bump
      }
    }
    if (!have) data = bump_data(cfg.data, pp, cfg.solver.nodes);
    cell.recipe = data.recipe;
    SolverReport r = run_transformed(data.U0, data.W0, pp, cfg.solver);
    cell.verdict = r.verdict;
    cell.t_end = r.t_end;
    cell.sup_growth = r.sup_growth();
    cell.diagnostic = r.diagnostic;
    cell.series = std::move(r.series);
  } catch (const std::exception& e) {
    cell.verdict = Verdict::Inconclusive;
    cell.diagnostic = e.what();
  }
  return cell;
}

json cell_json(const SweepCell& c) {
  json j;
  j["p"] = c.p;
  j["q"] = c.q;
  j["verdict"] = std::string(to_string(c.verdict));
  j["t_end"] = c.t_end;
  j["sup_growth"] = c.sup_growth;
  j["expected"] = std::string(to_string(c.expected));
  j["scored"] = !c.in_band;
  j["agrees"] = agrees(c.expected, c.verdict);
  j["recipe"] = c.recipe;
  j["diagnostic"] = c.diagnostic;
  return j;
}

std::string cell_file(std::size_t i, std::size_t j) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "runs/cell_%03zu_%03zu.csv", i, j);
  return buf;
}

// workers and output_dir do not change results, so they stay out of the
// digest and of the echoed effective config.
bool execution_only(const std::string& key) { return key == "workers" || key == "output_dir"; }

json config_json(const RunConfig& cfg) {
  json j;
  j["text"] = cfg.source_text;
  json eff = json::object();
  for (const auto& k : registry()) {
    if (execution_only(k.doc.name)) continue;
    const std::string v = k.get(cfg);
    if (!v.empty()) eff[k.doc.name] = v;
  }
  j["effective"] = eff;
  return j;
}

json spec_json(const SubsolutionSpec& s) {
  constexpr double kLog10e = 0.43429448190325182765;
  json j;
  j["alpha"] = s.exponents.alpha;
  j["beta"] = s.exponents.beta;
  j["delta"] = s.exponents.delta;
  j["halvings"] = s.exponents.halvings;
  j["mu_u"] = s.mu_u;
  j["mu_w"] = s.mu_w;
  j["l"] = s.l;
  j["gamma"] = s.gamma;
  j["log10_y_star"] = s.log_y_star * kLog10e;
  j["log10_s_star"] = s.log_s_star * kLog10e;
  j["log10_theta_star"] = s.log_theta_star * kLog10e;
  j["log10_theta"] = s.log_theta * kLog10e;
  j["log10_y0"] = s.log_y0 * kLog10e;
  j["log10_T"] = s.log_T * kLog10e;
  return j;
}

json ordering_json(const OrderingReport& r) {
  json j;
  j["pass"] = r.pass;
  j["min_gap_U"] = r.min_gap_U;
  j["min_gap_W"] = r.min_gap_W;
  j["tolerance"] = r.tolerance;
  j["frames"] = r.frames;
  j["t_end"] = r.t_end;
  j["inconclusive"] = r.inconclusive;
  j["note"] = r.note;
  if (r.first_violation) {
    const auto& v = *r.first_violation;
    j["first_violation"] = {{"species", std::string(1, v.species)},
                            {"s", v.s},
                            {"t", v.t},
                            {"magnitude", v.magnitude}};
  } else {
    j["first_violation"] = nullptr;
  }
  return j;
}

MassProfile scaled(const MassProfile& m, double k, int n) {
  std::vector<double> v = m.values;
  for (double& x : v) x *= k;
  return mass_profile_from_values(m.r, std::move(v), n);
}

ExperimentOutcome simulate(const RunConfig& cfg) {
  const InitialPair data = make_initial_data(cfg.data, cfg.params, cfg.solver.nodes);
  const SolverReport r = run_transformed(data.U0, data.W0, cfg.params, cfg.solver);
  ExperimentOutcome out;
  out.harness = "simulate";
  out.pass = r.verdict != Verdict::Inconclusive;
  json d;
  d["config"] = config_json(cfg);
  d["recipe"] = data.recipe;
  d["regime"] = std::string(to_string(classify(cfg.params)));
  d["run"] = json::parse(solver_report_json(r));
  out.details_json = d.dump();
  out.files["timeseries.csv"] = timeseries_csv(r.series);
  return out;
}

ExperimentOutcome verify_sub(const RunConfig& cfg) {
  const SubsolutionSpec spec = assemble_constants(cfg.params, cfg.data.mu_u, cfg.data.mu_w);
  VerifyOptions opts;
  opts.samples = cfg.verify_samples;
  opts.tolerance = cfg.verify_tolerance;
  opts.workers = cfg.workers;
  const VerificationReport r = verify_nonpositivity(spec, opts);
  const std::vector<std::string> audit = audit_spec(spec);
  ExperimentOutcome out;
  out.harness = "verify-subsolution";
  out.pass = r.pass && audit.empty();
  json d;
  d["config"] = config_json(cfg);
  d["constants"] = spec_json(spec);
  d["audit_failures"] = audit;
  json regions = json::array();
  for (std::size_t k = 0; k < 3; ++k) {
    regions.push_back({{"max", r.region_max[k]},
                       {"max_P", r.region_max_P[k]},
                       {"max_Q", r.region_max_Q[k]},
                       {"samples", r.sample_counts[k]}});
  }
  d["regions"] = regions;
  d["tolerance"] = r.tolerance;
  json worst = json::array();
  for (std::size_t k = 0; k < std::min<std::size_t>(10, r.worst.size()); ++k) {
    const auto& w = r.worst[k];
    worst.push_back({{"region", w.region}, {"log_s", w.log_s}, {"t", w.t}, {"P", w.P},
                     {"Q", w.Q}});
  }
  d["worst"] = worst;
  out.details_json = d.dump();
  return out;
}

ExperimentOutcome compare(const RunConfig& cfg) {
  const InitialPair up = make_initial_data(cfg.data, cfg.params, cfg.solver.nodes);
  const int n = cfg.params.n;
  const MassProfile lowU = scaled(up.U0, cfg.compare_lower_scale, n);
  const MassProfile lowW = scaled(up.W0, cfg.compare_lower_scale, n);
  ComparisonOptions opts;
  opts.relative_tolerance = cfg.compare_tolerance;
  const OrderingReport main =
      comparison_harness(lowU, lowW, up.U0, up.W0, cfg.params, cfg.solver, opts);
  ComparisonOptions loose = opts;
  loose.enforce_preconditions = false;
  const OrderingReport swapped =
      comparison_harness(up.U0, up.W0, lowU, lowW, cfg.params, cfg.solver, loose);
  const bool sanity = cfg.compare_lower_scale >= 1.0 || swapped.first_violation.has_value();
  ExperimentOutcome out;
  out.harness = "compare";
  out.pass = main.pass && sanity;
  json d;
  d["config"] = config_json(cfg);
  d["recipe"] = up.recipe;
  d["ordering"] = ordering_json(main);
  d["swapped"] = ordering_json(swapped);
  d["detector_sanity"] = sanity;
  out.details_json = d.dump();
  return out;
}

ExperimentOutcome thresholds(const RunConfig& cfg) {
  const SubsolutionSpec spec = assemble_constants(cfg.params, cfg.data.mu_u, cfg.data.mu_w);
  const std::vector<std::string> audit = audit_spec(spec);
  const MassThresholds th = initial_mass_thresholds(spec);
  ExperimentOutcome out;
  out.harness = "thresholds";
  out.pass = audit.empty();
  json d;
  d["config"] = config_json(cfg);
  d["constants"] = spec_json(spec);
  d["audit_failures"] = audit;
  json rows = json::array();
  for (int k = 1; k <= 8; ++k) {
    const double r = cfg.params.R * k / 8.0;
    rows.push_back({{"r", r}, {"M1", th.M1(r)}, {"M2", th.M2(r)}});
  }
  d["mass_thresholds"] = rows;
  out.details_json = d.dump();
  return out;
}

}  // namespace

SweepResult run_sweep(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.experiment != Experiment::Sweep || !cfg.sweep_box) {
    throw Error(ErrorKind::Precondition, "run_sweep needs experiment = sweep");
  }
  const SweepBox& b = *cfg.sweep_box;
  const std::vector<double> ps = sweep_axis(b.p_min, b.p_max, b.cells_per_axis);
  const std::vector<double> qs = sweep_axis(b.q_min, b.q_max, b.cells_per_axis);
  const std::size_t m = b.cells_per_axis;
  SweepResult res;
  res.cells_per_axis = m;
  res.n = cfg.params.n;
  res.R = cfg.params.R;
  res.band = cfg.sweep_band;
  res.solver_digest = solver_digest(cfg);
  res.data_recipe = (cfg.sweep_recipe == "auto" ? "auto; fallback " : "") +
                    bump_data(cfg.data, cfg.params, 64).recipe;
  res.cells.resize(m * m);

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k = next++; k < m * m; k = next++) {
      res.cells[k] = run_cell(cfg, ps[k / m], qs[k % m]);
    }
  };
  const std::size_t nthreads = std::min(cfg.workers, std::max<std::size_t>(1, m * m));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < nthreads; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  for (const auto& c : res.cells) {
    if (c.in_band) continue;
    ++res.scored;
    if (agrees(c.expected, c.verdict)) ++res.agreeing;
  }
  return res;
}

std::string sweep_csv(const SweepResult& result) {
  std::string out = "p,q,verdict,t_end,sup_growth\n";
  for (const auto& c : result.cells) {
    out += fmt_double(c.p) + ',' + fmt_double(c.q) + ',' + std::string(to_string(c.verdict)) +
           ',' + fmt_double(c.t_end) + ',' + fmt_double(c.sup_growth) + '\n';
  }
  return out;
}

ExperimentOutcome sweep_outcome(const SweepResult& result, const RunConfig& cfg) {
  ExperimentOutcome out;
  out.harness = "sweep";
  out.pass = result.agreement() >= cfg.sweep_min_agreement;
  json d;
  d["config"] = config_json(cfg);
  d["metadata"] = {{"n", result.n},
                   {"R", result.R},
                   {"data_recipe", result.data_recipe},
                   {"solver_digest", result.solver_digest},
                   {"cells_per_axis", result.cells_per_axis},
                   {"band", result.band}};
  d["scored"] = result.scored;
  d["agreeing"] = result.agreeing;
  d["agreement"] = result.agreement();
  d["min_agreement"] = cfg.sweep_min_agreement;
  json cells = json::array();
  for (const auto& c : result.cells) cells.push_back(cell_json(c));
  d["cells"] = cells;
  out.details_json = d.dump();
  out.files["sweep.csv"] = sweep_csv(result);
  const std::size_t m = result.cells_per_axis;
  for (std::size_t k = 0; k < result.cells.size(); ++k) {
    out.files[cell_file(k / m, k % m)] = timeseries_csv(result.cells[k].series);
  }
  return out;
}

ExperimentOutcome run_experiment(const RunConfig& cfg) {
  cfg.validate();
  switch (cfg.experiment) {
    case Experiment::Simulate: return simulate(cfg);
    case Experiment::VerifySubsolution: return verify_sub(cfg);
    case Experiment::Compare: return compare(cfg);
    case Experiment::Thresholds: return thresholds(cfg);
    case Experiment::Sweep: return sweep_outcome(run_sweep(cfg), cfg);
  }
  throw Error(ErrorKind::InternalConsistency, "unhandled experiment");
}

std::string inputs_digest(const RunConfig& cfg) {
  std::string s;
  for (const auto& k : registry()) {
    if (execution_only(k.doc.name)) continue;
    const std::string v = k.get(cfg);
    if (!v.empty()) s += k.doc.name + " = " + v + "\n";
  }
  return fnv1a_hex(s);
}

void emit_outputs(const ExperimentOutcome& outcome, const RunConfig& cfg,
                  const std::filesystem::path& dir) {
  for (const auto& [name, content] : outcome.files) write_text_file(dir / name, content);
  write_text_file(dir / "report.json",
                  envelope_json(outcome.harness, inputs_digest(cfg), outcome.pass,
                                outcome.details_json));
}

}  // namespace chemolab
