#include <filesystem>
#include <set>
#include <sstream>

#include "chemolab/experiment.hpp"
#include "chemolab/serialize.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace chemolab;
using testing::error_kind;

namespace {

const char* kMinimal =
    "params.n = 3\nparams.R = 1\nparams.p = 0\nparams.q = 0\nexperiment = simulate\n";

std::string sweep_text(double lo, double hi, std::size_t cells) {
  std::ostringstream o;
  o << "experiment = sweep\nparams.n = 3\nparams.R = 1\nparams.p = 0\nparams.q = 0\n"
    << "solver.nodes = 512\nsolver.horizon = 0.01\nsolver.record_every = 0.01\n"
    << "solver.blowup_cap = 1e4\nsolver.dt_floor = 1e-300\n"
    << "sweep_box.p_min = " << lo << "\nsweep_box.p_max = " << hi << "\nsweep_box.q_min = " << lo
    << "\nsweep_box.q_max = " << hi << "\nsweep_box.cells = " << cells << "\n";
  return o.str();
}

std::string message_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("chemolab_unit_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("minimal config gets every default") {
  const RunConfig cfg = parse_config(kMinimal);
  const RunConfig def;
  CHECK(cfg.experiment == Experiment::Simulate);
  CHECK(cfg.params.n == 3);
  CHECK(cfg.solver.nodes == def.solver.nodes);
  CHECK(cfg.solver.blowup_cap == def.solver.blowup_cap);
  CHECK(cfg.workers == 1);
  CHECK_FALSE(cfg.sweep_box.has_value());
  CHECK(cfg.source_text == kMinimal);
}

TEST_CASE("config errors name the field or the line") {
  const std::string bad_n = std::string(kMinimal) + "params.n = 1\n";
  CHECK(error_kind([&] { parse_config(bad_n); }) == ErrorKind::Parse);  // duplicate key
  const std::string n1 = "params.n = 1\nparams.R = 1\nparams.p = 0\nparams.q = 0\nexperiment = simulate\n";
  CHECK(error_kind([&] { parse_config(n1); }) == ErrorKind::Validation);
  CHECK(message_of([&] { parse_config(n1); }).find("params.n") != std::string::npos);

  const std::string unknown = std::string(kMinimal) + "# fine\nsolver.bogus = 3\n";
  CHECK(error_kind([&] { parse_config(unknown); }) == ErrorKind::Parse);
  CHECK(message_of([&] { parse_config(unknown); }).find("line 7") != std::string::npos);

  CHECK(error_kind([] { parse_config("params.n = three\n"); }) == ErrorKind::Parse);
  CHECK(error_kind([] { parse_config("params.n\n"); }) == ErrorKind::Parse);
  CHECK(error_kind([] { parse_config("params.n = 3\n"); }) == ErrorKind::Validation);

  const std::string sweep_no_box = "experiment = sweep\nparams.n = 3\n";
  CHECK(error_kind([&] { parse_config(sweep_no_box); }) == ErrorKind::Validation);
  const std::string box_no_sweep = std::string(kMinimal) + "sweep_box.p_min = 0\n";
  CHECK(error_kind([&] { parse_config(box_no_sweep); }) == ErrorKind::Validation);
}

TEST_CASE("overrides take precedence over the file") {
  ConfigOverrides ov;
  ov.workers = 3;
  ov.output_dir = "elsewhere";
  ov.seed = 99;
  const RunConfig cfg = parse_config(kMinimal, ov);
  CHECK(cfg.workers == 3);
  CHECK(cfg.output_dir == "elsewhere");
  CHECK(cfg.seed == 99);
  ov = {};
  ov.experiment = Experiment::Thresholds;
  CHECK(error_kind([&] { parse_config(kMinimal, ov); }) == ErrorKind::Validation);
  const std::string no_exp = "params.n = 3\n";
  CHECK(parse_config(no_exp, ov).experiment == Experiment::Thresholds);
}

TEST_CASE("help lists exactly the accepted keys with their defaults") {
  const std::string help = config_help();
  std::set<std::string> names;
  for (const ConfigKey& k : config_keys()) {
    CHECK(names.insert(k.name).second);
    CHECK(help.find(k.name) != std::string::npos);
    if (!k.default_value.empty()) CHECK(help.find(k.default_value) != std::string::npos);
  }
  // every canonical line is an accepted key, and every key is canonical
  const RunConfig cfg = parse_config(kMinimal);
  std::istringstream lines(cfg.canonical());
  std::set<std::string> canonical;
  for (std::string line; std::getline(lines, line);) {
    canonical.insert(line.substr(0, line.find(" =")));
  }
  for (const auto& n : canonical) CHECK(names.count(n) == 1);
  CHECK(names.count("experiment") == 1);
  CHECK(names.count("params.n") == 1);
  CHECK(names.count("sweep_box.cells") == 1);
}

TEST_CASE("canonical text parses back to the same config") {
  RunConfig cfg = parse_config(sweep_text(-0.25, 1.1, 12));
  const RunConfig again = parse_config(cfg.canonical());
  CHECK(again.canonical() == cfg.canonical());
  CHECK(inputs_digest(again) == inputs_digest(cfg));
  cfg.workers = 8;
  cfg.output_dir = "x";
  CHECK(inputs_digest(again) == inputs_digest(cfg));
  cfg.params.q = 0.25;
  CHECK(inputs_digest(again) != inputs_digest(cfg));
}

TEST_CASE("experiment names") {
  for (auto e : {Experiment::Simulate, Experiment::VerifySubsolution, Experiment::Compare,
                 Experiment::Thresholds, Experiment::Sweep}) {
    CHECK(parse_experiment(to_string(e)) == e);
  }
  CHECK(error_kind([] { parse_experiment("plot"); }) == ErrorKind::Parse);
}

TEST_CASE("sweep axis") {
  CHECK(sweep_axis(0, 1, 0).empty());
  CHECK(sweep_axis(0.3, 1, 1) == std::vector<double>{0.3});
  const auto x = sweep_axis(-0.25, 1.1, 12);
  CHECK(x.front() == -0.25);
  CHECK(x.back() == 1.1);
  CHECK(x.size() == 12);
}

TEST_CASE("2x2 sweep reproduces the dichotomy") {
  RunConfig cfg = parse_config(sweep_text(0.2, 0.8, 2));
  const SweepResult res = run_sweep(cfg);
  REQUIRE(res.cells.size() == 4);
  CHECK(res.cells[0].p == 0.2);
  CHECK(res.cells[0].q == 0.2);
  CHECK(res.cells[0].verdict == Verdict::Blowup);
  CHECK(res.cells[1].q == 0.8);
  for (std::size_t k = 1; k < 4; ++k) CHECK(res.cells[k].verdict == Verdict::Bounded);
  CHECK(res.scored == 4);
  CHECK(res.agreeing == 4);
  const std::string csv = sweep_csv(res);
  CHECK(csv.rfind("p,q,verdict,t_end,sup_growth\n", 0) == 0);
  CHECK(csv.find(",Bounded,") != std::string::npos);
}

TEST_CASE("single-cell sweep equals a direct simulate run") {
  const std::string sweep = sweep_text(0.0, 0.0, 1);
  const ExperimentOutcome s = run_experiment(parse_config(sweep));
  std::string sim = sweep;
  sim.replace(sim.find("experiment = sweep"), 18, "experiment = simulate");
  sim = sim.substr(0, sim.find("sweep_box"));
  const ExperimentOutcome d = run_experiment(parse_config(sim));
  REQUIRE(s.files.count("runs/cell_000_000.csv") == 1);
  REQUIRE(d.files.count("timeseries.csv") == 1);
  CHECK(s.files.at("runs/cell_000_000.csv") == d.files.at("timeseries.csv"));
}

TEST_CASE("empty sweep gives a header-only CSV") {
  const RunConfig cfg = parse_config(sweep_text(0.0, 1.0, 0));
  const SweepResult res = run_sweep(cfg);
  CHECK(res.cells.empty());
  CHECK(sweep_csv(res) == "p,q,verdict,t_end,sup_growth\n");
}

TEST_CASE("outputs are byte-identical across reruns and worker counts") {
  const std::string text = sweep_text(0.6, 0.9, 2);
  const auto a = scratch_dir("a"), b = scratch_dir("b");
  ConfigOverrides ov;
  ov.workers = 1;
  RunConfig ca = parse_config(text, ov);
  ov.workers = 2;
  RunConfig cb = parse_config(text, ov);
  emit_outputs(run_experiment(ca), ca, a);
  emit_outputs(run_experiment(cb), cb, b);
  std::size_t files = 0;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = std::filesystem::relative(entry.path(), a);
    const std::string x = read_text_file(entry.path());
    const std::string y = read_text_file(b / rel);
    CHECK(fnv1a_hex(x) == fnv1a_hex(y));
    ++files;
  }
  CHECK(files == 2 + 4);  // sweep.csv, report.json, four cell series
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
}

TEST_CASE("small experiments pass") {
  const std::string base =
      "params.n = 3\nparams.R = 1\nparams.p = 0\nparams.q = 0\nsolver.nodes = 128\n"
      "solver.horizon = 1e-4\nsolver.record_every = 1e-5\nsolver.dt_floor = 1e-300\n"
      "verify.samples = 40\n";
  for (const char* e : {"simulate", "thresholds", "verify-subsolution", "compare"}) {
    const ExperimentOutcome o = run_experiment(parse_config(base + "experiment = " + e + "\n"));
    CHECK_MESSAGE(o.pass, e);
    CHECK(!o.details_json.empty());
  }
}

TEST_CASE("fnv-1a test vectors") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("timeseries csv") {
  const std::string csv = timeseries_csv({{0.0, 1.0, 2.0, 3.0, 4.0}, {0.1, 1.5, 2.5, 3.0, 4.0}});
  CHECK(csv == "t,sup_u,sup_w,mass_u,mass_w\n0,1,2,3,4\n0.1,1.5,2.5,3,4\n");
}

TEST_CASE("unwritable output surfaces the path") {
  const auto dir = scratch_dir("ro");
  write_text_file(dir / "file", "x");
  CHECK(error_kind([&] { write_text_file(dir / "file" / "sub" / "y", "z"); }) == ErrorKind::Io);
  CHECK(message_of([&] { read_text_file(dir / "missing"); }).find("missing") != std::string::npos);
  std::filesystem::remove_all(dir);
}

#ifdef CHEMOLAB_CONFIG_DIR
TEST_CASE("shipped configs parse") {
  std::size_t count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(CHEMOLAB_CONFIG_DIR)) {
    if (entry.path().extension() != ".cfg") continue;
    CHECK_NOTHROW(parse_config(read_text_file(entry.path())));
    ++count;
  }
  CHECK(count >= 5);
}
#endif
