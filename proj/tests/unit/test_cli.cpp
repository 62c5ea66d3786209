#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "chemolab/serialize.hpp"
#include "doctest.h"

#ifndef CHEMOLAB_CLI_PATH
#error "CHEMOLAB_CLI_PATH must name the built CLI"
#endif

namespace {

namespace fs = std::filesystem;

struct Sandbox {
  fs::path dir;
  explicit Sandbox(const std::string& name)
      : dir(fs::temp_directory_path() / ("chemolab_cli_" + name)) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Sandbox() { fs::remove_all(dir); }
  fs::path write(const std::string& file, const std::string& text) const {
    std::ofstream(dir / file) << text;
    return dir / file;
  }
};

int run(const std::string& args) {
  const std::string cmd = std::string(CHEMOLAB_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kSmall =
    "params.n = 3\nparams.R = 1\nparams.p = 0\nparams.q = 0\nsolver.nodes = 128\n"
    "solver.horizon = 1e-4\nsolver.record_every = 1e-5\nsolver.dt_floor = 1e-300\n";

}  // namespace

TEST_CASE("cli exit codes") {
  Sandbox box("rc");
  const fs::path cfg = box.write("ok.cfg", kSmall);
  const std::string out = (box.dir / "out").string();
  CHECK(run("--config " + cfg.string() + " --out " + out + " simulate") == 0);
  CHECK(fs::exists(box.dir / "out" / "report.json"));
  CHECK(fs::exists(box.dir / "out" / "timeseries.csv"));
  CHECK(run("--config " + cfg.string() + " --out " + out + " thresholds") == 0);

  const fs::path bad = box.write("bad.cfg", std::string(kSmall) + "params.bogus = 1\n");
  CHECK(run("--config " + bad.string() + " --out " + out + " simulate") == 2);
  const fs::path n1 = box.write("n1.cfg", "params.n = 1\n");
  CHECK(run("--config " + n1.string() + " --out " + out + " simulate") == 2);
  CHECK(run("--config " + (box.dir / "absent.cfg").string() + " simulate") == 3);
  CHECK(run("--config " + cfg.string()) == 2);  // no subcommand
  CHECK(run("--help") == 0);
}

TEST_CASE("cli reruns write identical reports") {
  Sandbox box("det");
  const fs::path cfg = box.write("ok.cfg", kSmall);
  const fs::path a = box.dir / "a", b = box.dir / "b";
  REQUIRE(run("--config " + cfg.string() + " --out " + a.string() + " simulate") == 0);
  REQUIRE(run("--config " + cfg.string() + " --out " + b.string() + " --workers 4 simulate") == 0);
  CHECK(chemolab::read_text_file(a / "report.json") == chemolab::read_text_file(b / "report.json"));
  CHECK(chemolab::read_text_file(a / "timeseries.csv") ==
        chemolab::read_text_file(b / "timeseries.csv"));
}
