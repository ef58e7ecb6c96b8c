#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
  const char* p = std::getenv("LOS_CLI");
  REQUIRE_MESSAGE(p != nullptr, "LOS_CLI must point at the los binary");
  return p;
}

std::string scenario_dir() {
  const char* p = std::getenv("LOS_SCENARIO_DIR");
  REQUIRE_MESSAGE(p != nullptr, "LOS_SCENARIO_DIR must point at the scenarios directory");
  return p;
}

int run_cli(const std::string& args) {
  std::string cmd = cli_path() + " " + args + " >/dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), ("missing file " + p.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("los-cli-" + std::to_string(::getpid()) + "-" +
                                        std::to_string(counter++));
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int counter;
};
int TempDir::counter = 0;

} // namespace

TEST_CASE("validate accepts builtins and json files, rejects junk") {
  CHECK(run_cli("validate testbed") == 0);
  CHECK(run_cli("validate edge26") == 0);
  CHECK(run_cli(std::string("validate ") + scenario_dir() + "/small-demo.json") == 0);
  CHECK(run_cli("validate no-such-scenario") == 2);
  CHECK(run_cli("") != 0); // a subcommand is required
}

TEST_CASE("run writes the documented artifact set") {
  TempDir dir;
  std::string out = dir.path.string();
  CHECK(run_cli("run testbed --streams 2 --seed 9 --out " + out) == 0);
  for (const char* f :
       {"config.json", "report.csv", "hops.csv", "drops.csv", "latency.csv", "summary.txt",
        "events.log"})
    CHECK_MESSAGE(fs::exists(dir.path / f), f);
  // Refuse to clobber without --force, allow with it.
  CHECK(run_cli("run testbed --streams 2 --seed 9 --out " + out) == 2);
  CHECK(run_cli("run testbed --streams 2 --seed 9 --out " + out + " --force") == 0);
}

TEST_CASE("identical seeds reproduce identical artifacts") {
  TempDir d1, d2;
  std::string demo = scenario_dir() + std::string("/small-demo.json");
  CHECK(run_cli("run " + demo + " --seed 31 --out " + d1.path.string()) == 0);
  CHECK(run_cli("run " + demo + " --seed 31 --out " + d2.path.string()) == 0);
  for (const char* f : {"report.csv", "events.log", "summary.txt", "drops.csv"})
    CHECK(slurp(d1.path / f) == slurp(d2.path / f));
  TempDir d3;
  CHECK(run_cli("run " + demo + " --seed 32 --out " + d3.path.string()) == 0);
  CHECK(slurp(d1.path / "events.log") != slurp(d3.path / "events.log"));
}

TEST_CASE("sweep and compare write aggregate tables") {
  TempDir dir;
  std::string demo = scenario_dir() + std::string("/small-demo.json");
  CHECK(run_cli("sweep " + demo + " --streams 1,2 --repeats 2 --seed 5 --out " +
                dir.path.string()) == 0);
  CHECK(fs::exists(dir.path / "runs.csv"));
  CHECK(fs::exists(dir.path / "sweep_drops.csv"));
  CHECK(fs::exists(dir.path / "sweep_hops.csv"));
  std::string runs = slurp(dir.path / "runs.csv");
  CHECK(runs.find("streams,repeat,seed") == 0);

  TempDir cdir;
  CHECK(run_cli("compare " + demo + " --streams 1,2 --repeats 1 --seed 5 --out " +
                cdir.path.string()) == 0);
  std::string cmp = slurp(cdir.path / "compare.csv");
  CHECK(cmp.find("streams,insitu_drop_pct,distributed_drop_pct,improvement_pp") == 0);
}

TEST_CASE("fitcheck reports a sub-percent roundtrip") {
  CHECK(run_cli("fitcheck") == 0);
  CHECK(run_cli("fitcheck --a 5000 --b 10 --c 0.7 --d 2 --samples 12") == 0);
}
