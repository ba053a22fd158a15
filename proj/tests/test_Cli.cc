/*
 * (C) Copyright 2026 The varlab Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

#include "varlab/Csv.h"

namespace fs = std::filesystem;

namespace {

int run(const std::string & args) {
  const std::string cmd = std::string(VARLAB_CLI) + " " + args + " > cli_stdout.txt 2> cli_stderr.txt";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string data(const std::string & name) {return std::string(VARLAB_TEST_DATA) + "/" + name;}

std::string slurp(const fs::path & p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path fresh(const std::string & name) {
  const fs::path dir = fs::current_path() / "cli_runs" / name;
  fs::remove_all(dir);
  return dir;
}

}  // namespace

// -----------------------------------------------------------------------------

TEST_CASE("truth writes one row per step") {
  const fs::path out = fresh("truth");
  CHECK(run("truth --config " + data("scalar.json") + " --out " + out.string()) == 0);
  const auto rows = varlab::readCsv(out / "truth.csv");
  REQUIRE(rows.size() == 3);  // header + steps 0 and 1
  CHECK(rows[0] == std::vector<std::string>{"time", "location", "composition", "value"});
  CHECK(rows[1][3] == "1.5");
  CHECK(rows[2][3] == "1.5");

  const auto meta = nlohmann::json::parse(slurp(out / "meta.json"));
  CHECK(meta["command"] == "truth");
  CHECK(meta["master_seed"] == 3);
  CHECK(meta["config_hash"].get<std::string>().size() == 16);
}

TEST_CASE("hand worked single window") {
  // B = R = 1, two observations of 1.5: x^A = (0 + 1.5 + 1.5) / 3
  const fs::path out = fresh("assimilate");
  CHECK(run("assimilate --config " + data("scalar.json") + " --out " + out.string()) == 0);
  const auto rows = varlab::readCsv(out / "analyses.csv");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == std::vector<std::string>{"k", "location", "composition", "x_A"});
  CHECK(std::stod(rows[1][3]) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(fs::exists(out / "J_trace.csv"));
}

TEST_CASE("reruns are byte identical") {
  for (const char * cmd : {"observe", "assimilate", "ensemble"}) {
    CAPTURE(cmd);
    const fs::path a = fresh(std::string(cmd) + "_a");
    const fs::path b = fresh(std::string(cmd) + "_b");
    CHECK(run(std::string(cmd) + " --config " + data("twin.json") + " --out " + a.string()) == 0);
    CHECK(run(std::string(cmd) + " --config " + data("twin.json") + " --out " + b.string()) == 0);
    for (const auto & f : fs::directory_iterator(a)) {
      if (f.path().extension() != ".csv") continue;
      CAPTURE(f.path().filename());
      CHECK(slurp(f.path()) == slurp(b / f.path().filename()));
    }
  }
  const fs::path c = fresh("observe_c");
  CHECK(run("observe --seed 18 --config " + data("twin.json") + " --out " + c.string()) == 0);
  CHECK(slurp(c / "observations.csv") != slurp(c.parent_path() / "observe_b" / "observations.csv"));
}

TEST_CASE("verify suites") {
  const fs::path out = fresh("verify");
  CHECK(run("verify --suite affine --config " + data("twin.json") + " --out " + out.string()) == 0);
  CHECK(run("verify --suite shift --config " + data("twin.json") + " --out " + out.string()) == 0);
  const auto rows = varlab::readCsv(out / "verify.csv");
  int shiftPasses = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i][0] == "shift");
    if (rows[i].back() == "true") ++shiftPasses;
  }
  CHECK(shiftPasses == 5);
  CHECK(run("verify --suite neighborhood --config " + data("twin.json") + " --out " +
            out.string()) == 0);
}

TEST_CASE("report writes the ensemble products") {
  const fs::path out = fresh("report");
  CHECK(run("report --config " + data("twin.json") + " --out " + out.string()) == 0);
  for (const char * f : {"moments.csv", "variogram.csv", "shiftcheck.csv", "meta.json"}) {
    CAPTURE(f);
    CHECK(fs::exists(out / f));
  }
  const auto shifts = varlab::readCsv(out / "shiftcheck.csv");
  CHECK(shifts.size() == 6);
}

TEST_CASE("exit codes for bad input") {
  CHECK(run("truth --config " + data("bad_key.json")) == 2);
  CHECK(run("truth --config " + data("missing.json")) == 2);
  CHECK(run("truth --config " + data("unwritable.json")) == 2);
  CHECK(run("verify --suite nonsense --config " + data("twin.json") + " --out " +
            fresh("nonsense").string()) == 2);
  CHECK(run("frobnicate") == 2);
  CHECK(run("--version") == 0);
}
