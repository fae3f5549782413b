// Copyright 2026 The depar Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <filesystem>
#include <sstream>
#include <vector>

#include "depar/cli.hpp"
#include "depar/driver.hpp"
#include "depar/ir_json.hpp"
#include "doctest.h"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "depar");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = depar::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("depar_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("usage errors exit 2") {
  CHECK(run({}).code == depar::cli::kExitUsage);
  CHECK(run({"advise", "--program", "x.prog"}).code == depar::cli::kExitUsage);
  CHECK(run({"advise", "--program", "/nonexistent.prog", "--profile", "/nonexistent.prof"}).code ==
        depar::cli::kExitUsage);
  CHECK(run({"gen-fixture", "nope", "--out-prefix", "/tmp/x"}).code == depar::cli::kExitUsage);
  CHECK(run({"advise", "--help"}).code == depar::cli::kExitOk);
}

TEST_CASE("advise on a generated fixture") {
  fs::path dir = scratch("advise");
  std::string prefix = (dir / "mf").string();
  REQUIRE(run({"gen-fixture", "map-foldl", "--out-prefix", prefix}).code == 0);
  std::string out = (dir / "advice.json").string();
  Run r = run({"advise", "--program", prefix + ".prog", "--profile", prefix + ".prof", "--out", out});
  CHECK(r.code == 0);
  CHECK(r.out.find("(c1, c2) & c3") != std::string::npos);
  REQUIRE(fs::exists(out));
  depar::AdviceFile file = depar::read_advice_file(out);
  REQUIRE(file.records.size() == 1);
  CHECK(file.records[0].par_time == 1625319.0);

  Run js = run({"advise", "--program", prefix + ".prog", "--profile", prefix + ".prof", "--format",
                "json"});
  CHECK(js.code == 0);
  auto doc = nlohmann::json::parse(js.out);
  CHECK(doc["command"] == "advise");
  CHECK(doc["advice_file"]["records"].size() == 1);
}

TEST_CASE("bad profile is a diagnostic") {
  fs::path dir = scratch("diag");
  std::string prefix = (dir / "mf").string();
  REQUIRE(run({"gen-fixture", "map-foldl", "--out-prefix", prefix}).code == 0);
  // Keep the program but swap in a profile for an unrelated program.
  std::string other = (dir / "cheap").string();
  REQUIRE(run({"gen-fixture", "cheap", "--out-prefix", other}).code == 0);
  Run r = run({"advise", "--program", prefix + ".prog", "--profile", other + ".prof"});
  CHECK(r.code == depar::cli::kExitDiagnostics);
  CHECK(r.err.find("error:") != std::string::npos);
}

TEST_CASE("validate runs the oracle checks") {
  Run r = run({"validate", "--random-cases", "200"});
  CHECK(r.code == 0);
  CHECK(r.out.find("all oracle checks passed") != std::string::npos);
}

TEST_CASE("gen-fixture is deterministic") {
  fs::path a = scratch("gen_a");
  fs::path b = scratch("gen_b");
  REQUIRE(run({"gen-fixture", "random", "--seed", "7", "--out-prefix", (a / "r").string()}).code == 0);
  REQUIRE(run({"gen-fixture", "random", "--seed", "7", "--out-prefix", (b / "r").string()}).code == 0);
  CHECK(depar::json_io::read_file((a / "r.prog").string()) ==
        depar::json_io::read_file((b / "r.prog").string()));
  CHECK(depar::json_io::read_file((a / "r.prof").string()) ==
        depar::json_io::read_file((b / "r.prof").string()));
}

TEST_CASE("advice files do not depend on --jobs") {
  fs::path dir = scratch("jobs");
  for (const char* name : {"map-foldl", "two-level", "quicksort", "random"}) {
    std::string prefix = (dir / name).string();
    REQUIRE(run({"gen-fixture", name, "--seed", "3", "--out-prefix", prefix}).code == 0);
    std::string one = prefix + ".1.json";
    std::string four = prefix + ".4.json";
    std::vector<std::string> base{"advise", "--program", prefix + ".prog", "--profile",
                                  prefix + ".prof", "--expensive-threshold", "100",
                                  "--call-cost-threshold", "1000"};
    auto with = [&](std::string jobs, std::string out) {
      auto v = base;
      v.insert(v.end(), {"--jobs", jobs, "--out", out});
      return run(v).code;
    };
    REQUIRE(with("1", one) == 0);
    REQUIRE(with("4", four) == 0);
    CAPTURE(name);
    CHECK(depar::json_io::read_file(one) == depar::json_io::read_file(four));
  }
}

TEST_CASE("explain and simulate") {
  fs::path dir = scratch("explain");
  std::string prefix = (dir / "f").string();
  Run g = run({"gen-fixture", "fig1-right", "--out-prefix", prefix, "--format", "json"});
  REQUIRE(g.code == 0);
  std::string conj = nlohmann::json::parse(g.out)["conjunction"];
  std::vector<std::string> in{"--program", prefix + ".prog", "--profile", prefix + ".prof",
                              "--conjunction", conj};

  auto sim = in;
  sim.insert(sim.begin(), "simulate");
  sim.insert(sim.end(), {"--partition", "1|2", "--format", "json"});
  Run s = run(sim);
  REQUIRE(s.code == 0);
  auto doc = nlohmann::json::parse(s.out);
  CHECK(doc["makespan"] == doc["predicted"]);

  auto bad = in;
  bad.insert(bad.begin(), "simulate");
  bad.insert(bad.end(), {"--partition", "1|3"});
  CHECK(run(bad).code == depar::cli::kExitUsage);

  auto ex = in;
  ex.insert(ex.begin(), "explain");
  ex.insert(ex.end(), {"--expensive-threshold", "1"});
  Run e = run(ex);
  CHECK(e.code == 0);
  CHECK(e.out.find("candidates") != std::string::npos);

  auto missing = in;
  missing.insert(missing.begin(), "explain");
  missing.back() = "main/0/0:999";
  CHECK(run(missing).code == depar::cli::kExitUsage);
}
