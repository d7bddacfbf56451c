// Copyright 2026 The Supercell Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>

#include "supercell/pipeline.hpp"

namespace supercell {
namespace {

nlohmann::json minimal_config() {
  return nlohmann::json::parse(R"({"seed":1,"paths":{"spec":"spec.json","output_dir":"out"}})");
}

ErrorCode parse_code(const nlohmann::json& j) {
  try {
    parse_run_config(j);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvariantViolation;
}

TEST(RunConfig, RejectsUnknownKeysAtEveryLevel) {
  EXPECT_NO_THROW(parse_run_config(minimal_config()));
  auto top = minimal_config();
  top["sed"] = 1;
  EXPECT_EQ(parse_code(top), ErrorCode::Config);
  auto paths = minimal_config();
  paths["paths"]["modle"] = "m.bin";
  EXPECT_EQ(parse_code(paths), ErrorCode::Config);
  auto abl = minimal_config();
  abl["ablation"] = {{"variant", nlohmann::json::array()}};
  EXPECT_EQ(parse_code(abl), ErrorCode::Config);
  auto cases = minimal_config();
  cases["cases"] = nlohmann::json::array({{{"name", "p"}, {"spec", "s.json"}, {"source", {}}}});
  EXPECT_EQ(parse_code(cases), ErrorCode::Config);
  EXPECT_EQ(parse_code(nlohmann::json{{"seed", 1}}), ErrorCode::Config);
  auto zero = minimal_config();
  zero["baseline_L"] = 0;
  EXPECT_EQ(parse_code(zero), ErrorCode::Config);
}

TEST(RunConfig, ResolvesAgainstTheConfigDirectory) {
  const auto c = parse_run_config(minimal_config(), "/data/covid");
  EXPECT_EQ(c.resolve("spec.json"), "/data/covid/spec.json");
  EXPECT_EQ(c.resolve("/abs/x"), "/abs/x");
  EXPECT_EQ(c.model_path(), "/data/covid/out/model.bin");
}

TEST(RunConfig, LoadFailuresAreConfigErrors) {
  try {
    load_run_config("/nonexistent/config.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Config);
  }
  const auto path = (std::filesystem::path(::testing::TempDir()) / "bad_config.json").string();
  write_file(path, "{ not json");
  try {
    load_run_config(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Config);
  }
}

TEST(Seeds, StreamsDifferAndAreStable) {
  const auto a = derive_seeds(1), b = derive_seeds(1), c = derive_seeds(2);
  EXPECT_EQ(a.plan, b.plan);
  EXPECT_NE(a.plan, c.plan);
  const std::set<std::uint64_t> distinct{a.plan, a.learner, a.test, a.signatures};
  EXPECT_EQ(distinct.size(), 4u);
}

TEST(JsonLines, RoundTripAndLineNumberedErrors) {
  const auto sc = fixtures::covid_scenario({7, 3, 2, 1, 1});
  const auto cells = flatten(fixtures::corpora(sc, fixtures::builtin_dictionaries()));
  const auto back = from_jsonl<SuperCell>(to_jsonl(cells), "cells");
  ASSERT_EQ(back.size(), cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) EXPECT_EQ(back[i], cells[i]);
  EXPECT_EQ(group_by_source(sc.spec, back).size(), sc.spec.sources.size());
  try {
    from_jsonl<SuperCell>(to_jsonl(cells) + "{oops\n", "cells");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Parse);
    EXPECT_NE(std::string(e.what()).find("line " + std::to_string(cells.size() + 1)), std::string::npos);
  }
}

// ---------------------------------------------------------------------------
// Command line

namespace fs = std::filesystem;

int run(const std::string& cmd) {
  const int rc = std::system((cmd + " 2>/dev/null").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string cli() { return SUPERCELL_CLI; }

// Fixture data plus a quick learner config, built once per process.
const fs::path& fixture_dir() {
  static const fs::path dir = [] {
    const fs::path d = fs::path(::testing::TempDir()) / "supercell_pipeline_data";
    fs::remove_all(d);
    EXPECT_EQ(run(std::string(SUPERCELL_MAKE_FIXTURES) + " --out " + d.string()), 0);
    auto cfg = nlohmann::json::parse(read_file((d / "machine_logs" / "config.json").string()));
    cfg["learner"] = {{"buckets", 1024}, {"dim", 16}, {"hidden", 16}, {"batch", 16}, {"lr", 0.01}, {"epochs", 3}};
    cfg["paths"]["output_dir"] = "quick_out";
    write_file((d / "machine_logs" / "quick.json").string(), cfg.dump(2));
    return d;
  }();
  return dir;
}

TEST(Cli, MissingOrBadConfigExitsOne) {
  EXPECT_EQ(run(cli() + " decompose"), 1);
  EXPECT_EQ(run(cli() + " decompose --config /nonexistent.json"), 1);
  const auto bad = (fs::path(::testing::TempDir()) / "cli_bad.json").string();
  write_file(bad, R"({"seed":1,"paths":{"spec":"x.json"},"typo":true})");
  EXPECT_EQ(run(cli() + " decompose --config " + bad), 1);
  EXPECT_NE(run(cli() + " no-such-command"), 0);
}

TEST(Cli, MissingInputFileIsAnIoError) {
  const auto cfg = (fs::path(::testing::TempDir()) / "cli_missing_spec.json").string();
  write_file(cfg, R"({"seed":1,"paths":{"spec":"does_not_exist.json","output_dir":"o"}})");
  EXPECT_EQ(run(cli() + " decompose --config " + cfg), 2);
}

TEST(Cli, FileChainMatchesTheInMemoryPipeline) {
  const fs::path cfg_path = fixture_dir() / "machine_logs" / "quick.json";
  const std::string c = " --config " + cfg_path.string();
  for (const char* cmd : {"decompose", "gen-train", "augment", "train", "integrate"})
    ASSERT_EQ(run(cli() + " " + cmd + c), 0) << cmd;

  const RunConfig cfg = load_run_config(cfg_path.string());
  const Inputs in = load_inputs(cfg);
  std::size_t cells = 0;
  for (const auto& corpus : decompose_all(in)) cells += corpus.size();
  EXPECT_EQ(split_lines(read_file(cfg.out_path("supercells.jsonl"))).size(), cells);
  EXPECT_TRUE(fs::exists(cfg.out_path("oracle.csv")));
  EXPECT_TRUE(fs::exists(cfg.out_path("perturbation_log.jsonl")));
  EXPECT_TRUE(fs::exists(cfg.out_path("loss_curve.csv")));
  EXPECT_EQ(read_file(cfg.out_path("integrated.csv")), end_to_end(cfg, in));
}

TEST(Cli, SeedAndOutOverrides) {
  const fs::path cfg_path = fixture_dir() / "machine_logs" / "quick.json";
  const fs::path out = fs::path(::testing::TempDir()) / "cli_override_out";
  fs::remove_all(out);
  ASSERT_EQ(run(cli() + " decompose --seed 9 --out " + out.string() + " --config " + cfg_path.string()), 0);
  EXPECT_TRUE(fs::exists(out / "supercells.jsonl"));
}

TEST(Cli, GradientCheckPasses) {
  const fs::path out = fs::path(::testing::TempDir()) / "cli_gradcheck";
  EXPECT_EQ(run(cli() + " gradcheck --seed 4 --out " + out.string()), 0);
}

}  // namespace
}  // namespace supercell
