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

#include "supercell/eval.hpp"

namespace supercell {
namespace {

struct Setup {
  fixtures::Scenario sc;
  DictionarySet dicts, key_dicts;
  std::vector<std::vector<SuperCell>> corpora;
  std::vector<LabeledSample> train, test;
};

const Setup& setup() {
  static const Setup s = [] {
    Setup x{fixtures::covid_scenario({7, 8, 6, 4, 1}), fixtures::builtin_dictionaries(), {}, {}, {}, {}};
    x.key_dicts = x.sc.spec.key_dictionaries(x.dicts);
    x.corpora = fixtures::corpora(x.sc, x.dicts);
    x.train = generate_training_data(x.sc.spec, fixtures::split(x.corpora, x.sc.train_keys, true), x.dicts);
    x.test = generate_training_data(x.sc.spec, fixtures::split(x.corpora, x.sc.train_keys, false), x.dicts);
    return x;
  }();
  return s;
}

AugmentContext context(const Setup& s) {
  return AugmentContext{&s.dicts, &s.key_dicts, &*s.sc.spec.key_hierarchy, s.sc.spec.target.q()};
}

LearnerConfig small_learner() {
  LearnerConfig c;
  c.buckets = 2048;
  c.dim = 16;
  c.hidden = 24;
  c.batch = 16;
  c.lr = 0.01;
  c.epochs = 30;
  c.seed = 5;
  return c;
}

TEST(Reports, FixedSixDecimals) {
  EXPECT_EQ(fixed6(1.0), "1.000000");
  EXPECT_EQ(fixed6(0.1234567), "0.123457");
}

TEST(Reports, TimingJsonRoundTrip) {
  TimingReport t;
  t.add("train", 12.5, 5);
  t.add("predict", 3.0, 0);
  const auto back = nlohmann::json(t).get<TimingReport>();
  ASSERT_EQ(back.stages.size(), 2u);
  EXPECT_EQ(back.stages[0].stage, "train");
  EXPECT_DOUBLE_EQ(back.stages[0].per_item_ms(), 2.5);
  EXPECT_DOUBLE_EQ(back.find("predict")->per_item_ms(), 0.0);
  EXPECT_EQ(back.find("missing"), nullptr);
}

TEST(Variants, IncrementalLadder) {
  const auto v = default_test_variants(3, 10);
  std::vector<std::string> names;
  for (const auto& x : v) names.push_back(x.name);
  EXPECT_EQ(names, (std::vector<std::string>{"clean", "irrelevant_data", "rename_2", "rename_5", "rename_all_format",
                                             "key_expansion"}));
  EXPECT_TRUE(v[0].plan.is_identity());
  EXPECT_DOUBLE_EQ(v[2].plan.attr_rename_rate, 0.2);
  EXPECT_DOUBLE_EQ(v[3].plan.attr_rename_rate, 0.5);
  for (std::size_t i = 1; i < v.size(); ++i) EXPECT_EQ(v[i].plan.add_remove_noise_columns, 2u);
  EXPECT_DOUBLE_EQ(v[5].plan.value_reformat_rate, 0.5);
  const nlohmann::json j = v[5];
  EXPECT_EQ(nlohmann::json(j.get<TestVariant>()).dump(), j.dump());
}

TEST(Variants, TestPerturbationsKeepTheTargetTable) {
  const auto& s = setup();
  const auto clean = assemble_labels(s.sc.spec.target, s.test, s.key_dicts);
  for (const auto& v : default_test_variants(11, 6)) {
    const auto perturbed = apply_test_plan(s.test, v.plan, context(s));
    EXPECT_GE(perturbed.size(), s.test.size()) << v.name;
    EXPECT_TRUE(diff_tables(clean, assemble_labels(s.sc.spec.target, perturbed, s.key_dicts)).empty()) << v.name;
  }
  std::set<std::string> before, after;
  const auto renamed = apply_test_plan(s.test, default_test_variants(11, 6)[4].plan, context(s));
  for (const auto& x : s.test) before.insert(x.cell.attributes.begin(), x.cell.attributes.end());
  for (const auto& x : renamed) after.insert(x.cell.attributes.begin(), x.cell.attributes.end());
  for (const auto& a : before) EXPECT_EQ(after.count(a), 0u) << a;
}

TEST(Ablation, EmptyVariantListGivesHeaderOnly) {
  const auto& s = setup();
  AblationConfig cfg;
  cfg.conditions = {{"plain", false, "local"}};
  cfg.learner = small_learner();
  cfg.learner.epochs = 1;
  const auto r = run_ablation(cfg, {&s.sc.spec, &s.dicts, &s.train, &s.test});
  EXPECT_EQ(ablation_csv(r), "condition,with_augmentation,dictionary,variant,samples,accuracy\n");
  EXPECT_EQ(r.loss_curves.size(), 1u);
  EXPECT_THROW(run_ablation(cfg, {}), Error);
}

TEST(Ablation, AugmentationHelpsOnRenamedData) {
  const auto& s = setup();
  AblationConfig cfg;
  cfg.variants = default_test_variants(11, 6);
  cfg.conditions = {{"aug", true, "local"}, {"plain", false, "local"}};
  cfg.train_plan.seed = 2;
  cfg.train_plan.attr_rename_rate = 0.583;
  cfg.train_plan.char_noise_rate = 0.1;
  cfg.train_plan.value_reformat_rate = 0.3;
  cfg.train_plan.add_remove_noise_columns = 2;
  cfg.learner = small_learner();
  std::vector<std::string> seen;
  const auto r = run_ablation(cfg, {&s.sc.spec, &s.dicts, &s.train, &s.test},
                              [&](const TrainingCondition& c, const Model<float>&) { seen.push_back(c.name); });
  EXPECT_EQ(seen, (std::vector<std::string>{"aug", "plain"}));
  ASSERT_EQ(r.rows.size(), 12u);
  EXPECT_GE(*r.accuracy("aug", "clean"), 0.95);
  EXPECT_GE(*r.accuracy("aug", "rename_all_format"), 0.9);
  EXPECT_GT(*r.accuracy("aug", "rename_all_format"), *r.accuracy("plain", "rename_all_format"));
  EXPECT_FALSE(r.accuracy("aug", "nope").has_value());
  const auto j = ablation_json(r);
  EXPECT_EQ(j["rows"].size(), 12u);
  EXPECT_EQ(j["rows"][0]["accuracy"].get<std::string>(), fixed6(r.rows[0].accuracy));
}

TEST(Ablation, ConfigJson) {
  AblationConfig c;
  c.variants = default_test_variants(1, 4);
  c.conditions = {{"x", true, "none"}};
  const nlohmann::json j = c;
  EXPECT_EQ(nlohmann::json(j.get<AblationConfig>()).dump(), j.dump());
  EXPECT_THROW(nlohmann::json::parse(R"({"name":"x","dictionary":"global"})").get<TrainingCondition>(), Error);
}

TEST(Integration, LearnedTableMatchesTheOracle) {
  const auto& s = setup();
  const auto all = generate_training_data(s.sc.spec, s.corpora, s.dicts);
  const auto m = train<float>(all, s.sc.spec.target, small_learner()).model;
  const auto learned = learned_integrate(m, s.corpora, s.key_dicts);
  const auto oracle = oracle_integrate(s.sc.spec, s.corpora, s.dicts);
  EXPECT_EQ(learned.predicted, all.size());
  EXPECT_GE(cell_agreement(oracle, learned.table), 0.99);

  std::vector<ComparisonCase> cases = {{"clean", s.sc}, {"pivoted", fixtures::covid_pivoted_scenario({7, 8, 6, 4, 1})}};
  const auto cmp = compare_baseline(cases, m, s.dicts, 64, 1);
  ASSERT_EQ(cmp.rows.size(), 2u);
  EXPECT_EQ(cmp.rows[0].baseline_status, "ok");
  EXPECT_EQ(cmp.rows[1].baseline_status, "UncoverableAttribute");
  EXPECT_NE(comparison_csv(cmp).find("pivoted,"), std::string::npos);

  const auto st = storage_comparison(m, 470, 512);
  EXPECT_EQ(st.signature_bytes, 962560u);
  EXPECT_EQ(st.model_bytes, serialize_model(m).size());
  EXPECT_EQ(storage_json(st)["columns"], 470);
}

TEST(RunDirectory, HashOfTheConfig) {
  const nlohmann::json a{{"seed", 1}}, b{{"seed", 2}};
  EXPECT_EQ(config_hash(a), config_hash(nlohmann::json{{"seed", 1}}));
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
  const auto dir = run_directory(::testing::TempDir(), a);
  EXPECT_TRUE(std::filesystem::is_directory(dir));
  EXPECT_EQ(dir.filename().string(), "run-" + config_hash(a));
}

TEST(Counting, ColumnCount) {
  EXPECT_EQ(column_count(fixtures::wide_table_scenario()), 470u);
  EXPECT_EQ(column_count(fixtures::covid_scenario()), 12u);
}

}  // namespace
}  // namespace supercell
