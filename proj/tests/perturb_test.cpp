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

#include "supercell/fixtures.hpp"
#include "supercell/perturb.hpp"

namespace supercell {
namespace {

struct Setup {
  fixtures::Scenario sc;
  DictionarySet dicts;
  DictionarySet key_dicts;
  std::vector<std::vector<SuperCell>> corpora;
  std::vector<LabeledSample> samples;
  TargetTable oracle;
};

Setup setup() {
  Setup s{fixtures::covid_scenario({7, 6, 5, 3, 1}), fixtures::builtin_dictionaries(), {}, {}, {}, {}};
  s.key_dicts = s.sc.spec.key_dictionaries(s.dicts);
  s.corpora = fixtures::corpora(s.sc, s.dicts);
  s.samples = generate_training_data(s.sc.spec, s.corpora, s.dicts);
  s.oracle = oracle_integrate(s.sc.spec, s.corpora, s.dicts);
  return s;
}

AugmentContext context(const Setup& s) {
  return AugmentContext{&s.dicts, &s.key_dicts, &*s.sc.spec.key_hierarchy, s.sc.spec.target.q()};
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

TEST(TokenEdits, SingleEditOnLongTokensOnly) {
  Rng rng(3);
  EXPECT_EQ(char_edit("ab", rng), "ab");
  for (int i = 0; i < 200; ++i) {
    const std::string e = char_edit("confirmed", rng);
    EXPECT_EQ(edit_distance("confirmed", e), 1u);
  }
  EXPECT_NE(noisy_name("people tested", rng), "people tested");
  EXPECT_EQ(noise_tokens("grocery and pharmacy", 0.0, rng), "grocery and pharmacy");
}

TEST(Reformat, KeepsTheCanonicalValue) {
  Rng rng(8);
  const auto dicts = fixtures::builtin_dictionaries();
  for (int i = 0; i < 100; ++i) {
    for (const std::string v : {"2020-10-06", "1234567", "-12.5", "0", "az", "united states"}) {
      const std::string r = reformat_value(v, rng, &dicts);
      EXPECT_EQ(canonicalize_auto(r, &dicts), canonicalize_auto(v, &dicts)) << v << " -> " << r;
    }
  }
  EXPECT_EQ(reformat_value("free text", rng, &dicts), "free text");
}

TEST(Expansion, CompositionSumsExactly) {
  Rng rng(12);
  for (const std::string v : {"1200", "0", "3.75", "-41", "0.001"}) {
    const Decimal parent = *Decimal::parse(v);
    for (std::size_t n : {2u, 3u, 5u}) {
      const auto parts = random_composition(parent, n, rng);
      ASSERT_EQ(parts.size(), n);
      Decimal sum;
      for (const auto& p : parts) {
        sum += p;
        EXPECT_LE(p.fractional_digits(), std::max(parent.fractional_digits(), 0));
      }
      EXPECT_EQ(sum, parent) << v;
    }
  }
}

TEST(Expansion, RollupReproducesTheOracle) {
  const auto s = setup();
  PerturbationPlan plan;
  plan.seed = 4;
  plan.key_expansion_rate = 1.0;
  const auto exp = expand_keys(s.samples, *s.sc.spec.key_hierarchy, plan, s.key_dicts);
  EXPECT_GT(exp.rows_expanded, 0u);
  EXPECT_EQ(exp.rows_skipped, 0u);
  ASSERT_FALSE(exp.children.empty());
  EXPECT_EQ(exp.children.front().cell.keys.size(), 4u);
  const auto t = assemble_labels(s.sc.spec.target, exp.samples, s.key_dicts);
  EXPECT_TRUE(diff_tables(s.oracle, t).empty());
}

TEST(Expansion, PartialRateSplitsTheRequestedFraction) {
  const auto s = setup();
  PerturbationPlan plan;
  plan.seed = 4;
  plan.key_expansion_rate = 0.5;
  const auto exp = expand_keys(s.samples, *s.sc.spec.key_hierarchy, plan, s.key_dicts);
  EXPECT_EQ(exp.rows_expanded, s.sc.sources[0].table.rows.size() / 2);
}

TEST(Rename, ConsistentAcrossTheCorpus) {
  const auto s = setup();
  PerturbationPlan plan;
  plan.seed = 9;
  plan.attr_rename_rate = 1.0;
  const auto r = rename_attributes(s.corpora[1], plan, s.dicts);
  EXPECT_EQ(r.renamed.size(), 3u);
  for (std::size_t i = 0; i < r.corpus.size(); ++i)
    for (std::size_t y = 0; y < r.corpus[i].width(); ++y)
      EXPECT_EQ(r.corpus[i].attributes[y], r.renamed.at(s.corpora[1][i].attributes[y]));
  plan.attr_rename_rate = 0.0;
  EXPECT_TRUE(rename_attributes(s.corpora[1], plan, s.dicts).renamed.empty());
}

TEST(Augment, PerturbedCopiesKeepTheirTargetPositions) {
  const auto s = setup();
  PerturbationPlan plan;
  plan.seed = 21;
  plan.attr_rename_rate = 0.5;
  plan.char_noise_rate = 0.2;
  plan.value_reformat_rate = 0.5;
  const auto aug = augment(s.samples, plan, context(s));
  ASSERT_EQ(aug.log.size(), aug.samples.size());
  EXPECT_GT(aug.samples.size(), s.samples.size());
  // every target write is a Replace of a canonical value, so the perturbed
  // copies must assemble to exactly the oracle table
  const auto t = assemble_labels(s.sc.spec.target, aug.samples, s.key_dicts);
  EXPECT_TRUE(diff_tables(s.oracle, t).empty());
  std::set<std::string> attrs;
  for (const auto& x : aug.samples) attrs.insert(x.cell.attributes.begin(), x.cell.attributes.end());
  EXPECT_GT(attrs.size(), fixtures::corpora(s.sc, s.dicts).size() * 3);
}

TEST(Augment, NoiseAndExpansionKeepTheOracle) {
  const auto s = setup();
  PerturbationPlan plan;
  plan.seed = 5;
  plan.key_expansion_rate = 0.3;
  plan.add_remove_noise_columns = 2;
  plan.augment_rounds = 0;
  const auto aug = augment(s.samples, plan, context(s));
  std::vector<LabeledSample> kept;
  std::set<std::pair<std::string, std::size_t>> expanded;
  std::size_t noise = 0;
  for (std::size_t i = 0; i < aug.samples.size(); ++i) {
    const auto& ops = aug.log[i].ops_applied;
    if (!ops.empty() && ops[0] == "noise_column") {
      ++noise;
      EXPECT_TRUE(aug.samples[i].label.is_discard());
      continue;
    }
    if (!ops.empty() && ops[0] == "key_expansion")
      expanded.insert({aug.samples[i].origin.source_id, aug.samples[i].origin.row_ordinal});
  }
  // originals of expanded rows are superseded by their children
  for (std::size_t i = 0; i < aug.samples.size(); ++i) {
    const auto& x = aug.samples[i];
    const auto& ops = aug.log[i].ops_applied;
    if (ops.empty() && expanded.count({x.origin.source_id, x.origin.row_ordinal})) continue;
    kept.push_back(x);
  }
  EXPECT_GT(noise, 0u);
  EXPECT_FALSE(expanded.empty());
  EXPECT_TRUE(diff_tables(s.oracle, assemble_labels(s.sc.spec.target, kept, s.key_dicts)).empty());
}

TEST(Augment, DeterministicForASeed) {
  const auto s = setup();
  PerturbationPlan plan;
  plan.seed = 77;
  plan.attr_rename_rate = 0.3;
  plan.value_reformat_rate = 0.3;
  plan.add_remove_noise_columns = 1;
  plan.pivot_enabled = true;
  const auto a = augment(s.samples, plan, context(s));
  const auto b = augment(s.samples, plan, context(s));
  EXPECT_EQ(nlohmann::json(a.samples).dump(), nlohmann::json(b.samples).dump());
  EXPECT_EQ(render_perturbation_log(a.log), render_perturbation_log(b.log));
  plan.seed = 78;
  EXPECT_NE(nlohmann::json(augment(s.samples, plan, context(s)).samples).dump(), nlohmann::json(a.samples).dump());
}

TEST(Augment, IdentityPlanReturnsTheInput) {
  const auto s = setup();
  const auto a = augment(s.samples, PerturbationPlan{}, context(s));
  EXPECT_EQ(a.samples.size(), s.samples.size());
}

TEST(Augment, WithCellRebasesCopyMarkers) {
  const auto s = setup();
  const auto& orig = s.samples[0];
  SuperCell cell = orig.cell;
  std::reverse(cell.keys.begin(), cell.keys.end());
  cell.keys[0] = "usa";
  const auto moved = with_cell(orig, cell, s.key_dicts);
  EXPECT_EQ(resolve_copies(moved.label, moved.cell, &s.key_dicts), resolve_copies(orig.label, orig.cell, &s.key_dicts));
}

TEST(Plan, JsonValidation) {
  PerturbationPlan p;
  p.attr_rename_rate = 0.4;
  p.synonym_dict = "os_log_terms";
  EXPECT_EQ(nlohmann::json(nlohmann::json(p).get<PerturbationPlan>()).dump(), nlohmann::json(p).dump());
  EXPECT_THROW(nlohmann::json::parse(R"({"bogus": 1})").get<PerturbationPlan>(), Error);
  EXPECT_THROW(nlohmann::json::parse(R"({"char_noise_rate": 1.5})").get<PerturbationPlan>(), Error);
}

TEST(Noise, PerRowAndUnseenVocabulary) {
  const auto s = setup();
  const auto n = noise_samples(s.samples, 3, 3, 1);
  std::set<std::tuple<std::string, std::size_t, std::vector<std::string>>> rows;
  for (const auto& x : s.samples) rows.insert({x.origin.source_id, x.origin.row_ordinal, x.cell.keys});
  EXPECT_EQ(n.size(), rows.size() * 3);
  for (const auto& x : n) EXPECT_EQ(s.sc.spec.source(x.cell.source_id).attr_map.count(x.cell.attributes[0]), 0u);
}

}  // namespace
}  // namespace supercell
