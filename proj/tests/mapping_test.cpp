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
#include "supercell/mapping.hpp"

namespace supercell {
namespace {

struct Small {
  MappingSpec spec;
  DictionarySet dicts;
  std::vector<std::vector<SuperCell>> corpora;
};

Small small() {
  Small s;
  s.dicts.add(SynonymDictionary("us_states", {{"arizona", "az"}, {"texas", "tx"}}));
  s.spec.target.attributes = {"state", "date", "cases", "note"};
  s.spec.target.key_attributes = {"state", "date"};

  SourceMapping a;
  a.descriptor.source_id = "a";
  a.descriptor.key_columns = {"Date", "State"};
  a.descriptor.canonicalizers = {{"Date", CanonKind::date()}, {"State", CanonKind::dict("us_states")}};
  a.key_map = {{"state", 1, {}, "", false}, {"date", 0, {}, "", false}};
  a.attr_map = {{"cases", "cases"}, {"junk", std::string(kDiscard)}};
  a.agg_map = {{"cases", AggMode::Sum}};

  SourceMapping b;
  b.descriptor.source_id = "b";
  b.descriptor.key_columns = {"state"};
  b.descriptor.canonicalizers = {{"state", CanonKind::dict("us_states")}};
  b.key_map = {{"state", 0, {}, "", false}, {"date", std::nullopt, {}, "", true}};
  b.attr_map = {{"note", "note"}};
  s.spec.sources = {a, b};

  s.corpora.push_back(decompose(parse_csv("Date,State,Cases,Junk\n"
                                          "10/1/2020,AZ,5,x\n"
                                          "10/1/2020,Arizona,7,y\n"
                                          "10/2/2020,TX,3,z\n"),
                                a.descriptor, &s.dicts));
  s.corpora.push_back(decompose(parse_csv("state,note\nTexas,Big\nAZ,dry\n"), b.descriptor, &s.dicts));
  return s;
}

TEST(Oracle, HandComputedIntegration) {
  const auto s = small();
  const auto t = oracle_integrate(s.spec, s.corpora, s.dicts);
  EXPECT_EQ(t.render(), "state,date,cases,note\narizona,2020-10-01,12,dry\ntexas,2020-10-02,3,big\n");
  EXPECT_EQ(t.stats().discarded_cells, 3u);
}

TEST(TrainingData, KeysBecomeCopyMarkersInSortedOrder) {
  const auto s = small();
  const auto samples = generate_training_data(s.spec, s.corpora, s.dicts);
  ASSERT_EQ(samples.size(), 8u);
  // cells per row: cases, junk (singletons ordered by name)
  const auto& cases = samples[0];
  EXPECT_EQ(cases.cell.attributes, (std::vector<std::string>{"cases"}));
  // sorted keys: 2020-10-01 < arizona
  EXPECT_EQ(cases.label.keys, (std::vector<KeyLabel>{KeyLabel::copy(1), KeyLabel::copy(0)}));
  EXPECT_EQ(cases.label.agg_mode, AggMode::Sum);
  EXPECT_TRUE(samples[1].label.is_discard());
  const auto& note = samples[6];
  EXPECT_EQ(note.label.keys, (std::vector<KeyLabel>{KeyLabel::copy(0), KeyLabel::wildcard()}));
  EXPECT_EQ(note.origin.source_id, "b");
}

TEST(TrainingData, ConsistentWithOracle) {
  const auto s = small();
  EXPECT_TRUE(consistency_check(s.spec, s.corpora, s.dicts).ok());
  const auto sc = fixtures::covid_scenario({7, 6, 5, 3, 1});
  const auto dicts = fixtures::builtin_dictionaries();
  const auto r = consistency_check(sc.spec, fixtures::corpora(sc, dicts), dicts);
  EXPECT_GT(r.samples, 0u);
  EXPECT_TRUE(r.ok());
}

TEST(TrainingData, TamperedLabelIsDetected) {
  const auto s = small();
  auto samples = generate_training_data(s.spec, s.corpora, s.dicts);
  samples[0].label.agg_mode = AggMode::Max;
  samples[2].label.agg_mode = AggMode::Max;
  EXPECT_FALSE(consistency_check(s.spec, s.corpora, s.dicts, &samples).ok());
}

TEST(Oracle, ChildKeysRollUpIntoParent) {
  auto s = small();
  KeyHierarchy h;
  h.sources = {"a"};
  s.spec.key_hierarchy = h;
  std::vector<SuperCell> kids = {{"a", {"2020-10-03", "arizona", "pima"}, {"cases"}, {"2"}, 0},
                                 {"a", {"2020-10-03", "arizona", "maricopa"}, {"cases"}, {"3.5"}, 0}};
  s.corpora.push_back(kids);
  const auto t = oracle_integrate(s.spec, s.corpora, s.dicts);
  EXPECT_EQ(t.cells().at({{"arizona", "2020-10-03"}, "cases"}), "5.5");
}

TEST(Oracle, MonthNameKeyFormat) {
  auto s = small();
  s.spec.sources[0].key_map[1].format = "mon_d_yyyy";
  const auto pos = resolve_position(s.spec, s.corpora[0][0], s.dicts);
  EXPECT_EQ(pos.keys[1], KeyLabel::literal("oct 1, 2020"));
}

TEST(Spec, ValidationRejectsBrokenMappings) {
  auto expect_violation = [](const MappingSpec& m) {
    try {
      m.validate();
      ADD_FAILURE() << "accepted";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::SpecViolation) << e.what();
    }
  };
  const auto base = small().spec;
  EXPECT_NO_THROW(base.validate());
  auto m = base;
  m.sources[0].attr_map["cases"] = "nope";
  expect_violation(m);
  m = base;
  m.sources[0].key_map.pop_back();
  expect_violation(m);
  m = base;
  m.sources[0].key_map[0].component = 5;
  expect_violation(m);
  m = base;
  m.sources[0].key_map[0].format = "weird";
  expect_violation(m);
  m = base;
  m.sources.push_back(m.sources[0]);
  expect_violation(m);
  m = base;
  m.sources[0].agg_map["other"] = AggMode::Sum;
  expect_violation(m);
}

TEST(Spec, ClosedDomainRejectsUnknownKeys) {
  auto s = small();
  s.spec.target.key_domains["state"] = KeyDomain{{"texas"}, false};
  EXPECT_THROW(oracle_integrate(s.spec, s.corpora, s.dicts), Error);
}

TEST(Spec, JsonRoundTrip) {
  auto s = small();
  s.spec.key_hierarchy = fixtures::covid_hierarchy();
  s.spec.key_hierarchy->sources = {"a"};
  const nlohmann::json j = s.spec;
  EXPECT_EQ(nlohmann::json(j.get<MappingSpec>()).dump(), j.dump());
  const auto samples = generate_training_data(s.spec, s.corpora, s.dicts);
  const nlohmann::json sj = samples[0];
  EXPECT_EQ(nlohmann::json(sj.get<LabeledSample>()).dump(), sj.dump());
}

TEST(Spec, KeyDictionariesOnlyCoverKeys) {
  const auto sc = fixtures::covid_scenario({7, 4, 3, 2, 1});
  const auto kd = sc.spec.key_dictionaries(fixtures::builtin_dictionaries());
  EXPECT_TRUE(kd.contains("us_states"));
  EXPECT_TRUE(kd.contains("countries"));
  EXPECT_FALSE(kd.contains("attributes"));
  EXPECT_THROW(sc.spec.key_dictionaries(DictionarySet{}), Error);
}

}  // namespace
}  // namespace supercell
