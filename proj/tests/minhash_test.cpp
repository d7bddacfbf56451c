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

#include <cmath>

#include "supercell/eval.hpp"
#include "test_support.hpp"

namespace supercell {
namespace {

TEST(Shingles, ThreeCharacterWindows) {
  EXPECT_EQ(shingles("abcd"), (std::vector<std::string>{"abc", "bcd"}));
  EXPECT_EQ(shingles("ab"), (std::vector<std::string>{"ab"}));
  EXPECT_TRUE(shingles("").empty());
}

TEST(MinHash, IdenticalAndDisjointColumns) {
  const std::vector<std::string> a = {"arizona", "texas", "ohio"};
  EXPECT_DOUBLE_EQ(estimate_jaccard(signature(a), signature(a)), 1.0);
  EXPECT_DOUBLE_EQ(estimate_jaccard(signature({"aaa", "bbb"}), signature({"ccc", "ddd"})), 0.0);
}

TEST(MinHash, HalfOverlapWithinTolerance) {
  // {abc,bcd,cde} and {bcd,cde,def} share two of four shingles
  const double j = estimate_jaccard(signature({"abcde"}), signature({"bcdef"}));
  EXPECT_NEAR(j, 0.5, 0.15);
}

TEST(MinHash, MeanErrorWithinTheEstimatorBound) {
  Rng rng(17);
  double err = 0, bound = 0;
  const std::size_t L = 128;
  for (int i = 0; i < 200; ++i) {
    const auto p = testing::random_column_pair(rng);
    err += std::abs(estimate_jaccard(signature(p.a, L, 3), signature(p.b, L, 3)) - p.jaccard);
    bound += 2 * std::sqrt(p.jaccard * (1 - p.jaccard) / static_cast<double>(L));
  }
  EXPECT_LE(err, bound);
}

TEST(MinHash, IncompatibleSignaturesAndEmptyColumns) {
  EXPECT_THROW(estimate_jaccard(signature({"abc"}, 64), signature({"abc"}, 128)), Error);
  EXPECT_THROW(estimate_jaccard(signature({"abc"}, 64, 1), signature({"abc"}, 64, 2)), Error);
  try {
    signature({"", "NA"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyColumn);
  }
}

TEST(Storage, SignatureArithmetic) {
  EXPECT_EQ(storage_report(470, 512), 962560u);
  EXPECT_EQ(storage_report(470, 512) / 1024, 940u);
  EXPECT_EQ(storage_report(10, 128), 5120u);
  EXPECT_EQ(storage_report({signature({"abc"}, 16), signature({"abd"}, 16)}), 128u);
}

TEST(Storage, StoreRoundTrip) {
  const std::vector<MinHashSignature> sigs = {signature({"abc"}, 8, 1), signature({"hello"}, 8, 1)};
  const std::vector<SignatureIndexEntry> idx = {{"s", "a", 8, 1}, {"s", "b", 8, 1}};
  const std::string bin = ::testing::TempDir() + "sig.bin", js = ::testing::TempDir() + "sig.json";
  write_signature_store(idx, sigs, bin, js);
  std::vector<SignatureIndexEntry> back_idx;
  EXPECT_EQ(read_signature_store(bin, js, &back_idx), sigs);
  EXPECT_EQ(back_idx[1].column, "b");
  EXPECT_EQ(read_file(bin).size(), storage_report(sigs));
  write_file(bin, read_file(bin).substr(4));
  EXPECT_THROW(read_signature_store(bin, js), Error);
}

TEST(Baseline, MatchesTheOracleOnCleanData) {
  const auto sc = fixtures::covid_scenario({7, 10, 6, 4, 1});
  const auto dicts = fixtures::builtin_dictionaries();
  const auto oracle = oracle_integrate(sc.spec, fixtures::corpora(sc, dicts), dicts);
  const auto run = run_baseline(sc, oracle.to_table(), dicts, 128, 0, 0.5);
  ASSERT_TRUE(run.table.has_value()) << run.failure;
  EXPECT_TRUE(run.matches.no_match.empty());
  EXPECT_EQ(run.selected.size(), 2u);
  EXPECT_DOUBLE_EQ(cell_agreement(oracle, *run.table), 1.0);
}

TEST(Baseline, PivotedSourcesCannotBeMatched) {
  const auto dicts = fixtures::builtin_dictionaries();
  const auto clean = fixtures::covid_scenario({7, 10, 6, 4, 1});
  const auto example = oracle_integrate(clean.spec, fixtures::corpora(clean, dicts), dicts).to_table();
  const auto run = run_baseline(fixtures::covid_pivoted_scenario({7, 10, 6, 4, 1}), example, dicts, 128, 0, 0.5);
  EXPECT_FALSE(run.table.has_value());
  EXPECT_EQ(run.failure, "UncoverableAttribute");
  const auto& nm = run.matches.no_match;
  EXPECT_NE(std::find(nm.begin(), nm.end(), "date"), nm.end());
}

TEST(Baseline, UncoverableAttributeWhenNothingMatches) {
  MatchResult m;
  m.candidates["a"] = {{0, "s", "x", 0.9}};
  EXPECT_EQ(select_sources(m, {"a"}, 1), (std::vector<std::size_t>{0}));
  EXPECT_THROW(select_sources(m, {"a", "b"}, 1), Error);
}

TEST(Baseline, GreedyCoverPrefersTheWiderSource) {
  MatchResult m;
  m.candidates["a"] = {{0, "s0", "x", 0.9}, {1, "s1", "x", 0.9}};
  m.candidates["b"] = {{1, "s1", "y", 0.9}};
  EXPECT_EQ(select_sources(m, {"a", "b"}, 2), (std::vector<std::size_t>{1}));
}

}  // namespace
}  // namespace supercell
