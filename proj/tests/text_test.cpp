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

#include <set>

#include "supercell/decimal.hpp"
#include "supercell/text.hpp"

namespace supercell {
namespace {

TEST(Text, TrimLowerSplitJoin) {
  EXPECT_EQ(lower_trim("  New York \t"), "new york");
  EXPECT_EQ(split_ws("  a  bb\tc "), (std::vector<std::string>{"a", "bb", "c"}));
  EXPECT_TRUE(split_ws("   ").empty());
  EXPECT_EQ(join({"a", "b", "c"}, "|"), "a|b|c");
  EXPECT_EQ(join({}, "|"), "");
}

TEST(Text, SplitLinesHandlesCrlfAndTrailingNewline) {
  EXPECT_EQ(split_lines("a\r\nb\nc"), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(split_lines("a\n"), (std::vector<std::string>{"a"}));
  EXPECT_TRUE(split_lines("").empty());
}

TEST(Text, Fnv1aKnownVectors) {
  // published FNV-1a 64-bit test vectors
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
}

TEST(Text, UniformIndexStaysInRangeAndCoversIt) {
  Rng rng(3);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    auto v = uniform_index(rng, 7);
    ASSERT_LT(v, 7u);
    seen.insert(v);
  }
  EXPECT_EQ(seen.size(), 7u);
  EXPECT_EQ(uniform_index(rng, 0), 0u);
  EXPECT_EQ(uniform_index(rng, 1), 0u);
}

TEST(Text, DerivedStreamsAreReproducibleAndDistinct) {
  Rng a = derived_rng(1, 2), b = derived_rng(1, 2), c = derived_rng(1, 3);
  EXPECT_EQ(a(), b());
  EXPECT_NE(derived_rng(1, 2)(), c());
}

TEST(Text, ShuffleIsAPermutation) {
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[static_cast<std::size_t>(i)] = i;
  Rng rng(9);
  shuffle(v, rng);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) EXPECT_EQ(sorted[static_cast<std::size_t>(i)], i);
}

TEST(Decimal, ParseAndPrintRoundTrip) {
  for (const char* s : {"0", "12", "-3.5", "0.000001", "123456789012.25"}) {
    auto d = Decimal::parse(s);
    ASSERT_TRUE(d) << s;
    EXPECT_EQ(d->to_string(), s);
  }
  EXPECT_EQ(Decimal::parse("+7.50")->to_string(), "7.5");
  EXPECT_EQ(Decimal::parse(".5")->to_string(), "0.5");
  EXPECT_FALSE(Decimal::parse(""));
  EXPECT_FALSE(Decimal::parse("1e5"));
  EXPECT_FALSE(Decimal::parse("1.2.3"));
  EXPECT_FALSE(Decimal::parse("-"));
}

TEST(Decimal, SumsOfDecimalsAreExact) {
  // 0.1 added ten times is exactly 1 (it is not in binary floating point)
  Decimal acc;
  for (int i = 0; i < 10; ++i) acc += *Decimal::parse("0.1");
  EXPECT_EQ(acc.to_string(), "1");
}

TEST(Decimal, DivisionRoundsHalfAwayFromZero) {
  EXPECT_EQ(Decimal::from_int(2).divided_by(3), "0.666667");
  EXPECT_EQ(Decimal::from_int(-2).divided_by(3), "-0.666667");
  EXPECT_EQ(Decimal::from_int(10).divided_by(4), "2.5");
  EXPECT_EQ(Decimal::from_int(5).divided_by(0), "");
}

}  // namespace
}  // namespace supercell
