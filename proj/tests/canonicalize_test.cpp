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

#include "supercell/canonicalize.hpp"

namespace supercell {
namespace {

DictionarySet states() {
  DictionarySet d;
  d.add(SynonymDictionary("us_states", {{"arizona", "az"}, {"new york", "ny"}}));
  d.add(SynonymDictionary("countries", {{"us", "united states", "usa"}}));
  return d;
}

TEST(Dates, RecognizedLayoutsCanonicalizeToIso) {
  for (const char* s : {"2020-10-06", "10/6/2020", "10-06-2020", "10062020", "Oct 6, 2020", "October 6 2020"})
    EXPECT_EQ(canonicalize(s, CanonKind::date()), "2020-10-06") << s;
  EXPECT_EQ(canonicalize("3/1/2021 10:05", CanonKind::date()), "2021-03-01 10:05:00");
}

TEST(Dates, InvalidDatesAreRejected) {
  EXPECT_FALSE(parse_date("2021-02-29"));
  EXPECT_TRUE(parse_date("2020-02-29"));
  EXPECT_FALSE(parse_date("13/1/2020"));
  EXPECT_FALSE(parse_date("hello"));
  CanonStats st;
  EXPECT_EQ(canonicalize("not a date", CanonKind::date(), nullptr, &st), "not a date");
  EXPECT_EQ(st.unparseable_dates, 1u);
}

TEST(Dates, EveryLosslessStyleParsesBack) {
  DateTime d;
  d.year = 2021;
  d.month = 12;
  d.day = 9;
  for (auto style : lossless_styles(d)) {
    auto back = parse_date(format_date(d, style));
    ASSERT_TRUE(back);
    EXPECT_EQ(format_date(*back, DateStyle::Iso), "2021-12-09");
  }
}

TEST(Numbers, SeparatorsSignsAndPercent) {
  EXPECT_EQ(canonicalize("1,234", CanonKind::number()), "1234");
  EXPECT_EQ(canonicalize("+12.50", CanonKind::number()), "12.5");
  EXPECT_EQ(canonicalize("14.9%", CanonKind::number()), "14.9");
  EXPECT_EQ(canonicalize("-0.0", CanonKind::number()), "0");
  EXPECT_FALSE(parse_number("1,,2"));
  EXPECT_FALSE(parse_number(",12"));
  EXPECT_FALSE(parse_number("12a"));
}

TEST(Dictionaries, HeadTermLookup) {
  const auto d = states();
  EXPECT_EQ(canonicalize("AZ", CanonKind::dict("us_states"), &d), "arizona");
  EXPECT_EQ(canonicalize(" New York ", CanonKind::dict("us_states"), &d), "new york");
  // unknown terms fall back to the lower-cased input
  EXPECT_EQ(canonicalize("Ontario", CanonKind::dict("us_states"), &d), "ontario");
  EXPECT_THROW(canonicalize("x", CanonKind::dict("missing"), &d), Error);
  EXPECT_THROW(canonicalize("x", CanonKind::dict("us_states"), nullptr), Error);
}

TEST(Dictionaries, JsonFormIsAnArrayOfGroups) {
  auto d = SynonymDictionary::from_json("t", nlohmann::json::parse(R"([["a","b"],["c"]])"));
  EXPECT_EQ(*d.head("B"), "a");
  EXPECT_FALSE(d.head("z"));
  EXPECT_THROW(SynonymDictionary::from_json("t", nlohmann::json::parse(R"({"a":1})")), Error);
}

TEST(Canonicalize, AutoSniffsDateNumberDictionary) {
  const auto d = states();
  EXPECT_EQ(canonicalize_auto("10/6/2020", &d), "2020-10-06");
  EXPECT_EQ(canonicalize_auto("1,000", &d), "1000");
  EXPECT_EQ(canonicalize_auto("USA", &d), "us");
  EXPECT_EQ(canonicalize_auto("Foo Bar", &d), "foo bar");
}

TEST(Canonicalize, ValueFormIgnoresDictionaries) {
  EXPECT_EQ(canonical_value("USA"), "usa");
  EXPECT_EQ(canonical_value("Oct 6, 2020"), "2020-10-06");
  EXPECT_EQ(canonical_value("3,500"), "3500");
}

TEST(Canonicalize, KindTextRoundTrip) {
  for (const auto& k : {CanonKind::none(), CanonKind::date(), CanonKind::number(), CanonKind::dict("us_states")})
    EXPECT_EQ(CanonKind::parse(k.to_string()), k);
  EXPECT_THROW(CanonKind::parse("bogus"), Error);
}

}  // namespace
}  // namespace supercell
