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

#pragma once

#include <set>
#include <string>
#include <vector>

#include "supercell/canonicalize.hpp"
#include "supercell/csv.hpp"
#include "supercell/ingest.hpp"
#include "supercell/mapping.hpp"
#include "supercell/perturb.hpp"
#include "supercell/text.hpp"

namespace supercell::fixtures {

struct StateInfo {
  const char* name;
  const char* abbrev;
};

inline const std::vector<StateInfo>& us_states() {
  static const std::vector<StateInfo> s = {
      {"Alabama", "AL"},        {"Alaska", "AK"},        {"Arizona", "AZ"},        {"Arkansas", "AR"},
      {"California", "CA"},     {"Colorado", "CO"},      {"Connecticut", "CT"},    {"Delaware", "DE"},
      {"Florida", "FL"},        {"Georgia", "GA"},       {"Hawaii", "HI"},         {"Idaho", "ID"},
      {"Illinois", "IL"},       {"Indiana", "IN"},       {"Iowa", "IA"},           {"Kansas", "KS"},
      {"Kentucky", "KY"},       {"Louisiana", "LA"},     {"Maine", "ME"},          {"Maryland", "MD"},
      {"Massachusetts", "MA"},  {"Michigan", "MI"},      {"Minnesota", "MN"},      {"Mississippi", "MS"},
      {"Missouri", "MO"},       {"Montana", "MT"},       {"Nebraska", "NE"},       {"Nevada", "NV"},
      {"New Hampshire", "NH"},  {"New Jersey", "NJ"},    {"New Mexico", "NM"},     {"New York", "NY"},
      {"North Carolina", "NC"}, {"North Dakota", "ND"},  {"Ohio", "OH"},           {"Oklahoma", "OK"},
      {"Oregon", "OR"},         {"Pennsylvania", "PA"},  {"Rhode Island", "RI"},   {"South Carolina", "SC"},
      {"South Dakota", "SD"},   {"Tennessee", "TN"},     {"Texas", "TX"},          {"Utah", "UT"},
      {"Vermont", "VT"},        {"Virginia", "VA"},      {"Washington", "WA"},     {"West Virginia", "WV"},
      {"Wisconsin", "WI"},      {"Wyoming", "WY"}};
  return s;
}

// Dictionary contents shipped with the fixtures (also written to
// data/dictionaries by make_fixtures).
inline std::vector<std::vector<std::string>> us_states_groups() {
  std::vector<std::vector<std::string>> g;
  for (const auto& s : us_states()) g.push_back({to_lower(s.name), to_lower(s.abbrev)});
  return g;
}

inline std::vector<std::vector<std::string>> countries_groups() {
  return {{"us", "united states", "usa", "united states of america", "u.s."},
          {"china", "cn", "prc", "mainland china"},
          {"canada", "ca"},
          {"united kingdom", "uk", "gb", "great britain"},
          {"south korea", "korea, south", "republic of korea"}};
}

inline std::vector<std::vector<std::string>> attributes_groups() {
  return {{"confirmed", "confirmed_cases", "positive", "cases", "total_cases"},
          {"recovered", "recoveries", "cured", "recovered_cases"},
          {"deaths", "fatalities", "died", "death_count"},
          {"workplace", "workplaces", "work", "office", "workplaces_percent_change"},
          {"recreation", "retail_and_recreation", "leisure", "retail_recreation"},
          {"grocery", "grocery_and_pharmacy", "groceries", "pharmacy"},
          {"longitude", "long_", "lon", "lng"},
          {"latitude", "lat"},
          {"province/state", "province_state", "state", "sub_region_1"},
          {"country/region", "country_region", "country"},
          {"date", "last_update", "time", "day"},
          {"fips", "fips_code", "census_fips"}};
}

inline std::vector<std::vector<std::string>> os_log_terms_groups() {
  return {{"cpu_user", "user", "us", "%user", "usr"},
          {"cpu_sys", "sys", "sy", "%sys", "system"},
          {"cpu_idle", "idle", "id", "%idle"},
          {"mem_used", "used", "memused", "mem_in_use"},
          {"mem_free", "free", "unused", "memfree", "avail"}};
}

inline DictionarySet builtin_dictionaries() {
  DictionarySet d;
  d.add(SynonymDictionary("us_states", us_states_groups()));
  d.add(SynonymDictionary("countries", countries_groups()));
  d.add(SynonymDictionary("attributes", attributes_groups()));
  d.add(SynonymDictionary("os_log_terms", os_log_terms_groups()));
  return d;
}

// One raw source: a table (CSV / pivoted CSV) or log text.
struct SourceData {
  SourceDescriptor desc;
  Table table;
  std::string log_text;
};

struct Scenario {
  std::string name;
  MappingSpec spec;
  std::vector<SourceData> sources;
  std::set<std::string> train_keys;  // canonical key values of the training split
};

inline std::vector<SuperCell> decompose_source(const SourceData& s, const DictionarySet& dicts,
                                               IngestStats* stats = nullptr) {
  if (s.desc.format == SourceFormat::LogLines) return decompose_log(s.log_text, s.desc, &dicts, stats);
  return decompose(s.table, s.desc, &dicts, stats);
}

inline std::vector<std::vector<SuperCell>> corpora(const Scenario& sc, const DictionarySet& dicts) {
  std::vector<std::vector<SuperCell>> out;
  for (const auto& s : sc.sources) out.push_back(decompose_source(s, dicts));
  return out;
}

inline bool in_split(const SuperCell& c, const std::set<std::string>& keys) {
  for (const auto& k : c.keys)
    if (keys.count(k)) return true;
  return false;
}

// Cells whose keys include a training key value (train) or not (test).
inline std::vector<std::vector<SuperCell>> split(const std::vector<std::vector<SuperCell>>& corp,
                                                 const std::set<std::string>& keys, bool train) {
  std::vector<std::vector<SuperCell>> out;
  for (const auto& c : corp) {
    std::vector<SuperCell> part;
    for (const auto& cell : c)
      if (in_split(cell, keys) == train) part.push_back(cell);
    out.push_back(std::move(part));
  }
  return out;
}

inline std::string iso_date(int year, int month, int day) {
  DateTime d;
  d.year = year;
  d.month = month;
  d.day = day;
  return format_date(d, DateStyle::Iso);
}

// Consecutive calendar dates starting at 2020-10-01.
inline std::vector<DateTime> date_range(std::size_t n) {
  std::vector<DateTime> out;
  DateTime d;
  d.year = 2020;
  d.month = 10;
  d.day = 1;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(d);
    if (++d.day > detail::days_in_month(d.year, d.month)) {
      d.day = 1;
      if (++d.month > 12) {
        d.month = 1;
        ++d.year;
      }
    }
  }
  return out;
}

inline TargetSchema covid_schema() {
  TargetSchema t;
  t.attributes = {"date", "state", "country", "confirmed", "recovered", "deaths", "workplace", "recreation", "grocery"};
  t.key_attributes = {"date", "state", "country"};
  return t;
}

inline KeyHierarchy covid_hierarchy() {
  KeyHierarchy h;
  h.sources = {"covid"};
  h.level_name = "county";
  h.parent_component = 1;
  h.rollup = AggMode::Sum;
  h.children = {{"arizona", {"maricopa", "pima", "pinal"}},
                {"california", {"los angeles", "san diego", "orange"}},
                {"new york", {"kings", "queens", "new york county"}},
                {"texas", {"harris", "dallas", "tarrant"}}};
  h.default_children = 3;
  return h;
}

struct CovidOptions {
  std::uint64_t seed = 7;
  std::size_t regions = 50;
  std::size_t dates = 20;
  std::size_t train_dates = 14;
  std::size_t mobility_missing_states = 2;
};

namespace detail {

struct CovidSeries {
  std::vector<DateTime> dates;
  std::vector<StateInfo> states;
  // [state][date]
  std::vector<std::vector<std::string>> confirmed, recovered, deaths, workplace, recreation, grocery;
};

inline CovidSeries covid_series(const CovidOptions& o) {
  CovidSeries s;
  s.dates = date_range(o.dates);
  for (std::size_t i = 0; i < o.regions; ++i) s.states.push_back(us_states()[i % us_states().size()]);
  Rng rng = derived_rng(o.seed, 0x636f76);
  for (std::size_t i = 0; i < o.regions; ++i) {
    const std::uint64_t base = 1000 + uniform_index(rng, 90000);
    const std::uint64_t growth = 10 + uniform_index(rng, 900);
    const std::uint64_t rec_pct = 55 + uniform_index(rng, 30);
    const std::uint64_t death_permille = 8 + uniform_index(rng, 25);
    const int work0 = -40 + static_cast<int>(uniform_index(rng, 35));
    const int rec0 = -30 + static_cast<int>(uniform_index(rng, 30));
    const int groc0 = -15 + static_cast<int>(uniform_index(rng, 25));
    std::vector<std::string> c, r, d, w, re, g;
    for (std::size_t t = 0; t < o.dates; ++t) {
      const std::uint64_t conf = base + growth * t + uniform_index(rng, growth + 1);
      c.push_back(std::to_string(conf));
      // a few states do not report recoveries on some days
      r.push_back(uniform_index(rng, 50) == 0 ? "" : std::to_string(conf * rec_pct / 100));
      d.push_back(std::to_string(conf * death_permille / 1000));
      w.push_back(std::to_string(work0 + static_cast<int>(uniform_index(rng, 9)) - 4));
      re.push_back(std::to_string(rec0 + static_cast<int>(uniform_index(rng, 9)) - 4));
      g.push_back(std::to_string(groc0 + static_cast<int>(uniform_index(rng, 9)) - 4));
    }
    s.confirmed.push_back(c);
    s.recovered.push_back(r);
    s.deaths.push_back(d);
    s.workplace.push_back(w);
    s.recreation.push_back(re);
    s.grocery.push_back(g);
  }
  return s;
}

inline SourceMapping covid_mapping(SourceDescriptor desc) {
  SourceMapping m;
  m.descriptor = std::move(desc);
  return m;
}

}  // namespace detail

// Daily COVID-like counts (US-style abbreviations, M/D/YYYY dates) plus a
// mobility report keyed by full state names and ISO dates. The sources
// differ in key naming, key order, and value formats.
inline Scenario covid_scenario(const CovidOptions& o = {}) {
  const auto s = detail::covid_series(o);
  Scenario sc;
  sc.name = "covid";
  for (std::size_t t = 0; t < std::min(o.train_dates, s.dates.size()); ++t)
    sc.train_keys.insert(format_date(s.dates[t], DateStyle::Iso));

  SourceData covid;
  covid.desc.source_id = "covid";
  covid.desc.format = SourceFormat::Csv;
  covid.desc.key_columns = {"Date", "State", "Country"};
  covid.desc.supercell_groups = {{"Confirmed", "Recovered"}};
  covid.desc.canonicalizers = {{"Date", CanonKind::date()},
                               {"State", CanonKind::dict("us_states")},
                               {"Country", CanonKind::dict("countries")}};
  covid.table.header = {"Date", "State", "Country", "Confirmed", "Recovered", "Deaths"};
  for (std::size_t t = 0; t < s.dates.size(); ++t)
    for (std::size_t i = 0; i < s.states.size(); ++i)
      covid.table.rows.push_back({format_date(s.dates[t], DateStyle::Slash), s.states[i].abbrev, "US",
                                  s.confirmed[i][t], s.recovered[i][t], s.deaths[i][t]});

  SourceData mob;
  mob.desc.source_id = "mobility";
  mob.desc.format = SourceFormat::Csv;
  mob.desc.key_columns = {"country_region", "sub_region_1", "date"};
  mob.desc.canonicalizers = {{"date", CanonKind::date()},
                             {"sub_region_1", CanonKind::dict("us_states")},
                             {"country_region", CanonKind::dict("countries")}};
  mob.table.header = {"country_region", "sub_region_1", "date", "retail_and_recreation", "grocery_and_pharmacy",
                      "workplaces"};
  const std::size_t covered = s.states.size() > o.mobility_missing_states ? s.states.size() - o.mobility_missing_states
                                                                          : s.states.size();
  for (std::size_t i = 0; i < covered; ++i)
    for (std::size_t t = 0; t < s.dates.size(); ++t)
      mob.table.rows.push_back({"United States", s.states[i].name, format_date(s.dates[t], DateStyle::Iso),
                                s.recreation[i][t], s.grocery[i][t], s.workplace[i][t]});

  sc.spec.target = covid_schema();
  SourceMapping cm = detail::covid_mapping(covid.desc);
  cm.key_map = {{"date", 0, {}, "", false}, {"state", 1, {}, "", false}, {"country", 2, {}, "", false}};
  cm.attr_map = {{"confirmed", "confirmed"}, {"recovered", "recovered"}, {"deaths", "deaths"}};
  SourceMapping mm = detail::covid_mapping(mob.desc);
  mm.key_map = {{"date", 2, {}, "", false}, {"state", 1, {}, "", false}, {"country", 0, {}, "", false}};
  mm.attr_map = {{"workplaces", "workplace"},
                 {"retail_and_recreation", "recreation"},
                 {"grocery_and_pharmacy", "grocery"}};
  sc.spec.sources = {cm, mm};
  sc.spec.key_hierarchy = covid_hierarchy();
  sc.sources = {covid, mob};
  return sc;
}

// The same data with every measure published as its own time series:
// dates become column headers (Johns Hopkins / mobility time-series style).
inline Scenario covid_pivoted_scenario(const CovidOptions& o = {}) {
  const Scenario flat = covid_scenario(o);
  Scenario sc;
  sc.name = "covid_pivoted";
  sc.train_keys = flat.train_keys;
  sc.spec.target = flat.spec.target;
  sc.spec.key_hierarchy = flat.spec.key_hierarchy;
  struct Measure {
    std::size_t source;
    std::string column, target, id;
  };
  const std::vector<Measure> measures = {{0, "Confirmed", "confirmed", "covid_confirmed_ts"},
                                         {0, "Recovered", "recovered", "covid_recovered_ts"},
                                         {0, "Deaths", "deaths", "covid_deaths_ts"},
                                         {1, "workplaces", "workplace", "mobility_workplaces_ts"},
                                         {1, "retail_and_recreation", "recreation", "mobility_recreation_ts"},
                                         {1, "grocery_and_pharmacy", "grocery", "mobility_grocery_ts"}};
  for (const auto& m : measures) {
    const SourceData& src = flat.sources[m.source];
    const std::string axis = m.source == 0 ? "Date" : "date";
    SourceData p;
    p.desc = pivoted_descriptor(src.desc, axis, m.column, m.id);
    p.table = pivot_corpus(src.table, src.desc.key_columns, axis, m.column);
    SourceMapping sm;
    sm.descriptor = p.desc;
    // key order after pivoting: remaining keys in descriptor order, axis last
    const auto& k = p.desc.key_columns;
    auto index_of = [&](const std::string& name) -> std::size_t {
      if (name == axis) return k.size();
      return static_cast<std::size_t>(std::find(k.begin(), k.end(), name) - k.begin());
    };
    if (m.source == 0)
      sm.key_map = {{"date", index_of("Date"), {}, "", false},
                    {"state", index_of("State"), {}, "", false},
                    {"country", index_of("Country"), {}, "", false}};
    else
      sm.key_map = {{"date", index_of("date"), {}, "", false},
                    {"state", index_of("sub_region_1"), {}, "", false},
                    {"country", index_of("country_region"), {}, "", false}};
    sm.attr_map = {{lower_trim(m.column), m.target}};
    sc.spec.sources.push_back(sm);
    sc.sources.push_back(std::move(p));
  }
  sc.spec.key_hierarchy->sources = {"covid_confirmed_ts", "covid_recovered_ts", "covid_deaths_ts"};
  return sc;
}

// ---------------------------------------------------------------------------
// Machine logs: top-like output from three operating systems.

struct LogOptions {
  std::uint64_t seed = 11;
  std::size_t hosts_per_os = 3;
  std::size_t samples = 30;
  std::size_t train_samples = 20;
};

inline TargetSchema log_schema() {
  TargetSchema t;
  t.attributes = {"host", "timestamp", "cpu_user", "cpu_sys", "cpu_idle", "mem_used", "mem_free"};
  t.key_attributes = {"host", "timestamp"};
  return t;
}

inline Scenario machine_log_scenario(const LogOptions& o = {}) {
  Scenario sc;
  sc.name = "machine_logs";
  sc.spec.target = log_schema();
  Rng rng = derived_rng(o.seed, 0x6c6f67);
  std::vector<DateTime> stamps;
  for (std::size_t i = 0; i < o.samples; ++i) {
    DateTime d;
    d.year = 2021;
    d.month = 3;
    d.day = 1;
    d.has_time = true;
    d.hour = 10 + static_cast<int>((i * 5) / 60);
    d.minute = static_cast<int>((i * 5) % 60);
    stamps.push_back(d);
    if (i < o.train_samples) sc.train_keys.insert(format_date(d, DateStyle::Iso));
  }
  auto pct = [&](std::uint64_t lo, std::uint64_t hi) {
    const std::uint64_t v = lo * 100 + uniform_index(rng, (hi - lo) * 100);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%llu.%02llu", static_cast<unsigned long long>(v / 100),
                  static_cast<unsigned long long>(v % 100));
    return std::string(buf);
  };

  auto make_source = [&](const std::string& id, std::vector<LogRule> rules,
                         std::map<std::string, std::string> attr_map) {
    SourceData s;
    s.desc.source_id = id;
    s.desc.format = SourceFormat::LogLines;
    s.desc.key_columns = {"host", "timestamp"};
    s.desc.log_rules = std::move(rules);
    s.desc.canonicalizers = {{"timestamp", CanonKind::date()}};
    SourceMapping m;
    m.descriptor = s.desc;
    m.key_map = {{"host", 0, {}, "", false}, {"timestamp", 1, {}, "", false}};
    m.attr_map = std::move(attr_map);
    sc.spec.sources.push_back(m);
    return s;
  };

  SourceData mac = make_source(
      "macos",
      {{R"(^Host: (?<host>\S+)\s+Time: (?<timestamp>.+)$)", {"host", "timestamp"}, {}},
       {R"(^CPU usage: (?<u>[\d.]+)% user, (?<s>[\d.]+)% sys, (?<i>[\d.]+)% idle)",
        {},
        {{"user", "u"}, {"sys", "s"}, {"idle", "i"}}},
       {R"(^PhysMem: (?<used>\d+)M used, (?<unused>\d+)M unused)", {}, {{"used", "used"}, {"unused", "unused"}}}},
      {{"user", "cpu_user"}, {"sys", "cpu_sys"}, {"idle", "cpu_idle"}, {"used", "mem_used"}, {"unused", "mem_free"}});
  SourceData ubu = make_source(
      "ubuntu",
      {{R"(^top - (?<timestamp>\d{4}-\d{2}-\d{2} \d{2}:\d{2}:\d{2}) host (?<host>\S+))", {"host", "timestamp"}, {}},
       {R"(^%Cpu\(s\):\s+(?<u>[\d.]+) us,\s+(?<s>[\d.]+) sy,\s+(?<i>[\d.]+) id)",
        {},
        {{"us", "u"}, {"sy", "s"}, {"id", "i"}}},
       {R"(^MiB Mem :\s+[\d.]+ total,\s+(?<free>[\d.]+) free,\s+(?<used>[\d.]+) used)",
        {},
        {{"free", "free"}, {"used", "used"}}}},
      {{"us", "cpu_user"}, {"sy", "cpu_sys"}, {"id", "cpu_idle"}, {"used", "mem_used"}, {"free", "mem_free"}});
  SourceData droid = make_source(
      "android",
      {{R"(^\[(?<host>[^\]]+)\] (?<timestamp>\d{2}/\d{2}/\d{4} \d{1,2}:\d{2})$)", {"host", "timestamp"}, {}},
       {R"(^\d+%cpu\s+(?<u>\d+)%user\s+\d+%nice\s+(?<s>\d+)%sys\s+(?<i>\d+)%idle)",
        {},
        {{"%user", "u"}, {"%sys", "s"}, {"%idle", "i"}}},
       {R"(^Mem:\s+\d+K total,\s+(?<used>\d+)K used,\s+(?<free>\d+)K free)", {}, {{"used", "used"}, {"free", "free"}}}},
      {{"%user", "cpu_user"}, {"%sys", "cpu_sys"}, {"%idle", "cpu_idle"}, {"used", "mem_used"}, {"free", "mem_free"}});

  for (std::size_t h = 0; h < o.hosts_per_os; ++h) {
    char mh[16], uh[16], ah[16];
    std::snprintf(mh, sizeof mh, "mac-%02zu", h + 1);
    std::snprintf(uh, sizeof uh, "ubu-%02zu", h + 1);
    std::snprintf(ah, sizeof ah, "android-%02zu", h + 1);
    for (const auto& d : stamps) {
      mac.log_text += std::string("Host: ") + mh + "  Time: " + format_date(d, DateStyle::Slash) + "\n";
      mac.log_text += "Processes: 412 total, 2 running, 410 sleeping\n";
      mac.log_text += "CPU usage: " + pct(5, 40) + "% user, " + pct(2, 15) + "% sys, " + pct(40, 90) + "% idle\n";
      mac.log_text += "PhysMem: " + std::to_string(4000 + uniform_index(rng, 4000)) + "M used, " +
                      std::to_string(200 + uniform_index(rng, 2000)) + "M unused.\n";

      ubu.log_text += "top - " + format_date(d, DateStyle::Iso) + " host " + uh + "\n";
      ubu.log_text += "Tasks: 201 total,   1 running, 200 sleeping\n";
      char cpu[96];
      std::snprintf(cpu, sizeof cpu, "%%Cpu(s): %5.1f us, %4.1f sy, %5.1f id\n",
                    static_cast<double>(50 + uniform_index(rng, 350)) / 10.0,
                    static_cast<double>(10 + uniform_index(rng, 140)) / 10.0,
                    static_cast<double>(400 + uniform_index(rng, 500)) / 10.0);
      ubu.log_text += cpu;
      char mem[128];
      std::snprintf(mem, sizeof mem, "MiB Mem :  7962.4 total,  %.1f free,  %.1f used\n",
                    static_cast<double>(5000 + uniform_index(rng, 20000)) / 10.0,
                    static_cast<double>(30000 + uniform_index(rng, 40000)) / 10.0);
      ubu.log_text += mem;

      char stamp[32];
      std::snprintf(stamp, sizeof stamp, "%02d/%02d/%04d %d:%02d", d.month, d.day, d.year, d.hour, d.minute);
      droid.log_text += std::string("[") + ah + "] " + stamp + "\n";
      droid.log_text += "400%cpu  " + std::to_string(10 + uniform_index(rng, 150)) + "%user   0%nice  " +
                        std::to_string(5 + uniform_index(rng, 60)) + "%sys " + std::to_string(150 + uniform_index(rng, 230)) +
                        "%idle\n";
      droid.log_text += "Mem: 3809280K total, " + std::to_string(2000000 + uniform_index(rng, 1500000)) + "K used, " +
                        std::to_string(100000 + uniform_index(rng, 600000)) + "K free\n";
    }
  }
  sc.sources = {mac, ubu, droid};
  return sc;
}

// ---------------------------------------------------------------------------
// Wide tables: a 459-column indicator table and an 11-column companion,
// 470 columns in total.

inline Scenario wide_table_scenario(std::uint64_t seed = 13, std::size_t rows = 12) {
  Scenario sc;
  sc.name = "wide";
  Rng rng = derived_rng(seed, 0x77696465);
  SourceData harvard, khn;
  harvard.desc.source_id = "harvard";
  harvard.desc.key_columns = {"fips"};
  khn.desc.source_id = "khn";
  khn.desc.key_columns = {"fips"};
  harvard.table.header = {"fips"};
  for (int i = 0; i < 458; ++i) {
    char b[24];
    std::snprintf(b, sizeof b, "indicator_%03d", i);
    harvard.table.header.push_back(b);
  }
  khn.table.header = {"fips"};
  for (int i = 0; i < 10; ++i) khn.table.header.push_back("khn_metric_" + std::to_string(i));
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string fips = std::to_string(4001 + 2 * r);
    std::vector<std::string> hrow{fips}, krow{fips};
    for (std::size_t c = 1; c < harvard.table.header.size(); ++c) hrow.push_back(std::to_string(uniform_index(rng, 10000)));
    for (std::size_t c = 1; c < khn.table.header.size(); ++c) krow.push_back(std::to_string(uniform_index(rng, 500)));
    harvard.table.rows.push_back(std::move(hrow));
    khn.table.rows.push_back(std::move(krow));
    if (r < rows * 2 / 3) sc.train_keys.insert(fips);
  }
  TargetSchema t;
  t.attributes = {"fips"};
  t.key_attributes = {"fips"};
  SourceMapping hm, km;
  hm.descriptor = harvard.desc;
  km.descriptor = khn.desc;
  hm.key_map = {{"fips", 0, {}, "", false}};
  km.key_map = {{"fips", 0, {}, "", false}};
  for (std::size_t c = 1; c < harvard.table.header.size(); ++c) {
    const auto& a = harvard.table.header[c];
    if (c <= 8) {
      t.attributes.push_back(a);
      hm.attr_map[a] = a;
    } else {
      hm.attr_map[a] = std::string(kDiscard);
    }
  }
  for (std::size_t c = 1; c < khn.table.header.size(); ++c) {
    const auto& a = khn.table.header[c];
    t.attributes.push_back(a);
    km.attr_map[a] = a;
  }
  sc.spec.target = t;
  sc.spec.sources = {hm, km};
  sc.sources = {harvard, khn};
  return sc;
}

}  // namespace supercell::fixtures
