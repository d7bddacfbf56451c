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

#include <array>
#include <cstdio>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "supercell/decimal.hpp"
#include "supercell/error.hpp"
#include "supercell/text.hpp"

namespace supercell {

struct CanonKind {
  enum class Kind { None, Date, Number, Dictionary };
  Kind kind = Kind::None;
  std::string dictionary;  // only for Kind::Dictionary

  static CanonKind none() { return {}; }
  static CanonKind date() { return {Kind::Date, {}}; }
  static CanonKind number() { return {Kind::Number, {}}; }
  static CanonKind dict(std::string name) { return {Kind::Dictionary, std::move(name)}; }

  std::string to_string() const {
    switch (kind) {
      case Kind::None: return "none";
      case Kind::Date: return "date";
      case Kind::Number: return "number";
      case Kind::Dictionary: return "dictionary:" + dictionary;
    }
    return "none";
  }

  static CanonKind parse(std::string_view s) {
    if (s == "none") return none();
    if (s == "date") return date();
    if (s == "number") return number();
    constexpr std::string_view prefix = "dictionary:";
    if (s.substr(0, prefix.size()) == prefix && s.size() > prefix.size())
      return dict(std::string(s.substr(prefix.size())));
    throw Error(ErrorCode::Config, "unknown canonicalizer '" + std::string(s) + "'");
  }

  friend bool operator==(const CanonKind&, const CanonKind&) = default;
};

// Groups of interchangeable surface forms. The first member of each group
// is its canonical head. Lookups are case-insensitive.
class SynonymDictionary {
 public:
  SynonymDictionary() = default;
  SynonymDictionary(std::string name, std::vector<std::vector<std::string>> groups) : name_(std::move(name)) {
    for (auto& group : groups) {
      std::vector<std::string> g;
      for (auto& term : group) {
        std::string t = lower_trim(term);
        if (!t.empty() && std::find(g.begin(), g.end(), t) == g.end()) g.push_back(std::move(t));
      }
      if (g.empty()) continue;
      for (const auto& t : g) index_.try_emplace(t, groups_.size());
      groups_.push_back(std::move(g));
    }
  }

  static SynonymDictionary from_json(std::string name, const nlohmann::json& j) {
    if (!j.is_array()) throw Error(ErrorCode::Config, "dictionary '" + name + "' must be an array of groups");
    std::vector<std::vector<std::string>> groups;
    for (const auto& g : j) {
      if (!g.is_array()) throw Error(ErrorCode::Config, "dictionary '" + name + "' group must be an array");
      groups.push_back(g.get<std::vector<std::string>>());
    }
    return SynonymDictionary(std::move(name), std::move(groups));
  }

  const std::string& name() const { return name_; }
  const std::vector<std::vector<std::string>>& groups() const { return groups_; }

  const std::vector<std::string>* group_of(std::string_view term) const {
    auto it = index_.find(lower_trim(term));
    return it == index_.end() ? nullptr : &groups_[it->second];
  }

  std::optional<std::string> head(std::string_view term) const {
    const auto* g = group_of(term);
    if (!g) return std::nullopt;
    return g->front();
  }

 private:
  std::string name_;
  std::vector<std::vector<std::string>> groups_;
  std::unordered_map<std::string, std::size_t> index_;
};

class DictionarySet {
 public:
  void add(SynonymDictionary d) {
    std::string name = d.name();
    dicts_.insert_or_assign(std::move(name), std::move(d));
  }

  bool contains(const std::string& name) const { return dicts_.count(name) != 0; }

  const SynonymDictionary& get(const std::string& name) const {
    auto it = dicts_.find(name);
    if (it == dicts_.end()) throw Error(ErrorCode::Config, "synonym dictionary '" + name + "' is not loaded");
    return it->second;
  }

  // Head term from the first dictionary (by name) that knows `term`.
  std::optional<std::string> lookup_any(std::string_view term) const {
    for (const auto& [name, d] : dicts_)
      if (auto h = d.head(term)) return h;
    return std::nullopt;
  }

  const std::vector<std::string>* group_any(std::string_view term) const {
    for (const auto& [name, d] : dicts_)
      if (const auto* g = d.group_of(term)) return g;
    return nullptr;
  }

  const std::map<std::string, SynonymDictionary>& all() const { return dicts_; }

 private:
  std::map<std::string, SynonymDictionary> dicts_;
};

// Loads a dictionary JSON file; the dictionary is named after the file stem.
inline SynonymDictionary load_dictionary(const std::string& path) {
  std::string stem = path;
  if (auto slash = stem.find_last_of('/'); slash != std::string::npos) stem = stem.substr(slash + 1);
  if (auto dot = stem.find_last_of('.'); dot != std::string::npos) stem = stem.substr(0, dot);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Config, "dictionary " + path + ": " + e.what());
  }
  return SynonymDictionary::from_json(stem, j);
}

struct CanonStats {
  std::size_t unparseable_dates = 0;
  std::size_t unparseable_numbers = 0;
};

// ---------------------------------------------------------------------------
// Dates

enum class DateStyle { Iso, Slash, DashMdy, Compact, MonthName };

struct DateTime {
  int year = 0, month = 0, day = 0;
  bool has_time = false;
  int hour = 0, minute = 0, second = 0;
  DateStyle style = DateStyle::Iso;
};

namespace detail {

inline constexpr std::array<std::string_view, 12> kMonthAbbrev = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                                                   "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};

inline int days_in_month(int y, int m) {
  static constexpr int days[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m == 2 && ((y % 4 == 0 && y % 100 != 0) || y % 400 == 0)) return 29;
  return days[m - 1];
}

inline bool valid(const DateTime& d) {
  if (d.year < 1000 || d.year > 9999 || d.month < 1 || d.month > 12) return false;
  if (d.day < 1 || d.day > days_in_month(d.year, d.month)) return false;
  if (d.has_time && (d.hour > 23 || d.minute > 59 || d.second > 59)) return false;
  return true;
}

inline int month_from_name(std::string_view name) {
  std::string n = to_lower(name);
  static constexpr std::array<std::string_view, 12> full = {"january", "february", "march",     "april",
                                                            "may",     "june",     "july",      "august",
                                                            "september", "october", "november", "december"};
  for (int i = 0; i < 12; ++i) {
    if (n == full[static_cast<std::size_t>(i)] || n == to_lower(kMonthAbbrev[static_cast<std::size_t>(i)]))
      return i + 1;
  }
  if (n == "sept") return 9;
  return 0;
}

inline void set_time(DateTime& d, const std::smatch& m, std::size_t h, std::size_t mi, std::size_t s) {
  if (!m[h].matched) return;
  d.has_time = true;
  d.hour = std::stoi(m[h].str());
  d.minute = std::stoi(m[mi].str());
  d.second = m[s].matched ? std::stoi(m[s].str()) : 0;
}

}  // namespace detail

// Recognized layouts: YYYY-MM-DD[ HH:MM[:SS]], M/D/YYYY[ H:MM[:SS]],
// MM-DD-YYYY, MMDDYYYY and "Mon D, YYYY".
inline std::optional<DateTime> parse_date(std::string_view raw) {
  static const std::regex iso(R"(^(\d{4})-(\d{1,2})-(\d{1,2})(?:[ T](\d{1,2}):(\d{2})(?::(\d{2}))?)?$)");
  static const std::regex slash(R"(^(\d{1,2})/(\d{1,2})/(\d{4})(?:\s+(\d{1,2}):(\d{2})(?::(\d{2}))?)?$)");
  static const std::regex dash(R"(^(\d{1,2})-(\d{1,2})-(\d{4})$)");
  static const std::regex compact(R"(^(\d{2})(\d{2})(\d{4})$)");
  static const std::regex named(R"(^([A-Za-z]{3,9})\.?\s+(\d{1,2}),?\s+(\d{4})$)");
  const std::string s = trim(raw);
  if (s.empty() || s.size() > 32) return std::nullopt;
  std::smatch m;
  DateTime d;
  if (std::regex_match(s, m, iso)) {
    d.year = std::stoi(m[1].str());
    d.month = std::stoi(m[2].str());
    d.day = std::stoi(m[3].str());
    detail::set_time(d, m, 4, 5, 6);
    d.style = DateStyle::Iso;
  } else if (std::regex_match(s, m, slash)) {
    d.month = std::stoi(m[1].str());
    d.day = std::stoi(m[2].str());
    d.year = std::stoi(m[3].str());
    detail::set_time(d, m, 4, 5, 6);
    d.style = DateStyle::Slash;
  } else if (std::regex_match(s, m, dash)) {
    d.month = std::stoi(m[1].str());
    d.day = std::stoi(m[2].str());
    d.year = std::stoi(m[3].str());
    d.style = DateStyle::DashMdy;
  } else if (std::regex_match(s, m, compact)) {
    d.month = std::stoi(m[1].str());
    d.day = std::stoi(m[2].str());
    d.year = std::stoi(m[3].str());
    if (d.year < 1900 || d.year > 2100) return std::nullopt;
    d.style = DateStyle::Compact;
  } else if (std::regex_match(s, m, named)) {
    d.month = detail::month_from_name(m[1].str());
    d.day = std::stoi(m[2].str());
    d.year = std::stoi(m[3].str());
    d.style = DateStyle::MonthName;
  } else {
    return std::nullopt;
  }
  if (!detail::valid(d)) return std::nullopt;
  return d;
}

inline std::string format_date(const DateTime& d, DateStyle style) {
  char buf[48];
  const bool time = d.has_time;
  switch (style) {
    case DateStyle::Iso:
      if (time)
        std::snprintf(buf, sizeof buf, "%04d-%02d-%02d %02d:%02d:%02d", d.year, d.month, d.day, d.hour, d.minute,
                      d.second);
      else
        std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", d.year, d.month, d.day);
      break;
    case DateStyle::Slash:
      if (time && d.second == 0)
        std::snprintf(buf, sizeof buf, "%d/%d/%04d %d:%02d", d.month, d.day, d.year, d.hour, d.minute);
      else if (time)
        std::snprintf(buf, sizeof buf, "%d/%d/%04d %d:%02d:%02d", d.month, d.day, d.year, d.hour, d.minute,
                      d.second);
      else
        std::snprintf(buf, sizeof buf, "%d/%d/%04d", d.month, d.day, d.year);
      break;
    case DateStyle::DashMdy:
      std::snprintf(buf, sizeof buf, "%02d-%02d-%04d", d.month, d.day, d.year);
      break;
    case DateStyle::Compact:
      std::snprintf(buf, sizeof buf, "%02d%02d%04d", d.month, d.day, d.year);
      break;
    case DateStyle::MonthName:
      std::snprintf(buf, sizeof buf, "%s %d, %04d", detail::kMonthAbbrev[static_cast<std::size_t>(d.month - 1)].data(),
                    d.day, d.year);
      break;
  }
  return buf;
}

// Styles that reproduce the full value (date-only styles drop the time).
inline std::vector<DateStyle> lossless_styles(const DateTime& d) {
  if (d.has_time) return {DateStyle::Iso, DateStyle::Slash};
  return {DateStyle::Iso, DateStyle::Slash, DateStyle::DashMdy, DateStyle::Compact, DateStyle::MonthName};
}

// ---------------------------------------------------------------------------
// Numbers

// Accepts thousands separators, a leading '+', and a trailing '%'.
inline std::optional<Decimal> parse_number(std::string_view raw) {
  std::string_view s = trim_view(raw);
  if (!s.empty() && s.back() == '%') s.remove_suffix(1);
  s = trim_view(s);
  std::string cleaned;
  cleaned.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == ',') {
      // grouping commas sit between digits
      if (i == 0 || i + 1 >= s.size() || !std::isdigit(static_cast<unsigned char>(s[i - 1])) ||
          !std::isdigit(static_cast<unsigned char>(s[i + 1])))
        return std::nullopt;
      continue;
    }
    cleaned += c;
  }
  if (!cleaned.empty() && cleaned.front() == '+') cleaned.erase(cleaned.begin());
  if (!cleaned.empty() && cleaned.front() == '+') return std::nullopt;
  return Decimal::parse(cleaned);
}

// ---------------------------------------------------------------------------

inline std::string canonicalize(std::string_view value, const CanonKind& kind, const DictionarySet* dicts = nullptr,
                                CanonStats* stats = nullptr) {
  switch (kind.kind) {
    case CanonKind::Kind::None:
      return lower_trim(value);
    case CanonKind::Kind::Date: {
      auto d = parse_date(value);
      if (!d) {
        if (stats) ++stats->unparseable_dates;
        return std::string(value);
      }
      return format_date(*d, DateStyle::Iso);
    }
    case CanonKind::Kind::Number: {
      auto n = parse_number(value);
      if (!n) {
        if (stats) ++stats->unparseable_numbers;
        return std::string(value);
      }
      return n->to_string();
    }
    case CanonKind::Kind::Dictionary: {
      if (!dicts) throw Error(ErrorCode::Config, "dictionary canonicalizer without loaded dictionaries");
      if (auto h = dicts->get(kind.dictionary).head(value)) return *h;
      return lower_trim(value);
    }
  }
  return std::string(value);
}

// Type-sniffing canonicalizer used where the column kind is unknown
// (resolving COPY keys and learned-path values): date, then number, then
// any loaded dictionary, else lower-cased.
inline std::string canonicalize_auto(std::string_view value, const DictionarySet* dicts = nullptr) {
  if (auto d = parse_date(value)) return format_date(*d, DateStyle::Iso);
  if (auto n = parse_number(value)) return n->to_string();
  if (dicts)
    if (auto h = dicts->lookup_any(value)) return *h;
  return lower_trim(value);
}

// Canonical surface form of a cell value as written to a target table:
// dates to ISO, numbers to plain decimals, anything else lower-cased.
inline std::string canonical_value(std::string_view value) {
  if (auto d = parse_date(value)) return format_date(*d, DateStyle::Iso);
  if (auto n = parse_number(value)) return n->to_string();
  return lower_trim(value);
}

// Ordering form for key components in feature sentences; dictionary-free
// so that rendering stays a pure function of the super cell.
inline std::string key_sort_form(std::string_view value) {
  if (auto d = parse_date(value)) return format_date(*d, DateStyle::Iso);
  return lower_trim(value);
}

}  // namespace supercell
