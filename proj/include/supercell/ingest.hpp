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

#include <map>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "supercell/canonicalize.hpp"
#include "supercell/core.hpp"
#include "supercell/csv.hpp"
#include "supercell/error.hpp"

namespace supercell {

enum class SourceFormat { Csv, PivotedCsv, LogLines };

inline std::string_view to_string(SourceFormat f) {
  switch (f) {
    case SourceFormat::Csv: return "csv";
    case SourceFormat::PivotedCsv: return "pivoted_csv";
    case SourceFormat::LogLines: return "log_lines";
  }
  return "csv";
}

inline SourceFormat parse_source_format(std::string_view s) {
  if (s == "csv") return SourceFormat::Csv;
  if (s == "pivoted_csv") return SourceFormat::PivotedCsv;
  if (s == "log_lines") return SourceFormat::LogLines;
  throw Error(ErrorCode::Config, "unknown source format '" + std::string(s) + "'");
}

struct PivotSpec {
  std::string axis_name;        // name of the dimension spread over headers
  std::string value_attr_name;  // attribute name given to the grid values
  friend bool operator==(const PivotSpec&, const PivotSpec&) = default;
};

// One line rule. Patterns are ECMAScript regexes that may use named groups
// written as (?<name>...). Key captures update the ambient keys; attribute
// captures emit one super cell per matching line.
struct LogRule {
  std::string pattern;
  std::vector<std::string> key_captures;
  std::vector<std::pair<std::string, std::string>> attr_value_captures;  // (attribute, capture)
  friend bool operator==(const LogRule&, const LogRule&) = default;
};

struct CompiledLogRule {
  std::regex regex;
  std::map<std::string, std::size_t> groups;
};

// Rewrites named groups into plain groups and records their indices.
inline CompiledLogRule compile_log_rule(const LogRule& rule) {
  CompiledLogRule out;
  std::string plain;
  std::size_t group = 0;
  const std::string& p = rule.pattern;
  bool in_class = false;
  for (std::size_t i = 0; i < p.size(); ++i) {
    char c = p[i];
    if (c == '\\' && i + 1 < p.size()) {
      plain += c;
      plain += p[++i];
      continue;
    }
    if (in_class) {
      if (c == ']') in_class = false;
      plain += c;
      continue;
    }
    if (c == '[') {
      in_class = true;
      plain += c;
      continue;
    }
    if (c == '(') {
      if (i + 1 < p.size() && p[i + 1] == '?') {
        std::size_t name_start = std::string::npos;
        if (i + 2 < p.size() && p[i + 2] == '<' && i + 3 < p.size() && p[i + 3] != '=' && p[i + 3] != '!')
          name_start = i + 3;
        else if (i + 3 < p.size() && p[i + 2] == 'P' && p[i + 3] == '<')
          name_start = i + 4;
        if (name_start != std::string::npos) {
          std::size_t close = p.find('>', name_start);
          if (close == std::string::npos) throw Error(ErrorCode::Config, "unterminated group name in " + p);
          out.groups[p.substr(name_start, close - name_start)] = ++group;
          plain += '(';
          i = close;
          continue;
        }
        plain += c;  // non-capturing or lookahead
        continue;
      }
      ++group;
      plain += c;
      continue;
    }
    plain += c;
  }
  try {
    out.regex = std::regex(plain, std::regex::ECMAScript);
  } catch (const std::regex_error& e) {
    throw Error(ErrorCode::Config, "invalid log rule pattern '" + p + "': " + e.what());
  }
  for (const auto& k : rule.key_captures)
    if (!out.groups.count(k)) throw Error(ErrorCode::Config, "log rule lacks key capture '" + k + "'");
  for (const auto& [attr, cap] : rule.attr_value_captures)
    if (!out.groups.count(cap)) throw Error(ErrorCode::Config, "log rule lacks capture '" + cap + "'");
  return out;
}

struct SourceDescriptor {
  std::string source_id;
  SourceFormat format = SourceFormat::Csv;
  std::vector<std::string> key_columns;
  std::vector<std::vector<std::string>> supercell_groups;
  std::optional<PivotSpec> pivot;
  std::vector<LogRule> log_rules;
  std::map<std::string, CanonKind> canonicalizers;

  // Number of key components in cells read from this source.
  std::size_t key_arity() const { return key_columns.size() + (format == SourceFormat::PivotedCsv ? 1 : 0); }

  CanonKind canon_for(const std::string& column) const {
    auto it = canonicalizers.find(column);
    return it == canonicalizers.end() ? CanonKind::none() : it->second;
  }

  void validate() const {
    if (source_id.empty()) throw Error(ErrorCode::Config, "source descriptor without source_id");
    std::set<std::string> keys(key_columns.begin(), key_columns.end());
    if (keys.size() != key_columns.size()) throw Error(ErrorCode::Config, source_id + ": duplicate key columns");
    std::set<std::string> grouped;
    for (const auto& g : supercell_groups) {
      if (g.empty()) throw Error(ErrorCode::Config, source_id + ": empty super cell group");
      for (const auto& c : g) {
        if (keys.count(c)) throw Error(ErrorCode::Config, source_id + ": key column " + c + " inside a group");
        if (!grouped.insert(c).second) throw Error(ErrorCode::Config, source_id + ": column " + c + " in two groups");
      }
    }
    if (format == SourceFormat::PivotedCsv && !pivot)
      throw Error(ErrorCode::Config, source_id + ": pivoted source needs a pivot block");
    if (format == SourceFormat::LogLines && log_rules.empty())
      throw Error(ErrorCode::Config, source_id + ": log source needs rules");
    for (const auto& [col, kind] : canonicalizers)
      if (kind.kind == CanonKind::Kind::Dictionary && kind.dictionary.empty())
        throw Error(ErrorCode::Config, source_id + ": dictionary canonicalizer without name");
  }

  friend bool operator==(const SourceDescriptor&, const SourceDescriptor&) = default;
};

inline void to_json(nlohmann::json& j, const SourceDescriptor& d) {
  j = nlohmann::json{{"source_id", d.source_id},
                     {"format", std::string(to_string(d.format))},
                     {"key_columns", d.key_columns},
                     {"supercell_groups", d.supercell_groups}};
  if (d.pivot) j["pivot"] = {{"pivot_axis_name", d.pivot->axis_name}, {"value_attr_name", d.pivot->value_attr_name}};
  if (!d.log_rules.empty()) {
    nlohmann::json rules = nlohmann::json::array();
    for (const auto& r : d.log_rules) {
      nlohmann::json attrs = nlohmann::json::array();
      for (const auto& [a, c] : r.attr_value_captures) attrs.push_back({{"attribute", a}, {"capture", c}});
      rules.push_back({{"pattern", r.pattern}, {"key_captures", r.key_captures}, {"attr_value_captures", attrs}});
    }
    j["log_rules"] = rules;
  }
  nlohmann::json canon = nlohmann::json::object();
  for (const auto& [c, k] : d.canonicalizers) canon[c] = k.to_string();
  j["canonicalizers"] = canon;
}

inline void from_json(const nlohmann::json& j, SourceDescriptor& d) {
  d = SourceDescriptor{};
  d.source_id = j.at("source_id").get<std::string>();
  d.format = parse_source_format(j.value("format", std::string("csv")));
  d.key_columns = j.value("key_columns", std::vector<std::string>{});
  d.supercell_groups = j.value("supercell_groups", std::vector<std::vector<std::string>>{});
  if (j.contains("pivot")) {
    const auto& p = j.at("pivot");
    d.pivot = PivotSpec{p.at("pivot_axis_name").get<std::string>(), p.at("value_attr_name").get<std::string>()};
  }
  if (j.contains("log_rules")) {
    for (const auto& r : j.at("log_rules")) {
      LogRule rule;
      rule.pattern = r.at("pattern").get<std::string>();
      rule.key_captures = r.value("key_captures", std::vector<std::string>{});
      for (const auto& a : r.value("attr_value_captures", nlohmann::json::array()))
        rule.attr_value_captures.emplace_back(a.at("attribute").get<std::string>(), a.at("capture").get<std::string>());
      d.log_rules.push_back(std::move(rule));
    }
  }
  if (j.contains("canonicalizers"))
    for (const auto& [c, k] : j.at("canonicalizers").items()) d.canonicalizers[c] = CanonKind::parse(k.get<std::string>());
}

struct IngestStats {
  std::size_t rows = 0;
  std::size_t rows_skipped = 0;      // a key cell was missing
  std::size_t cells_skipped = 0;     // missing value cells
  std::size_t unmatched_lines = 0;   // log lines no rule matched
  CanonStats canon;
};

// Empty, "NA" and "null" (any case) denote a missing cell.
inline bool is_missing(std::string_view v) {
  std::string l = lower_trim(v);
  return l.empty() || l == "na" || l == "null";
}

namespace detail {

inline std::size_t require_column(const Table& t, const std::string& name, const std::string& source) {
  auto idx = t.column_index(name);
  if (idx < 0) throw Error(ErrorCode::MissingKeyColumn, source + ": column '" + name + "' not in header");
  return static_cast<std::size_t>(idx);
}

}  // namespace detail

// Splits a tabular source into super cells: one per (row, group), output
// ordered by row then group. Declared groups come first; every remaining
// non-key column becomes a singleton group, ordered by column name so that
// the result does not depend on column order in the file.
inline std::vector<SuperCell> decompose(const Table& table, const SourceDescriptor& desc,
                                        const DictionarySet* dicts = nullptr, IngestStats* stats = nullptr) {
  desc.validate();
  if (desc.format == SourceFormat::LogLines)
    throw Error(ErrorCode::InvalidDescriptor, desc.source_id + ": log source passed to decompose");
  if (table.header.empty()) throw Error(ErrorCode::EmptyInput, desc.source_id + ": no header");
  if (table.rows.empty()) throw Error(ErrorCode::EmptyInput, desc.source_id + ": no data rows");
  IngestStats local;
  IngestStats& st = stats ? *stats : local;

  std::vector<std::size_t> key_idx;
  for (const auto& k : desc.key_columns) key_idx.push_back(detail::require_column(table, k, desc.source_id));
  std::set<std::size_t> key_set(key_idx.begin(), key_idx.end());

  struct Group {
    std::vector<std::size_t> columns;
  };
  std::vector<Group> groups;
  std::vector<std::pair<std::string, std::size_t>> pivot_columns;  // (canonical axis value, column)
  if (desc.format == SourceFormat::Csv) {
    std::set<std::size_t> grouped;
    for (const auto& g : desc.supercell_groups) {
      Group grp;
      for (const auto& c : g) {
        auto idx = table.column_index(c);
        if (idx < 0) continue;  // group columns may be absent after schema changes
        grp.columns.push_back(static_cast<std::size_t>(idx));
        grouped.insert(static_cast<std::size_t>(idx));
      }
      if (!grp.columns.empty()) groups.push_back(std::move(grp));
    }
    std::vector<std::pair<std::string, std::size_t>> singles;
    for (std::size_t c = 0; c < table.header.size(); ++c)
      if (!key_set.count(c) && !grouped.count(c)) singles.emplace_back(lower_trim(table.header[c]), c);
    std::stable_sort(singles.begin(), singles.end());
    for (const auto& [name, c] : singles) groups.push_back(Group{{c}});
  } else {
    const CanonKind axis_kind = desc.canon_for(desc.pivot->axis_name);
    for (std::size_t c = 0; c < table.header.size(); ++c)
      if (!key_set.count(c)) pivot_columns.emplace_back(canonicalize(table.header[c], axis_kind, dicts, &st.canon), c);
    std::stable_sort(pivot_columns.begin(), pivot_columns.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
  }

  std::vector<SuperCell> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row.size() != table.header.size())
      throw Error(ErrorCode::RaggedRow, desc.source_id + ": row " + std::to_string(r + 1) + " has " +
                                            std::to_string(row.size()) + " fields, header has " +
                                            std::to_string(table.header.size()));
    ++st.rows;
    std::vector<std::string> keys;
    bool missing_key = false;
    for (std::size_t i = 0; i < key_idx.size(); ++i) {
      const auto& raw = row[key_idx[i]];
      if (is_missing(raw)) {
        missing_key = true;
        break;
      }
      keys.push_back(canonicalize(raw, desc.canon_for(desc.key_columns[i]), dicts, &st.canon));
    }
    if (missing_key) {
      ++st.rows_skipped;
      continue;
    }
    if (desc.format == SourceFormat::Csv) {
      for (const auto& g : groups) {
        SuperCell cell{desc.source_id, keys, {}, {}, r};
        for (std::size_t c : g.columns) {
          if (is_missing(row[c])) {
            ++st.cells_skipped;
            continue;
          }
          cell.attributes.push_back(lower_trim(table.header[c]));
          cell.values.push_back(canonicalize(row[c], desc.canon_for(table.header[c]), dicts, &st.canon));
        }
        if (!cell.values.empty()) out.push_back(std::move(cell));
      }
    } else {
      const auto& value_attr = desc.pivot->value_attr_name;
      for (const auto& [axis_value, c] : pivot_columns) {
        if (is_missing(row[c])) {
          ++st.cells_skipped;
          continue;
        }
        SuperCell cell{desc.source_id, keys, {lower_trim(value_attr)},
                       {canonicalize(row[c], desc.canon_for(value_attr), dicts, &st.canon)}, r};
        cell.keys.push_back(axis_value);
        out.push_back(std::move(cell));
      }
    }
  }
  return out;
}

// Reads line-oriented logs. The first rule whose pattern matches a line
// wins; key captures persist as ambient keys for later lines.
inline std::vector<SuperCell> decompose_log(std::string_view text, const SourceDescriptor& desc,
                                            const DictionarySet* dicts = nullptr, IngestStats* stats = nullptr) {
  desc.validate();
  if (desc.format != SourceFormat::LogLines)
    throw Error(ErrorCode::InvalidDescriptor, desc.source_id + ": decompose_log needs a log source");
  IngestStats local;
  IngestStats& st = stats ? *stats : local;
  std::vector<CompiledLogRule> rules;
  for (const auto& r : desc.log_rules) {
    for (const auto& k : r.key_captures)
      if (std::find(desc.key_columns.begin(), desc.key_columns.end(), k) == desc.key_columns.end())
        throw Error(ErrorCode::Config, desc.source_id + ": key capture '" + k + "' is not a key column");
    rules.push_back(compile_log_rule(r));
  }
  std::vector<std::optional<std::string>> ambient(desc.key_columns.size());
  std::vector<SuperCell> out;
  const auto lines = split_lines(text);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const std::string& line = lines[ln];
    if (trim_view(line).empty()) continue;
    ++st.rows;
    bool matched = false;
    for (std::size_t ri = 0; ri < rules.size() && !matched; ++ri) {
      std::smatch m;
      if (!std::regex_search(line, m, rules[ri].regex)) continue;
      matched = true;
      const auto& rule = desc.log_rules[ri];
      for (const auto& k : rule.key_captures) {
        auto pos = static_cast<std::size_t>(
            std::find(desc.key_columns.begin(), desc.key_columns.end(), k) - desc.key_columns.begin());
        const auto& sub = m[static_cast<int>(rules[ri].groups.at(k))];
        if (sub.matched && !is_missing(sub.str()))
          ambient[pos] = canonicalize(sub.str(), desc.canon_for(k), dicts, &st.canon);
      }
      if (rule.attr_value_captures.empty()) continue;
      SuperCell cell{desc.source_id, {}, {}, {}, ln};
      bool keys_bound = true;
      for (const auto& a : ambient) {
        if (!a) {
          keys_bound = false;
          break;
        }
        cell.keys.push_back(*a);
      }
      if (!keys_bound) {
        ++st.rows_skipped;
        continue;
      }
      for (const auto& [attr, cap] : rule.attr_value_captures) {
        const auto& sub = m[static_cast<int>(rules[ri].groups.at(cap))];
        if (!sub.matched || is_missing(sub.str())) {
          ++st.cells_skipped;
          continue;
        }
        cell.attributes.push_back(lower_trim(attr));
        cell.values.push_back(canonicalize(sub.str(), desc.canon_for(attr), dicts, &st.canon));
      }
      if (!cell.values.empty()) out.push_back(std::move(cell));
    }
    if (!matched) ++st.unmatched_lines;
  }
  if (out.empty()) throw Error(ErrorCode::NoRuleMatchedAnything, desc.source_id + ": no super cells in log input");
  return out;
}

// Applies a descriptor's canonicalizers column by column (used by the
// column-matching baseline, which works on whole columns).
inline Table canonicalize_table(const Table& t, const SourceDescriptor& desc, const DictionarySet* dicts = nullptr) {
  Table out;
  out.header = t.header;
  out.rows.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    std::vector<std::string> r;
    for (std::size_t c = 0; c < row.size(); ++c) {
      const std::string& name = c < t.header.size() ? t.header[c] : std::string();
      r.push_back(is_missing(row[c]) ? std::string() : canonicalize(row[c], desc.canon_for(name), dicts));
    }
    out.rows.push_back(std::move(r));
  }
  return out;
}

}  // namespace supercell
