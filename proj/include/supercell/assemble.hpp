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

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "supercell/canonicalize.hpp"
#include "supercell/core.hpp"
#include "supercell/csv.hpp"
#include "supercell/decimal.hpp"
#include "supercell/error.hpp"

namespace supercell {

struct CellState {
  AggMode mode = AggMode::Replace;
  std::string value;  // Replace / Discard / Concat
  Decimal acc;        // Sum / Avg / Min / Max
  std::int64_t count = 0;

  std::string finalized() const {
    switch (mode) {
      case AggMode::Sum:
      case AggMode::Min:
      case AggMode::Max: return acc.to_string();
      case AggMode::Avg: return acc.divided_by(count, 6);
      case AggMode::Count: return std::to_string(count);
      default: return value;
    }
  }
};

struct AssemblyReport {
  double build_ms = 0;
  double transform_ms = 0;
  double write_ms = 0;
  std::size_t cells_written = 0;
  std::size_t cells_skipped = 0;
};

inline void to_json(nlohmann::json& j, const AssemblyReport& r) {
  j = nlohmann::json{{"build_ms", r.build_ms},
                     {"transform_ms", r.transform_ms},
                     {"write_ms", r.write_ms},
                     {"cells_written", r.cells_written},
                     {"cells_skipped", r.cells_skipped}};
}

inline void from_json(const nlohmann::json& j, AssemblyReport& r) {
  r.build_ms = j.at("build_ms").get<double>();
  r.transform_ms = j.at("transform_ms").get<double>();
  r.write_ms = j.at("write_ms").get<double>();
  r.cells_written = j.at("cells_written").get<std::size_t>();
  r.cells_skipped = j.at("cells_skipped").get<std::size_t>();
}

using CellKey = std::pair<std::vector<std::string>, std::string>;

// Keyed accumulation of target cells. Rows are ordered lexicographically by
// key tuple; each cell keeps the aggregation mode of its first write.
class TargetTable {
 public:
  using Row = std::vector<std::optional<CellState>>;

  struct Stats {
    std::size_t cells_written = 0;
    std::size_t cells_skipped = 0;
    std::size_t numeric_failures = 0;
    std::size_t discarded_cells = 0;
  };

  TargetTable() = default;
  explicit TargetTable(TargetSchema schema) : schema_(std::move(schema)) {
    schema_.validate();
    value_attrs_ = schema_.value_attributes();
    for (std::size_t i = 0; i < value_attrs_.size(); ++i) attr_index_[value_attrs_[i]] = i;
  }

  const TargetSchema& schema() const { return schema_; }
  const std::map<std::vector<std::string>, Row>& rows() const { return rows_; }
  const std::vector<std::string>& value_attributes() const { return value_attrs_; }
  const Stats& stats() const { return stats_; }
  double build_ms() const { return build_ms_; }
  void add_build_ms(double ms) { build_ms_ += ms; }

  // Writes one super cell at a resolved position (no COPY markers).
  void apply(const SuperCell& cell, const TargetPosition& pos) {
    if (pos.is_discard()) {
      stats_.discarded_cells += cell.width();
      return;
    }
    if (pos.keys.size() != schema_.q())
      throw Error(ErrorCode::InvariantViolation, "position key arity differs from target schema");
    if (pos.attributes.size() != cell.width())
      throw Error(ErrorCode::InvariantViolation, "position width differs from super cell");
    bool wildcard = false;
    for (const auto& k : pos.keys) {
      if (k.kind == KeyLabel::Kind::Copy)
        throw Error(ErrorCode::InvariantViolation, "COPY marker reached the assembler unresolved");
      if (k.kind == KeyLabel::Kind::Null) {
        stats_.cells_skipped += cell.width();
        return;
      }
      wildcard |= k.kind == KeyLabel::Kind::Wildcard;
    }
    if (!wildcard) {
      std::vector<std::string> key;
      for (const auto& k : pos.keys) key.push_back(k.value);
      auto [it, inserted] = rows_.try_emplace(std::move(key), Row(value_attrs_.size()));
      write_row(it->second, cell, pos);
      return;
    }
    // Broadcast to existing rows that agree on the non-wildcard components.
    for (auto& [key, row] : rows_) {
      bool match = true;
      for (std::size_t l = 0; l < pos.keys.size() && match; ++l)
        if (pos.keys[l].kind == KeyLabel::Kind::Value && pos.keys[l].value != key[l]) match = false;
      if (match) write_row(row, cell, pos);
    }
  }

  std::vector<std::string> column_order() const { return schema_.column_order(); }

  Table to_table() const {
    Table t;
    t.header = column_order();
    for (const auto& [key, row] : rows_) {
      std::vector<std::string> r = key;
      for (const auto& c : row) r.push_back(c ? c->finalized() : std::string());
      t.rows.push_back(std::move(r));
    }
    return t;
  }

  std::string render() const { return render_csv(to_table()); }

  std::map<CellKey, std::string> cells() const {
    std::map<CellKey, std::string> out;
    for (const auto& [key, row] : rows_)
      for (std::size_t i = 0; i < row.size(); ++i)
        if (row[i]) out.emplace(CellKey{key, value_attrs_[i]}, row[i]->finalized());
    return out;
  }

 private:
  void write_row(Row& row, const SuperCell& cell, const TargetPosition& pos) {
    for (std::size_t y = 0; y < pos.attributes.size(); ++y) {
      const auto& attr = pos.attributes[y];
      if (!attr) {
        ++stats_.cells_skipped;
        continue;
      }
      auto it = attr_index_.find(*attr);
      if (it == attr_index_.end()) {
        // key attributes are carried by the row key itself
        if (!schema_.is_key(*attr)) throw Error(ErrorCode::InvariantViolation, "unknown target attribute " + *attr);
        ++stats_.cells_skipped;
        continue;
      }
      merge(row[it->second], pos.agg_mode, cell.values[y], *attr);
    }
  }

  void merge(std::optional<CellState>& slot, AggMode mode, const std::string& value, const std::string& attr) {
    std::optional<Decimal> number;
    if (is_numeric_mode(mode)) {
      number = parse_number(value);
      if (!number) {
        ++stats_.numeric_failures;
        ++stats_.cells_skipped;
        return;
      }
    }
    if (!slot) {
      CellState s;
      s.mode = mode;
      switch (mode) {
        case AggMode::Sum:
        case AggMode::Min:
        case AggMode::Max: s.acc = *number; break;
        case AggMode::Avg: s.acc = *number; s.count = 1; break;
        case AggMode::Count: s.count = 1; break;
        default: s.value = value;
      }
      slot = std::move(s);
      ++stats_.cells_written;
      return;
    }
    CellState& s = *slot;
    if (s.mode != mode)
      throw Error(ErrorCode::AggModeConflict, "cell '" + attr + "' written with " + std::string(to_string(s.mode)) +
                                                  " then " + std::string(to_string(mode)));
    switch (mode) {
      case AggMode::Sum: s.acc += *number; break;
      case AggMode::Avg: s.acc += *number; ++s.count; break;
      case AggMode::Min: if (*number < s.acc) s.acc = *number; break;
      case AggMode::Max: if (s.acc < *number) s.acc = *number; break;
      case AggMode::Count: ++s.count; break;
      case AggMode::Replace: s.value = value; break;
      case AggMode::Discard: break;
      case AggMode::Concat: s.value += "|" + value; break;
    }
    ++stats_.cells_written;
  }

  TargetSchema schema_;
  std::vector<std::string> value_attrs_;
  std::map<std::string, std::size_t> attr_index_;
  std::map<std::vector<std::string>, Row> rows_;
  Stats stats_;
  double build_ms_ = 0;
};

using Clock = std::chrono::steady_clock;

inline double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// Applies non-wildcard positions first, then wildcard ones, so broadcasts
// see every row the "N" side of a 1-N join defines. Conflicting writes are
// counted and skipped rather than aborting the whole integration.
struct AssembleOutcome {
  std::size_t conflicts = 0;
};

inline AssembleOutcome assemble_into(TargetTable& table, const std::vector<SuperCell>& cells,
                                     const std::vector<TargetPosition>& positions) {
  if (cells.size() != positions.size())
    throw Error(ErrorCode::InvariantViolation, "cells and positions differ in count");
  AssembleOutcome out;
  const auto start = Clock::now();
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (positions[i].has_wildcard() != (pass == 1)) continue;
      try {
        table.apply(cells[i], positions[i]);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::AggModeConflict) throw;
        ++out.conflicts;
      }
    }
  }
  table.add_build_ms(ms_since(start));
  return out;
}

inline AssemblyReport finalize_and_write(const TargetTable& table, const std::string& path) {
  AssemblyReport report;
  report.build_ms = table.build_ms();
  auto t0 = Clock::now();
  const std::string csv = table.render();
  report.transform_ms = ms_since(t0);
  auto t1 = Clock::now();
  write_file(path, csv);
  report.write_ms = ms_since(t1);
  report.cells_written = table.stats().cells_written;
  report.cells_skipped = table.stats().cells_skipped;
  return report;
}

struct CellDiff {
  std::vector<std::string> keys;
  std::string attribute;
  std::string expected;
  std::string actual;
};

inline std::vector<CellDiff> diff_tables(const TargetTable& expected, const TargetTable& actual) {
  const auto a = expected.cells();
  const auto b = actual.cells();
  std::vector<CellDiff> out;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() || ib != b.end()) {
    if (ib == b.end() || (ia != a.end() && ia->first < ib->first)) {
      out.push_back({ia->first.first, ia->first.second, ia->second, ""});
      ++ia;
    } else if (ia == a.end() || ib->first < ia->first) {
      out.push_back({ib->first.first, ib->first.second, "", ib->second});
      ++ib;
    } else {
      if (ia->second != ib->second) out.push_back({ia->first.first, ia->first.second, ia->second, ib->second});
      ++ia;
      ++ib;
    }
  }
  return out;
}

// Fraction of cells (over the union of non-empty cells) that are identical.
inline double cell_agreement(const TargetTable& expected, const TargetTable& actual) {
  const auto a = expected.cells();
  const auto b = actual.cells();
  std::size_t total = a.size();
  for (const auto& [k, v] : b)
    if (!a.count(k)) ++total;
  if (total == 0) return 1.0;
  std::size_t same = 0;
  for (const auto& [k, v] : a) {
    auto it = b.find(k);
    if (it != b.end() && it->second == v) ++same;
  }
  return static_cast<double>(same) / static_cast<double>(total);
}

}  // namespace supercell
