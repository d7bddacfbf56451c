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

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "supercell/assemble.hpp"
#include "supercell/canonicalize.hpp"
#include "supercell/csv.hpp"
#include "supercell/error.hpp"
#include "supercell/ingest.hpp"
#include "supercell/text.hpp"

namespace supercell {

struct MinHashSignature {
  std::size_t L = 0;
  std::uint64_t seed = 0;
  std::vector<std::uint32_t> values;
  friend bool operator==(const MinHashSignature&, const MinHashSignature&) = default;
};

// 3-character shingles; values shorter than that form a single shingle.
inline std::vector<std::string> shingles(std::string_view value, std::size_t k = 3) {
  std::vector<std::string> out;
  if (value.empty()) return out;
  if (value.size() <= k) {
    out.emplace_back(value);
    return out;
  }
  for (std::size_t i = 0; i + k <= value.size(); ++i) out.emplace_back(value.substr(i, k));
  return out;
}

inline std::uint64_t minhash_seed(std::uint64_t seed, std::size_t j) { return splitmix64(seed + j); }

inline std::uint32_t minhash_value(std::uint64_t shingle_hash, std::uint64_t seed_j) {
  return static_cast<std::uint32_t>(splitmix64(shingle_hash ^ seed_j));
}

inline MinHashSignature signature_of_shingles(const std::unordered_set<std::string>& set, std::size_t L,
                                              std::uint64_t seed) {
  if (set.empty()) throw Error(ErrorCode::EmptyColumn, "column has no values");
  MinHashSignature s{L, seed, std::vector<std::uint32_t>(L, std::numeric_limits<std::uint32_t>::max())};
  std::vector<std::uint64_t> seeds(L);
  for (std::size_t j = 0; j < L; ++j) seeds[j] = minhash_seed(seed, j);
  for (const auto& sh : set) {
    const std::uint64_t h = fnv1a64(sh);
    for (std::size_t j = 0; j < L; ++j) s.values[j] = std::min(s.values[j], minhash_value(h, seeds[j]));
  }
  return s;
}

inline MinHashSignature signature(const std::vector<std::string>& column, std::size_t L = 128, std::uint64_t seed = 0) {
  std::unordered_set<std::string> set;
  for (const auto& v : column) {
    if (is_missing(v)) continue;
    for (auto& sh : shingles(v)) set.insert(std::move(sh));
  }
  return signature_of_shingles(set, L, seed);
}

inline double estimate_jaccard(const MinHashSignature& a, const MinHashSignature& b) {
  if (a.L != b.L || a.seed != b.seed || a.values.size() != b.values.size())
    throw Error(ErrorCode::IncompatibleSignatures, "signatures differ in length or seed family");
  if (a.L == 0) return 0.0;
  std::size_t same = 0;
  for (std::size_t j = 0; j < a.L; ++j) same += a.values[j] == b.values[j];
  return static_cast<double>(same) / static_cast<double>(a.L);
}

// ---------------------------------------------------------------------------
// Column matching

struct SourceColumns {
  std::string source_id;
  Table table;  // canonicalized values
  std::vector<std::string> columns;
  std::vector<std::optional<MinHashSignature>> signatures;  // empty columns have none
};

inline SourceColumns index_source(std::string source_id, const Table& canonical, std::size_t L, std::uint64_t seed) {
  SourceColumns s;
  s.source_id = std::move(source_id);
  s.table = canonical;
  for (std::size_t c = 0; c < canonical.header.size(); ++c) {
    s.columns.push_back(canonical.header[c]);
    std::vector<std::string> col;
    for (const auto& row : canonical.rows) col.push_back(c < row.size() ? row[c] : std::string());
    try {
      s.signatures.emplace_back(signature(col, L, seed));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EmptyColumn) throw;
      s.signatures.emplace_back(std::nullopt);
    }
  }
  return s;
}

struct ColumnMatch {
  std::size_t source = 0;  // index into the source list
  std::string source_id;
  std::string column;
  double score = 0;
};

struct MatchResult {
  std::map<std::string, ColumnMatch> best;                     // target attribute -> best match
  std::map<std::string, std::vector<ColumnMatch>> candidates;  // every match at or above threshold
  std::vector<std::string> no_match;                           // attributes in target order
};

// Best source column per target attribute by estimated Jaccard similarity;
// ties go to the earlier source, then the earlier column.
inline MatchResult match_columns(const std::vector<SourceColumns>& sources, const Table& target_example,
                                 double threshold = 0.5, std::size_t L = 128, std::uint64_t seed = 0) {
  MatchResult r;
  for (std::size_t tc = 0; tc < target_example.header.size(); ++tc) {
    const std::string& attr = target_example.header[tc];
    std::vector<std::string> col;
    for (const auto& row : target_example.rows) col.push_back(tc < row.size() ? row[tc] : std::string());
    std::optional<MinHashSignature> ts;
    try {
      ts = signature(col, L, seed);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EmptyColumn) throw;
    }
    std::optional<ColumnMatch> best;
    if (ts) {
      for (std::size_t s = 0; s < sources.size(); ++s) {
        for (std::size_t c = 0; c < sources[s].columns.size(); ++c) {
          if (!sources[s].signatures[c]) continue;
          const double score = estimate_jaccard(*ts, *sources[s].signatures[c]);
          if (score < threshold) continue;
          ColumnMatch m{s, sources[s].source_id, sources[s].columns[c], score};
          r.candidates[attr].push_back(m);
          if (!best || score > best->score) best = m;
        }
      }
    }
    if (best) r.best[attr] = *best;
    else r.no_match.push_back(attr);
  }
  return r;
}

// Greedy set cover of the matched attributes by sources.
inline std::vector<std::size_t> select_sources(const MatchResult& matches, const std::vector<std::string>& required,
                                               std::size_t source_count) {
  std::set<std::string> uncovered(required.begin(), required.end());
  for (const auto& a : uncovered)
    if (!matches.candidates.count(a)) throw Error(ErrorCode::UncoverableAttribute, "no source column matches " + a);
  std::vector<std::size_t> chosen;
  while (!uncovered.empty()) {
    std::size_t best = source_count, best_gain = 0;
    for (std::size_t s = 0; s < source_count; ++s) {
      if (std::find(chosen.begin(), chosen.end(), s) != chosen.end()) continue;
      std::size_t gain = 0;
      for (const auto& a : uncovered) {
        const auto& cands = matches.candidates.at(a);
        gain += std::any_of(cands.begin(), cands.end(), [&](const ColumnMatch& m) { return m.source == s; });
      }
      if (gain > best_gain) {
        best = s;
        best_gain = gain;
      }
    }
    if (best == source_count) throw Error(ErrorCode::UncoverableAttribute, "attributes left uncovered");
    chosen.push_back(best);
    for (auto it = uncovered.begin(); it != uncovered.end();) {
      const auto& cands = matches.candidates.at(*it);
      if (std::any_of(cands.begin(), cands.end(), [&](const ColumnMatch& m) { return m.source == best; }))
        it = uncovered.erase(it);
      else
        ++it;
    }
  }
  return chosen;
}

namespace detail {

inline std::optional<ColumnMatch> best_in_source(const MatchResult& m, const std::string& attr, std::size_t source) {
  auto it = m.candidates.find(attr);
  if (it == m.candidates.end()) return std::nullopt;
  std::optional<ColumnMatch> best;
  for (const auto& c : it->second)
    if (c.source == source && (!best || c.score > best->score)) best = c;
  return best;
}

}  // namespace detail

// Exact equi-join of the selected sources on their matched key columns;
// every matched value column is projected with Replace semantics.
inline TargetTable baseline_integrate(const MatchResult& matches, const std::vector<SourceColumns>& sources,
                                      const TargetSchema& schema, const std::vector<std::size_t>& selected) {
  TargetTable table(schema);
  const auto value_attrs = schema.value_attributes();
  std::map<std::string, std::size_t> owner;  // value attribute -> selected source providing it
  for (const auto& a : value_attrs)
    for (std::size_t s : selected)
      if (!owner.count(a) && detail::best_in_source(matches, a, s)) owner[a] = s;
  for (std::size_t s : selected) {
    const auto& src = sources[s];
    std::vector<std::size_t> key_cols;
    for (const auto& k : schema.key_attributes) {
      auto m = detail::best_in_source(matches, k, s);
      if (!m)
        throw Error(ErrorCode::UncoverableAttribute, src.source_id + " has no column matching key " + k);
      key_cols.push_back(static_cast<std::size_t>(src.table.column_index(m->column)));
    }
    std::vector<std::pair<std::string, std::size_t>> projected;
    for (const auto& a : value_attrs) {
      auto it = owner.find(a);
      if (it == owner.end() || it->second != s) continue;
      auto m = detail::best_in_source(matches, a, s);
      projected.emplace_back(a, static_cast<std::size_t>(src.table.column_index(m->column)));
    }
    for (std::size_t r = 0; r < src.table.rows.size(); ++r) {
      const auto& row = src.table.rows[r];
      TargetPosition pos;
      pos.agg_mode = AggMode::Replace;
      bool keyed = true;
      for (std::size_t kc : key_cols) {
        if (is_missing(row[kc])) keyed = false;
        pos.keys.push_back(KeyLabel::literal(lower_trim(row[kc])));
      }
      if (!keyed) continue;
      SuperCell cell{src.source_id, {}, {}, {}, r};
      for (const auto& [a, c] : projected) {
        if (is_missing(row[c])) continue;
        cell.attributes.push_back(a);
        cell.values.push_back(canonical_value(row[c]));
        pos.attributes.emplace_back(a);
      }
      if (cell.values.empty()) continue;
      table.apply(cell, pos);
    }
  }
  return table;
}

// ---------------------------------------------------------------------------
// Storage

inline std::size_t storage_report(std::size_t columns, std::size_t L) { return columns * L * 4; }

inline std::size_t storage_report(const std::vector<MinHashSignature>& sigs) {
  std::size_t total = 0;
  for (const auto& s : sigs) total += s.values.size() * 4;
  return total;
}

struct SignatureIndexEntry {
  std::string source;
  std::string column;
  std::size_t L = 0;
  std::uint64_t seed = 0;
};

// Binary store of little-endian 32-bit minima plus a JSON index, one entry
// per column in storage order.
inline void write_signature_store(const std::vector<SignatureIndexEntry>& index,
                                  const std::vector<MinHashSignature>& sigs, const std::string& bin_path,
                                  const std::string& index_path) {
  std::string bin;
  nlohmann::json idx = nlohmann::json::array();
  for (std::size_t i = 0; i < sigs.size(); ++i) {
    for (std::uint32_t v : sigs[i].values)
      for (int b = 0; b < 4; ++b) bin.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
    idx.push_back({{"source", index[i].source}, {"column", index[i].column}, {"L", index[i].L}, {"seed", index[i].seed}});
  }
  write_file(bin_path, bin);
  write_file(index_path, idx.dump(2) + "\n");
}

inline std::vector<MinHashSignature> read_signature_store(const std::string& bin_path, const std::string& index_path,
                                                          std::vector<SignatureIndexEntry>* index_out = nullptr) {
  const std::string bin = read_file(bin_path);
  const auto idx = nlohmann::json::parse(read_file(index_path));
  std::vector<MinHashSignature> out;
  std::size_t pos = 0;
  for (const auto& e : idx) {
    SignatureIndexEntry entry{e.at("source").get<std::string>(), e.at("column").get<std::string>(),
                              e.at("L").get<std::size_t>(), e.at("seed").get<std::uint64_t>()};
    MinHashSignature s{entry.L, entry.seed, {}};
    if (pos + entry.L * 4 > bin.size()) throw Error(ErrorCode::Parse, "signature store shorter than its index");
    for (std::size_t j = 0; j < entry.L; ++j, pos += 4) {
      std::uint32_t v = 0;
      for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bin[pos + b])) << (8 * b);
      s.values.push_back(v);
    }
    out.push_back(std::move(s));
    if (index_out) index_out->push_back(std::move(entry));
  }
  if (pos != bin.size()) throw Error(ErrorCode::Parse, "signature store longer than its index");
  return out;
}

}  // namespace supercell
