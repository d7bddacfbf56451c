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
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "supercell/assemble.hpp"
#include "supercell/canonicalize.hpp"
#include "supercell/core.hpp"
#include "supercell/error.hpp"
#include "supercell/ingest.hpp"

namespace supercell {

inline constexpr std::string_view kDiscard = "DISCARD";

// How one target key attribute is filled from a source's key components.
struct KeyMapEntry {
  std::string target;
  std::optional<std::size_t> component;  // source key component (descriptor order)
  CanonKind canon;
  std::string format;  // "" keeps the canonical form; "mon_d_yyyy" renders dates as "oct 6, 2020"
  bool wildcard = false;

  friend bool operator==(const KeyMapEntry&, const KeyMapEntry&) = default;
};

struct SourceMapping {
  SourceDescriptor descriptor;
  std::vector<KeyMapEntry> key_map;
  std::map<std::string, std::string> attr_map;  // source attribute -> target attribute or DISCARD
  std::map<std::string, AggMode> agg_map;       // default Replace

  std::optional<std::string> target_of(const std::string& attr) const {
    auto it = attr_map.find(attr);
    if (it == attr_map.end() || it->second == kDiscard) return std::nullopt;
    return it->second;
  }

  AggMode agg_of(const std::string& attr) const {
    auto it = agg_map.find(attr);
    return it == agg_map.end() ? AggMode::Replace : it->second;
  }

  bool discards_everything() const {
    for (const auto& [a, t] : attr_map)
      if (t != kDiscard) return false;
    return true;
  }
};

// Parent <- child key rollup: cells carrying one extra key component (the
// child, appended last) from the listed sources roll up into the parent row.
struct KeyHierarchy {
  std::vector<std::string> sources;
  std::string level_name = "county";
  std::size_t parent_component = 1;  // source key component that gets refined
  AggMode rollup = AggMode::Sum;
  std::map<std::string, std::vector<std::string>> children;  // canonical parent -> child names
  std::size_t default_children = 3;

  bool applies_to(const std::string& source_id) const {
    return std::find(sources.begin(), sources.end(), source_id) != sources.end();
  }

  std::vector<std::string> children_of(const std::string& parent) const {
    if (auto it = children.find(parent); it != children.end() && it->second.size() >= 2) return it->second;
    std::vector<std::string> out;
    for (std::size_t k = 1; k <= std::max<std::size_t>(2, default_children); ++k)
      out.push_back(parent + " " + level_name + " " + std::to_string(k));
    return out;
  }
};

struct MappingSpec {
  TargetSchema target;
  std::vector<SourceMapping> sources;
  std::optional<KeyHierarchy> key_hierarchy;

  const SourceMapping& source(const std::string& id) const {
    for (const auto& s : sources)
      if (s.descriptor.source_id == id) return s;
    throw Error(ErrorCode::SpecViolation, "no mapping for source '" + id + "'");
  }

  std::size_t source_index(const std::string& id) const {
    for (std::size_t i = 0; i < sources.size(); ++i)
      if (sources[i].descriptor.source_id == id) return i;
    throw Error(ErrorCode::SpecViolation, "no mapping for source '" + id + "'");
  }

  void validate() const {
    target.validate();
    std::set<std::string> ids;
    for (const auto& s : sources) {
      const auto& id = s.descriptor.source_id;
      s.descriptor.validate();
      if (!ids.insert(id).second) throw Error(ErrorCode::SpecViolation, "duplicate source " + id);
      for (const auto& [a, t] : s.attr_map)
        if (t != kDiscard && !target.has_attribute(t))
          throw Error(ErrorCode::SpecViolation, id + ": attribute " + a + " maps to unknown target " + t);
      for (const auto& [a, m] : s.agg_map)
        if (!s.attr_map.count(a)) throw Error(ErrorCode::SpecViolation, id + ": agg_map entry " + a + " not in attr_map");
      if (s.discards_everything()) continue;
      for (const auto& ka : target.key_attributes) {
        auto it = std::find_if(s.key_map.begin(), s.key_map.end(), [&](const KeyMapEntry& e) { return e.target == ka; });
        if (it == s.key_map.end())
          throw Error(ErrorCode::SpecViolation, id + ": target key " + ka + " not covered by key_map");
        if (!it->wildcard && !it->component)
          throw Error(ErrorCode::SpecViolation, id + ": key_map entry for " + ka + " needs a component");
        if (it->component && *it->component >= s.descriptor.key_arity())
          throw Error(ErrorCode::SpecViolation, id + ": key_map component out of range for " + ka);
        if (!it->format.empty() && it->format != "mon_d_yyyy")
          throw Error(ErrorCode::SpecViolation, id + ": unknown key format " + it->format);
      }
      for (const auto& e : s.key_map)
        if (!target.is_key(e.target)) throw Error(ErrorCode::SpecViolation, id + ": key_map targets non-key " + e.target);
    }
    if (key_hierarchy)
      for (const auto& sid : key_hierarchy->sources)
        if (!ids.count(sid)) throw Error(ErrorCode::SpecViolation, "key hierarchy names unknown source " + sid);
  }

  // Dictionaries that canonicalize key components; COPY markers resolve
  // against these only, so value vocabularies never leak into keys.
  DictionarySet key_dictionaries(const DictionarySet& all) const {
    std::set<std::string> names;
    for (const auto& s : sources) {
      for (const auto& k : s.descriptor.key_columns) {
        const auto kind = s.descriptor.canon_for(k);
        if (kind.kind == CanonKind::Kind::Dictionary) names.insert(kind.dictionary);
      }
      if (s.descriptor.pivot) {
        const auto kind = s.descriptor.canon_for(s.descriptor.pivot->axis_name);
        if (kind.kind == CanonKind::Kind::Dictionary) names.insert(kind.dictionary);
      }
      for (const auto& e : s.key_map)
        if (e.canon.kind == CanonKind::Kind::Dictionary) names.insert(e.canon.dictionary);
    }
    DictionarySet out;
    for (const auto& n : names) {
      if (!all.contains(n)) throw Error(ErrorCode::Config, "dictionary '" + n + "' is not loaded");
      out.add(all.get(n));
    }
    return out;
  }
};

// ---------------------------------------------------------------------------
// JSON

inline void to_json(nlohmann::json& j, const KeyMapEntry& e) {
  j = nlohmann::json{{"target", e.target}};
  if (e.component) j["component"] = *e.component;
  if (e.canon.kind != CanonKind::Kind::None) j["canon"] = e.canon.to_string();
  if (!e.format.empty()) j["format"] = e.format;
  if (e.wildcard) j["wildcard"] = true;
}

inline void from_json(const nlohmann::json& j, KeyMapEntry& e) {
  e = KeyMapEntry{};
  e.target = j.at("target").get<std::string>();
  if (j.contains("component")) e.component = j.at("component").get<std::size_t>();
  if (j.contains("canon")) e.canon = CanonKind::parse(j.at("canon").get<std::string>());
  e.format = j.value("format", std::string());
  e.wildcard = j.value("wildcard", false);
}

inline void to_json(nlohmann::json& j, const SourceMapping& s) {
  nlohmann::json agg = nlohmann::json::object();
  for (const auto& [a, m] : s.agg_map) agg[a] = std::string(to_string(m));
  j = nlohmann::json{{"descriptor", s.descriptor}, {"key_map", s.key_map}, {"attr_map", s.attr_map}, {"agg_map", agg}};
}

inline void from_json(const nlohmann::json& j, SourceMapping& s) {
  s = SourceMapping{};
  s.descriptor = j.at("descriptor").get<SourceDescriptor>();
  s.key_map = j.value("key_map", std::vector<KeyMapEntry>{});
  const nlohmann::json attrs = j.value("attr_map", nlohmann::json::object());
  for (const auto& [a, t] : attrs.items()) s.attr_map[lower_trim(a)] = t.get<std::string>();
  const nlohmann::json aggs = j.value("agg_map", nlohmann::json::object());
  for (const auto& [a, m] : aggs.items()) s.agg_map[lower_trim(a)] = parse_agg_mode(m.get<std::string>());
}

inline void to_json(nlohmann::json& j, const KeyHierarchy& h) {
  j = nlohmann::json{{"sources", h.sources},
                     {"level_name", h.level_name},
                     {"parent_component", h.parent_component},
                     {"rollup", std::string(to_string(h.rollup))},
                     {"children", h.children},
                     {"default_children", h.default_children}};
}

inline void from_json(const nlohmann::json& j, KeyHierarchy& h) {
  h = KeyHierarchy{};
  h.sources = j.at("sources").get<std::vector<std::string>>();
  h.level_name = j.value("level_name", h.level_name);
  h.parent_component = j.value("parent_component", h.parent_component);
  h.rollup = parse_agg_mode(j.value("rollup", std::string("sum")));
  h.children = j.value("children", std::map<std::string, std::vector<std::string>>{});
  h.default_children = j.value("default_children", h.default_children);
}

inline void to_json(nlohmann::json& j, const MappingSpec& m) {
  j = nlohmann::json{{"target", m.target}, {"sources", m.sources}};
  if (m.key_hierarchy) j["key_hierarchy"] = *m.key_hierarchy;
}

inline void from_json(const nlohmann::json& j, MappingSpec& m) {
  m = MappingSpec{};
  m.target = j.at("target").get<TargetSchema>();
  m.sources = j.at("sources").get<std::vector<SourceMapping>>();
  if (j.contains("key_hierarchy")) m.key_hierarchy = j.at("key_hierarchy").get<KeyHierarchy>();
}

inline MappingSpec load_mapping_spec(const std::string& path) {
  MappingSpec m;
  try {
    m = nlohmann::json::parse(read_file(path)).get<MappingSpec>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, path + ": " + e.what());
  }
  m.validate();
  return m;
}

// ---------------------------------------------------------------------------
// Ground-truth positions

struct Origin {
  std::string source_id;
  std::size_t row_ordinal = 0;
  friend bool operator==(const Origin&, const Origin&) = default;
};

struct LabeledSample {
  FeatureSentence feature;
  TargetPosition label;
  Origin origin;
  SuperCell cell;  // the super cell the feature was rendered from
};

inline void to_json(nlohmann::json& j, const LabeledSample& s) {
  j = nlohmann::json{{"feature", s.feature},
                     {"label", s.label},
                     {"origin", {{"source_id", s.origin.source_id}, {"row_ordinal", s.origin.row_ordinal}}},
                     {"cell", s.cell}};
}

inline void from_json(const nlohmann::json& j, LabeledSample& s) {
  s.feature = j.at("feature").get<FeatureSentence>();
  s.label = j.at("label").get<TargetPosition>();
  s.origin.source_id = j.at("origin").at("source_id").get<std::string>();
  s.origin.row_ordinal = j.at("origin").at("row_ordinal").get<std::size_t>();
  s.cell = j.at("cell").get<SuperCell>();
}

namespace detail {

inline std::string render_key(const KeyMapEntry& e, const std::string& raw, const DictionarySet& dicts) {
  std::string v = canonicalize(raw, e.canon, &dicts);
  if (e.format == "mon_d_yyyy") {
    if (auto d = parse_date(v)) return lower_trim(format_date(*d, DateStyle::MonthName));
    throw Error(ErrorCode::KeyResolutionFailure, "key '" + raw + "' is not a date");
  }
  return lower_trim(v);
}

}  // namespace detail

// The position a super cell takes in the target table under the spec, with
// key values resolved to literals.
inline TargetPosition resolve_position(const MappingSpec& spec, const SuperCell& cell, const DictionarySet& dicts) {
  const SourceMapping& src = spec.source(cell.source_id);
  const std::size_t q = spec.target.q();
  TargetPosition pos;
  pos.attributes.reserve(cell.width());
  std::optional<AggMode> agg;
  for (const auto& a : cell.attributes) {
    auto t = src.target_of(a);
    if (t && spec.target.is_key(*t)) t.reset();
    pos.attributes.push_back(t);
    if (t) {
      const AggMode m = src.agg_of(a);
      if (agg && *agg != m)
        throw Error(ErrorCode::SpecViolation, cell.source_id + ": attributes of one super cell disagree on aggregation");
      agg = m;
    }
  }
  if (!agg) return TargetPosition::discard(q, cell.width());

  const std::size_t arity = src.descriptor.key_arity();
  const bool child_level = cell.keys.size() == arity + 1 && spec.key_hierarchy &&
                           spec.key_hierarchy->applies_to(cell.source_id);
  if (cell.keys.size() != arity && !child_level)
    throw Error(ErrorCode::KeyResolutionFailure, cell.source_id + ": super cell has " + std::to_string(cell.keys.size()) +
                                                     " key components, source declares " + std::to_string(arity));
  pos.agg_mode = child_level ? spec.key_hierarchy->rollup : *agg;
  for (const auto& ka : spec.target.key_attributes) {
    auto it = std::find_if(src.key_map.begin(), src.key_map.end(), [&](const KeyMapEntry& e) { return e.target == ka; });
    if (it == src.key_map.end())
      throw Error(ErrorCode::KeyResolutionFailure, cell.source_id + ": no key_map entry for " + ka);
    if (it->wildcard) {
      pos.keys.push_back(KeyLabel::wildcard());
      continue;
    }
    const std::string v = detail::render_key(*it, cell.keys.at(*it->component), dicts);
    if (v.empty()) throw Error(ErrorCode::KeyResolutionFailure, cell.source_id + ": empty key for " + ka);
    if (const auto* d = spec.target.domain(ka); d && !d->open &&
                                                std::find(d->values.begin(), d->values.end(), v) == d->values.end())
      throw Error(ErrorCode::KeyResolutionFailure, cell.source_id + ": key '" + v + "' outside the domain of " + ka);
    pos.keys.push_back(KeyLabel::literal(v));
  }
  return pos;
}

// Value written to the target table for one cell of a super cell.
inline SuperCell with_canonical_values(SuperCell cell) {
  for (auto& v : cell.values) v = canonical_value(v);
  return cell;
}

// Deterministic full-outer-join integration driven by the spec alone.
inline TargetTable oracle_integrate(const MappingSpec& spec, const std::vector<std::vector<SuperCell>>& corpora,
                                    const DictionarySet& dicts) {
  spec.validate();
  std::vector<SuperCell> cells;
  std::vector<TargetPosition> positions;
  for (const auto& corpus : corpora)
    for (const auto& c : corpus) {
      positions.push_back(resolve_position(spec, c, dicts));
      cells.push_back(with_canonical_values(c));
    }
  TargetTable table(spec.target);
  assemble_into(table, cells, positions);
  return table;
}

// One labeled sample per super cell, in corpus order. Key values equal to a
// canonicalized source key component become COPY markers.
inline std::vector<LabeledSample> generate_training_data(const MappingSpec& spec,
                                                         const std::vector<std::vector<SuperCell>>& corpora,
                                                         const DictionarySet& dicts) {
  spec.validate();
  const DictionarySet key_dicts = spec.key_dictionaries(dicts);
  std::vector<LabeledSample> out;
  for (const auto& corpus : corpora) {
    for (const auto& c : corpus) {
      c.validate();
      LabeledSample s;
      s.feature = render_feature(c);
      s.label = encode_copies(resolve_position(spec, c, dicts), c, &key_dicts);
      s.origin = {c.source_id, c.row_ordinal};
      s.cell = c;
      out.push_back(std::move(s));
    }
  }
  return out;
}

// Resolves sample labels (COPY against each sample's own cell) and assembles
// them into a fresh table.
inline TargetTable assemble_labels(const TargetSchema& schema, const std::vector<LabeledSample>& samples,
                                   const DictionarySet& key_dicts) {
  std::vector<SuperCell> cells;
  std::vector<TargetPosition> positions;
  for (const auto& s : samples) {
    positions.push_back(resolve_copies(s.label, s.cell, &key_dicts));
    cells.push_back(with_canonical_values(s.cell));
  }
  TargetTable table(schema);
  assemble_into(table, cells, positions);
  return table;
}

struct ConsistencyReport {
  std::size_t samples = 0;
  std::vector<CellDiff> mismatches;
  bool ok() const { return mismatches.empty(); }
};

inline ConsistencyReport consistency_check(const MappingSpec& spec, const std::vector<std::vector<SuperCell>>& corpora,
                                           const DictionarySet& dicts,
                                           const std::vector<LabeledSample>* samples = nullptr) {
  std::vector<LabeledSample> generated;
  if (!samples) {
    generated = generate_training_data(spec, corpora, dicts);
    samples = &generated;
  }
  ConsistencyReport r;
  r.samples = samples->size();
  const TargetTable oracle = oracle_integrate(spec, corpora, dicts);
  const TargetTable labeled = assemble_labels(spec.target, *samples, spec.key_dictionaries(dicts));
  r.mismatches = diff_tables(oracle, labeled);
  return r;
}

}  // namespace supercell
