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
#include <array>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "supercell/canonicalize.hpp"
#include "supercell/error.hpp"
#include "supercell/text.hpp"

namespace supercell {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Aggregation modes

enum class AggMode { Sum, Avg, Min, Max, Count, Replace, Discard, Concat };

inline constexpr std::array<AggMode, 8> kAllAggModes = {AggMode::Sum,   AggMode::Avg,     AggMode::Min,
                                                         AggMode::Max,   AggMode::Count,   AggMode::Replace,
                                                         AggMode::Discard, AggMode::Concat};

inline std::string_view to_string(AggMode m) {
  switch (m) {
    case AggMode::Sum: return "sum";
    case AggMode::Avg: return "avg";
    case AggMode::Min: return "min";
    case AggMode::Max: return "max";
    case AggMode::Count: return "count";
    case AggMode::Replace: return "replace";
    case AggMode::Discard: return "discard";
    case AggMode::Concat: return "concat";
  }
  return "replace";
}

inline AggMode parse_agg_mode(std::string_view s) {
  const std::string l = to_lower(s);
  for (AggMode m : kAllAggModes)
    if (to_string(m) == l) return m;
  throw Error(ErrorCode::Parse, "unknown aggregation mode '" + std::string(s) + "'");
}

inline bool is_numeric_mode(AggMode m) {
  return m == AggMode::Sum || m == AggMode::Avg || m == AggMode::Min || m == AggMode::Max || m == AggMode::Count;
}

// ---------------------------------------------------------------------------
// Super cells

struct SuperCell {
  std::string source_id;
  std::vector<std::string> keys;
  std::vector<std::string> attributes;
  std::vector<std::string> values;
  std::size_t row_ordinal = 0;

  std::size_t width() const { return values.size(); }

  void validate() const {
    if (attributes.empty() || attributes.size() != values.size())
      throw Error(ErrorCode::InvariantViolation, "super cell needs equal, nonzero attribute/value counts");
    for (const auto& a : attributes)
      if (trim_view(a).empty()) throw Error(ErrorCode::InvariantViolation, "empty attribute name in super cell");
  }

  friend bool operator==(const SuperCell&, const SuperCell&) = default;
};

inline void to_json(json& j, const SuperCell& c) {
  j = json{{"source_id", c.source_id},
           {"keys", c.keys},
           {"attributes", c.attributes},
           {"values", c.values},
           {"row_ordinal", c.row_ordinal}};
}

inline void from_json(const json& j, SuperCell& c) {
  c.source_id = j.at("source_id").get<std::string>();
  c.keys = j.at("keys").get<std::vector<std::string>>();
  c.attributes = j.at("attributes").get<std::vector<std::string>>();
  c.values = j.at("values").get<std::vector<std::string>>();
  c.row_ordinal = j.at("row_ordinal").get<std::size_t>();
}

// Key components ordered by their sort form; ties keep source order. This
// ordering defines both the feature sentence and COPY indices, which makes
// features independent of where a key column sat in the source (including
// pivot-derived keys appended last).
inline std::vector<std::size_t> sorted_key_order(const std::vector<std::string>& keys) {
  std::vector<std::string> forms;
  forms.reserve(keys.size());
  for (const auto& k : keys) forms.push_back(key_sort_form(k));
  std::vector<std::size_t> order(keys.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return forms[a] < forms[b]; });
  return order;
}

inline std::vector<std::string> sorted_keys(const SuperCell& c) {
  std::vector<std::string> out;
  for (std::size_t i : sorted_key_order(c.keys)) out.push_back(c.keys[i]);
  return out;
}

// Content identity ignoring provenance and key-component order.
inline std::tuple<std::vector<std::string>, std::vector<std::string>, std::vector<std::string>> content_of(
    const SuperCell& c) {
  std::vector<std::string> keys = c.keys;
  std::sort(keys.begin(), keys.end());
  return {keys, c.attributes, c.values};
}

// ---------------------------------------------------------------------------
// Feature sentences

enum class Segment : std::uint8_t { Key, Attr, Val };

inline std::string_view to_string(Segment s) {
  switch (s) {
    case Segment::Key: return "KEY";
    case Segment::Attr: return "ATTR";
    case Segment::Val: return "VAL";
  }
  return "KEY";
}

inline Segment parse_segment(std::string_view s) {
  if (s == "KEY") return Segment::Key;
  if (s == "ATTR") return Segment::Attr;
  if (s == "VAL") return Segment::Val;
  throw Error(ErrorCode::Parse, "unknown segment tag '" + std::string(s) + "'");
}

struct FeatureSentence {
  std::vector<std::string> tokens;
  std::vector<Segment> segment_tags;
  // Key component index (sorted order) for KEY tokens, cell index for
  // ATTR/VAL tokens.
  std::vector<std::uint32_t> slots;

  std::string text() const { return join(tokens, " "); }

  friend bool operator==(const FeatureSentence&, const FeatureSentence&) = default;
};

inline FeatureSentence render_feature(const SuperCell& cell) {
  FeatureSentence s;
  auto push = [&](const std::string& text, Segment seg, std::size_t slot) {
    for (auto& tok : split_ws(to_lower(text))) {
      s.tokens.push_back(std::move(tok));
      s.segment_tags.push_back(seg);
      s.slots.push_back(static_cast<std::uint32_t>(slot));
    }
  };
  const auto order = sorted_key_order(cell.keys);
  for (std::size_t i = 0; i < order.size(); ++i) push(cell.keys[order[i]], Segment::Key, i);
  for (std::size_t i = 0; i < cell.attributes.size(); ++i) {
    push(cell.attributes[i], Segment::Attr, i);
    push(cell.values[i], Segment::Val, i);
  }
  if (s.tokens.empty()) throw Error(ErrorCode::InvariantViolation, "feature sentence would be empty");
  return s;
}

inline void to_json(json& j, const FeatureSentence& s) {
  std::vector<std::string> tags;
  for (auto t : s.segment_tags) tags.emplace_back(to_string(t));
  j = json{{"tokens", s.tokens}, {"segment_tags", tags}, {"slots", s.slots}};
}

inline void from_json(const json& j, FeatureSentence& s) {
  s.tokens = j.at("tokens").get<std::vector<std::string>>();
  s.segment_tags.clear();
  for (const auto& t : j.at("segment_tags")) s.segment_tags.push_back(parse_segment(t.get<std::string>()));
  s.slots = j.at("slots").get<std::vector<std::uint32_t>>();
  if (s.tokens.size() != s.segment_tags.size() || s.tokens.size() != s.slots.size())
    throw Error(ErrorCode::Parse, "feature sentence arrays differ in length");
}

// ---------------------------------------------------------------------------
// Target schema

struct KeyDomain {
  std::vector<std::string> values;
  bool open = true;  // open domains admit unseen values through COPY
  friend bool operator==(const KeyDomain&, const KeyDomain&) = default;
};

struct TargetSchema {
  std::vector<std::string> attributes;
  std::vector<std::string> key_attributes;
  std::map<std::string, KeyDomain> key_domains;

  std::size_t q() const { return key_attributes.size(); }

  bool is_key(const std::string& a) const {
    return std::find(key_attributes.begin(), key_attributes.end(), a) != key_attributes.end();
  }
  bool has_attribute(const std::string& a) const {
    return std::find(attributes.begin(), attributes.end(), a) != attributes.end();
  }

  std::vector<std::string> value_attributes() const {
    std::vector<std::string> out;
    for (const auto& a : attributes)
      if (!is_key(a)) out.push_back(a);
    return out;
  }

  // Output column order: keys first, then the rest in schema order.
  std::vector<std::string> column_order() const {
    std::vector<std::string> out = key_attributes;
    for (const auto& a : value_attributes()) out.push_back(a);
    return out;
  }

  const KeyDomain* domain(const std::string& key_attr) const {
    auto it = key_domains.find(key_attr);
    return it == key_domains.end() ? nullptr : &it->second;
  }

  void validate() const {
    if (key_attributes.empty()) throw Error(ErrorCode::SpecViolation, "target schema needs at least one key");
    std::set<std::string> seen;
    for (const auto& a : attributes)
      if (!seen.insert(a).second) throw Error(ErrorCode::SpecViolation, "duplicate target attribute " + a);
    for (const auto& k : key_attributes)
      if (!has_attribute(k)) throw Error(ErrorCode::SpecViolation, "key attribute " + k + " not among attributes");
    for (const auto& [k, d] : key_domains) {
      if (!is_key(k)) throw Error(ErrorCode::SpecViolation, "domain for non-key attribute " + k);
      for (const auto& v : d.values)
        if (v != lower_trim(v)) throw Error(ErrorCode::SpecViolation, "domain value not canonical: " + v);
    }
  }

  friend bool operator==(const TargetSchema&, const TargetSchema&) = default;
};

inline void to_json(json& j, const TargetSchema& s) {
  json domains = json::object();
  for (const auto& [k, d] : s.key_domains) domains[k] = json{{"values", d.values}, {"open", d.open}};
  j = json{{"attributes", s.attributes}, {"key_attributes", s.key_attributes}, {"key_domains", domains}};
}

inline void from_json(const json& j, TargetSchema& s) {
  s.attributes = j.at("attributes").get<std::vector<std::string>>();
  s.key_attributes = j.at("key_attributes").get<std::vector<std::string>>();
  s.key_domains.clear();
  if (j.contains("key_domains")) {
    for (const auto& [k, d] : j.at("key_domains").items()) {
      KeyDomain dom;
      dom.values = d.value("values", std::vector<std::string>{});
      dom.open = d.value("open", true);
      s.key_domains.emplace(k, std::move(dom));
    }
  }
}

// ---------------------------------------------------------------------------
// Target positions

struct KeyLabel {
  enum class Kind : std::uint8_t { Null, Value, Copy, Wildcard };
  Kind kind = Kind::Null;
  std::string value;       // Kind::Value
  std::uint32_t index = 0;  // Kind::Copy

  static KeyLabel null() { return {}; }
  static KeyLabel literal(std::string v) { return {Kind::Value, std::move(v), 0}; }
  static KeyLabel copy(std::uint32_t i) { return {Kind::Copy, {}, i}; }
  static KeyLabel wildcard() { return {Kind::Wildcard, {}, 0}; }

  bool is_null() const { return kind == Kind::Null; }

  std::string describe() const {
    switch (kind) {
      case Kind::Null: return "NULL";
      case Kind::Value: return value;
      case Kind::Copy: return "COPY(" + std::to_string(index) + ")";
      case Kind::Wildcard: return "WILDCARD";
    }
    return "NULL";
  }

  friend bool operator==(const KeyLabel&, const KeyLabel&) = default;
  friend auto operator<=>(const KeyLabel& a, const KeyLabel& b) {
    return std::tie(a.kind, a.value, a.index) <=> std::tie(b.kind, b.value, b.index);
  }
};

inline void to_json(json& j, const KeyLabel& k) {
  switch (k.kind) {
    case KeyLabel::Kind::Null: j = json{{"kind", "null"}}; break;
    case KeyLabel::Kind::Value: j = json{{"kind", "value"}, {"value", k.value}}; break;
    case KeyLabel::Kind::Copy: j = json{{"kind", "copy"}, {"index", k.index}}; break;
    case KeyLabel::Kind::Wildcard: j = json{{"kind", "wildcard"}}; break;
  }
}

inline void from_json(const json& j, KeyLabel& k) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "null") k = KeyLabel::null();
  else if (kind == "value") k = KeyLabel::literal(j.at("value").get<std::string>());
  else if (kind == "copy") k = KeyLabel::copy(j.at("index").get<std::uint32_t>());
  else if (kind == "wildcard") k = KeyLabel::wildcard();
  else throw Error(ErrorCode::Parse, "unknown key label kind '" + kind + "'");
}

struct TargetPosition {
  std::vector<KeyLabel> keys;
  std::vector<std::optional<std::string>> attributes;
  AggMode agg_mode = AggMode::Replace;

  bool is_discard() const {
    return std::all_of(attributes.begin(), attributes.end(), [](const auto& a) { return !a.has_value(); });
  }

  static TargetPosition discard(std::size_t q, std::size_t width) {
    TargetPosition p;
    p.keys.assign(q, KeyLabel::null());
    p.attributes.assign(width, std::nullopt);
    p.agg_mode = AggMode::Discard;
    return p;
  }

  bool has_wildcard() const {
    return std::any_of(keys.begin(), keys.end(), [](const KeyLabel& k) { return k.kind == KeyLabel::Kind::Wildcard; });
  }

  // The all-NULL attribute vector means "discard the whole super cell".
  TargetPosition normalized() const {
    if (is_discard()) return discard(keys.size(), attributes.size());
    return *this;
  }

  void validate(const TargetSchema& schema, std::size_t width) const {
    if (keys.size() != schema.q())
      throw Error(ErrorCode::InvariantViolation, "target position key arity differs from schema");
    if (attributes.size() != width)
      throw Error(ErrorCode::InvariantViolation, "target position width differs from super cell");
    for (const auto& a : attributes)
      if (a && !schema.has_attribute(*a)) throw Error(ErrorCode::InvariantViolation, "unknown target attribute " + *a);
    if (is_discard())
      for (const auto& k : keys)
        if (!k.is_null()) throw Error(ErrorCode::InvariantViolation, "discard position must have NULL keys");
  }

  friend bool operator==(const TargetPosition&, const TargetPosition&) = default;
};

inline void to_json(json& j, const TargetPosition& p) {
  json attrs = json::array();
  for (const auto& a : p.attributes) attrs.push_back(a ? json(*a) : json(nullptr));
  j = json{{"keys", p.keys}, {"attributes", attrs}, {"agg_mode", std::string(to_string(p.agg_mode))}};
}

inline void from_json(const json& j, TargetPosition& p) {
  p.keys = j.at("keys").get<std::vector<KeyLabel>>();
  p.attributes.clear();
  for (const auto& a : j.at("attributes")) {
    if (a.is_null()) p.attributes.emplace_back(std::nullopt);
    else p.attributes.emplace_back(a.get<std::string>());
  }
  p.agg_mode = parse_agg_mode(j.at("agg_mode").get<std::string>());
}

// ---------------------------------------------------------------------------
// Label codec: target positions <-> one class index per classifier head.
//
// Heads are laid out as [q key heads][max_width attribute heads][agg head].
// Key head classes: NULL, WILDCARD, COPY(0..max_copy-1), then domain values.
// Attribute head classes: NULL, then target attributes in schema order.

using LabelVector = std::vector<int>;

class LabelCodec {
 public:
  LabelCodec() = default;

  LabelCodec(const TargetSchema& schema, std::size_t max_copy, std::size_t max_width,
             const std::map<std::string, std::set<std::string>>& extra_literals = {})
      : q_(schema.q()), max_copy_(max_copy), max_width_(max_width) {
    for (const auto& ka : schema.key_attributes) {
      std::vector<KeyLabel> classes{KeyLabel::null(), KeyLabel::wildcard()};
      for (std::size_t i = 0; i < max_copy; ++i) classes.push_back(KeyLabel::copy(static_cast<std::uint32_t>(i)));
      std::set<std::string> values;
      if (const auto* d = schema.domain(ka)) values.insert(d->values.begin(), d->values.end());
      if (auto it = extra_literals.find(ka); it != extra_literals.end()) {
        const auto* d = schema.domain(ka);
        for (const auto& v : it->second) {
          if (d && !d->open && !values.count(v))
            throw Error(ErrorCode::UnknownKeyValue, "value '" + v + "' outside closed domain of " + ka);
          values.insert(v);
        }
      }
      for (const auto& v : values) classes.push_back(KeyLabel::literal(v));
      key_classes_.push_back(std::move(classes));
    }
    attr_classes_.emplace_back(std::nullopt);
    for (const auto& a : schema.attributes) attr_classes_.emplace_back(a);
  }

  std::size_t q() const { return q_; }
  std::size_t max_copy() const { return max_copy_; }
  std::size_t max_width() const { return max_width_; }
  std::size_t num_heads() const { return q_ + max_width_ + 1; }
  std::size_t agg_head() const { return q_ + max_width_; }

  std::vector<std::size_t> head_sizes() const {
    std::vector<std::size_t> sizes;
    for (const auto& c : key_classes_) sizes.push_back(c.size());
    for (std::size_t i = 0; i < max_width_; ++i) sizes.push_back(attr_classes_.size());
    sizes.push_back(kAllAggModes.size());
    return sizes;
  }

  const std::vector<KeyLabel>& key_classes(std::size_t head) const { return key_classes_.at(head); }
  const std::vector<std::optional<std::string>>& attr_classes() const { return attr_classes_; }

  LabelVector encode(const TargetPosition& raw) const {
    const TargetPosition pos = raw.normalized();
    if (pos.keys.size() != q_) throw Error(ErrorCode::InvariantViolation, "label key arity differs from codec");
    LabelVector out;
    out.reserve(num_heads());
    for (std::size_t l = 0; l < q_; ++l) {
      const auto& classes = key_classes_[l];
      auto it = std::find(classes.begin(), classes.end(), pos.keys[l]);
      if (it == classes.end())
        throw Error(ErrorCode::UnknownKeyValue, "key label '" + pos.keys[l].describe() + "' not in head vocabulary");
      out.push_back(static_cast<int>(it - classes.begin()));
    }
    for (std::size_t y = 0; y < max_width_; ++y) {
      std::optional<std::string> a = y < pos.attributes.size() ? pos.attributes[y] : std::nullopt;
      auto it = std::find(attr_classes_.begin(), attr_classes_.end(), a);
      if (it == attr_classes_.end()) throw Error(ErrorCode::UnknownKeyValue, "unknown target attribute " + *a);
      out.push_back(static_cast<int>(it - attr_classes_.begin()));
    }
    for (std::size_t y = max_width_; y < pos.attributes.size(); ++y)
      if (pos.attributes[y])
        throw Error(ErrorCode::SpecViolation, "super cell wider than the configured attribute heads");
    out.push_back(static_cast<int>(std::find(kAllAggModes.begin(), kAllAggModes.end(), pos.agg_mode) -
                                   kAllAggModes.begin()));
    return out;
  }

  // Decodes a label vector for a super cell of `width` values.
  TargetPosition decode(const LabelVector& v, std::size_t width) const {
    if (v.size() != num_heads()) throw Error(ErrorCode::InvariantViolation, "label vector size differs from codec");
    TargetPosition p;
    for (std::size_t l = 0; l < q_; ++l) p.keys.push_back(key_classes_[l].at(static_cast<std::size_t>(v[l])));
    for (std::size_t y = 0; y < width; ++y)
      p.attributes.push_back(y < max_width_ ? attr_classes_.at(static_cast<std::size_t>(v[q_ + y])) : std::nullopt);
    p.agg_mode = kAllAggModes.at(static_cast<std::size_t>(v[agg_head()]));
    return p.normalized();
  }

  friend bool operator==(const LabelCodec&, const LabelCodec&) = default;

  friend void to_json(json& j, const LabelCodec& c) {
    json keys = json::array();
    for (const auto& cls : c.key_classes_) keys.push_back(cls);
    json attrs = json::array();
    for (const auto& a : c.attr_classes_) attrs.push_back(a ? json(*a) : json(nullptr));
    j = json{{"q", c.q_}, {"max_copy", c.max_copy_}, {"max_width", c.max_width_}, {"key_classes", keys},
             {"attr_classes", attrs}};
  }

  friend void from_json(const json& j, LabelCodec& c) {
    c.q_ = j.at("q").get<std::size_t>();
    c.max_copy_ = j.at("max_copy").get<std::size_t>();
    c.max_width_ = j.at("max_width").get<std::size_t>();
    c.key_classes_.clear();
    for (const auto& cls : j.at("key_classes")) c.key_classes_.push_back(cls.get<std::vector<KeyLabel>>());
    c.attr_classes_.clear();
    for (const auto& a : j.at("attr_classes"))
      c.attr_classes_.push_back(a.is_null() ? std::nullopt : std::optional<std::string>(a.get<std::string>()));
  }

 private:
  std::size_t q_ = 0;
  std::size_t max_copy_ = 0;
  std::size_t max_width_ = 0;
  std::vector<std::vector<KeyLabel>> key_classes_;
  std::vector<std::optional<std::string>> attr_classes_;
};

inline LabelVector render_label(const TargetPosition& pos, const LabelCodec& codec) { return codec.encode(pos); }

// ---------------------------------------------------------------------------
// COPY resolution

struct ResolveStats {
  std::size_t copy_out_of_range = 0;
};

// Replaces COPY(i) with the canonicalized i-th key component in feature
// order. Out-of-range indices degrade to NULL.
inline TargetPosition resolve_copies(const TargetPosition& pos, const SuperCell& cell, const DictionarySet* dicts,
                                     ResolveStats* stats = nullptr) {
  TargetPosition out = pos;
  const auto order = sorted_key_order(cell.keys);
  for (auto& k : out.keys) {
    if (k.kind != KeyLabel::Kind::Copy) continue;
    if (k.index >= order.size()) {
      if (stats) ++stats->copy_out_of_range;
      k = KeyLabel::null();
      continue;
    }
    k = KeyLabel::literal(canonicalize_auto(cell.keys[order[k.index]], dicts));
  }
  return out;
}

// Re-expresses resolved key values as COPY markers against `cell` where a
// key component canonicalizes to the same value; other values stay literal.
inline TargetPosition encode_copies(const TargetPosition& resolved, const SuperCell& cell, const DictionarySet* dicts) {
  TargetPosition out = resolved;
  const auto order = sorted_key_order(cell.keys);
  std::vector<std::string> canon;
  for (std::size_t i : order) canon.push_back(canonicalize_auto(cell.keys[i], dicts));
  for (auto& k : out.keys) {
    if (k.kind != KeyLabel::Kind::Value) continue;
    for (std::size_t i = 0; i < canon.size(); ++i) {
      if (canon[i] == k.value) {
        k = KeyLabel::copy(static_cast<std::uint32_t>(i));
        break;
      }
    }
  }
  return out;
}

}  // namespace supercell
