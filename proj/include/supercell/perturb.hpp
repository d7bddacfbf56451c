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
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "supercell/canonicalize.hpp"
#include "supercell/core.hpp"
#include "supercell/csv.hpp"
#include "supercell/decimal.hpp"
#include "supercell/error.hpp"
#include "supercell/ingest.hpp"
#include "supercell/mapping.hpp"
#include "supercell/text.hpp"

namespace supercell {

struct PerturbationPlan {
  std::uint64_t seed = 0;
  double attr_rename_rate = 0.0;
  double char_noise_rate = 0.0;     // per attribute token
  double value_reformat_rate = 0.0;  // per key component / value
  double key_expansion_rate = 0.0;   // fraction of rows split
  bool pivot_enabled = false;
  std::size_t add_remove_noise_columns = 0;
  std::string synonym_dict = "attributes";
  std::size_t augment_rounds = 2;

  void validate() const {
    for (double r : {attr_rename_rate, char_noise_rate, value_reformat_rate, key_expansion_rate})
      if (!(r >= 0.0 && r <= 1.0)) throw Error(ErrorCode::Config, "perturbation rates must lie in [0,1]");
  }

  bool is_identity() const {
    return attr_rename_rate == 0.0 && char_noise_rate == 0.0 && value_reformat_rate == 0.0 &&
           key_expansion_rate == 0.0 && !pivot_enabled && add_remove_noise_columns == 0;
  }
};

inline void to_json(nlohmann::json& j, const PerturbationPlan& p) {
  j = nlohmann::json{{"seed", p.seed},
                     {"attr_rename_rate", p.attr_rename_rate},
                     {"char_noise_rate", p.char_noise_rate},
                     {"value_reformat_rate", p.value_reformat_rate},
                     {"key_expansion_rate", p.key_expansion_rate},
                     {"pivot_enabled", p.pivot_enabled},
                     {"add_remove_noise_columns", p.add_remove_noise_columns},
                     {"synonym_dict", p.synonym_dict},
                     {"augment_rounds", p.augment_rounds}};
}

inline void from_json(const nlohmann::json& j, PerturbationPlan& p) {
  static const std::set<std::string> known = {"seed",          "attr_rename_rate",         "char_noise_rate",
                                              "value_reformat_rate", "key_expansion_rate", "pivot_enabled",
                                              "add_remove_noise_columns", "synonym_dict", "augment_rounds"};
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw Error(ErrorCode::Config, "unknown perturbation plan key '" + k + "'");
  p = PerturbationPlan{};
  p.seed = j.value("seed", p.seed);
  p.attr_rename_rate = j.value("attr_rename_rate", p.attr_rename_rate);
  p.char_noise_rate = j.value("char_noise_rate", p.char_noise_rate);
  p.value_reformat_rate = j.value("value_reformat_rate", p.value_reformat_rate);
  p.key_expansion_rate = j.value("key_expansion_rate", p.key_expansion_rate);
  p.pivot_enabled = j.value("pivot_enabled", p.pivot_enabled);
  p.add_remove_noise_columns = j.value("add_remove_noise_columns", p.add_remove_noise_columns);
  p.synonym_dict = j.value("synonym_dict", p.synonym_dict);
  p.augment_rounds = j.value("augment_rounds", p.augment_rounds);
  p.validate();
}

// Column names of the irrelevant data injected as noise.
inline const std::vector<std::string>& noise_vocabulary() {
  static const std::vector<std::string> v = {
      "uid",        "iso3",          "code3",          "fips",          "admin2",        "lat",
      "long_",      "population",    "testing_rate",   "incident_rate", "people_tested", "combined_key",
      "parks",      "transit",       "residential",    "hospitalized",  "mortality_rate", "active"};
  return v;
}

// ---------------------------------------------------------------------------
// Token-level edits

// One random deletion or substitution; tokens shorter than 3 characters are
// left alone so that they keep at least one character n-gram.
inline std::string char_edit(const std::string& token, Rng& rng) {
  if (token.size() < 3) return token;
  std::string out = token;
  const std::size_t pos = static_cast<std::size_t>(uniform_index(rng, token.size()));
  if (bernoulli(rng, 0.5)) {
    out.erase(pos, 1);
  } else {
    char c;
    do {
      c = static_cast<char>('a' + uniform_index(rng, 26));
    } while (c == out[pos]);
    out[pos] = c;
  }
  return out;
}

// Applies char_edit to each whitespace token of `name` with probability
// `rate`; returns the name unchanged when nothing fired.
inline std::string noise_tokens(const std::string& name, double rate, Rng& rng) {
  auto toks = split_ws(name);
  bool changed = false;
  for (auto& t : toks) {
    if (!bernoulli(rng, rate)) continue;
    std::string e = char_edit(t, rng);
    changed |= e != t;
    t = std::move(e);
  }
  return changed ? join(toks, " ") : name;
}

// Forced variant of a name: one edit on its longest token.
inline std::string noisy_name(const std::string& name, Rng& rng) {
  auto toks = split_ws(name);
  if (toks.empty()) return name;
  std::size_t longest = 0;
  for (std::size_t i = 1; i < toks.size(); ++i)
    if (toks[i].size() > toks[longest].size()) longest = i;
  toks[longest] = char_edit(toks[longest], rng);
  return join(toks, " ");
}

inline std::optional<std::string> synonym_sibling(const std::string& term, const SynonymDictionary& dict, Rng& rng) {
  const auto* g = dict.group_of(term);
  if (!g) return std::nullopt;
  std::vector<std::string> others;
  const std::string l = lower_trim(term);
  for (const auto& t : *g)
    if (t != l) others.push_back(t);
  if (others.empty()) return std::nullopt;
  return others[static_cast<std::size_t>(uniform_index(rng, others.size()))];
}

// Alternative surface form with the same canonical value: another date
// layout, a reformatted number, or a dictionary sibling. Returns the input
// when no rewrite applies.
inline std::string reformat_value(const std::string& value, Rng& rng, const DictionarySet* dicts = nullptr) {
  if (auto d = parse_date(value)) {
    std::vector<DateStyle> styles;
    for (auto s : lossless_styles(*d))
      if (format_date(*d, s) != value) styles.push_back(s);
    if (styles.empty()) return value;
    return format_date(*d, styles[static_cast<std::size_t>(uniform_index(rng, styles.size()))]);
  }
  if (auto n = parse_number(value)) {
    std::string plain = n->to_string();
    std::vector<std::string> forms;
    const bool neg = !plain.empty() && plain[0] == '-';
    std::string digits = neg ? plain.substr(1) : plain;
    const auto dot = digits.find('.');
    std::string int_part = digits.substr(0, dot);
    const std::string frac = dot == std::string::npos ? "" : digits.substr(dot);
    if (int_part.size() > 3) {
      std::string grouped;
      for (std::size_t i = 0; i < int_part.size(); ++i) {
        if (i > 0 && (int_part.size() - i) % 3 == 0) grouped += ',';
        grouped += int_part[i];
      }
      forms.push_back((neg ? "-" : "") + grouped + frac);
    }
    forms.push_back(plain + (frac.empty() ? ".0" : "0"));
    forms.push_back(plain + "%");
    std::vector<std::string> differ;
    for (auto& f : forms)
      if (f != value) differ.push_back(std::move(f));
    if (differ.empty()) return value;
    return differ[static_cast<std::size_t>(uniform_index(rng, differ.size()))];
  }
  if (dicts) {
    if (const auto* g = dicts->group_any(value)) {
      std::vector<std::string> others;
      for (const auto& t : *g)
        if (t != lower_trim(value)) others.push_back(t);
      if (!others.empty()) return others[static_cast<std::size_t>(uniform_index(rng, others.size()))];
    }
  }
  return value;
}

// ---------------------------------------------------------------------------
// Corpus-level perturbations

struct RenameResult {
  std::vector<SuperCell> corpus;
  std::map<std::string, std::string> renamed;  // old -> new
};

// Renames `count` of the candidate attributes (chosen by seeded shuffle) to
// a synonym sibling, or to a char-noised variant when the attribute has no
// group. The mapping is applied consistently across the corpus.
inline RenameResult rename_attributes_n(const std::vector<SuperCell>& corpus, std::vector<std::string> candidates,
                                        std::size_t count, const SynonymDictionary* dict, Rng& rng) {
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  shuffle(candidates, rng);
  RenameResult r;
  for (std::size_t i = 0; i < std::min(count, candidates.size()); ++i) {
    const auto& a = candidates[i];
    std::optional<std::string> s = dict ? synonym_sibling(a, *dict, rng) : std::nullopt;
    r.renamed[a] = s ? *s : noisy_name(a, rng);
  }
  r.corpus = corpus;
  for (auto& c : r.corpus)
    for (auto& a : c.attributes)
      if (auto it = r.renamed.find(a); it != r.renamed.end()) a = it->second;
  return r;
}

inline std::vector<std::string> distinct_attributes(const std::vector<SuperCell>& corpus) {
  std::set<std::string> s;
  for (const auto& c : corpus) s.insert(c.attributes.begin(), c.attributes.end());
  return {s.begin(), s.end()};
}

inline std::size_t rename_count(double rate, std::size_t n) {
  return static_cast<std::size_t>(rate * static_cast<double>(n) + 0.5);
}

inline RenameResult rename_attributes(const std::vector<SuperCell>& corpus, const PerturbationPlan& plan,
                                      const DictionarySet& dicts) {
  plan.validate();
  auto attrs = distinct_attributes(corpus);
  Rng rng = derived_rng(plan.seed, 0x72656e);
  const SynonymDictionary* dict = dicts.contains(plan.synonym_dict) ? &dicts.get(plan.synonym_dict) : nullptr;
  return rename_attributes_n(corpus, attrs, rename_count(plan.attr_rename_rate, attrs.size()), dict, rng);
}

// Rewrites each key component and value with probability `rate`.
inline SuperCell reformat_cell(const SuperCell& cell, double rate, Rng& rng, const DictionarySet* dicts) {
  SuperCell out = cell;
  for (auto& k : out.keys)
    if (bernoulli(rng, rate)) k = reformat_value(k, rng, dicts);
  for (auto& v : out.values)
    if (bernoulli(rng, rate)) v = reformat_value(v, rng, dicts);
  return out;
}

inline std::vector<SuperCell> reformat_values(const std::vector<SuperCell>& corpus, const PerturbationPlan& plan,
                                              const DictionarySet* dicts) {
  plan.validate();
  std::vector<SuperCell> out;
  out.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    Rng rng = derived_rng(plan.seed ^ 0x7265666fULL, i);
    out.push_back(reformat_cell(corpus[i], plan.value_reformat_rate, rng, dicts));
  }
  return out;
}

// Permutes the columns of a source table (keys included).
inline Table reorder_columns(const Table& t, std::uint64_t seed) {
  std::vector<std::size_t> perm(t.header.size());
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng = derived_rng(seed, 0x72656f);
  shuffle(perm, rng);
  Table out;
  for (std::size_t p : perm) out.header.push_back(t.header[p]);
  for (const auto& row : t.rows) {
    std::vector<std::string> r;
    for (std::size_t p : perm) r.push_back(p < row.size() ? row[p] : std::string());
    out.rows.push_back(std::move(r));
  }
  return out;
}

// Domain pivoting: the values of key column `axis` become column headers
// holding `value_column`. Remaining key columns keep their order; pivot
// columns follow in first-appearance order.
inline Table pivot_corpus(const Table& t, const std::vector<std::string>& key_columns, const std::string& axis,
                          const std::string& value_column) {
  const auto ax = t.column_index(axis);
  const auto val = t.column_index(value_column);
  if (ax < 0 || val < 0) throw Error(ErrorCode::MissingKeyColumn, "pivot needs columns " + axis + " and " + value_column);
  std::vector<std::size_t> rest;
  for (const auto& k : key_columns) {
    if (k == axis) continue;
    const auto i = t.column_index(k);
    if (i < 0) throw Error(ErrorCode::MissingKeyColumn, "pivot key column " + k + " not in header");
    rest.push_back(static_cast<std::size_t>(i));
  }
  std::vector<std::string> axis_values;
  std::map<std::string, std::size_t> axis_pos;
  std::vector<std::vector<std::string>> row_keys;
  std::map<std::vector<std::string>, std::size_t> row_pos;
  std::map<std::pair<std::size_t, std::size_t>, std::string> grid;
  for (const auto& row : t.rows) {
    if (row.size() != t.header.size()) throw Error(ErrorCode::RaggedRow, "ragged row in pivot input");
    std::vector<std::string> rk;
    for (std::size_t i : rest) rk.push_back(row[i]);
    const auto& a = row[static_cast<std::size_t>(ax)];
    auto [ai, a_new] = axis_pos.try_emplace(a, axis_values.size());
    if (a_new) axis_values.push_back(a);
    auto [ri, r_new] = row_pos.try_emplace(rk, row_keys.size());
    if (r_new) row_keys.push_back(rk);
    if (!grid.emplace(std::pair{ri->second, ai->second}, row[static_cast<std::size_t>(val)]).second)
      throw Error(ErrorCode::DuplicateCellOnPivot, "two rows share (" + join(rk, ",") + ", " + a + ")");
  }
  Table out;
  for (std::size_t i : rest) out.header.push_back(t.header[i]);
  for (const auto& a : axis_values) out.header.push_back(a);
  for (std::size_t r = 0; r < row_keys.size(); ++r) {
    std::vector<std::string> line = row_keys[r];
    for (std::size_t a = 0; a < axis_values.size(); ++a) {
      auto it = grid.find({r, a});
      line.push_back(it == grid.end() ? std::string() : it->second);
    }
    out.rows.push_back(std::move(line));
  }
  return out;
}

// Descriptor reading the output of pivot_corpus back.
inline SourceDescriptor pivoted_descriptor(const SourceDescriptor& desc, const std::string& axis,
                                           const std::string& value_column, std::string source_id) {
  SourceDescriptor d;
  d.source_id = std::move(source_id);
  d.format = SourceFormat::PivotedCsv;
  for (const auto& k : desc.key_columns)
    if (k != axis) d.key_columns.push_back(k);
  d.pivot = PivotSpec{axis, value_column};
  for (const auto& k : d.key_columns) d.canonicalizers[k] = desc.canon_for(k);
  d.canonicalizers[axis] = desc.canon_for(axis);
  d.canonicalizers[value_column] = desc.canon_for(value_column);
  return d;
}

// ---------------------------------------------------------------------------
// Key expansion

// Splits `parent` into n parts summing to it exactly, at the parent's own
// decimal precision.
inline std::vector<Decimal> random_composition(const Decimal& parent, std::size_t n, Rng& rng) {
  const int digits = parent.fractional_digits();
  const __int128 step = Decimal::pow10(Decimal::kScale - digits);
  const bool neg = parent.units() < 0;
  const __int128 total = (neg ? -parent.units() : parent.units()) / step;
  if (total > static_cast<__int128>(1) << 62) throw Error(ErrorCode::NonNumericExpansion, "value too large to split");
  std::vector<std::uint64_t> cuts;
  for (std::size_t i = 0; i + 1 < n; ++i)
    cuts.push_back(uniform_index(rng, static_cast<std::uint64_t>(total) + 1));
  std::sort(cuts.begin(), cuts.end());
  std::vector<Decimal> parts;
  std::uint64_t prev = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t next = i + 1 < n ? cuts[i] : static_cast<std::uint64_t>(total);
    const __int128 u = static_cast<__int128>(next - prev) * step;
    parts.push_back(Decimal::from_units(neg ? -u : u));
    prev = next;
  }
  return parts;
}

struct ExpansionResult {
  std::vector<LabeledSample> samples;  // rows not selected keep their samples
  std::vector<LabeledSample> children;  // the child-level samples only
  std::size_t rows_expanded = 0;
  std::size_t rows_skipped = 0;  // NonNumericExpansion
};

// Breaks selected rows of hierarchy sources into child-keyed rows. Child
// samples carry the parent's target keys and the rollup aggregation.
inline ExpansionResult expand_keys(const std::vector<LabeledSample>& samples, const KeyHierarchy& hierarchy,
                                   const PerturbationPlan& plan, const DictionarySet& key_dicts) {
  plan.validate();
  using RowId = std::pair<std::string, std::size_t>;
  std::vector<RowId> rows;
  std::set<RowId> seen;
  for (const auto& s : samples) {
    if (!hierarchy.applies_to(s.origin.source_id)) continue;
    RowId id{s.origin.source_id, s.origin.row_ordinal};
    if (seen.insert(id).second) rows.push_back(id);
  }
  Rng rng = derived_rng(plan.seed, 0x657870);
  shuffle(rows, rng);
  rows.resize(std::min(rows.size(), rename_count(plan.key_expansion_rate, rows.size())));
  std::set<RowId> selected(rows.begin(), rows.end());

  ExpansionResult out;
  std::map<RowId, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    RowId id{samples[i].origin.source_id, samples[i].origin.row_ordinal};
    if (selected.count(id)) members[id].push_back(i);
  }
  std::map<RowId, std::vector<LabeledSample>> replacement;
  for (const auto& [id, idx] : members) {
    const SuperCell& first = samples[idx.front()].cell;
    if (hierarchy.parent_component >= first.keys.size()) {
      ++out.rows_skipped;
      continue;
    }
    const auto kids = hierarchy.children_of(canonicalize_auto(first.keys[hierarchy.parent_component], &key_dicts));
    Rng row_rng = derived_rng(plan.seed ^ fnv1a64(id.first), id.second);
    std::vector<LabeledSample> made;
    bool ok = true;
    for (std::size_t i : idx) {
      const LabeledSample& s = samples[i];
      std::vector<std::vector<std::string>> child_values(kids.size(), std::vector<std::string>(s.cell.width()));
      for (std::size_t y = 0; y < s.cell.width() && ok; ++y) {
        if (hierarchy.rollup == AggMode::Sum) {
          auto n = parse_number(s.cell.values[y]);
          if (!n) {
            ok = false;
            break;
          }
          auto parts = random_composition(*n, kids.size(), row_rng);
          for (std::size_t k = 0; k < kids.size(); ++k) child_values[k][y] = parts[k].to_string();
        } else {
          for (std::size_t k = 0; k < kids.size(); ++k) child_values[k][y] = s.cell.values[y];
        }
      }
      if (!ok) break;
      const TargetPosition parent = resolve_copies(s.label, s.cell, &key_dicts);
      for (std::size_t k = 0; k < kids.size(); ++k) {
        LabeledSample c;
        c.cell = s.cell;
        c.cell.keys.push_back(kids[k]);
        c.cell.values = child_values[k];
        c.origin = s.origin;
        c.feature = render_feature(c.cell);
        TargetPosition label = parent;
        if (!label.is_discard()) label.agg_mode = hierarchy.rollup;
        c.label = encode_copies(label, c.cell, &key_dicts);
        made.push_back(std::move(c));
      }
    }
    if (!ok) {
      ++out.rows_skipped;
      continue;
    }
    ++out.rows_expanded;
    replacement[id] = std::move(made);
  }
  std::set<RowId> emitted;
  for (const auto& s : samples) {
    RowId id{s.origin.source_id, s.origin.row_ordinal};
    auto it = replacement.find(id);
    if (it == replacement.end()) {
      out.samples.push_back(s);
      continue;
    }
    if (!emitted.insert(id).second) continue;
    for (const auto& c : it->second) {
      out.samples.push_back(c);
      out.children.push_back(c);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sample-level perturbation

// Rebuilds a sample around a perturbed cell. Labels keep their meaning:
// COPY markers are re-based onto the new cell's key order.
inline LabeledSample with_cell(const LabeledSample& s, SuperCell cell, const DictionarySet& key_dicts) {
  LabeledSample out;
  out.label = encode_copies(resolve_copies(s.label, s.cell, &key_dicts), cell, &key_dicts);
  out.feature = render_feature(cell);
  out.origin = s.origin;
  out.cell = std::move(cell);
  return out;
}

// Adds `count` irrelevant singleton cells per distinct (row, key tuple),
// labeled Discard.
inline std::vector<LabeledSample> noise_samples(const std::vector<LabeledSample>& samples, std::size_t count,
                                                std::size_t q, std::uint64_t seed) {
  std::vector<LabeledSample> out;
  if (count == 0) return out;
  std::set<std::tuple<std::string, std::size_t, std::vector<std::string>>> seen;
  const auto& vocab = noise_vocabulary();
  for (const auto& s : samples) {
    if (!seen.insert({s.origin.source_id, s.origin.row_ordinal, s.cell.keys}).second) continue;
    Rng rng = derived_rng(seed ^ fnv1a64(s.origin.source_id) ^ fnv1a64(join(s.cell.keys, "\x1f")), s.origin.row_ordinal);
    std::vector<std::string> names = vocab;
    shuffle(names, rng);
    for (std::size_t i = 0; i < std::min(count, names.size()); ++i) {
      LabeledSample n;
      n.cell.source_id = s.origin.source_id;
      n.cell.row_ordinal = s.origin.row_ordinal;
      n.cell.keys = s.cell.keys;
      n.cell.attributes = {names[i]};
      const std::uint64_t raw = uniform_index(rng, 100000);
      n.cell.values = {bernoulli(rng, 0.5) ? std::to_string(raw)
                                           : std::to_string(raw / 100) + "." + std::to_string(raw % 100)};
      n.origin = s.origin;
      n.feature = render_feature(n.cell);
      n.label = TargetPosition::discard(q, 1);
      out.push_back(std::move(n));
    }
  }
  return out;
}

struct PerturbationLogEntry {
  std::size_t sample_id = 0;
  std::vector<std::string> ops_applied;
};

struct AugmentResult {
  std::vector<LabeledSample> samples;
  std::vector<PerturbationLogEntry> log;
};

inline std::string render_perturbation_log(const std::vector<PerturbationLogEntry>& log) {
  std::string out;
  for (const auto& e : log) {
    out += nlohmann::json{{"sample_id", e.sample_id}, {"ops_applied", e.ops_applied}}.dump();
    out += '\n';
  }
  return out;
}

struct AugmentContext {
  const DictionarySet* dicts = nullptr;      // synonyms and value dictionaries
  const DictionarySet* key_dicts = nullptr;  // COPY resolution
  const KeyHierarchy* hierarchy = nullptr;
  std::size_t q = 0;
};

// Base set = originals, child-level rows from key expansion, and noise
// cells. Each round then renames a window of the attribute vocabulary
// (windows walk one seeded shuffle, so rounds * window >= vocabulary size
// covers every attribute), applies character noise and value reformatting,
// and appends the perturbed copies. Pivoted copies split grouped cells into
// singletons.
inline AugmentResult augment(const std::vector<LabeledSample>& samples, const PerturbationPlan& plan,
                             const AugmentContext& ctx) {
  plan.validate();
  if (!ctx.dicts || !ctx.key_dicts) throw Error(ErrorCode::Config, "augment needs dictionaries");
  AugmentResult out;
  auto push = [&](LabeledSample s, std::vector<std::string> ops) {
    out.log.push_back({out.samples.size(), std::move(ops)});
    out.samples.push_back(std::move(s));
  };
  for (const auto& s : samples) push(s, {});
  if (plan.is_identity()) return out;

  std::vector<LabeledSample> base = samples;
  if (ctx.hierarchy && plan.key_expansion_rate > 0.0) {
    auto exp = expand_keys(samples, *ctx.hierarchy, plan, *ctx.key_dicts);
    for (auto& c : exp.children) {
      base.push_back(c);
      push(std::move(c), {"key_expansion"});
    }
  }
  for (auto& n : noise_samples(base, plan.add_remove_noise_columns, ctx.q, plan.seed ^ 0x6e6f6973ULL)) {
    base.push_back(n);
    push(std::move(n), {"noise_column"});
  }

  std::vector<std::string> vocab;
  {
    std::set<std::string> s;
    for (const auto& b : base) s.insert(b.cell.attributes.begin(), b.cell.attributes.end());
    vocab.assign(s.begin(), s.end());
  }
  Rng vocab_rng = derived_rng(plan.seed, 0x766f63);
  shuffle(vocab, vocab_rng);
  const std::size_t window = rename_count(plan.attr_rename_rate, vocab.size());
  const SynonymDictionary* syn = ctx.dicts->contains(plan.synonym_dict) ? &ctx.dicts->get(plan.synonym_dict) : nullptr;

  for (std::size_t r = 0; r < plan.augment_rounds; ++r) {
    std::set<std::string> renamed;
    for (std::size_t i = 0; i < window && !vocab.empty(); ++i) renamed.insert(vocab[(r * window + i) % vocab.size()]);
    for (std::size_t i = 0; i < base.size(); ++i) {
      const LabeledSample& s = base[i];
      Rng rng = derived_rng(plan.seed ^ ((r + 1) << 48), i);
      SuperCell cell = s.cell;
      std::vector<std::string> ops;
      for (auto& a : cell.attributes) {
        if (renamed.count(a)) {
          std::optional<std::string> sib = syn ? synonym_sibling(a, *syn, rng) : std::nullopt;
          a = sib ? *sib : noisy_name(a, rng);
          ops.push_back("rename");
        }
        std::string noised = noise_tokens(a, plan.char_noise_rate, rng);
        if (noised != a) {
          a = std::move(noised);
          ops.push_back("char_noise");
        }
      }
      SuperCell reformatted = reformat_cell(cell, plan.value_reformat_rate, rng, ctx.dicts);
      if (!(reformatted == cell)) {
        cell = std::move(reformatted);
        ops.push_back("reformat");
      }
      if (ops.empty()) continue;
      push(with_cell(s, std::move(cell), *ctx.key_dicts), std::move(ops));
    }
  }

  if (plan.pivot_enabled) {
    for (const auto& s : base) {
      if (s.cell.width() < 2) continue;
      for (std::size_t y = 0; y < s.cell.width(); ++y) {
        LabeledSample p;
        p.cell = s.cell;
        p.cell.attributes = {s.cell.attributes[y]};
        p.cell.values = {s.cell.values[y]};
        p.origin = s.origin;
        p.feature = render_feature(p.cell);
        p.label = s.label;
        p.label.attributes = {s.label.attributes[y]};
        p.label = p.label.normalized();
        push(std::move(p), {"pivot"});
      }
    }
  }
  return out;
}

}  // namespace supercell
