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
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "supercell/assemble.hpp"
#include "supercell/fixtures.hpp"
#include "supercell/learner/model.hpp"
#include "supercell/mapping.hpp"
#include "supercell/minhash.hpp"
#include "supercell/perturb.hpp"

namespace supercell {

inline std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Timing

struct StageTiming {
  std::string stage;
  double ms = 0;
  std::size_t count = 0;  // samples, cells or rows processed
  double per_item_ms() const { return count ? ms / static_cast<double>(count) : 0.0; }
};

struct TimingReport {
  std::vector<StageTiming> stages;

  void add(std::string stage, double ms, std::size_t count) { stages.push_back({std::move(stage), ms, count}); }
  const StageTiming* find(const std::string& stage) const {
    for (const auto& s : stages)
      if (s.stage == stage) return &s;
    return nullptr;
  }
};

inline void to_json(nlohmann::json& j, const StageTiming& s) {
  j = nlohmann::json{{"stage", s.stage}, {"ms", s.ms}, {"count", s.count}, {"per_item_ms", s.per_item_ms()}};
}
inline void from_json(const nlohmann::json& j, StageTiming& s) {
  s.stage = j.at("stage").get<std::string>();
  s.ms = j.at("ms").get<double>();
  s.count = j.at("count").get<std::size_t>();
}
inline void to_json(nlohmann::json& j, const TimingReport& r) { j = nlohmann::json{{"stages", r.stages}}; }
inline void from_json(const nlohmann::json& j, TimingReport& r) {
  r.stages = j.at("stages").get<std::vector<StageTiming>>();
}

// ---------------------------------------------------------------------------
// Learned integration

struct LearnedIntegration {
  TargetTable table;
  ResolveStats resolve;
  std::size_t predicted = 0;
  double predict_ms = 0;
  double assemble_ms = 0;
  std::size_t conflicts = 0;
};

// Predicts a target position for every super cell and assembles the
// predictions with the same writer the oracle uses.
template <typename S>
LearnedIntegration learned_integrate(const Model<S>& model, const std::vector<std::vector<SuperCell>>& corpora,
                                     const DictionarySet& key_dicts) {
  LearnedIntegration out{TargetTable(model.schema), {}, 0, 0, 0, 0};
  std::vector<SuperCell> cells;
  std::vector<TargetPosition> positions;
  auto t0 = Clock::now();
  for (const auto& corpus : corpora)
    for (const auto& c : corpus) {
      positions.push_back(predict(c, model, &key_dicts, &out.resolve).position);
      cells.push_back(with_canonical_values(c));
    }
  out.predicted = cells.size();
  out.predict_ms = ms_since(t0);
  t0 = Clock::now();
  out.conflicts = assemble_into(out.table, cells, positions).conflicts;
  out.assemble_ms = ms_since(t0);
  return out;
}

// ---------------------------------------------------------------------------
// Test variants

struct TestVariant {
  std::string name;
  PerturbationPlan plan;
};

inline void to_json(nlohmann::json& j, const TestVariant& v) { j = nlohmann::json{{"name", v.name}, {"plan", v.plan}}; }
inline void from_json(const nlohmann::json& j, TestVariant& v) {
  v.name = j.at("name").get<std::string>();
  v.plan = j.at("plan").get<PerturbationPlan>();
}

// Applies a test plan to labeled samples in a fixed order: consistent
// attribute renames, value reformatting, character noise, irrelevant noise
// cells, key expansion. Labels keep their meaning throughout.
inline std::vector<LabeledSample> apply_test_plan(const std::vector<LabeledSample>& samples,
                                                  const PerturbationPlan& plan, const AugmentContext& ctx) {
  plan.validate();
  if (!ctx.dicts || !ctx.key_dicts) throw Error(ErrorCode::Config, "test perturbation needs dictionaries");
  std::vector<LabeledSample> out = samples;
  if (plan.attr_rename_rate > 0.0) {
    std::vector<SuperCell> cells;
    for (const auto& s : out) cells.push_back(s.cell);
    const auto attrs = distinct_attributes(cells);
    Rng rng = derived_rng(plan.seed, 0x72656e);
    const SynonymDictionary* dict =
        ctx.dicts->contains(plan.synonym_dict) ? &ctx.dicts->get(plan.synonym_dict) : nullptr;
    auto r = rename_attributes_n(cells, attrs, rename_count(plan.attr_rename_rate, attrs.size()), dict, rng);
    for (std::size_t i = 0; i < out.size(); ++i)
      if (!(r.corpus[i] == out[i].cell)) out[i] = with_cell(out[i], std::move(r.corpus[i]), *ctx.key_dicts);
  }
  if (plan.value_reformat_rate > 0.0 || plan.char_noise_rate > 0.0) {
    for (std::size_t i = 0; i < out.size(); ++i) {
      Rng rng = derived_rng(plan.seed ^ 0x7465737466ULL, i);
      SuperCell cell = reformat_cell(out[i].cell, plan.value_reformat_rate, rng, ctx.dicts);
      for (auto& a : cell.attributes) a = noise_tokens(a, plan.char_noise_rate, rng);
      if (!(cell == out[i].cell)) out[i] = with_cell(out[i], std::move(cell), *ctx.key_dicts);
    }
  }
  if (plan.add_remove_noise_columns > 0) {
    auto noise = noise_samples(samples, plan.add_remove_noise_columns, ctx.q, plan.seed ^ 0x6e6f6973ULL);
    out.insert(out.end(), noise.begin(), noise.end());
  }
  if (plan.key_expansion_rate > 0.0 && ctx.hierarchy) out = expand_keys(out, *ctx.hierarchy, plan, *ctx.key_dicts).samples;
  return out;
}

// Variants mirroring the ablation table: each row adds its change on top of
// the previous one.
inline std::vector<TestVariant> default_test_variants(std::uint64_t seed, std::size_t attribute_count,
                                                      const std::string& synonym_dict = "attributes") {
  auto rate = [&](std::size_t k) {
    return attribute_count == 0 ? 0.0 : std::min(1.0, static_cast<double>(k) / static_cast<double>(attribute_count));
  };
  PerturbationPlan p;
  p.seed = seed;
  p.synonym_dict = synonym_dict;
  p.augment_rounds = 0;
  std::vector<TestVariant> v;
  v.push_back({"clean", p});
  p.add_remove_noise_columns = 2;
  v.push_back({"irrelevant_data", p});
  p.attr_rename_rate = rate(2);
  v.push_back({"rename_2", p});
  p.attr_rename_rate = rate(5);
  v.push_back({"rename_5", p});
  p.attr_rename_rate = 1.0;
  p.value_reformat_rate = 0.5;
  v.push_back({"rename_all_format", p});
  p.key_expansion_rate = 0.186;
  v.push_back({"key_expansion", p});
  return v;
}

// ---------------------------------------------------------------------------
// Ablation

struct TrainingCondition {
  std::string name;
  bool with_augmentation = true;
  std::string dictionary = "local";  // "local" or "none"
};

inline void to_json(nlohmann::json& j, const TrainingCondition& c) {
  j = nlohmann::json{{"name", c.name}, {"with_augmentation", c.with_augmentation}, {"dictionary", c.dictionary}};
}
inline void from_json(const nlohmann::json& j, TrainingCondition& c) {
  c.name = j.at("name").get<std::string>();
  c.with_augmentation = j.value("with_augmentation", true);
  c.dictionary = j.value("dictionary", std::string("local"));
  if (c.dictionary != "local" && c.dictionary != "none")
    throw Error(ErrorCode::Config, "dictionary must be 'local' or 'none'");
}

struct AblationConfig {
  std::vector<TestVariant> variants;
  std::vector<TrainingCondition> conditions;
  PerturbationPlan train_plan;
  LearnerConfig learner;
};

inline void to_json(nlohmann::json& j, const AblationConfig& c) {
  j = nlohmann::json{
      {"variants", c.variants}, {"conditions", c.conditions}, {"train_plan", c.train_plan}, {"learner", c.learner}};
}
inline void from_json(const nlohmann::json& j, AblationConfig& c) {
  c.variants = j.at("variants").get<std::vector<TestVariant>>();
  c.conditions = j.at("conditions").get<std::vector<TrainingCondition>>();
  c.train_plan = j.at("train_plan").get<PerturbationPlan>();
  c.learner = j.at("learner").get<LearnerConfig>();
}

struct AblationRow {
  std::string condition;
  bool with_augmentation = true;
  std::string dictionary;
  std::string variant;
  std::size_t samples = 0;
  double accuracy = 0;
};

struct AblationReport {
  std::vector<AblationRow> rows;
  std::vector<std::vector<LossPoint>> loss_curves;  // per condition
  TimingReport timings;

  std::optional<double> accuracy(const std::string& condition, const std::string& variant) const {
    for (const auto& r : rows)
      if (r.condition == condition && r.variant == variant) return r.accuracy;
    return std::nullopt;
  }
};

inline std::string ablation_csv(const AblationReport& r) {
  std::string out = "condition,with_augmentation,dictionary,variant,samples,accuracy\n";
  for (const auto& row : r.rows)
    out += row.condition + "," + (row.with_augmentation ? "true" : "false") + "," + row.dictionary + "," +
           row.variant + "," + std::to_string(row.samples) + "," + fixed6(row.accuracy) + "\n";
  return out;
}

inline nlohmann::json ablation_json(const AblationReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"condition", row.condition},
                    {"with_augmentation", row.with_augmentation},
                    {"dictionary", row.dictionary},
                    {"variant", row.variant},
                    {"samples", row.samples},
                    {"accuracy", fixed6(row.accuracy)}});
  return nlohmann::json{{"rows", rows}};
}

struct AblationInputs {
  const MappingSpec* spec = nullptr;
  const DictionarySet* dicts = nullptr;
  const std::vector<LabeledSample>* train = nullptr;
  const std::vector<LabeledSample>* test = nullptr;
};

// Trains once per condition and scores every variant with learner accuracy.
// `on_model` sees each trained model (e.g. to save it).
inline AblationReport run_ablation(const AblationConfig& cfg, const AblationInputs& in,
                                   const std::function<void(const TrainingCondition&, const Model<float>&)>& on_model = {}) {
  if (!in.spec || !in.dicts || !in.train || !in.test) throw Error(ErrorCode::Config, "ablation inputs incomplete");
  const DictionarySet key_dicts = in.spec->key_dictionaries(*in.dicts);
  std::vector<std::string> key_names;
  for (const auto& [name, d] : key_dicts.all()) key_names.push_back(name);
  const KeyHierarchy* hierarchy = in.spec->key_hierarchy ? &*in.spec->key_hierarchy : nullptr;
  const AugmentContext ctx{in.dicts, &key_dicts, hierarchy, in.spec->target.q()};

  std::vector<std::vector<LabeledSample>> variant_sets;
  for (const auto& v : cfg.variants) variant_sets.push_back(apply_test_plan(*in.test, v.plan, ctx));

  AblationReport report;
  for (const auto& cond : cfg.conditions) {
    auto t0 = Clock::now();
    std::vector<LabeledSample> train_set = *in.train;
    if (cond.with_augmentation) {
      PerturbationPlan plan = cfg.train_plan;
      if (cond.dictionary == "none") plan.synonym_dict.clear();
      train_set = augment(*in.train, plan, ctx).samples;
    }
    report.timings.add(cond.name + "/augment", ms_since(t0), train_set.size());
    t0 = Clock::now();
    auto trained = train<float>(train_set, in.spec->target, cfg.learner, key_names);
    report.timings.add(cond.name + "/train", ms_since(t0), train_set.size());
    report.loss_curves.push_back(trained.curve);
    if (on_model) on_model(cond, trained.model);
    for (std::size_t v = 0; v < cfg.variants.size(); ++v) {
      t0 = Clock::now();
      const double acc = accuracy(variant_sets[v], trained.model, &key_dicts);
      report.timings.add(cond.name + "/predict/" + cfg.variants[v].name, ms_since(t0), variant_sets[v].size());
      report.rows.push_back(
          {cond.name, cond.with_augmentation, cond.dictionary, cfg.variants[v].name, variant_sets[v].size(), acc});
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Baseline comparison

struct BaselineRun {
  std::optional<TargetTable> table;
  MatchResult matches;
  std::vector<std::size_t> selected;
  std::string failure;  // error code name when integration is impossible
  double signature_ms = 0, match_ms = 0, join_ms = 0;
};

// Indexes every tabular source (canonicalized), matches columns against the
// target example and joins the selected sources.
inline BaselineRun run_baseline(const fixtures::Scenario& sc, const Table& target_example, const DictionarySet& dicts,
                                std::size_t L = 128, std::uint64_t seed = 0, double threshold = 0.5) {
  BaselineRun run;
  auto t0 = Clock::now();
  std::vector<SourceColumns> sources;
  for (const auto& s : sc.sources) {
    if (s.desc.format == SourceFormat::LogLines) continue;
    sources.push_back(index_source(s.desc.source_id, canonicalize_table(s.table, s.desc, &dicts), L, seed));
  }
  run.signature_ms = ms_since(t0);
  t0 = Clock::now();
  run.matches = match_columns(sources, target_example, threshold, L, seed);
  run.match_ms = ms_since(t0);
  t0 = Clock::now();
  try {
    run.selected = select_sources(run.matches, sc.spec.target.attributes, sources.size());
    run.table = baseline_integrate(run.matches, sources, sc.spec.target, run.selected);
  } catch (const Error& e) {
    run.failure = std::string(to_string(e.code()));
  }
  run.join_ms = ms_since(t0);
  return run;
}

struct ComparisonCase {
  std::string name;
  fixtures::Scenario scenario;
};

struct ComparisonRow {
  std::string name;
  double learner_agreement = 0;
  double baseline_agreement = 0;
  std::string baseline_status = "ok";
  std::vector<std::string> baseline_no_match;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
  TimingReport timings;
};

inline std::string comparison_csv(const ComparisonReport& r) {
  std::string out = "case,learner_agreement,baseline_agreement,baseline_status,baseline_no_match\n";
  for (const auto& row : r.rows)
    out += row.name + "," + fixed6(row.learner_agreement) + "," + fixed6(row.baseline_agreement) + "," +
           row.baseline_status + "," + join(row.baseline_no_match, "|") + "\n";
  return out;
}

inline nlohmann::json comparison_json(const ComparisonReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"case", row.name},
                    {"learner_agreement", fixed6(row.learner_agreement)},
                    {"baseline_agreement", fixed6(row.baseline_agreement)},
                    {"baseline_status", row.baseline_status},
                    {"baseline_no_match", row.baseline_no_match}});
  return nlohmann::json{{"rows", rows}};
}

// Runs the learned pipeline and the MinHash baseline on each case and scores
// both against that case's oracle. The baseline's target example is the
// oracle output of the first (clean) case.
template <typename S>
ComparisonReport compare_baseline(const std::vector<ComparisonCase>& cases, const Model<S>& model,
                                  const DictionarySet& dicts, std::size_t L = 128, std::uint64_t seed = 0) {
  ComparisonReport report;
  if (cases.empty()) return report;
  std::optional<Table> example;
  for (const auto& c : cases) {
    auto t0 = Clock::now();
    const auto corp = fixtures::corpora(c.scenario, dicts);
    std::size_t cells = 0;
    for (const auto& x : corp) cells += x.size();
    report.timings.add(c.name + "/decompose", ms_since(t0), cells);
    const TargetTable oracle = oracle_integrate(c.scenario.spec, corp, dicts);
    if (!example) example = oracle.to_table();

    const DictionarySet key_dicts = c.scenario.spec.key_dictionaries(dicts);
    const auto learned = learned_integrate(model, corp, key_dicts);
    report.timings.add(c.name + "/predict", learned.predict_ms, learned.predicted);
    report.timings.add(c.name + "/assemble", learned.assemble_ms, learned.predicted);

    ComparisonRow row;
    row.name = c.name;
    row.learner_agreement = cell_agreement(oracle, learned.table);
    const BaselineRun b = run_baseline(c.scenario, *example, dicts, L, seed);
    report.timings.add(c.name + "/signatures", b.signature_ms, 0);
    report.timings.add(c.name + "/match", b.match_ms, 0);
    report.timings.add(c.name + "/join", b.join_ms, 0);
    row.baseline_no_match = b.matches.no_match;
    if (b.table) row.baseline_agreement = cell_agreement(oracle, *b.table);
    else row.baseline_status = b.failure;
    report.rows.push_back(std::move(row));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Storage

struct StorageReport {
  std::size_t model_bytes = 0;
  std::size_t columns = 0;
  std::size_t L = 0;
  std::size_t signature_bytes = 0;
};

inline nlohmann::json storage_json(const StorageReport& s) {
  return nlohmann::json{{"model_bytes", s.model_bytes},
                        {"columns", s.columns},
                        {"L", s.L},
                        {"signature_bytes", s.signature_bytes}};
}

inline std::size_t column_count(const fixtures::Scenario& sc) {
  std::size_t n = 0;
  for (const auto& s : sc.sources) n += s.table.header.size();
  return n;
}

template <typename S>
StorageReport storage_comparison(const Model<S>& model, std::size_t columns, std::size_t L) {
  return {serialize_model(model).size(), columns, L, storage_report(columns, L)};
}

// ---------------------------------------------------------------------------
// Run directory

inline std::string config_hash(const nlohmann::json& config) { return hex64(fnv1a64(config.dump())); }

inline std::filesystem::path run_directory(const std::filesystem::path& base, const nlohmann::json& config) {
  auto dir = base / ("run-" + config_hash(config));
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace supercell
