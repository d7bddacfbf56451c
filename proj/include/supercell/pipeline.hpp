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

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "supercell/eval.hpp"
#include "supercell/fixtures.hpp"

namespace supercell {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Run configuration

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                                const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::Config, where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok |= it.key() == a;
    if (!ok) throw Error(ErrorCode::Config, "unknown key '" + it.key() + "' in " + where);
  }
}

}  // namespace detail

struct RunPaths {
  std::string spec;
  std::string dictionaries;  // directory of <name>.json files
  std::string plan;          // augmentation plan (optional)
  std::string model;         // defaults to <output_dir>/model.bin
  std::string output_dir = "out";
  std::map<std::string, std::string> sources;  // source_id -> file
};

struct CaseConfig {
  std::string name;
  std::string spec;
  std::map<std::string, std::string> sources;
};

struct AblationSettings {
  std::vector<TestVariant> variants;  // empty: the default incremental variants
  std::vector<TrainingCondition> conditions;
  std::string synonym_dict = "attributes";
};

struct RunConfig {
  std::uint64_t seed = 0;
  RunPaths paths;
  std::vector<std::string> train_keys;  // canonical key values of the training split; empty = every cell
  LearnerConfig learner;
  AblationSettings ablation;
  std::vector<CaseConfig> cases;  // extra comparison cases for eval (e.g. a pivoted release)
  std::size_t baseline_L = 128;
  double baseline_threshold = 0.5;
  std::size_t storage_L = 512;
  fs::path base_dir;  // relative paths resolve against this

  std::string resolve(const std::string& p) const {
    if (p.empty()) return p;
    fs::path path(p);
    return path.is_absolute() ? p : (base_dir / path).lexically_normal().string();
  }
  std::string out_path(const std::string& file) const { return (fs::path(resolve(paths.output_dir)) / file).string(); }
  std::string model_path() const { return paths.model.empty() ? out_path("model.bin") : resolve(paths.model); }
};

inline RunConfig parse_run_config(const nlohmann::json& j, fs::path base_dir = {}) {
  detail::reject_unknown_keys(
      j, {"seed", "paths", "train_keys", "learner", "ablation", "cases", "baseline_L", "baseline_threshold", "storage_L"},
      "config");
  RunConfig c;
  c.base_dir = std::move(base_dir);
  c.seed = j.value("seed", std::uint64_t{0});
  if (!j.contains("paths")) throw Error(ErrorCode::Config, "config needs a paths block");
  const auto& p = j.at("paths");
  detail::reject_unknown_keys(p, {"spec", "dictionaries", "plan", "model", "output_dir", "sources"}, "paths");
  c.paths.spec = p.value("spec", std::string());
  c.paths.dictionaries = p.value("dictionaries", std::string());
  c.paths.plan = p.value("plan", std::string());
  c.paths.model = p.value("model", std::string());
  c.paths.output_dir = p.value("output_dir", std::string("out"));
  if (p.contains("sources")) c.paths.sources = p.at("sources").get<std::map<std::string, std::string>>();
  if (j.contains("train_keys")) c.train_keys = j.at("train_keys").get<std::vector<std::string>>();
  if (j.contains("learner")) c.learner = j.at("learner").get<LearnerConfig>();
  if (j.contains("ablation")) {
    const auto& a = j.at("ablation");
    detail::reject_unknown_keys(a, {"variants", "conditions", "synonym_dict"}, "ablation");
    if (a.contains("variants")) c.ablation.variants = a.at("variants").get<std::vector<TestVariant>>();
    if (a.contains("conditions")) c.ablation.conditions = a.at("conditions").get<std::vector<TrainingCondition>>();
    c.ablation.synonym_dict = a.value("synonym_dict", c.ablation.synonym_dict);
  }
  if (j.contains("cases")) {
    for (const auto& x : j.at("cases")) {
      detail::reject_unknown_keys(x, {"name", "spec", "sources"}, "cases[]");
      c.cases.push_back({x.at("name").get<std::string>(), x.at("spec").get<std::string>(),
                         x.at("sources").get<std::map<std::string, std::string>>()});
    }
  }
  c.baseline_L = j.value("baseline_L", c.baseline_L);
  c.baseline_threshold = j.value("baseline_threshold", c.baseline_threshold);
  c.storage_L = j.value("storage_L", c.storage_L);
  if (c.baseline_L == 0 || c.storage_L == 0) throw Error(ErrorCode::Config, "signature length must be positive");
  return c;
}

inline RunConfig load_run_config(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Config, "config " + path + ": " + e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::Config, e.what());
  }
  try {
    return parse_run_config(j, fs::path(path).parent_path());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Config, "config " + path + ": " + e.what());
  }
}

// Every seeded component draws from the single run seed.
struct RunSeeds {
  std::uint64_t plan = 0, learner = 0, test = 0, signatures = 0;
};

inline RunSeeds derive_seeds(std::uint64_t seed) {
  return {splitmix64(seed ^ 0x706c616eULL), splitmix64(seed ^ 0x6c726e72ULL), splitmix64(seed ^ 0x74657374ULL),
          splitmix64(seed ^ 0x6d696e68ULL)};
}

// ---------------------------------------------------------------------------
// Inputs

inline DictionarySet load_dictionaries(const std::string& dir) {
  DictionarySet d;
  if (dir.empty()) return d;
  if (!fs::is_directory(dir)) throw Error(ErrorCode::Io, "dictionary directory " + dir + " not found");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) d.add(load_dictionary(f.string()));
  return d;
}

inline std::vector<fixtures::SourceData> load_sources(const MappingSpec& spec,
                                                      const std::map<std::string, std::string>& files,
                                                      const std::function<std::string(const std::string&)>& resolve) {
  std::vector<fixtures::SourceData> out;
  for (const auto& sm : spec.sources) {
    const auto& id = sm.descriptor.source_id;
    auto it = files.find(id);
    if (it == files.end()) throw Error(ErrorCode::Config, "no file configured for source " + id);
    fixtures::SourceData s;
    s.desc = sm.descriptor;
    const std::string text = read_file(resolve(it->second));
    if (s.desc.format == SourceFormat::LogLines) s.log_text = text;
    else s.table = parse_csv(text);
    out.push_back(std::move(s));
  }
  return out;
}

struct Inputs {
  MappingSpec spec;
  DictionarySet dicts;
  std::vector<fixtures::SourceData> sources;

  fixtures::Scenario scenario(const std::vector<std::string>& train_keys) const {
    fixtures::Scenario sc;
    sc.spec = spec;
    sc.sources = sources;
    sc.train_keys = {train_keys.begin(), train_keys.end()};
    return sc;
  }
};

inline Inputs load_inputs(const RunConfig& cfg) {
  if (cfg.paths.spec.empty()) throw Error(ErrorCode::Config, "paths.spec is required");
  Inputs in;
  in.spec = load_mapping_spec(cfg.resolve(cfg.paths.spec));
  in.dicts = load_dictionaries(cfg.resolve(cfg.paths.dictionaries));
  in.sources = load_sources(in.spec, cfg.paths.sources, [&](const std::string& p) { return cfg.resolve(p); });
  return in;
}

// ---------------------------------------------------------------------------
// JSON lines

template <typename T>
std::string to_jsonl(const std::vector<T>& items) {
  std::string out;
  for (const auto& x : items) {
    out += nlohmann::json(x).dump();
    out += '\n';
  }
  return out;
}

template <typename T>
std::vector<T> from_jsonl(const std::string& text, const std::string& what) {
  std::vector<T> out;
  std::size_t line_no = 0;
  for (const auto& line : split_lines(text)) {
    ++line_no;
    if (trim_view(line).empty()) continue;
    try {
      out.push_back(nlohmann::json::parse(line).get<T>());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::Parse, what + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

inline std::vector<std::vector<SuperCell>> group_by_source(const MappingSpec& spec, const std::vector<SuperCell>& cells) {
  std::vector<std::vector<SuperCell>> out(spec.sources.size());
  for (const auto& c : cells) out.at(spec.source_index(c.source_id)).push_back(c);
  return out;
}

inline std::vector<SuperCell> flatten(const std::vector<std::vector<SuperCell>>& corpora) {
  std::vector<SuperCell> out;
  for (const auto& c : corpora) out.insert(out.end(), c.begin(), c.end());
  return out;
}

// ---------------------------------------------------------------------------
// In-process stages. The CLI wraps each one with file reads and writes.

inline std::vector<std::vector<SuperCell>> decompose_all(const Inputs& in, IngestStats* stats = nullptr) {
  std::vector<std::vector<SuperCell>> out;
  for (const auto& s : in.sources) out.push_back(fixtures::decompose_source(s, in.dicts, stats));
  return out;
}

inline std::vector<LabeledSample> training_samples(const RunConfig& cfg, const Inputs& in,
                                                   const std::vector<std::vector<SuperCell>>& corpora) {
  if (cfg.train_keys.empty()) return generate_training_data(in.spec, corpora, in.dicts);
  const std::set<std::string> keys(cfg.train_keys.begin(), cfg.train_keys.end());
  return generate_training_data(in.spec, fixtures::split(corpora, keys, true), in.dicts);
}

inline std::vector<LabeledSample> test_samples(const RunConfig& cfg, const Inputs& in,
                                               const std::vector<std::vector<SuperCell>>& corpora) {
  if (cfg.train_keys.empty()) return generate_training_data(in.spec, corpora, in.dicts);
  const std::set<std::string> keys(cfg.train_keys.begin(), cfg.train_keys.end());
  return generate_training_data(in.spec, fixtures::split(corpora, keys, false), in.dicts);
}

inline PerturbationPlan load_plan(const RunConfig& cfg) {
  PerturbationPlan plan;
  if (!cfg.paths.plan.empty()) {
    try {
      plan = nlohmann::json::parse(read_file(cfg.resolve(cfg.paths.plan))).get<PerturbationPlan>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::Config, "plan: " + std::string(e.what()));
    }
  }
  plan.seed = derive_seeds(cfg.seed).plan;
  return plan;
}

inline AugmentResult augment_stage(const RunConfig& cfg, const Inputs& in, const std::vector<LabeledSample>& train) {
  const DictionarySet key_dicts = in.spec.key_dictionaries(in.dicts);
  const AugmentContext ctx{&in.dicts, &key_dicts, in.spec.key_hierarchy ? &*in.spec.key_hierarchy : nullptr,
                           in.spec.target.q()};
  return augment(train, load_plan(cfg), ctx);
}

inline LearnerConfig learner_config(const RunConfig& cfg) {
  LearnerConfig l = cfg.learner;
  l.seed = derive_seeds(cfg.seed).learner;
  return l;
}

inline std::vector<std::string> key_dictionary_names(const MappingSpec& spec, const DictionarySet& dicts) {
  std::vector<std::string> names;
  for (const auto& [name, d] : spec.key_dictionaries(dicts).all()) names.push_back(name);
  return names;
}

inline TrainResult<float> train_stage(const RunConfig& cfg, const Inputs& in, const std::vector<LabeledSample>& samples,
                                      const std::function<void(const LossPoint&)>& on_epoch = {}) {
  return train<float>(samples, in.spec.target, learner_config(cfg), key_dictionary_names(in.spec, in.dicts), on_epoch);
}

// Model key dictionaries are looked up by name in the loaded set.
inline DictionarySet model_key_dictionaries(const Model<float>& m, const DictionarySet& dicts) {
  DictionarySet out;
  for (const auto& n : m.key_dictionaries) out.add(dicts.get(n));
  return out;
}

// decompose -> training data -> augment -> train -> integrate, all in
// memory; the reference for the file-mediated chain.
inline std::string end_to_end(const RunConfig& cfg, const Inputs& in) {
  const auto corpora = decompose_all(in);
  const auto train = training_samples(cfg, in, corpora);
  const auto aug = augment_stage(cfg, in, train);
  const auto trained = train_stage(cfg, in, aug.samples);
  const auto model = deserialize_model<float>(serialize_model(trained.model));
  return learned_integrate(model, corpora, model_key_dictionaries(model, in.dicts)).table.render();
}

// ---------------------------------------------------------------------------
// Evaluation suite

struct EvalOutputs {
  fs::path run_dir;
  AblationReport ablation;
  ComparisonReport comparison;
  StorageReport storage;
  TimingReport timings;
};

inline AblationConfig ablation_config(const RunConfig& cfg, std::size_t attribute_count) {
  AblationConfig a;
  const RunSeeds seeds = derive_seeds(cfg.seed);
  a.variants = cfg.ablation.variants.empty()
                   ? default_test_variants(seeds.test, attribute_count, cfg.ablation.synonym_dict)
                   : cfg.ablation.variants;
  for (auto& v : a.variants) v.plan.seed = splitmix64(seeds.test ^ fnv1a64(v.name));
  a.conditions = cfg.ablation.conditions.empty()
                     ? std::vector<TrainingCondition>{{"with_augmentation", true, "local"},
                                                      {"without_augmentation", false, "local"}}
                     : cfg.ablation.conditions;
  a.train_plan = load_plan(cfg);
  a.learner = learner_config(cfg);
  return a;
}

// The hash covers everything that determines the reports.
inline nlohmann::json effective_config_json(const RunConfig& cfg, const AblationConfig& a) {
  nlohmann::json cases = nlohmann::json::array();
  for (const auto& c : cfg.cases) cases.push_back({{"name", c.name}, {"spec", c.spec}, {"sources", c.sources}});
  return nlohmann::json{{"seed", cfg.seed},
                        {"spec", cfg.paths.spec},
                        {"sources", cfg.paths.sources},
                        {"train_keys", cfg.train_keys},
                        {"ablation", a},
                        {"cases", cases},
                        {"baseline_L", cfg.baseline_L},
                        {"baseline_threshold", cfg.baseline_threshold},
                        {"storage_L", cfg.storage_L}};
}

inline void write_eval_reports(const EvalOutputs& o) {
  write_file((o.run_dir / "ablation.csv").string(), ablation_csv(o.ablation));
  write_file((o.run_dir / "ablation.json").string(), ablation_json(o.ablation).dump(2) + "\n");
  if (!o.comparison.rows.empty()) {
    write_file((o.run_dir / "comparison.csv").string(), comparison_csv(o.comparison));
    write_file((o.run_dir / "comparison.json").string(), comparison_json(o.comparison).dump(2) + "\n");
  }
  write_file((o.run_dir / "storage.json").string(), storage_json(o.storage).dump(2) + "\n");
  for (std::size_t i = 0; i < o.ablation.loss_curves.size(); ++i)
    write_file((o.run_dir / ("loss_curve_" + std::to_string(i) + ".csv")).string(),
               render_loss_curve(o.ablation.loss_curves[i]));
  // wall-clock numbers live apart from the deterministic reports
  write_file((o.run_dir / "timings.json").string(), nlohmann::json(o.timings).dump(2) + "\n");
}

// Ablation over every training condition, then (if `compare`) the learner
// vs baseline comparison on the configured corpus plus extra cases, and the
// storage comparison. Reports land in <out>/run-<config hash>/.
inline EvalOutputs run_eval_suite(const RunConfig& cfg, const Inputs& in, bool compare) {
  EvalOutputs o;
  auto t0 = Clock::now();
  const auto corpora = decompose_all(in);
  std::size_t cells = 0;
  for (const auto& c : corpora) cells += c.size();
  o.timings.add("decompose", ms_since(t0), cells);
  const auto train = training_samples(cfg, in, corpora);
  const auto test = test_samples(cfg, in, corpora);
  std::vector<SuperCell> test_cells;
  for (const auto& s : test) test_cells.push_back(s.cell);
  const AblationConfig a = ablation_config(cfg, distinct_attributes(test_cells).size());
  o.run_dir = run_directory(cfg.resolve(cfg.paths.output_dir), effective_config_json(cfg, a));

  // the comparison uses the first augmented model, else the first model
  std::optional<Model<float>> model;
  bool augmented = false;
  o.ablation = run_ablation(a, {&in.spec, &in.dicts, &train, &test},
                            [&](const TrainingCondition& c, const Model<float>& m) {
                              if (!model || (c.with_augmentation && !augmented)) {
                                model = m;
                                augmented = c.with_augmentation;
                              }
                            });
  for (const auto& s : o.ablation.timings.stages) o.timings.stages.push_back(s);
  if (compare && model) {
    std::vector<ComparisonCase> cases{{"configured", in.scenario(cfg.train_keys)}};
    for (const auto& c : cfg.cases) {
      Inputs extra;
      extra.spec = load_mapping_spec(cfg.resolve(c.spec));
      extra.dicts = in.dicts;
      extra.sources = load_sources(extra.spec, c.sources, [&](const std::string& p) { return cfg.resolve(p); });
      cases.push_back({c.name, extra.scenario(cfg.train_keys)});
    }
    o.comparison = compare_baseline(cases, *model, in.dicts, cfg.baseline_L, derive_seeds(cfg.seed).signatures);
    for (const auto& s : o.comparison.timings.stages) o.timings.stages.push_back(s);
    std::size_t columns = 0;
    for (const auto& s : in.sources) columns += s.table.header.size();
    o.storage = storage_comparison(*model, columns, cfg.storage_L);
  }
  write_eval_reports(o);
  return o;
}

}  // namespace supercell
