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

// supercell: command-line driver for the integration pipeline.
//
//   decompose  sources -> supercells.jsonl
//   gen-train  supercells.jsonl -> train.jsonl, test.jsonl, oracle.csv
//   augment    train.jsonl -> augmented.jsonl, perturbation_log.jsonl
//   train      augmented.jsonl -> model.bin, loss_curve.csv
//   integrate  supercells.jsonl + model.bin -> integrated.csv
//   baseline   sources + oracle.csv -> baseline.csv, signatures
//   eval       ablation + baseline comparison + storage, under run-<hash>/
//   ablate     ablation only
//   gradcheck  analytic vs numeric gradients for both encoders
//
// Logs go to stderr; data goes to files under --out.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "supercell/pipeline.hpp"

namespace fs = std::filesystem;
using namespace supercell;

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string samples;  // train: alternative sample file
};

void log(const std::string& stage, const std::string& msg) { std::cerr << "supercell " << stage << ": " << msg << "\n"; }

RunConfig config_from(const Flags& f) {
  if (f.config.empty()) throw Error(ErrorCode::Config, "--config is required");
  RunConfig cfg = load_run_config(f.config);
  if (f.seed) cfg.seed = *f.seed;
  if (!f.out.empty()) cfg.paths.output_dir = fs::absolute(f.out).string();
  fs::create_directories(cfg.resolve(cfg.paths.output_dir));
  return cfg;
}

std::vector<SuperCell> read_cells(const RunConfig& cfg) {
  return from_jsonl<SuperCell>(read_file(cfg.out_path("supercells.jsonl")), "supercells.jsonl");
}

int cmd_decompose(const Flags& f) {
  const RunConfig cfg = config_from(f);
  const Inputs in = load_inputs(cfg);
  IngestStats stats;
  const auto cells = flatten(decompose_all(in, &stats));
  write_file(cfg.out_path("supercells.jsonl"), to_jsonl(cells));
  log("decompose", std::to_string(cells.size()) + " super cells -> " + cfg.out_path("supercells.jsonl"));
  return 0;
}

int cmd_gen_train(const Flags& f) {
  const RunConfig cfg = config_from(f);
  const Inputs in = load_inputs(cfg);
  const auto corpora = group_by_source(in.spec, read_cells(cfg));
  const auto consistency = consistency_check(in.spec, corpora, in.dicts);
  if (!consistency.ok())
    throw Error(ErrorCode::InvariantViolation,
                std::to_string(consistency.mismatches.size()) + " cells differ between labels and oracle");
  const auto train = training_samples(cfg, in, corpora);
  write_file(cfg.out_path("train.jsonl"), to_jsonl(train));
  if (!cfg.train_keys.empty()) write_file(cfg.out_path("test.jsonl"), to_jsonl(test_samples(cfg, in, corpora)));
  finalize_and_write(oracle_integrate(in.spec, corpora, in.dicts), cfg.out_path("oracle.csv"));
  log("gen-train", std::to_string(train.size()) + " training samples, oracle -> " + cfg.out_path("oracle.csv"));
  return 0;
}

int cmd_augment(const Flags& f) {
  const RunConfig cfg = config_from(f);
  const Inputs in = load_inputs(cfg);
  const auto train = from_jsonl<LabeledSample>(read_file(cfg.out_path("train.jsonl")), "train.jsonl");
  const auto aug = augment_stage(cfg, in, train);
  write_file(cfg.out_path("augmented.jsonl"), to_jsonl(aug.samples));
  write_file(cfg.out_path("perturbation_log.jsonl"), render_perturbation_log(aug.log));
  log("augment", std::to_string(train.size()) + " -> " + std::to_string(aug.samples.size()) + " samples");
  return 0;
}

int cmd_train(const Flags& f) {
  const RunConfig cfg = config_from(f);
  const Inputs in = load_inputs(cfg);
  const std::string path = f.samples.empty() ? cfg.out_path("augmented.jsonl") : f.samples;
  const auto samples = from_jsonl<LabeledSample>(read_file(path), path);
  const auto res = train_stage(cfg, in, samples, [](const LossPoint& p) {
    log("train", "epoch " + std::to_string(p.epoch) + " loss " + fixed6(p.loss) + " train_acc " + fixed6(p.train_acc));
  });
  save_model(res.model, cfg.model_path());
  write_file(cfg.out_path("loss_curve.csv"), render_loss_curve(res.curve));
  TimingReport t;
  for (std::size_t i = 0; i < res.epoch_ms.size(); ++i) t.add("epoch_" + std::to_string(i + 1), res.epoch_ms[i], samples.size());
  write_file(cfg.out_path("train_timings.json"), nlohmann::json(t).dump(2) + "\n");
  if (res.degenerate_heads) log("train", std::to_string(res.degenerate_heads) + " constant heads (single training class)");
  log("train", "model -> " + cfg.model_path());
  return 0;
}

int cmd_integrate(const Flags& f) {
  const RunConfig cfg = config_from(f);
  const Inputs in = load_inputs(cfg);
  const auto model = load_model<float>(cfg.model_path());
  const auto corpora = group_by_source(in.spec, read_cells(cfg));
  const auto res = learned_integrate(model, corpora, model_key_dictionaries(model, in.dicts));
  AssemblyReport report = finalize_and_write(res.table, cfg.out_path("integrated.csv"));
  report.build_ms += res.predict_ms + res.assemble_ms;
  write_file(cfg.out_path("assembly_report.json"), nlohmann::json(report).dump(2) + "\n");
  log("integrate", std::to_string(res.predicted) + " cells predicted, " + std::to_string(res.conflicts) +
                       " aggregation conflicts -> " + cfg.out_path("integrated.csv"));
  return 0;
}

int cmd_baseline(const Flags& f) {
  const RunConfig cfg = config_from(f);
  const Inputs in = load_inputs(cfg);
  const Table example = parse_csv(read_file(cfg.out_path("oracle.csv")));
  const auto sc = in.scenario(cfg.train_keys);
  const BaselineRun run = run_baseline(sc, example, in.dicts, cfg.baseline_L, derive_seeds(cfg.seed).signatures,
                                       cfg.baseline_threshold);
  nlohmann::json matches = nlohmann::json::object();
  for (const auto& [attr, m] : run.matches.best)
    matches[attr] = {{"source", m.source_id}, {"column", m.column}, {"score", fixed6(m.score)}};
  write_file(cfg.out_path("matches.json"),
             nlohmann::json{{"best", matches}, {"no_match", run.matches.no_match}, {"failure", run.failure}}.dump(2) +
                 "\n");
  std::vector<SignatureIndexEntry> index;
  std::vector<MinHashSignature> sigs;
  for (const auto& s : sc.sources) {
    if (s.desc.format == SourceFormat::LogLines) continue;
    const auto cols = index_source(s.desc.source_id, canonicalize_table(s.table, s.desc, &in.dicts), cfg.baseline_L,
                                   derive_seeds(cfg.seed).signatures);
    for (std::size_t c = 0; c < cols.columns.size(); ++c) {
      if (!cols.signatures[c]) continue;
      index.push_back({cols.source_id, cols.columns[c], cfg.baseline_L, derive_seeds(cfg.seed).signatures});
      sigs.push_back(*cols.signatures[c]);
    }
  }
  write_signature_store(index, sigs, cfg.out_path("signatures.bin"), cfg.out_path("signatures.json"));
  if (!run.table) {
    log("baseline", "integration failed: " + run.failure + " (unmatched: " + join(run.matches.no_match, ", ") + ")");
    return exit_code_for(ErrorCode::UncoverableAttribute);
  }
  finalize_and_write(*run.table, cfg.out_path("baseline.csv"));
  log("baseline", "-> " + cfg.out_path("baseline.csv"));
  return 0;
}

int cmd_eval(const Flags& f, bool compare) {
  const RunConfig cfg = config_from(f);
  const Inputs in = load_inputs(cfg);
  const EvalOutputs o = run_eval_suite(cfg, in, compare);
  std::cout << ablation_csv(o.ablation);
  if (compare) std::cout << comparison_csv(o.comparison);
  log(compare ? "eval" : "ablate", "reports -> " + o.run_dir.string());
  return 0;
}

int cmd_gradcheck(const Flags& f) {
  const std::uint64_t seed = f.seed.value_or(0);
  nlohmann::json out = nlohmann::json::array();
  double worst = 0;
  for (Encoder e : {Encoder::Pooled, Encoder::BiRecurrent}) {
    for (std::uint64_t i = 0; i < 20; ++i) {
      const auto r = gradient_check(e, splitmix64(seed + i));
      worst = std::max(worst, r.max_rel_error);
      out.push_back({{"encoder", to_string(e)}, {"model", i}, {"max_rel_error", r.max_rel_error},
                     {"max_abs_diff", r.max_abs_diff}, {"params", r.params}});
    }
  }
  if (!f.out.empty()) {
    fs::create_directories(f.out);
    write_file((fs::path(f.out) / "gradcheck.json").string(), out.dump(2) + "\n");
  }
  log("gradcheck", "max relative error " + std::to_string(worst));
  if (!(worst < 1e-3)) throw Error(ErrorCode::InvariantViolation, "gradient check exceeded 1e-3");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"supercell: learned data integration over super cells"};
  app.require_subcommand(1);
  Flags flags;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"decompose", "split sources into super cells"},
      {"gen-train", "label super cells from the mapping spec and write the oracle table"},
      {"augment", "apply the perturbation plan to the training samples"},
      {"train", "train the target-position model"},
      {"integrate", "predict positions and assemble the target table"},
      {"baseline", "MinHash column matching and equi-join baseline"},
      {"eval", "ablation, baseline comparison and storage reports"},
      {"ablate", "ablation report only"},
      {"gradcheck", "finite-difference gradient verification"}};
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", flags.config, "run configuration JSON");
    sub->add_option("--seed", flags.seed, "run seed (overrides the config)");
    sub->add_option("--out", flags.out, "output directory (overrides the config)");
    if (name == "train") sub->add_option("--samples", flags.samples, "training samples JSONL");
    subs[name] = sub;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 1;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    if (cmd == "decompose") return cmd_decompose(flags);
    if (cmd == "gen-train") return cmd_gen_train(flags);
    if (cmd == "augment") return cmd_augment(flags);
    if (cmd == "train") return cmd_train(flags);
    if (cmd == "integrate") return cmd_integrate(flags);
    if (cmd == "baseline") return cmd_baseline(flags);
    if (cmd == "eval") return cmd_eval(flags, true);
    if (cmd == "ablate") return cmd_eval(flags, false);
    if (cmd == "gradcheck") return cmd_gradcheck(flags);
  } catch (const Error& e) {
    std::cerr << "supercell " << cmd << ": " << e.what() << "\n";
    if (e.code() == ErrorCode::Config) std::cerr << "\n" << subs[cmd]->help();
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "supercell " << cmd << ": internal error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}
