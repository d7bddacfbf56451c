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

// Writes the synthetic fixtures (sources, mapping specs, plans, run configs
// and dictionaries) used by the examples and the README walkthrough.

#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "supercell/fixtures.hpp"
#include "supercell/pipeline.hpp"

namespace fs = std::filesystem;
using namespace supercell;

namespace {

void write_json(const fs::path& p, const nlohmann::json& j) { write_file(p.string(), j.dump(2) + "\n"); }

nlohmann::json default_learner() {
  LearnerConfig l;
  l.buckets = 4096;
  l.dim = 32;
  l.hidden = 64;
  l.batch = 32;
  l.lr = 0.003;
  l.epochs = 5;
  return l;
}

PerturbationPlan default_plan(const std::string& synonyms, bool expansion) {
  PerturbationPlan p;
  p.attr_rename_rate = 0.583;
  p.char_noise_rate = 0.1;
  p.value_reformat_rate = 0.3;
  p.key_expansion_rate = expansion ? 0.186 : 0.0;
  p.pivot_enabled = true;
  p.add_remove_noise_columns = 2;
  p.synonym_dict = synonyms;
  return p;
}

// Sources, spec and plan of one scenario; returns the source file map.
std::map<std::string, std::string> write_scenario(const fs::path& dir, const fixtures::Scenario& sc,
                                                  const std::string& prefix = "") {
  fs::create_directories(dir);
  std::map<std::string, std::string> files;
  for (const auto& s : sc.sources) {
    const bool log = s.desc.format == SourceFormat::LogLines;
    const std::string name = prefix + s.desc.source_id + (log ? ".log" : ".csv");
    write_file((dir / name).string(), log ? s.log_text : render_csv(s.table));
    files[s.desc.source_id] = name;
  }
  write_json(dir / (prefix + "spec.json"), sc.spec);
  return files;
}

void write_config(const fs::path& dir, const std::map<std::string, std::string>& files, const fixtures::Scenario& sc,
                  const std::string& name, nlohmann::json extra = nlohmann::json::object()) {
  nlohmann::json cfg{{"seed", 1},
                     {"paths",
                      {{"spec", "spec.json"},
                       {"dictionaries", "../dictionaries"},
                       {"plan", "plan.json"},
                       {"output_dir", "../../runs/" + name},
                       {"sources", files}}},
                     {"train_keys", std::vector<std::string>(sc.train_keys.begin(), sc.train_keys.end())},
                     {"learner", default_learner()}};
  for (auto it = extra.begin(); it != extra.end(); ++it) cfg[it.key()] = it.value();
  write_json(dir / "config.json", cfg);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Writes the synthetic fixture corpora"};
  std::string out = "data";
  app.add_option("--out", out, "output directory")->capture_default_str();
  CLI11_PARSE(app, argc, argv);
  try {
    const fs::path root(out);
    fs::create_directories(root / "dictionaries");
    write_json(root / "dictionaries" / "us_states.json", fixtures::us_states_groups());
    write_json(root / "dictionaries" / "countries.json", fixtures::countries_groups());
    write_json(root / "dictionaries" / "attributes.json", fixtures::attributes_groups());
    write_json(root / "dictionaries" / "os_log_terms.json", fixtures::os_log_terms_groups());

    const auto covid = fixtures::covid_scenario();
    const auto covid_files = write_scenario(root / "covid", covid);
    const auto pivoted = fixtures::covid_pivoted_scenario();
    auto pivoted_files = write_scenario(root / "covid", pivoted, "pivoted_");
    write_json(root / "covid" / "plan.json", default_plan("attributes", true));
    write_config(root / "covid", covid_files, covid, "covid",
                 {{"cases", nlohmann::json::array({{{"name", "pivoted"},
                                                    {"spec", "pivoted_spec.json"},
                                                    {"sources", pivoted_files}}})}});

    const auto logs = fixtures::machine_log_scenario();
    const auto log_files = write_scenario(root / "machine_logs", logs);
    write_json(root / "machine_logs" / "plan.json", default_plan("os_log_terms", false));
    write_config(root / "machine_logs", log_files, logs, "machine_logs",
                 {{"ablation", {{"synonym_dict", "os_log_terms"}}}});

    const auto wide = fixtures::wide_table_scenario();
    const auto wide_files = write_scenario(root / "wide", wide);
    write_json(root / "wide" / "plan.json", default_plan("attributes", false));
    write_config(root / "wide", wide_files, wide, "wide");
    std::cerr << "make_fixtures: wrote " << root.string() << "\n";
  } catch (const Error& e) {
    std::cerr << "make_fixtures: " << e.what() << "\n";
    return exit_code_for(e.code());
  }
  return 0;
}
