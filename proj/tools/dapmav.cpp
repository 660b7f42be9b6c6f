// Copyright 2026 The DAPMAV Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dapmav/pipeline.hpp"

namespace {

struct Overrides {
  std::optional<std::string> output_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> sample_n;
  std::optional<std::size_t> min_tokens;
  std::optional<std::size_t> min_count;
  std::optional<std::string> stoplist;
  std::optional<std::string> lexicon;
  std::optional<std::string> labels;
  std::optional<std::uint32_t> n_restarts;
  std::optional<std::uint32_t> sweeps;
  std::optional<std::string> layout_method;
};

void apply(const Overrides& o, dapmav::PipelineConfig& cfg) {
  if (o.output_dir) cfg.output_dir = *o.output_dir;
  if (o.seed) {
    cfg.seed = *o.seed;
    cfg.fit.seed = *o.seed;
  }
  if (o.sample_n) cfg.sample_n = *o.sample_n;
  if (o.min_tokens) cfg.min_tokens = *o.min_tokens;
  if (o.min_count) cfg.min_count = *o.min_count;
  if (o.stoplist) cfg.stoplist_path = *o.stoplist;
  if (o.lexicon) cfg.lexicon_path = *o.lexicon;
  if (o.labels) cfg.labels_path = *o.labels;
  if (o.n_restarts) cfg.fit.n_restarts = *o.n_restarts;
  if (o.sweeps) cfg.fit.sweeps = *o.sweeps;
  if (o.layout_method) cfg.layout_method = *o.layout_method;
}

void add_common_options(CLI::App* cmd, std::string& config_path,
                        Overrides& overrides, bool& force) {
  cmd->add_option("-c,--config", config_path, "pipeline config (TOML)")
      ->required();
  cmd->add_option("--output-dir", overrides.output_dir,
                  "override paths.output_dir");
  cmd->add_option("--seed", overrides.seed, "override thresholds.seed");
  cmd->add_option("--sample-n", overrides.sample_n,
                  "override thresholds.sample_n (0 keeps everything)");
  cmd->add_option("--min-tokens", overrides.min_tokens,
                  "override thresholds.min_tokens");
  cmd->add_option("--min-count", overrides.min_count,
                  "override thresholds.min_count");
  cmd->add_option("--stoplist", overrides.stoplist,
                  "override paths.stoplist (empty uses the bundled list)");
  cmd->add_option("--lexicon", overrides.lexicon, "override paths.lexicon");
  cmd->add_option("--labels", overrides.labels,
                  "override paths.labels (topic_id,label CSV)");
  cmd->add_option("--n-restarts", overrides.n_restarts,
                  "override model.n_restarts");
  cmd->add_option("--sweeps", overrides.sweeps, "override model.sweeps");
  cmd->add_option("--layout-method", overrides.layout_method,
                  "override layout.method: 'mds' (default; deterministic, "
                  "preserves global structure) or 'sne' (neighbour "
                  "embedding for local structure)");
  cmd->add_flag("--force", force,
                "run even when manifest hashes flag stale upstream artifacts");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "dapmav: discourse analysis pipeline "
      "(acquire -> preprocess -> model -> analyse -> visualise).\n"
      "Topic landscape layout uses classical MDS by default; pick "
      "--layout-method sne for a neighbour-embedding layout that favours "
      "local structure over global distances."};
  app.require_subcommand(1);

  std::string config_path;
  Overrides overrides;
  bool force = false;

  const std::vector<std::string> stage_commands = {
      "acquire", "preprocess", "model", "analyse", "visualise"};
  for (const std::string& name : stage_commands) {
    CLI::App* cmd = app.add_subcommand(name, "run the " + name + " stage");
    add_common_options(cmd, config_path, overrides, force);
  }
  CLI::App* run_all_cmd =
      app.add_subcommand("run-all", "run all five stages in order");
  add_common_options(run_all_cmd, config_path, overrides, force);
  CLI::App* stats_cmd = app.add_subcommand(
      "stats", "print corpus statistics for the processed corpus");
  add_common_options(stats_cmd, config_path, overrides, force);

  CLI11_PARSE(app, argc, argv);

  try {
    dapmav::PipelineConfig cfg = dapmav::load_config(config_path);
    apply(overrides, cfg);
    const std::string sub = app.get_subcommands().front()->get_name();
    if (sub == "run-all") {
      dapmav::run_all(cfg, force);
      std::cout << "bundle written to " << cfg.output_dir.string() << "\n";
    } else if (sub == "stats") {
      std::cout << dapmav::stats_report(cfg).dump(2) << "\n";
    } else {
      dapmav::run_stage(dapmav::stage_from_string(sub), cfg, force);
      std::cout << sub << " done\n";
    }
    return 0;
  } catch (const dapmav::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const dapmav::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const dapmav::StageDependencyError& e) {
    std::cerr << "stage error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
