/*
 * Copyright 2026 The fabricsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fabricsim/engine.hpp"
#include "fabricsim/error.hpp"
#include "fabricsim/metrics.hpp"
#include "fabricsim/scenario.hpp"
#include "fabricsim/sweep.hpp"

namespace {

using fabricsim::ScenarioConfig;

struct CommonOpts {
  std::string config_path;
  std::optional<uint64_t> seed;
  std::optional<int> nodes;
  std::string coordination;  // "", "on", "off"
  std::string out_path;
  std::string format = "json";
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_format,
                bool with_nodes = true) {
  cmd->add_option("--config", o.config_path, "Scenario JSON file");
  cmd->add_option("--seed", o.seed, "Override the run seed");
  if (with_nodes)
    cmd->add_option("--nodes", o.nodes, "Override topology.nodes")
        ->check(CLI::PositiveNumber);
  cmd->add_option("--coordination", o.coordination,
                  "Force pacing on or off")
      ->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--out", o.out_path, "Output file (default: stdout)");
  if (with_format)
    cmd->add_option("--format", o.format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}));
}

/// Seed priority: --seed, then the config file's value, then the
/// FABRICSIM_SEED environment variable, then the built-in default.
ScenarioConfig load_config(const CommonOpts& o) {
  nlohmann::json j = nlohmann::json::object();
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in)
      throw fabricsim::ConfigError(
          "", "cannot open scenario file: " + o.config_path);
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw fabricsim::ConfigError(
          "", "invalid JSON in " + o.config_path + ": " + e.what());
    }
  }
  ScenarioConfig s = fabricsim::parse_scenario(j);
  if (o.seed) {
    s.seed = *o.seed;
  } else if (!j.contains("seed")) {
    if (const char* env = std::getenv("FABRICSIM_SEED")) {
      char* end = nullptr;
      unsigned long long v = std::strtoull(env, &end, 10);
      if (end == env || *end != '\0')
        throw fabricsim::ConfigError("FABRICSIM_SEED",
                                     "not a valid unsigned integer");
      s.seed = v;
    }
  }
  if (o.nodes) s.topology.nodes = *o.nodes;
  if (!o.coordination.empty()) s.coordination.enabled = o.coordination == "on";
  // Re-validate after overrides.
  fabricsim::build_topology(s.topology);
  return s;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw fabricsim::ConfigError("", "cannot write to " + path);
  out << text;
}

std::string metrics_csv(const fabricsim::RunMetrics& m) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%.10g,%.10g,%.10g\n",
                m.mean_iter_s, m.throughput_sps, m.cv, m.p95_s, m.p99_s);
  return std::string("mean_iter_s,throughput_sps,cv,p95_s,p99_s\n") + buf;
}

nlohmann::ordered_json metrics_json(const fabricsim::RunMetrics& m) {
  nlohmann::ordered_json j;
  j["measured_iterations"] = m.measured_iterations;
  j["mean_iter_s"] = m.mean_iter_s;
  j["throughput_sps"] = m.throughput_sps;
  j["cv"] = m.cv;
  j["p95_s"] = m.p95_s;
  j["p99_s"] = m.p99_s;
  return j;
}

int cmd_run(const CommonOpts& o) {
  ScenarioConfig s = load_config(o);
  fabricsim::RunResult result = fabricsim::run_simulation(s);
  fabricsim::RunMetrics m = fabricsim::compute_metrics(result);
  if (o.format == "csv") {
    emit(o.out_path, metrics_csv(m));
  } else {
    nlohmann::ordered_json j;
    j["metrics"] = metrics_json(m);
    j["run"] = fabricsim::result_to_json(result);
    emit(o.out_path, j.dump(2) + "\n");
  }
  return 0;
}

int cmd_analyze(const CommonOpts& o) {
  ScenarioConfig s = load_config(o);
  fabricsim::RunResult result = fabricsim::run_simulation(s);
  fabricsim::RunMetrics m = fabricsim::compute_metrics(result);
  fabricsim::FailureScores sc = fabricsim::failure_scores(result);
  fabricsim::FailureFlags fl = fabricsim::classify(sc);
  nlohmann::ordered_json j;
  j["metrics"] = metrics_json(m);
  nlohmann::ordered_json scores;
  scores["synchronization_amplification"] = sc.synchronization_amplification;
  scores["fabric_contention"] = sc.fabric_contention;
  scores["locality_imbalance"] = sc.locality_imbalance;
  scores["runtime_variance"] = sc.runtime_variance;
  j["scores"] = std::move(scores);
  nlohmann::ordered_json flags;
  flags["synchronization_amplification"] = fl.synchronization_amplification;
  flags["fabric_contention"] = fl.fabric_contention;
  flags["locality_imbalance"] = fl.locality_imbalance;
  flags["runtime_variance"] = fl.runtime_variance;
  j["flags"] = std::move(flags);
  emit(o.out_path, j.dump(2) + "\n");
  return 0;
}

int cmd_timeline(const CommonOpts& o) {
  ScenarioConfig s = load_config(o);
  fabricsim::RunResult result = fabricsim::run_simulation(s);
  emit(o.out_path, fabricsim::export_timeline(result).dump(2) + "\n");
  return 0;
}

int cmd_sweep(const CommonOpts& o, const std::vector<int>& nodes, int repeats,
              bool quiet) {
  fabricsim::SweepSpec spec;
  spec.base = load_config(o);
  spec.node_counts = nodes.empty() ? std::vector<int>{4, 8, 16, 32, 64} : nodes;
  spec.repeats = repeats;
  if (o.coordination == "on") spec.run_baseline = false;
  if (o.coordination == "off") spec.run_coordination = false;
  auto progress = [&](const fabricsim::SweepRow& row) {
    if (quiet) return;
    std::cerr << "sweep: nodes=" << row.nodes << " variant=" << row.variant
              << (row.repeat < 0 ? " mean" : " repeat=" + std::to_string(row.repeat))
              << " throughput=" << row.metrics.throughput_sps << "\n";
  };
  fabricsim::SweepResult result = fabricsim::run_sweep(spec, progress);
  if (o.format == "csv") {
    std::ostringstream csv;
    fabricsim::write_sweep_csv(result, csv);
    emit(o.out_path, csv.str());
  } else {
    emit(o.out_path, fabricsim::sweep_to_json(result).dump(2) + "\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "fabricsim: discrete-event simulator of synchronous data-parallel "
      "training on leaf/spine fabrics"};
  app.require_subcommand(1);

  CommonOpts run_opts, sweep_opts, analyze_opts, timeline_opts;
  std::vector<int> sweep_nodes;
  int sweep_repeats = 10;
  bool sweep_quiet = false;

  CLI::App* run = app.add_subcommand("run", "Simulate one scenario");
  add_common(run, run_opts, true);

  CLI::App* sweep =
      app.add_subcommand("sweep", "Scale a scenario over node counts");
  add_common(sweep, sweep_opts, true, /*with_nodes=*/false);
  sweep
      ->add_option("--nodes", sweep_nodes,
                   "Node counts to sweep (default: 4,8,16,32,64)")
      ->delimiter(',');
  sweep->add_option("--repeats", sweep_repeats, "Seeds per grid cell")
      ->check(CLI::PositiveNumber);
  sweep->add_flag("--quiet", sweep_quiet, "Suppress progress on stderr");

  CLI::App* analyze =
      app.add_subcommand("analyze", "Run and classify failure modes");
  add_common(analyze, analyze_opts, false);

  CLI::App* timeline =
      app.add_subcommand("timeline", "Export per-rank phase spans");
  add_common(timeline, timeline_opts, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_opts);
    if (sweep->parsed())
      return cmd_sweep(sweep_opts, sweep_nodes, sweep_repeats, sweep_quiet);
    if (analyze->parsed()) return cmd_analyze(analyze_opts);
    if (timeline->parsed()) return cmd_timeline(timeline_opts);
  } catch (const fabricsim::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
