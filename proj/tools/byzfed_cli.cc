/*
 * Copyright 2026 The byzfed Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Command-line front end: run an experiment, calibrate blame thresholds,
// produce the message-complexity report, or dump a resolved configuration.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "byzfed/error.h"
#include "byzfed/harness.h"

namespace {

struct Common {
  std::string config;
  std::string preset;
  uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir;
};

void AddCommon(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "INI configuration file");
  app->add_option("--preset", c.preset, "built-in preset to start from");
  app->add_option("--seed", c.seed, "root seed (overrides the config)")
      ->each([&c](const std::string&) { c.seed_set = true; });
  app->add_option("--out-dir", c.out_dir, "directory for CSV and JSON outputs");
}

byzfed::RunConfig Resolve(const Common& c) {
  byzfed::RunConfig cfg = c.preset.empty() ? byzfed::RunConfig{} : byzfed::Preset(c.preset);
  if (!c.config.empty()) cfg = byzfed::LoadConfig(c.config, cfg);
  if (c.seed_set) cfg.sim.seed = c.seed;
  return cfg;
}

int Run(const Common& c) {
  byzfed::ExperimentResult r = byzfed::RunExperiment(Resolve(c), c.out_dir);
  std::cout << byzfed::SummaryJson(r) << "\n";
  for (const auto& v : r.violations) std::cerr << "violation: " << v << "\n";
  return r.violations.empty() ? 0 : 1;
}

int Calibrate(const Common& c) {
  byzfed::RunConfig cfg = Resolve(c);
  byzfed::BlameCalibration b = byzfed::CalibrateBlameFor(cfg);
  cfg.sim.params.blame = b.params;
  cfg.blame_given = true;
  std::printf("expected_var = %.6g\nsec_param = %.6g\ndelta_max = %.6g\n"
              "false_blame_rate = %.6g over %llu checks\n",
              b.params.expected_var, b.params.sec_param, b.params.delta_max, b.false_blame_rate,
              static_cast<unsigned long long>(b.checks));
  const std::string path = (c.out_dir.empty() ? std::string(".") : c.out_dir) + "/calibrated.ini";
  if (!c.out_dir.empty()) std::filesystem::create_directories(c.out_dir);
  byzfed::SaveConfig(cfg, path);
  std::printf("wrote %s\n", path.c_str());
  return 0;
}

int Report(const Common& c, const std::vector<uint32_t>& sizes,
           const std::vector<uint32_t>& n_as, uint32_t horizon) {
  Common base = c;
  if (base.preset.empty()) base.preset = "complexity";
  const byzfed::RunConfig resolved = Resolve(base);
  std::vector<byzfed::ComplexitySample> samples;
  for (uint32_t n_a : n_as) {
    for (uint32_t n : sizes) {
      byzfed::RunConfig cfg = byzfed::ComplexityConfig(resolved, n, n_a, horizon);
      byzfed::ExperimentResult r = byzfed::RunExperiment(cfg);
      if (!r.violations.empty()) {
        for (const auto& v : r.violations) std::cerr << "violation: " << v << "\n";
        return 1;
      }
      samples.push_back(byzfed::MeasureComplexity(r.prepared.cfg.sim.params, r.metrics.messages,
                                                  r.sim.honest));
    }
  }
  byzfed::ComplexityReport rep = byzfed::BuildComplexityReport(samples);
  std::cout << rep.text;
  if (!c.out_dir.empty()) {
    std::filesystem::create_directories(c.out_dir);
    std::ofstream(c.out_dir + "/complexity.txt") << rep.text;
  }
  std::cout << (rep.client_ok && rep.aggregator_ok ? "PASS" : "FAIL") << "\n";
  return rep.client_ok && rep.aggregator_ok ? 0 : 1;
}

int WriteConfig(const Common& c, const std::string& output) {
  const byzfed::RunConfig cfg = Resolve(c);
  if (output.empty() || output == "-") {
    const std::string tmp = (std::filesystem::temp_directory_path() / "byzfed_config.ini").string();
    byzfed::SaveConfig(cfg, tmp);
    std::cout << std::ifstream(tmp).rdbuf();
    std::filesystem::remove(tmp);
  } else {
    byzfed::SaveConfig(cfg, output);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Byzantine-resilient private federated learning simulator"};
  app.require_subcommand(1);
  Common common;

  CLI::App* run = app.add_subcommand("run", "run one experiment");
  AddCommon(run, common);
  CLI::App* cal = app.add_subcommand("calibrate", "calibrate blame thresholds");
  AddCommon(cal, common);
  CLI::App* rep = app.add_subcommand("report", "message-complexity sweep");
  AddCommon(rep, common);
  std::vector<uint32_t> sizes{60, 120, 240};
  std::vector<uint32_t> n_as{4, 7};
  uint32_t horizon = 3;
  rep->add_option("--sizes", sizes, "client counts to sweep");
  rep->add_option("--n-a", n_as, "aggregator counts to sweep");
  rep->add_option("--rounds", horizon, "rounds per run");
  CLI::App* conf = app.add_subcommand("config", "print or write the resolved configuration");
  AddCommon(conf, common);
  std::string conf_out;
  conf->add_option("-o,--output", conf_out, "file to write (default: stdout)");
  app.add_subcommand("presets", "list built-in presets");

  CLI11_PARSE(app, argc, argv);
  try {
    if (app.got_subcommand("presets")) {
      for (const auto& n : byzfed::PresetNames()) std::cout << n << "\n";
      return 0;
    }
    if (run->parsed()) return Run(common);
    if (cal->parsed()) return Calibrate(common);
    if (rep->parsed()) return Report(common, sizes, n_as, horizon);
    if (conf->parsed()) return WriteConfig(common, conf_out);
  } catch (const byzfed::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
