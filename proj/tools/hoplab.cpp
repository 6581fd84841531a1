// Copyright (c) 2026, hoplab authors
// SPDX-License-Identifier: Apache-2.0
//
// hoplab: sequential fine-tuning experiments from the command line.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hoplab/bench.hpp"
#include "hoplab/config.hpp"
#include "hoplab/report.hpp"
#include "hoplab/run.hpp"

namespace fs = std::filesystem;
using namespace hoplab;

namespace {

struct GlobalFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool force = false;
  bool resume = false;
  std::vector<std::string> set;
};

RunConfig resolve_config(const GlobalFlags& g) {
  RunConfig config;
  if (!g.config.empty()) {
    config = load_run_config(g.config);
  } else if (g.resume && !g.out.empty() && fs::exists(fs::path(g.out) / "config.snapshot")) {
    config = load_run_snapshot(g.out);
  }
  for (const std::string& kv : g.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    set_config_value(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (g.seed) config.seed = *g.seed;
  config.validate();
  return config;
}

std::string require_out(const GlobalFlags& g, const char* command) {
  if (g.out.empty()) throw ConfigError(std::string(command) + " needs --out");
  return g.out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequential fine-tuning with layer-wise learning-rate decay and translation "
               "augmentation"};
  app.require_subcommand(1);
  GlobalFlags g;
  app.add_option("--config", g.config, "Run configuration file (key = value lines)");
  app.add_option("--seed", g.seed, "Override the run seed");
  app.add_option("--out", g.out, "Output directory (or file for build-sequence)");
  app.add_flag("--force", g.force, "Overwrite existing output");
  app.add_flag("--resume", g.resume, "Continue a run after its last completed hop");
  app.add_option("--set", g.set, "Override one config key, key=value (repeatable)");

  auto* gen = app.add_subcommand("gen-corpus", "Write the corpus dump to --out");
  auto* seq = app.add_subcommand("build-sequence", "Write a hop sequence file to --out");
  auto* run = app.add_subcommand("run", "Run one sequence into the run directory --out");
  bool quiet = false;
  run->add_flag("--quiet", quiet, "Do not print per-hop progress");

  auto* report = app.add_subcommand("report", "Summary table and plots for run directories");
  std::vector<std::string> run_dirs;
  report->add_option("runs", run_dirs, "Run directories")->required();

  auto* bench = app.add_subcommand("bench", "Run an experiment suite into --out");
  std::string suite_path;
  std::size_t jobs = 1;
  bool no_sweep = false;
  bench->add_option("--suite", suite_path, "Suite definition file")->required();
  bench->add_option("--jobs", jobs, "Runs executed in parallel")->check(CLI::PositiveNumber);
  bench->add_flag("--no-sweep", no_sweep, "Skip the decay-factor sweep");
  bench->add_flag("--quiet", quiet, "Only print the final tables");

  for (CLI::App* sub : {gen, seq, run, report, bench}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      cmd_gen_corpus(resolve_config(g), require_out(g, "gen-corpus"), g.force);
    } else if (*seq) {
      cmd_build_sequence(resolve_config(g), require_out(g, "build-sequence"), g.force);
    } else if (*run) {
      RunOptions options;
      options.force = g.force;
      options.resume = g.resume;
      options.log = quiet ? nullptr : &std::cout;
      const RunOutcome outcome = cmd_run(resolve_config(g), require_out(g, "run"), options);
      std::cout << read_file(fs::path(g.out) / "summary.txt");
      (void)outcome;
    } else if (*report) {
      std::vector<fs::path> dirs(run_dirs.begin(), run_dirs.end());
      std::cout << cmd_report(dirs, g.out.empty() ? fs::path("report") : fs::path(g.out));
    } else if (*bench) {
      const BenchSuite suite = load_suite(suite_path);
      SuiteOptions options;
      options.jobs = jobs;
      options.sweep = !no_sweep;
      options.log = quiet ? nullptr : &std::cerr;
      const fs::path out = g.out.empty() ? fs::path("bench") / suite.name : fs::path(g.out);
      const SuiteReport result = run_suite(suite, out, options);
      std::cout << comparison_table_text(result.runs);
      if (options.sweep && !suite.zeta_sweep.empty()) std::cout << '\n' << zeta_sweep_text(result.sweep);
      for (const SuiteRunStatus& r : result.runs) {
        if (!r.ok) return 1;
      }
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
