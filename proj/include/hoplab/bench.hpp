// Copyright (c) 2026, hoplab authors
// SPDX-License-Identifier: Apache-2.0
//
// Experiment suites: a shared base configuration plus named members that may
// only change the method, the decay factor, the sequence and the run seed.
//
// Suite file:
//
//   [suite]
//   name = default
//   zeta_sweep = 0.38, 0.5, 0.75, 0.85, 0.95, 1.0
//   sweep_category = books          # optional, first category otherwise
//
//   [base]
//   corpus.num_langs = 4
//   ...
//
//   [run s1-seqft]
//   method = seqft
//   sequence.seed = 101
//   seed = 1001

#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hoplab/config.hpp"
#include "hoplab/metrics.hpp"

namespace hoplab {

struct SuiteMember {
  std::string name;
  std::vector<std::pair<std::string, std::string>> overrides;
  RunConfig config;  // base with overrides applied
};

struct BenchSuite {
  std::string name;
  std::vector<double> zeta_sweep = {0.38, 0.5, 0.75, 0.85, 0.95, 1.0};
  std::string sweep_category;
  RunConfig base;
  std::vector<SuiteMember> members;
};

// Keys a member section may set.
const std::vector<std::string_view>& member_override_keys();

BenchSuite parse_suite(std::string_view text, std::string_view where = "suite");
BenchSuite load_suite(const std::filesystem::path& path);

struct SuiteRunStatus {
  std::string name;
  std::string method;
  std::string sequence;  // sequence file or "seed-<n>"
  double zeta = 1.0;     // decay actually applied
  bool ok = false;
  std::string error;
  std::size_t hops = 0;
  RunSummary summary;
  std::size_t collapsed_hops = 0;
};

// Single-hop fine-tunes from M0, one per language on a fixed category, scored
// by the mean F1 over every test set.
struct ZetaSweep {
  std::vector<double> zetas;
  std::vector<std::string> rows;         // "lang-category"
  std::vector<std::vector<double>> f1;   // [row][zeta]
  std::vector<double> mean;              // per zeta, over rows
};

ZetaSweep run_zeta_sweep(const RunConfig& base, std::span<const double> zetas,
                         std::string_view category, std::ostream* log = nullptr);

struct SuiteReport {
  std::vector<SuiteRunStatus> runs;
  ZetaSweep sweep;
};

struct SuiteOptions {
  std::size_t jobs = 1;
  bool sweep = true;
  std::ostream* log = nullptr;
};

// Runs (or resumes, or reuses) every member under out_dir/runs/<name>, then
// writes comparison.{txt,json}, zeta_sweep.{txt,json} and plots/<name>.svg.
// A failing member is recorded and the remaining members still run.
SuiteReport run_suite(const BenchSuite& suite, const std::filesystem::path& out_dir,
                      const SuiteOptions& options = {});

std::string comparison_table_text(std::span<const SuiteRunStatus> runs);
std::string zeta_sweep_text(const ZetaSweep& sweep);

}  // namespace hoplab
