// Copyright (c) 2026, hoplab authors
// SPDX-License-Identifier: Apache-2.0
//
// Read-only reporting over run directories: a fixed-width summary table and
// one hop-wise SVG plot per run.

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hoplab/config.hpp"
#include "hoplab/metrics.hpp"

namespace hoplab {

struct SummaryRow {
  std::string name;
  std::string method;
  std::size_t hops = 0;
  RunSummary summary;
  std::size_t collapsed_hops = 0;
};

// One row per run; metric columns x100 with two decimals.
std::string summary_table_text(std::span<const SummaryRow> rows);

struct RunData {
  std::string name;
  RunConfig config;
  std::vector<std::string> lang_names;
  std::vector<std::string> category_names;
  std::vector<F1Matrix> results;  // completed hops only
  std::vector<Combo> combos;
  std::vector<bool> collapsed;

  SummaryRow summary_row() const;
};

// Works on partially completed runs; throws RunError when nothing is readable.
RunData load_run_data(const std::filesystem::path& run_dir);

// 1200x400 plot: one x tick per hop labelled lang-category, one polyline per
// language (mean F1 over its categories), legend, and a marker at every
// collapsed hop.
std::string render_hopwise_svg(const RunData& run);

// Writes report.txt, report.json and <run>.svg into out_dir; returns the table.
std::string cmd_report(std::span<const std::filesystem::path> run_dirs,
                       const std::filesystem::path& out_dir);

}  // namespace hoplab
