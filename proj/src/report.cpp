// Copyright (c) 2026, hoplab authors
// SPDX-License-Identifier: Apache-2.0

#include "hoplab/report.hpp"

#include <algorithm>
#include <array>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "hoplab/run.hpp"

namespace hoplab {

namespace fs = std::filesystem;
using nlohmann::json;

std::string summary_table_text(std::span<const SummaryRow> rows) {
  static constexpr std::array<const char*, 7> kColumns = {
      "Overall F1", "IL/ID", "OL/OD", "IL/OD", "OL/ID", "F-lang", "F-categ"};
  std::size_t name_w = 3, method_w = 6;
  for (const SummaryRow& r : rows) {
    name_w = std::max(name_w, r.name.size());
    method_w = std::max(method_w, r.method.size());
  }
  std::string out = fmt::format("{:<{}}  {:<{}}  {:>4}", "Run", name_w, "Method", method_w, "Hops");
  for (const char* c : kColumns) out += fmt::format("  {:>10}", c);
  out += fmt::format("  {:>9}\n", "Collapsed");
  for (const SummaryRow& r : rows) {
    const RunSummary& s = r.summary;
    out += fmt::format("{:<{}}  {:<{}}  {:>4}", r.name, name_w, r.method, method_w, r.hops);
    for (const std::optional<double>& v :
         {std::optional<double>(s.overall_f1), s.il_id, s.ol_od, s.il_od, s.ol_id,
          std::optional<double>(s.f_lang), std::optional<double>(s.f_categ)}) {
      out += fmt::format("  {:>10}", format_percent(v));
    }
    out += fmt::format("  {:>9}\n", r.collapsed_hops);
  }
  return out;
}

SummaryRow RunData::summary_row() const {
  SummaryRow row;
  row.name = name;
  row.method = std::string(to_string(config.method));
  row.hops = results.size();
  if (!results.empty()) row.summary = summarize(results, combos, config.strict_ol_od);
  row.collapsed_hops = static_cast<std::size_t>(std::count(collapsed.begin(), collapsed.end(), true));
  return row;
}

RunData load_run_data(const fs::path& run_dir) {
  if (!fs::is_directory(run_dir)) throw RunError("report: " + run_dir.string() + " is not a directory");
  if (fs::is_empty(run_dir)) throw RunError("report: run directory " + run_dir.string() + " is empty");
  if (!fs::exists(run_dir / "metrics.csv")) {
    throw RunError("report: " + run_dir.string() + " has no metrics.csv");
  }
  RunData run;
  run.name = fs::absolute(run_dir).lexically_normal().filename().string();
  if (run.name.empty()) run.name = fs::absolute(run_dir).lexically_normal().parent_path().filename().string();
  run.config = load_run_snapshot(run_dir);
  run.results = read_metrics_csv(run_dir / "metrics.csv", &run.lang_names, &run.category_names);
  if (run.results.empty()) {
    throw RunError("report: " + run_dir.string() + " has no completed hops");
  }
  for (const F1Matrix& m : run.results) {
    run.combos.push_back(m.train_combo);
    bool collapsed = false;
    const fs::path record = run_dir / fmt::format("hop_{}", m.hop) / "record.json";
    if (fs::exists(record)) {
      try {
        collapsed = json::parse(read_file(record)).value("collapsed", false);
      } catch (const json::exception& e) {
        throw RunError(record.string() + ": " + e.what());
      }
    }
    run.collapsed.push_back(collapsed);
  }
  return run;
}

namespace {

constexpr std::array<const char*, 10> kPalette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                                  "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                                  "#bcbd22", "#17becf"};

std::string escape_xml(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_hopwise_svg(const RunData& run) {
  constexpr double kWidth = 1200, kHeight = 400;
  constexpr double kLeft = 60, kRight = 1010, kTop = 30, kBottom = 290;
  const std::size_t n = run.results.size();
  const double step = n > 0 ? (kRight - kLeft) / static_cast<double>(n) : 0.0;
  auto x_of = [&](std::size_t i) { return kLeft + (static_cast<double>(i) + 0.5) * step; };
  auto y_of = [&](double f1) { return kBottom - f1 * (kBottom - kTop); };

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
      "viewBox=\"0 0 {0} {1}\" font-family=\"sans-serif\" font-size=\"11\">\n",
      kWidth, kHeight);
  svg += fmt::format("<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"white\"/>\n", kWidth,
                     kHeight);
  svg += fmt::format("<text x=\"{:.2f}\" y=\"18\" font-size=\"13\">{} ({})</text>\n", kLeft,
                     escape_xml(run.name), escape_xml(to_string(run.config.method)));

  for (int k = 0; k <= 4; ++k) {
    const double v = 0.25 * k;
    svg += fmt::format(
        "<line class=\"ygrid\" x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" "
        "stroke=\"#dddddd\"/>\n",
        kLeft, y_of(v), kRight, y_of(v));
    svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{:.2f}</text>\n",
                       kLeft - 6, y_of(v) + 4, v);
  }
  svg += fmt::format(
      "<text x=\"14\" y=\"{:.2f}\" transform=\"rotate(-90 14 {:.2f})\" "
      "text-anchor=\"middle\">F1</text>\n",
      (kTop + kBottom) / 2, (kTop + kBottom) / 2);

  for (std::size_t i = 0; i < n; ++i) {
    const Combo c = run.combos[i];
    const std::string label = run.lang_names[c.lang] + "-" + run.category_names[c.category];
    const double x = x_of(i);
    svg += fmt::format(
        "<line class=\"xtick\" x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" "
        "stroke=\"#333333\"/>\n",
        x, kBottom, kBottom + 4);
    svg += fmt::format(
        "<text x=\"{0:.2f}\" y=\"{1:.2f}\" transform=\"rotate(-60 {0:.2f} {1:.2f})\" "
        "text-anchor=\"end\">{2}</text>\n",
        x, kBottom + 10, escape_xml(label));
  }
  svg += fmt::format(
      "<polyline points=\"{0:.2f},{1:.2f} {0:.2f},{2:.2f} {3:.2f},{2:.2f}\" fill=\"none\" "
      "stroke=\"#333333\"/>\n",
      kLeft, kTop, kBottom, kRight);

  for (std::size_t i = 0; i < n; ++i) {
    if (!run.collapsed[i]) continue;
    const double x = x_of(i);
    svg += fmt::format(
        "<line class=\"collapse\" x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" "
        "stroke=\"#d62728\" stroke-dasharray=\"4 3\"/>\n",
        x, kTop, kBottom);
    svg += fmt::format(
        "<text class=\"collapse-marker\" x=\"{:.2f}\" y=\"{:.2f}\" fill=\"#d62728\" "
        "text-anchor=\"middle\" font-size=\"14\">&#x2715;</text>\n",
        x, kTop - 2);
  }

  const std::size_t cats = run.category_names.size();
  for (std::size_t l = 0; l < run.lang_names.size(); ++l) {
    const char* color = kPalette[l % kPalette.size()];
    std::string points;
    for (std::size_t i = 0; i < n; ++i) {
      double sum = 0.0;
      for (std::size_t c = 0; c < cats; ++c) sum += run.results[i].at(static_cast<LangId>(l),
                                                                        static_cast<CategoryId>(c));
      if (!points.empty()) points += ' ';
      points += fmt::format("{:.2f},{:.2f}", x_of(i), y_of(sum / static_cast<double>(cats)));
    }
    svg += fmt::format(
        "<polyline class=\"lang\" data-lang=\"{}\" points=\"{}\" fill=\"none\" stroke=\"{}\" "
        "stroke-width=\"2\"/>\n",
        escape_xml(run.lang_names[l]), points, color);
    const double ly = kTop + 16.0 * static_cast<double>(l);
    svg += fmt::format(
        "<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"14\" height=\"4\" fill=\"{}\"/>\n", kRight + 30,
        ly - 4, color);
    svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\">{}</text>\n", kRight + 50, ly,
                       escape_xml(run.lang_names[l]));
  }
  if (std::find(run.collapsed.begin(), run.collapsed.end(), true) != run.collapsed.end()) {
    const double ly = kTop + 16.0 * static_cast<double>(run.lang_names.size());
    svg += fmt::format(
        "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" stroke=\"#d62728\" "
        "stroke-dasharray=\"4 3\"/>\n",
        kRight + 30, ly - 2, kRight + 44);
    svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\">collapsed hop</text>\n", kRight + 50, ly);
  }
  svg += "</svg>\n";
  return svg;
}

std::string cmd_report(std::span<const fs::path> run_dirs, const fs::path& out_dir) {
  if (run_dirs.empty()) throw RunError("report: no run directories given");
  std::vector<RunData> runs;
  for (const fs::path& dir : run_dirs) runs.push_back(load_run_data(dir));

  std::set<std::string> used;
  std::vector<std::string> plot_names;
  for (const RunData& r : runs) {
    std::string name = r.name;
    for (int k = 2; used.count(name) != 0; ++k) name = fmt::format("{}_{}", r.name, k);
    used.insert(name);
    plot_names.push_back(name);
  }

  std::vector<SummaryRow> rows;
  json table = json::array();
  for (const RunData& r : runs) {
    rows.push_back(r.summary_row());
    const SummaryRow& row = rows.back();
    const auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    table.push_back({{"run", row.name},
                     {"method", row.method},
                     {"hops", row.hops},
                     {"overall_f1", row.summary.overall_f1},
                     {"il_id", opt(row.summary.il_id)},
                     {"ol_od", opt(row.summary.ol_od)},
                     {"il_od", opt(row.summary.il_od)},
                     {"ol_id", opt(row.summary.ol_id)},
                     {"f_lang", row.summary.f_lang},
                     {"f_categ", row.summary.f_categ},
                     {"collapsed_hops", row.collapsed_hops}});
  }
  const std::string text = summary_table_text(rows);

  fs::create_directories(out_dir);
  write_file_atomic(out_dir / "report.txt", text);
  write_file_atomic(out_dir / "report.json", table.dump(2) + "\n");
  for (std::size_t i = 0; i < runs.size(); ++i) {
    write_file_atomic(out_dir / (plot_names[i] + ".svg"), render_hopwise_svg(runs[i]));
  }
  return text;
}

}  // namespace hoplab
