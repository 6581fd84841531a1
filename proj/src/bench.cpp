// Copyright (c) 2026, hoplab authors
// SPDX-License-Identifier: Apache-2.0

#include "hoplab/bench.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <ostream>
#include <set>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "hoplab/random.hpp"
#include "hoplab/report.hpp"
#include "hoplab/run.hpp"

namespace hoplab {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<std::string_view>& member_override_keys() {
  static const std::vector<std::string_view> keys = {"method", "train.zeta", "sequence.seed",
                                                     "sequence.file", "seed"};
  return keys;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

struct Section {
  std::string header;
  std::string body;  // padded with blank lines so line numbers stay global
};

std::vector<Section> split_sections(std::string_view text, std::string_view where) {
  std::vector<Section> out;
  std::size_t line_no = 0, pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const std::string_view t = trim(line);
    if (!t.empty() && t.front() == '[') {
      if (t.back() != ']') throw ConfigError(fmt::format("{}:{}: unterminated section", where, line_no));
      out.push_back({std::string(trim(t.substr(1, t.size() - 2))), std::string(line_no, '\n')});
      continue;
    }
    const std::string_view content = trim(line.substr(0, std::min(line.find('#'), line.size())));
    if (out.empty()) {
      if (!content.empty()) {
        throw ConfigError(fmt::format("{}:{}: setting outside a section", where, line_no));
      }
      continue;
    }
    out.back().body += std::string(line) + "\n";
  }
  return out;
}

std::vector<double> parse_reals(std::string_view key, std::string_view value) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= value.size()) {
    const auto comma = value.find(',', pos);
    const std::string item(trim(value.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos)));
    pos = comma == std::string_view::npos ? value.size() + 1 : comma + 1;
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (item.empty() || end != item.c_str() + item.size() || !(v > 0.0 && v <= 1.0)) {
      throw ConfigError(fmt::format("{}: '{}' is not a decay factor in (0, 1]", key, item));
    }
    out.push_back(v);
  }
  return out;
}

std::string sequence_label(const RunConfig& c) {
  return c.sequence_file.empty() ? fmt::format("seed-{}", c.resolved_sequence_seed())
                                 : c.sequence_file;
}

}  // namespace

BenchSuite parse_suite(std::string_view text, std::string_view where) {
  BenchSuite suite;
  bool have_base = false;
  std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>> members;
  for (const Section& s : split_sections(text, where)) {
    const std::string sec_where = fmt::format("{} [{}]", where, s.header);
    auto kv = parse_key_values(s.body, where);
    if (s.header == "suite") {
      for (const auto& [k, v] : kv) {
        if (k == "name") {
          suite.name = v;
        } else if (k == "zeta_sweep") {
          suite.zeta_sweep = parse_reals(k, v);
        } else if (k == "sweep_category") {
          suite.sweep_category = v;
        } else {
          throw ConfigError(fmt::format("{}: unknown suite key '{}'", sec_where, k));
        }
      }
    } else if (s.header == "base") {
      if (have_base) throw ConfigError(std::string(where) + ": duplicate [base] section");
      have_base = true;
      suite.base = parse_run_config(s.body, where);
    } else if (s.header.rfind("run ", 0) == 0) {
      const std::string name(trim(std::string_view(s.header).substr(4)));
      if (name.empty() || name.find_first_of("/\\ ") != std::string::npos) {
        throw ConfigError(fmt::format("{}: run names must be non-empty without spaces or slashes",
                                      sec_where));
      }
      for (const auto& [k, v] : kv) {
        const auto& allowed = member_override_keys();
        if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
          throw ConfigError(fmt::format(
              "{}: '{}' cannot differ between suite members (allowed: method, train.zeta, "
              "sequence.seed, sequence.file, seed)",
              sec_where, k));
        }
      }
      members.emplace_back(name, std::move(kv));
    } else {
      throw ConfigError(fmt::format("{}: unknown section [{}]", where, s.header));
    }
  }
  if (members.empty()) throw ConfigError(std::string(where) + ": suite has no [run ...] members");
  std::set<std::string> names;
  for (auto& [name, kv] : members) {
    if (!names.insert(name).second) {
      throw ConfigError(fmt::format("{}: duplicate run name '{}'", where, name));
    }
    SuiteMember m{name, kv, suite.base};
    for (const auto& [k, v] : kv) set_config_value(m.config, k, v);
    m.config.validate();
    suite.members.push_back(std::move(m));
  }
  if (suite.name.empty()) suite.name = "suite";
  return suite;
}

BenchSuite load_suite(const fs::path& path) {
  return parse_suite(read_file(path), path.string());
}

ZetaSweep run_zeta_sweep(const RunConfig& base, std::span<const double> zetas,
                         std::string_view category, std::ostream* log) {
  const LoadedData data = load_data(base);
  const Corpus& corpus = data.corpus;
  CategoryId cat = 0;
  if (!category.empty()) {
    const auto it = std::find(corpus.category_names.begin(), corpus.category_names.end(), category);
    if (it == corpus.category_names.end()) {
      throw ConfigError(fmt::format("zeta sweep: unknown category '{}'", category));
    }
    cat = static_cast<CategoryId>(it - corpus.category_names.begin());
  }
  const Model m0 = Model::init(base.model_config(corpus.vocab_size), base.resolved_model_seed());

  ZetaSweep sweep;
  sweep.zetas.assign(zetas.begin(), zetas.end());
  for (LangId l = 0; l < corpus.num_langs(); ++l) {
    const Combo combo{l, cat};
    sweep.rows.push_back(corpus.lang_names[l] + "-" + corpus.category_names[cat]);
    const auto train_set =
        make_training_set(corpus, combo, base.train_size, mix_seed(base.seed, "sweep.sample", l));
    std::vector<double> row;
    for (double zeta : zetas) {
      TrainConfig tc = base.train;
      tc.zeta = zeta;
      const HopOutcome out = run_hop(m0, train_set, tc, mix_seed(base.seed, "sweep.train", l));
      row.push_back(hopwise_avg(evaluate(out.model, corpus, 1, combo).f1));
      if (log) *log << fmt::format("zeta sweep {} zeta={} F1 {:.4f}\n", sweep.rows.back(), zeta, row.back());
    }
    sweep.f1.push_back(std::move(row));
  }
  for (std::size_t z = 0; z < zetas.size(); ++z) {
    double sum = 0.0;
    for (const auto& row : sweep.f1) sum += row[z];
    sweep.mean.push_back(sweep.f1.empty() ? 0.0 : sum / static_cast<double>(sweep.f1.size()));
  }
  return sweep;
}

std::string comparison_table_text(std::span<const SuiteRunStatus> runs) {
  std::size_t name_w = 3, method_w = 6, seq_w = 8;
  for (const SuiteRunStatus& r : runs) {
    name_w = std::max(name_w, r.name.size());
    method_w = std::max(method_w, r.method.size());
    seq_w = std::max(seq_w, r.sequence.size());
  }
  std::string out = fmt::format("{:<{}}  {:<{}}  {:<{}}  {:>5}", "Run", name_w, "Method", method_w,
                                "Sequence", seq_w, "Zeta");
  for (const char* c : {"Overall F1", "IL/ID", "OL/OD", "IL/OD", "OL/ID", "F-lang", "F-categ"}) {
    out += fmt::format("  {:>10}", c);
  }
  out += fmt::format("  {:>9}  {}\n", "Collapsed", "Status");
  for (const SuiteRunStatus& r : runs) {
    out += fmt::format("{:<{}}  {:<{}}  {:<{}}  {:>5}", r.name, name_w, r.method, method_w,
                       r.sequence, seq_w, fmt::format("{:.2f}", r.zeta));
    const RunSummary& s = r.summary;
    for (const std::optional<double>& v :
         {std::optional<double>(s.overall_f1), s.il_id, s.ol_od, s.il_od, s.ol_id,
          std::optional<double>(s.f_lang), std::optional<double>(s.f_categ)}) {
      out += fmt::format("  {:>10}", r.ok ? format_percent(v) : std::string("-"));
    }
    out += fmt::format("  {:>9}  {}\n", r.ok ? std::to_string(r.collapsed_hops) : "-",
                       r.ok ? "ok" : "failed: " + r.error);
  }
  return out;
}

std::string zeta_sweep_text(const ZetaSweep& sweep) {
  std::size_t row_w = 10;
  for (const std::string& r : sweep.rows) row_w = std::max(row_w, r.size());
  std::string out = fmt::format("{:<{}}", "Train data", row_w);
  for (double z : sweep.zetas) out += fmt::format("  {:>10}", fmt::format("zeta={}", z));
  out += "\n";
  auto line = [&](const std::string& label, const std::vector<double>& values) {
    out += fmt::format("{:<{}}", label, row_w);
    for (double v : values) out += fmt::format("  {:>10}", format_percent(v));
    out += "\n";
  };
  for (std::size_t i = 0; i < sweep.rows.size(); ++i) line(sweep.rows[i], sweep.f1[i]);
  line("mean", sweep.mean);
  return out;
}

SuiteReport run_suite(const BenchSuite& suite, const fs::path& out_dir,
                      const SuiteOptions& options) {
  fs::create_directories(out_dir / "runs");
  fs::create_directories(out_dir / "plots");
  SuiteReport report;
  report.runs.resize(suite.members.size());
  std::mutex log_mutex;
  auto note = [&](const std::string& msg) {
    if (!options.log) return;
    std::lock_guard lock(log_mutex);
    *options.log << msg;
    options.log->flush();
  };

  auto run_member = [&](std::size_t i) {
    const SuiteMember& m = suite.members[i];
    SuiteRunStatus& st = report.runs[i];
    st.name = m.name;
    st.method = std::string(to_string(m.config.method));
    st.sequence = sequence_label(m.config);
    st.zeta = effective_zeta(m.config.method, m.config.train);
    const fs::path dir = out_dir / "runs" / m.name;
    try {
      const auto progress = read_progress(dir);
      const bool same_config = fs::exists(dir / "config.snapshot") &&
                               read_file(dir / "config.snapshot") == config_snapshot(m.config);
      if (progress && same_config && progress->status == "complete") {
        note(fmt::format("[{}] already complete\n", m.name));
      } else {
        RunOptions ro;
        ro.resume = progress.has_value() && same_config;
        ro.force = !ro.resume;
        ro.log = options.jobs <= 1 ? options.log : nullptr;
        note(fmt::format("[{}] {}\n", m.name, ro.resume ? "resuming" : "running"));
        cmd_run(m.config, dir, ro);
      }
      const RunData data = load_run_data(dir);
      const SummaryRow row = data.summary_row();
      st.hops = row.hops;
      st.summary = row.summary;
      st.collapsed_hops = row.collapsed_hops;
      st.ok = true;
      write_file_atomic(out_dir / "plots" / (m.name + ".svg"), render_hopwise_svg(data));
      note(fmt::format("[{}] done: overall F1 {}\n", m.name, format_percent(row.summary.overall_f1)));
    } catch (const std::exception& e) {
      st.ok = false;
      st.error = e.what();
      note(fmt::format("[{}] failed: {}\n", m.name, e.what()));
    }
  };

  const std::size_t jobs = std::max<std::size_t>(1, std::min(options.jobs, suite.members.size()));
  if (jobs == 1) {
    for (std::size_t i = 0; i < suite.members.size(); ++i) run_member(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    for (std::size_t t = 0; t < jobs; ++t) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < suite.members.size(); i = next++) run_member(i);
      });
    }
    for (std::thread& w : workers) w.join();
  }

  json rows = json::array();
  for (const SuiteRunStatus& r : report.runs) {
    json j{{"run", r.name}, {"method", r.method}, {"sequence", r.sequence}, {"zeta", r.zeta},
           {"status", r.ok ? "ok" : "failed"}};
    if (r.ok) {
      const auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
      j["hops"] = r.hops;
      j["overall_f1"] = r.summary.overall_f1;
      j["il_id"] = opt(r.summary.il_id);
      j["ol_od"] = opt(r.summary.ol_od);
      j["il_od"] = opt(r.summary.il_od);
      j["ol_id"] = opt(r.summary.ol_id);
      j["f_lang"] = r.summary.f_lang;
      j["f_categ"] = r.summary.f_categ;
      j["collapsed_hops"] = r.collapsed_hops;
    } else {
      j["error"] = r.error;
    }
    rows.push_back(std::move(j));
  }
  write_file_atomic(out_dir / "comparison.json",
                    json{{"suite", suite.name}, {"runs", rows}}.dump(2) + "\n");
  write_file_atomic(out_dir / "comparison.txt", comparison_table_text(report.runs));

  if (options.sweep && !suite.zeta_sweep.empty()) {
    report.sweep = run_zeta_sweep(suite.base, suite.zeta_sweep, suite.sweep_category,
                                  options.jobs <= 1 ? options.log : nullptr);
    json sj;
    sj["zetas"] = report.sweep.zetas;
    sj["mean"] = report.sweep.mean;
    json srows = json::array();
    for (std::size_t i = 0; i < report.sweep.rows.size(); ++i) {
      srows.push_back({{"train", report.sweep.rows[i]}, {"f1", report.sweep.f1[i]}});
    }
    sj["rows"] = srows;
    write_file_atomic(out_dir / "zeta_sweep.json", sj.dump(2) + "\n");
    write_file_atomic(out_dir / "zeta_sweep.txt", zeta_sweep_text(report.sweep));
  }
  return report;
}

}  // namespace hoplab
