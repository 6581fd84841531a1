// Copyright (c) 2026, hoplab authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "hoplab/augment.hpp"
#include "hoplab/bench.hpp"
#include "hoplab/corpus.hpp"
#include "hoplab/metrics.hpp"
#include "hoplab/model.hpp"
#include "hoplab/optim.hpp"
#include "hoplab/random.hpp"
#include "hoplab/run.hpp"
#include "hoplab/sequence.hpp"
#include "metric_oracle.hpp"

using namespace hoplab;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

// -- 1 ---------------------------------------------------------------------

Verdict llrd_schedule() {
  const LlrdSchedule s = build_llrd_schedule(2e-5, 0.75, 13);
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < s.size(); ++k) {
    worst = std::max(worst, std::abs(s.per_layer_lr[k] / s.per_layer_lr[k + 1] - 0.75) / 0.75);
  }
  const double bottom = 2e-5 * std::pow(0.75, 12);
  const double bottom_err = std::abs(s.per_layer_lr[0] - bottom) / bottom;
  return {s.size() == 13 && s.per_layer_lr[12] == 2e-5 && worst <= 1e-15 && bottom_err <= 1e-15,
          fmt::format("max ratio error {:.2e}, bottom {:.6e} (error {:.2e})", worst,
                      s.per_layer_lr[0], bottom_err)};
}

// -- 2 ---------------------------------------------------------------------

Model three_group_model() {
  ModelConfig c;
  c.vocab_size = 6;
  c.embed_dim = 4;
  c.num_blocks = 1;
  c.num_heads = 2;
  c.ffn_dim = 4;
  c.max_seq_len = 3;
  return Model::init(c, 21);
}

std::vector<num::Tensor> random_grads(const Model& m, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<num::Tensor> g;
  for (const Parameter& p : m.params()) {
    num::Tensor t(p.value.shape(), 0.0);
    for (double& x : t.data()) x = rng.normal();
    g.push_back(std::move(t));
  }
  return g;
}

Verdict sgd_exactness() {
  const Model m0 = three_group_model();
  if (m0.layer_groups().size() != 3) return {false, "toy model does not have 3 groups"};
  const auto grads = random_grads(m0, 5);
  const LlrdSchedule s = build_llrd_schedule(0.1, 0.5, 3);

  Model m1 = m0;
  Optimizer(OptimizerKind::kPlainSgd, m1).step(m1, grads, s);
  double update_err = 0.0;
  for (const LayerGroup& g : m0.layer_groups()) {
    for (std::size_t p : g.params) {
      for (std::size_t i = 0; i < m0.params()[p].value.size(); ++i) {
        const double expect =
            m0.params()[p].value.data()[i] - s.per_layer_lr[g.depth] * grads[p].data()[i];
        update_err = std::max(update_err, std::abs(m1.params()[p].value.data()[i] - expect));
      }
    }
  }

  // Scale the middle group's rate by c: only its delta changes, by exactly c.
  const double c = 3.0;
  LlrdSchedule scaled = s;
  scaled.per_layer_lr[1] *= c;
  Model m2 = m0;
  Optimizer(OptimizerKind::kPlainSgd, m2).step(m2, grads, scaled);
  double scale_err = 0.0;
  bool others_identical = true;
  for (const LayerGroup& g : m0.layer_groups()) {
    for (std::size_t p : g.params) {
      for (std::size_t i = 0; i < m0.params()[p].value.size(); ++i) {
        const double w0 = m0.params()[p].value.data()[i];
        const double d1 = m1.params()[p].value.data()[i] - w0;
        const double d2 = m2.params()[p].value.data()[i] - w0;
        if (g.depth == 1) {
          scale_err = std::max(scale_err, std::abs(d2 - c * d1));
        } else if (d1 != d2) {
          others_identical = false;
        }
      }
    }
  }
  return {update_err <= 1e-15 && scale_err <= 1e-15 && others_identical,
          fmt::format("update error {:.2e}, scaled-group error {:.2e}, other groups {}",
                      update_err, scale_err, others_identical ? "unchanged" : "CHANGED")};
}

// -- 3 ---------------------------------------------------------------------

Verdict gradient_check() {
  ModelConfig c;
  c.vocab_size = 30;
  c.embed_dim = 12;
  c.num_blocks = 2;
  c.num_heads = 3;
  c.ffn_dim = 24;
  c.max_seq_len = 10;
  Model m = Model::init(c, 33);
  const std::size_t n_params = m.num_scalars();
  if (n_params > 5000) return {false, fmt::format("{} parameters", n_params)};

  Rng rng(77);
  const double eps = 1e-5;
  double worst = 0.0;
  for (int b = 0; b < 3; ++b) {
    std::vector<Example> batch(4);
    for (Example& e : batch) {
      const std::size_t len = 2 + rng.uniform_index(c.max_seq_len + 3);
      for (std::size_t i = 0; i < len; ++i) {
        e.tokens.push_back(static_cast<TokenId>(1 + rng.uniform_index(c.vocab_size - 1)));
      }
      e.label = static_cast<int>(rng.uniform_index(2));
    }
    const LossAndGrads lg = loss_and_grads(m, batch);
    for (std::size_t p = 0; p < m.params().size(); ++p) {
      const auto values = m.params()[p].value.data();
      for (std::size_t i = 0; i < values.size(); ++i) {
        const double saved = values[i];
        values[i] = saved + eps;
        const double up = batch_loss(m, batch);
        values[i] = saved - eps;
        const double down = batch_loss(m, batch);
        values[i] = saved;
        const double numeric = (up - down) / (2.0 * eps);
        const double analytic = lg.grads[p].data()[i];
        const double scale = std::max({std::abs(numeric), std::abs(analytic), 1e-6});
        worst = std::max(worst, std::abs(numeric - analytic) / scale);
      }
    }
  }
  return {worst <= 1e-4,
          fmt::format("{} parameters, 3 batches, max relative error {:.2e}", n_params, worst)};
}

// -- 4 ---------------------------------------------------------------------

Verdict augmentation_arithmetic() {
  CorpusSpec spec;
  spec.num_langs = 6;
  spec.num_categories = 1;
  spec.train_pool_per_label = 50;
  spec.test_size = 10;
  spec.seed = 4;
  const Corpus corpus = gen_synthetic_corpus(spec);
  const OracleTranslator oracle(*corpus.lexicon);
  const auto d = make_training_set(corpus, {3, 0}, 100, 1);
  const std::vector<LangId> langs{0, 1, 2, 3, 4, 5};
  const auto dt = augment(d, langs, 3, AugmentConfig{0.1, false, 2}, oracle);
  std::map<LangId, std::size_t> per_lang;
  for (std::size_t i = d.size(); i < dt.size(); ++i) ++per_lang[dt[i].lang];
  bool ten_each = per_lang.size() == 5 && per_lang.count(3) == 0;
  std::string counts;
  for (const auto& [l, n] : per_lang) {
    ten_each = ten_each && n == 10;
    counts += fmt::format(" {}:{}", corpus.lang_names[l], n);
  }
  return {dt.size() == 150 && ten_each,
          fmt::format("|D|=100 -> |D^T|={}, translated per language:{}", dt.size(), counts)};
}

// -- 5 ---------------------------------------------------------------------

Verdict sequence_validity() {
  std::size_t bad = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const HopSequence s = build_sequence(6, 10, 50, seed);
    std::set<LangId> langs;
    std::set<CategoryId> cats;
    bool lang_repeat = false, cat_repeat = false;
    for (const Combo c : s.hops) {
      lang_repeat = !langs.insert(c.lang).second || lang_repeat;
      cat_repeat = !cats.insert(c.category).second || cat_repeat;
    }
    if (s.size() != 50 || !has_no_repeats(s) || !lang_repeat || !cat_repeat) ++bad;
  }
  return {bad == 0, fmt::format("1000 sequences of 50 hops over 6x10, {} invalid", bad)};
}

// -- 6 ---------------------------------------------------------------------

Verdict metric_oracle() {
  std::mt19937_64 gen(20260);
  std::size_t mismatches = 0, negative = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto run = oracle::random_run(gen);
    const RunSummary s = summarize(run.results, run.combos);
    const oracle::Metrics o = oracle::compute(run.results, run.combos);
    mismatches += (s.overall_f1 != o.overall) + (s.il_id != o.il_id) + (s.ol_id != o.ol_id) +
                  (s.il_od != o.il_od) + (s.ol_od != o.ol_od) + (s.f_lang != o.f_lang) +
                  (s.f_categ != o.f_categ);
    negative += (s.f_lang < 0.0) + (s.f_categ < 0.0);
  }
  std::size_t constant_bad = 0;
  for (int trial = 0; trial < 10; ++trial) {
    auto run = oracle::random_run(gen);
    const double v = static_cast<double>(trial + 1) / 11.0;
    for (F1Matrix& m : run.results) std::fill(m.f1.begin(), m.f1.end(), v);
    const RunSummary s = summarize(run.results, run.combos);
    constant_bad += s.f_lang != 0.0 || s.f_categ != 0.0;
    for (const auto& q : {s.il_id, s.ol_id, s.il_od, s.ol_od}) {
      constant_bad += q.has_value() && std::abs(*q - v) > 1e-12;
    }
  }
  return {mismatches == 0 && negative == 0 && constant_bad == 0,
          fmt::format("50 random runs: {} mismatches, {} negative forgetting values; "
                      "10 constant runs: {} deviations",
                      mismatches, negative, constant_bad)};
}

// -- 7, 8, 9 ---------------------------------------------------------------

struct SuiteRuns {
  BenchSuite suite;
  SuiteReport first, second;
  fs::path dir_a, dir_b;
};

Verdict determinism(const SuiteRuns& s) {
  std::vector<std::string> files = {"comparison.txt", "comparison.json", "zeta_sweep.txt",
                                    "zeta_sweep.json"};
  for (const SuiteMember& m : s.suite.members) {
    for (const char* f : {"metrics.csv", "summary.json", "summary.txt"}) {
      files.push_back("runs/" + m.name + "/" + f);
    }
  }
  std::size_t differing = 0;
  for (const std::string& f : files) {
    if (!fs::exists(s.dir_a / f) || read_file(s.dir_a / f) != read_file(s.dir_b / f)) ++differing;
  }
  return {differing == 0,
          fmt::format("{} files compared across two executions, {} differ", files.size(), differing)};
}

// Per sequence seed, the member of each method.
std::map<std::uint64_t, std::map<std::string, const SuiteRunStatus*>> by_sequence(
    const SuiteRuns& s) {
  std::map<std::uint64_t, std::map<std::string, const SuiteRunStatus*>> out;
  for (std::size_t i = 0; i < s.suite.members.size(); ++i) {
    out[s.suite.members[i].config.resolved_sequence_seed()][s.first.runs[i].method] =
        &s.first.runs[i];
  }
  return out;
}

Verdict ordering(const SuiteRuns& s) {
  bool all_ok = true;
  for (const SuiteRunStatus& r : s.first.runs) all_ok = all_ok && r.ok;
  if (!all_ok) return {false, "a suite member failed"};
  bool ordered = true;
  std::string detail;
  double flang_seqft = 0.0, flang_best = 0.0;
  std::size_t n = 0;
  for (const auto& [seed, runs] : by_sequence(s)) {
    for (const char* m : {"seqft", "seqft-llrd", "seqft-trans", "seqft-trans-llrd"}) {
      if (runs.count(m) == 0) return {false, fmt::format("sequence {} lacks {}", seed, m)};
    }
    const double llrd = runs.at("seqft-llrd")->summary.overall_f1;
    const double best = runs.at("seqft-trans-llrd")->summary.overall_f1;
    const double base = std::max(runs.at("seqft")->summary.overall_f1,
                                 runs.at("seqft-trans")->summary.overall_f1);
    ordered = ordered && llrd > base && best > base;
    detail += fmt::format("{}seq {}: {}/{} vs {}", detail.empty() ? "" : "; ", seed, format_percent(best),
                          format_percent(llrd), format_percent(base));
    flang_seqft += runs.at("seqft")->summary.f_lang;
    flang_best += runs.at("seqft-trans-llrd")->summary.f_lang;
    ++n;
  }
  flang_seqft /= static_cast<double>(n);
  flang_best /= static_cast<double>(n);
  const bool factor = flang_best * 2.0 <= flang_seqft && flang_seqft > 0.0;
  return {ordered && factor,
          fmt::format("(a) {}overall F1 trans-llrd/llrd vs best baseline: {}. (b) mean F-lang "
                      "seqft {} vs seqft-trans-llrd {}",
                      ordered ? "" : "NOT ORDERED ", detail, format_percent(flang_seqft),
                      format_percent(flang_best))};
}

Verdict collapse(const SuiteRuns& s) {
  std::size_t seqft_collapsing = 0, best_collapsing = 0, marker_mismatch = 0;
  for (const SuiteRunStatus& r : s.first.runs) {
    if (r.method == "seqft" && r.collapsed_hops > 0) ++seqft_collapsing;
    if (r.method == "seqft-trans-llrd" && r.collapsed_hops > 0) ++best_collapsing;
    // The rendered plot carries one marker per collapsed hop.
    const fs::path svg = s.dir_a / "plots" / (r.name + ".svg");
    if (!fs::exists(svg)) {
      ++marker_mismatch;
      continue;
    }
    const std::string text = read_file(svg);
    std::size_t markers = 0;
    for (auto pos = text.find("class=\"collapse\""); pos != std::string::npos;
         pos = text.find("class=\"collapse\"", pos + 1)) {
      ++markers;
    }
    marker_mismatch += markers != r.collapsed_hops;
  }
  return {seqft_collapsing >= 1 && best_collapsing == 0 && marker_mismatch == 0,
          fmt::format("seqft runs with a collapsed hop: {}, seqft-trans-llrd: {}, plots with "
                      "wrong marker count: {}",
                      seqft_collapsing, best_collapsing, marker_mismatch)};
}

// -- 10 --------------------------------------------------------------------

Verdict marc_ingestion() {
  const fs::path fixture = fs::path(HOPLAB_SOURCE_DIR) / "tests" / "data" / "marc_fixture.jsonl";
  const HashingTokenizer tok(1024);
  const auto out = load_marc_jsonl(fixture, MarcOptions{}, tok);
  // Lines: 1-3 one star, 4-5 two, 6-7 three, 8-9 four, 10-12 five.
  const std::vector<std::uint64_t> expect_lines{1, 2, 4, 5, 8, 9, 10, 11};
  std::vector<std::uint64_t> lines;
  bool labels_ok = true;
  std::map<int, std::size_t> per_label;
  for (const Example& e : out) {
    lines.push_back(e.id);
    const int expect = e.id <= 5 ? 0 : 1;
    labels_ok = labels_ok && e.label == expect;
    ++per_label[e.label];
  }
  return {lines == expect_lines && labels_ok,
          fmt::format("12 lines -> {} examples (label 0: {}, label 1: {}), 3-star lines dropped, "
                      "kept lines {}",
                      out.size(), per_label[0], per_label[1],
                      fmt::join(lines.begin(), lines.end(), ","))};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int number, const char* title, const std::function<Verdict()>& check) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += !v.pass;
    std::cout << fmt::format("[{}] {:>2}. {}: {} ({:.2f}s)\n", v.pass ? "PASS" : "FAIL", number,
                             title, v.detail, secs);
    std::cout.flush();
  };

  report(1, "LLRD schedule", llrd_schedule);
  report(2, "plain SGD update", sgd_exactness);
  report(3, "gradient check", gradient_check);
  report(4, "augmentation arithmetic", augmentation_arithmetic);
  report(5, "sequence validity", sequence_validity);
  report(6, "metric oracle", metric_oracle);

  SuiteRuns suite;
  std::string suite_error;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    suite.suite = load_suite(fs::path(HOPLAB_SOURCE_DIR) / "suites" / "default.suite");
    const fs::path root = fs::temp_directory_path() / "hoplab_acceptance";
    fs::remove_all(root);
    suite.dir_a = root / "a";
    suite.dir_b = root / "b";
    suite.first = run_suite(suite.suite, suite.dir_a);
    suite.second = run_suite(suite.suite, suite.dir_b);
  } catch (const std::exception& e) {
    suite_error = e.what();
  }
  std::cout << fmt::format("     default suite executed twice in {:.1f}s\n",
                           std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                               .count());
  auto with_suite = [&](Verdict (*fn)(const SuiteRuns&)) {
    return [&, fn]() -> Verdict {
      if (!suite_error.empty()) return {false, "default suite failed: " + suite_error};
      return fn(suite);
    };
  };
  report(7, "end-to-end determinism", with_suite(determinism));
  report(8, "method ordering", with_suite(ordering));
  report(9, "collapse observability", with_suite(collapse));
  report(10, "MARC ingestion", marc_ingestion);

  std::cout << fmt::format("{} of 10 criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}
