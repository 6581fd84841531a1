// Copyright (c) 2026, hoplab authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>
#include <vector>

#include "hoplab/metrics.hpp"
#include "metric_oracle.hpp"

using namespace hoplab;

namespace {

F1Matrix constant_matrix(std::size_t hop, Combo combo, std::size_t k, std::size_t c, double v) {
  F1Matrix m(hop, combo, k, c);
  for (double& x : m.f1) x = v;
  return m;
}

}  // namespace

TEST_CASE("binary macro F1 on hand-computed cases") {
  const std::vector<int> golds{1, 1, 1, 0}, preds{1, 1, 0, 0};
  CHECK(f1_binary_macro(preds, golds) == doctest::Approx(11.0 / 15.0).epsilon(1e-15));
  const std::vector<int> g2{1, 1, 0, 0}, all_pos{1, 1, 1, 1};
  CHECK(f1_binary_macro(all_pos, g2) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(f1_binary_macro(g2, g2) == 1.0);
  const std::vector<int> flipped{0, 0, 1, 1};
  CHECK(f1_binary_macro(flipped, g2) == 0.0);
  CHECK_THROWS_AS(f1_binary_macro(std::vector<int>{1}, g2), std::invalid_argument);
  CHECK_THROWS_AS(f1_binary_macro(std::vector<int>{2}, std::vector<int>{1}),
                  std::invalid_argument);
}

TEST_CASE("hop-wise and overall averages") {
  F1Matrix a(1, {0, 0}, 1, 2), b(2, {0, 1}, 1, 2);
  a.f1 = {0.5, 1.0};
  b.f1 = {0.25, 0.25};
  CHECK(hopwise_avg(a) == 0.75);
  const std::vector<F1Matrix> r{a, b};
  CHECK(overall_f1(r) == 0.5);
  CHECK_THROWS_AS(overall_f1(std::vector<F1Matrix>{}), std::invalid_argument);
  F1Matrix bad = a;
  bad.f1[0] = 1.5;
  CHECK_THROWS_AS(hopwise_avg(bad), std::invalid_argument);
}

TEST_CASE("forgetting is peak minus final per language, averaged") {
  // One language, one category: trajectory 0.6, 0.8, 0.7.
  std::vector<F1Matrix> r;
  for (double v : {0.6, 0.8, 0.7}) r.push_back(constant_matrix(r.size() + 1, {0, 0}, 1, 1, v));
  CHECK(forgetting_by_language(r).mean == doctest::Approx(0.1).epsilon(1e-12));

  // Two languages forgetting 0.1 and 0.3.
  F1Matrix h1(1, {0, 0}, 2, 1), h2(2, {1, 0}, 2, 1);
  h1.f1 = {0.9, 0.8};
  h2.f1 = {0.8, 0.5};
  const std::vector<F1Matrix> two{h1, h2};
  const Forgetting f = forgetting_by_language(two);
  CHECK(f.per_item[0] == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(f.per_item[1] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(f.mean == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(forgetting_by_category(two).mean == doctest::Approx(0.2).epsilon(1e-12));

  // Monotone improvement forgets nothing.
  std::vector<F1Matrix> up;
  for (double v : {0.1, 0.4, 0.9}) up.push_back(constant_matrix(up.size() + 1, {0, 0}, 2, 2, v));
  CHECK(forgetting_by_language(up).mean == 0.0);
}

TEST_CASE("quadrants on a 2x2 grid") {
  F1Matrix m(1, {0, 1}, 2, 2);
  // rows: language, columns: category
  m.f1 = {0.1, 0.9, 0.3, 0.5};
  const QuadrantScores q = hop_quadrants(m, {0, 1});
  CHECK(*q.il_id == 0.9);
  CHECK(*q.ol_id == 0.5);
  CHECK(*q.il_od == 0.1);
  CHECK(*q.ol_od == doctest::Approx((0.1 + 0.3 + 0.5) / 3.0).epsilon(1e-15));
  const QuadrantScores strict = hop_quadrants(m, {0, 1}, true);
  CHECK(*strict.ol_od == 0.3);
  CHECK_THROWS_AS(hop_quadrants(m, {2, 0}), std::invalid_argument);
}

TEST_CASE("single-language grids have no out-of-language quadrant") {
  F1Matrix m(1, {0, 0}, 1, 3);
  m.f1 = {0.2, 0.4, 0.6};
  const QuadrantScores q = hop_quadrants(m, {0, 0});
  CHECK_FALSE(q.ol_id.has_value());
  CHECK(q.il_od.has_value());
  CHECK(q.ol_od.has_value());
  CHECK_FALSE(hop_quadrants(m, {0, 0}, true).ol_od.has_value());
  const std::vector<F1Matrix> r{m};
  const std::vector<Combo> c{{0, 0}};
  CHECK_FALSE(summarize(r, c).ol_id.has_value());
}

TEST_CASE("constant runs") {
  std::vector<F1Matrix> r;
  std::vector<Combo> combos{{0, 0}, {1, 2}, {2, 1}, {0, 3}};
  for (const Combo c : combos) r.push_back(constant_matrix(r.size() + 1, c, 3, 4, 0.8));
  const RunSummary s = summarize(r, combos);
  CHECK(s.overall_f1 == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(*s.il_id == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(*s.ol_id == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(*s.il_od == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(*s.ol_od == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(s.f_lang == 0.0);
  CHECK(s.f_categ == 0.0);
}

TEST_CASE("cell average decomposes into the in-combo cell and the rest") {
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 20; ++trial) {
    const auto run = oracle::random_run(gen);
    for (std::size_t i = 0; i < run.results.size(); ++i) {
      const F1Matrix& m = run.results[i];
      const QuadrantScores q = hop_quadrants(m, run.combos[i]);
      const double cells = static_cast<double>(m.cells());
      const double rest = q.ol_od ? *q.ol_od * (cells - 1.0) : 0.0;
      CHECK(hopwise_avg(m) == doctest::Approx((*q.il_id + rest) / cells).epsilon(1e-12));
    }
  }
}

TEST_CASE("metrics equal a direct recomputation") {
  std::mt19937_64 gen(2026);
  for (int trial = 0; trial < 50; ++trial) {
    const auto run = oracle::random_run(gen);
    for (bool strict : {false, true}) {
      const RunSummary s = summarize(run.results, run.combos, strict);
      const oracle::Metrics o = oracle::compute(run.results, run.combos, strict);
      CHECK(s.overall_f1 == o.overall);
      CHECK(s.il_id == o.il_id);
      CHECK(s.ol_id == o.ol_id);
      CHECK(s.il_od == o.il_od);
      CHECK(s.ol_od == o.ol_od);
      CHECK(s.f_lang == o.f_lang);
      CHECK(s.f_categ == o.f_categ);
      CHECK(s.f_lang >= 0.0);
      CHECK(s.f_categ >= 0.0);
    }
  }
}

TEST_CASE("results must line up with the sequence") {
  std::vector<F1Matrix> r{constant_matrix(1, {0, 0}, 2, 2, 0.5)};
  const std::vector<Combo> wrong{{1, 1}};
  CHECK_THROWS_AS(quadrant_scores(r, wrong), std::invalid_argument);
  const std::vector<Combo> two{{0, 0}, {1, 1}};
  CHECK_THROWS_AS(quadrant_scores(r, two), std::invalid_argument);
  r.push_back(constant_matrix(2, {1, 1}, 3, 2, 0.5));
  CHECK_THROWS_AS(overall_f1(r), std::invalid_argument);
}

TEST_CASE("percent formatting") {
  CHECK(format_percent(0.8) == "80.00");
  CHECK(format_percent(0.12345) == "12.35");
  CHECK(format_percent(std::nullopt) == "n/a");
}
