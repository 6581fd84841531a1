// Copyright (c) 2026, hoplab authors
// SPDX-License-Identifier: Apache-2.0

#include "hoplab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace hoplab {

double f1_binary_macro(std::span<const int> predictions, std::span<const int> golds) {
  if (predictions.empty() || predictions.size() != golds.size()) {
    throw std::invalid_argument("f1: need equal, non-zero numbers of predictions and golds");
  }
  // confusion[gold][pred]
  std::size_t confusion[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if ((predictions[i] != 0 && predictions[i] != 1) || (golds[i] != 0 && golds[i] != 1)) {
      throw std::invalid_argument("f1: labels must be 0 or 1");
    }
    ++confusion[golds[i]][predictions[i]];
  }
  double total = 0.0;
  for (int c : {0, 1}) {
    const double tp = static_cast<double>(confusion[c][c]);
    const double fp = static_cast<double>(confusion[1 - c][c]);
    const double fn = static_cast<double>(confusion[c][1 - c]);
    // 2PR/(P+R) reduces to 2tp/(2tp+fp+fn); zero when the class is never hit.
    const double denom = 2.0 * tp + fp + fn;
    total += tp > 0.0 ? 2.0 * tp / denom : 0.0;
  }
  return total / 2.0;
}

F1Matrix::F1Matrix(std::size_t hop, Combo train_combo, std::size_t num_langs,
                   std::size_t num_categories)
    : hop(hop),
      train_combo(train_combo),
      num_langs(num_langs),
      num_categories(num_categories),
      f1(num_langs * num_categories, 0.0) {}

void F1Matrix::validate() const {
  if (num_langs == 0 || num_categories == 0 || f1.size() != num_langs * num_categories) {
    throw std::invalid_argument("f1 matrix: incomplete for hop " + std::to_string(hop));
  }
  for (double v : f1) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument("f1 matrix: value outside [0, 1] at hop " + std::to_string(hop));
    }
  }
}

double hopwise_avg(const F1Matrix& m) {
  m.validate();
  double total = 0.0;
  for (double v : m.f1) total += v;
  return total / static_cast<double>(m.cells());
}

namespace {

void check_results(std::span<const F1Matrix> results) {
  if (results.empty()) throw std::invalid_argument("metrics: no hops");
  for (const F1Matrix& m : results) {
    m.validate();
    if (m.num_langs != results.front().num_langs ||
        m.num_categories != results.front().num_categories) {
      throw std::invalid_argument("metrics: hops disagree on the test grid");
    }
  }
}

// `by_language` selects the trajectory axis.
Forgetting forgetting(std::span<const F1Matrix> results, bool by_language) {
  check_results(results);
  const std::size_t K = results.front().num_langs, C = results.front().num_categories;
  const std::size_t items = by_language ? K : C;
  const std::size_t span = by_language ? C : K;
  Forgetting out;
  out.per_item.resize(items);
  double total = 0.0;
  for (std::size_t item = 0; item < items; ++item) {
    double peak = 0.0, last = 0.0;
    for (std::size_t i = 0; i < results.size(); ++i) {
      double sum = 0.0;
      for (std::size_t other = 0; other < span; ++other) {
        sum += by_language ? results[i].at(static_cast<LangId>(item), static_cast<CategoryId>(other))
                           : results[i].at(static_cast<LangId>(other), static_cast<CategoryId>(item));
      }
      const double t = sum / static_cast<double>(span);
      peak = i == 0 ? t : std::max(peak, t);
      last = t;
    }
    out.per_item[item] = peak - last;
    total += out.per_item[item];
  }
  out.mean = total / static_cast<double>(items);
  return out;
}

}  // namespace

double overall_f1(std::span<const F1Matrix> results) {
  check_results(results);
  double total = 0.0;
  for (const F1Matrix& m : results) total += hopwise_avg(m);
  return total / static_cast<double>(results.size());
}

Forgetting forgetting_by_language(std::span<const F1Matrix> results) {
  return forgetting(results, true);
}

Forgetting forgetting_by_category(std::span<const F1Matrix> results) {
  return forgetting(results, false);
}

QuadrantScores hop_quadrants(const F1Matrix& m, Combo combo, bool strict_ol_od) {
  m.validate();
  if (combo.lang >= m.num_langs || combo.category >= m.num_categories) {
    throw std::invalid_argument("quadrants: training combo outside the test grid");
  }
  double ol_id = 0.0, il_od = 0.0, ol_od = 0.0;
  std::size_t n_ol_id = 0, n_il_od = 0, n_ol_od = 0;
  for (LangId l = 0; l < m.num_langs; ++l) {
    for (CategoryId c = 0; c < m.num_categories; ++c) {
      const double v = m.at(l, c);
      const bool in_lang = l == combo.lang, in_domain = c == combo.category;
      if (!in_lang && in_domain) {
        ol_id += v;
        ++n_ol_id;
      }
      if (in_lang && !in_domain) {
        il_od += v;
        ++n_il_od;
      }
      const bool counts = strict_ol_od ? (!in_lang && !in_domain) : !(in_lang && in_domain);
      if (counts) {
        ol_od += v;
        ++n_ol_od;
      }
    }
  }
  auto mean = [](double sum, std::size_t n) -> std::optional<double> {
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
  };
  return {m.at(combo.lang, combo.category), mean(ol_id, n_ol_id), mean(il_od, n_il_od),
          mean(ol_od, n_ol_od)};
}

QuadrantScores quadrant_scores(std::span<const F1Matrix> results, std::span<const Combo> combos,
                               bool strict_ol_od) {
  check_results(results);
  if (results.size() != combos.size()) {
    throw std::invalid_argument("quadrants: " + std::to_string(results.size()) + " results for " +
                                std::to_string(combos.size()) + " hops");
  }
  double sums[4] = {0, 0, 0, 0};
  bool defined[4] = {true, true, true, true};
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (results[i].train_combo != combos[i]) {
      throw std::invalid_argument("quadrants: hop " + std::to_string(i + 1) +
                                  " result was trained on a different combo");
    }
    const QuadrantScores q = hop_quadrants(results[i], combos[i], strict_ol_od);
    const std::optional<double>* parts[4] = {&q.il_id, &q.ol_id, &q.il_od, &q.ol_od};
    for (int k = 0; k < 4; ++k) {
      if (parts[k]->has_value()) {
        sums[k] += **parts[k];
      } else {
        defined[k] = false;
      }
    }
  }
  const double n = static_cast<double>(results.size());
  auto finish = [&](int k) -> std::optional<double> {
    if (!defined[k]) return std::nullopt;
    return sums[k] / n;
  };
  return {finish(0), finish(1), finish(2), finish(3)};
}

RunSummary summarize(std::span<const F1Matrix> results, std::span<const Combo> combos,
                     bool strict_ol_od) {
  const QuadrantScores q = quadrant_scores(results, combos, strict_ol_od);
  RunSummary s;
  s.overall_f1 = overall_f1(results);
  s.il_id = q.il_id;
  s.ol_od = q.ol_od;
  s.il_od = q.il_od;
  s.ol_id = q.ol_id;
  s.f_lang = forgetting_by_language(results).mean;
  s.f_categ = forgetting_by_category(results).mean;
  return s;
}

std::string format_percent(std::optional<double> value) {
  if (!value) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", *value * 100.0);
  return buf;
}

}  // namespace hoplab
