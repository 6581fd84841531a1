// Copyright (c) 2026, hoplab authors
// SPDX-License-Identifier: Apache-2.0
//
// Sequence-level evaluation over per-hop F1 matrices.
//
// Every aggregate sums its terms in index order (language-major for cells,
// hop order for hops) and divides once, so results are reproducible exactly.

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hoplab/data.hpp"

namespace hoplab {

// Mean of the per-class F1 scores for labels {0, 1}; a class with P + R = 0
// scores 0.
double f1_binary_macro(std::span<const int> predictions, std::span<const int> golds);

// F1 on every (language, category) test set after one hop.
struct F1Matrix {
  std::size_t hop = 0;
  Combo train_combo;
  std::size_t num_langs = 0;
  std::size_t num_categories = 0;
  std::vector<double> f1;  // f1[lang * num_categories + category]

  F1Matrix() = default;
  F1Matrix(std::size_t hop, Combo train_combo, std::size_t num_langs, std::size_t num_categories);

  double at(LangId lang, CategoryId category) const { return f1[lang * num_categories + category]; }
  double& at(LangId lang, CategoryId category) { return f1[lang * num_categories + category]; }
  std::size_t cells() const { return f1.size(); }

  // Complete and within [0, 1]; throws otherwise.
  void validate() const;

  friend bool operator==(const F1Matrix&, const F1Matrix&) = default;
};

double hopwise_avg(const F1Matrix& m);
double overall_f1(std::span<const F1Matrix> results);

struct Forgetting {
  double mean = 0.0;
  std::vector<double> per_item;  // per language or per category
};

// Peak-minus-final of each language's category-averaged trajectory over hops
// 1..N, then the mean over languages.
Forgetting forgetting_by_language(std::span<const F1Matrix> results);
Forgetting forgetting_by_category(std::span<const F1Matrix> results);

// Absent where the defining cell set is empty (e.g. OL/ID with one language).
struct QuadrantScores {
  std::optional<double> il_id;
  std::optional<double> ol_id;
  std::optional<double> il_od;
  std::optional<double> ol_od;
};

// Quadrants for a single hop trained on `combo`. OL/OD covers every cell except
// the training combo; with strict_ol_od it covers only cells that differ in
// both language and category.
QuadrantScores hop_quadrants(const F1Matrix& m, Combo combo, bool strict_ol_od = false);

// Per-hop quadrants averaged over hops; results[i] must be trained on combos[i].
QuadrantScores quadrant_scores(std::span<const F1Matrix> results, std::span<const Combo> combos,
                               bool strict_ol_od = false);

struct RunSummary {
  double overall_f1 = 0.0;
  std::optional<double> il_id;
  std::optional<double> ol_od;
  std::optional<double> il_od;
  std::optional<double> ol_id;
  double f_lang = 0.0;
  double f_categ = 0.0;
};

RunSummary summarize(std::span<const F1Matrix> results, std::span<const Combo> combos,
                     bool strict_ol_od = false);

// Value x 100 with two decimals, or "n/a".
std::string format_percent(std::optional<double> value);

}  // namespace hoplab
