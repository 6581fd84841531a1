// Copyright (c) 2026, hoplab authors
// SPDX-License-Identifier: Apache-2.0

#include "hoplab/augment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "hoplab/random.hpp"

namespace hoplab {

void AugmentConfig::validate() const {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("augment: fraction must lie in [0, 1], got " +
                                std::to_string(fraction));
  }
}

std::size_t augment_sample_count(std::size_t n, double fraction) {
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 0.5));
}

namespace {

std::vector<std::size_t> uniform_subset(std::size_t n, std::size_t m, Rng& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  rng.shuffle(std::span<std::size_t>(idx));
  idx.resize(m);
  std::sort(idx.begin(), idx.end());
  return idx;
}

// Per-label subsets whose sizes follow the label proportions (largest
// remainder on label 1 first), so the total is still m.
std::vector<std::size_t> stratified_subset(std::span<const Example> set, std::size_t m,
                                           Rng& rng) {
  std::array<std::vector<std::size_t>, 2> by_label;
  for (std::size_t i = 0; i < set.size(); ++i) by_label[set[i].label == 1].push_back(i);
  const std::size_t take_pos = std::min(
      by_label[1].size(),
      augment_sample_count(m, static_cast<double>(by_label[1].size()) /
                                  static_cast<double>(set.size())));
  const std::size_t take_neg = std::min(by_label[0].size(), m - take_pos);
  std::vector<std::size_t> out;
  for (auto [label, take] : {std::pair{1, take_pos}, std::pair{0, take_neg}}) {
    auto& ids = by_label[label];
    rng.shuffle(std::span<std::size_t>(ids));
    out.insert(out.end(), ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(take));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<Example> augment(std::span<const Example> train_set,
                             std::span<const LangId> languages, LangId hop_lang,
                             const AugmentConfig& config, const Translator& translator) {
  config.validate();
  if (std::find(languages.begin(), languages.end(), hop_lang) == languages.end()) {
    throw std::invalid_argument("augment: hop language " + std::to_string(hop_lang) +
                                " is not in the language set");
  }
  for (const Example& ex : train_set) {
    if (ex.lang != hop_lang) {
      throw std::invalid_argument("augment: example " + std::to_string(ex.id) +
                                  " is in language " + std::to_string(ex.lang) +
                                  ", expected " + std::to_string(hop_lang));
    }
  }

  std::vector<Example> out(train_set.begin(), train_set.end());
  const std::size_t m = augment_sample_count(train_set.size(), config.fraction);
  if (m == 0) return out;

  Rng rng(config.seed);
  const std::vector<std::size_t> subset = config.stratified
                                              ? stratified_subset(train_set, m, rng)
                                              : uniform_subset(train_set.size(), m, rng);

  std::vector<LangId> targets;
  for (LangId l : languages) {
    if (l != hop_lang) targets.push_back(l);
  }
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());

  out.reserve(out.size() + subset.size() * targets.size());
  for (std::size_t i : subset) {
    for (LangId target : targets) out.push_back(translate(train_set[i], target, translator));
  }
  return out;
}

}  // namespace hoplab
