// Copyright (c) 2026, hoplab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hoplab/corpus.hpp"
#include "hoplab/data.hpp"

namespace hoplab {

struct AugmentConfig {
  double fraction = 0.1;
  bool stratified = false;  // sample the subset per label instead of uniformly
  std::uint64_t seed = 0;

  void validate() const;
};

// round(fraction * n), halves rounded up.
std::size_t augment_sample_count(std::size_t n, double fraction);

// Returns train_set followed by translations of a random subset of it into
// every language in `languages` except hop_lang. Translations are ordered by
// sampled position, then target language id.
std::vector<Example> augment(std::span<const Example> train_set,
                             std::span<const LangId> languages, LangId hop_lang,
                             const AugmentConfig& config, const Translator& translator);

}  // namespace hoplab
