// Copyright (c) 2026, hoplab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hoplab/data.hpp"

namespace hoplab {

struct HopSequence {
  std::string id;
  std::uint64_t seed = 0;
  std::vector<Combo> hops;

  std::size_t size() const { return hops.size(); }
};

// Seeded uniform sample without replacement from all language x category
// combos: a shuffle of the full list truncated to n_hops.
HopSequence build_sequence(std::size_t num_langs, std::size_t num_categories,
                           std::size_t n_hops, std::uint64_t seed, std::string id = {});

// True when no combo occurs twice.
bool has_no_repeats(const HopSequence& sequence);

// One line per hop: "hop_index, lang_name, category_name", hop_index from 1.
void write_sequence_file(const std::filesystem::path& path, const HopSequence& sequence,
                         const std::vector<std::string>& lang_names,
                         const std::vector<std::string>& category_names);
HopSequence read_sequence_file(const std::filesystem::path& path,
                               const std::vector<std::string>& lang_names,
                               const std::vector<std::string>& category_names);

}  // namespace hoplab
