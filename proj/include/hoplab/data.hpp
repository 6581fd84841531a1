// Copyright (c) 2026, hoplab authors
// SPDX-License-Identifier: Apache-2.0
//
// Value types shared by the data, model and training layers.

#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace hoplab {

using LangId = std::uint32_t;
using CategoryId = std::uint32_t;
using TokenId = std::uint32_t;

// Id 0 never belongs to a language; it pads sequences.
inline constexpr TokenId kPadToken = 0;

enum class Origin { kNatural, kTranslated };

struct Example {
  std::uint64_t id = 0;
  std::vector<TokenId> tokens;
  std::string raw_text;
  int label = 0;  // 0 = negative, 1 = positive
  LangId lang = 0;
  CategoryId category = 0;
  Origin origin = Origin::kNatural;

  friend bool operator==(const Example&, const Example&) = default;
};

struct Combo {
  LangId lang = 0;
  CategoryId category = 0;

  friend auto operator<=>(const Combo&, const Combo&) = default;
};

}  // namespace hoplab
