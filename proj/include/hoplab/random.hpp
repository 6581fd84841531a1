// Copyright (c) 2026, hoplab authors
// SPDX-License-Identifier: Apache-2.0
//
// Seeded randomness that is reproducible across standard libraries: the
// mt19937_64 engine is fully specified, and every distribution here is
// implemented locally rather than taken from <random>.

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace hoplab {

std::uint64_t splitmix64(std::uint64_t x);

// Derives an independent stream seed from a parent seed, a purpose tag and an
// index (e.g. the hop number).
std::uint64_t mix_seed(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform in [0, n); n > 0. Rejection sampling, no modulo bias.
  std::uint64_t uniform_index(std::uint64_t n);
  // Uniform in [0, 1) with 53 random bits.
  double uniform01();
  double normal();
  bool bernoulli(double p) { return uniform01() < p; }

  template <class T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[uniform_index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace hoplab
