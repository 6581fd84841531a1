// Copyright (c) 2026, hoplab authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

#include "hoplab/kernels.hpp"
#include "kernels_impl.hpp"

namespace hoplab::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

std::vector<const KernelTable*> detect() {
  std::vector<const KernelTable*> tables{&scalar_table()};
  if (const KernelTable* t = detail::avx2_table_if_compiled(); t && cpu_has_avx2()) {
    tables.push_back(t);
  }
  // NEON is mandatory on AArch64, so being compiled in is enough.
  if (const KernelTable* t = detail::neon_table_if_compiled()) tables.push_back(t);
  return tables;
}

const std::vector<const KernelTable*>& tables() {
  static const std::vector<const KernelTable*> found = detect();
  return found;
}

const KernelTable& choose() {
  const auto& found = tables();
  if (const char* forced = std::getenv("HOPLAB_KERNELS"); forced && *forced) {
    for (const KernelTable* t : found) {
      if (t->name == forced) return *t;
    }
    throw std::runtime_error(std::string("HOPLAB_KERNELS=") + forced +
                             " is not available on this machine");
  }
  return *found.back();
}

}  // namespace

const KernelTable* avx2_table() {
  for (const KernelTable* t : tables()) {
    if (t->name == "avx2") return t;
  }
  return nullptr;
}

const KernelTable* neon_table() {
  for (const KernelTable* t : tables()) {
    if (t->name == "neon") return t;
  }
  return nullptr;
}

std::span<const KernelTable* const> available_tables() { return tables(); }

const KernelTable& active() {
  static const KernelTable& chosen = choose();
  return chosen;
}

}  // namespace hoplab::kernels
