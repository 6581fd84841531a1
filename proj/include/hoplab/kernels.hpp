// Copyright (c) 2026, hoplab authors
// SPDX-License-Identifier: Apache-2.0
//
// Flat inner-loop kernels over contiguous double arrays.
//
// Every variant evaluates each output element with exactly the same sequence
// of IEEE operations as the scalar reference (lanes only ever span independent
// outputs, no fused multiply-add), so all variants are bit-identical. The
// equivalence tests in tests/test_kernels.cpp hold every variant to that.

#pragma once

#include <cstddef>
#include <span>
#include <string_view>

namespace hoplab::kernels {

struct AdamWArgs {
  double lr = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double one_minus_beta1 = 0.1;
  double one_minus_beta2 = 0.001;
  double bias_correction1 = 1.0;  // 1 - beta1^t
  double bias_correction2 = 1.0;  // 1 - beta2^t
  double eps = 1e-8;
  double weight_decay = 0.0;
};

struct KernelTable {
  std::string_view name;

  // y[i] = y[i] + alpha * x[i]
  void (*axpy)(std::size_t n, double alpha, const double* x, double* y);
  // out[i] = a[i] + b[i]
  void (*add)(std::size_t n, const double* a, const double* b, double* out);
  // out[i] = c * a[i]
  void (*scale)(std::size_t n, double c, const double* a, double* out);
  // out[i] = a[i] * b[i]
  void (*mul)(std::size_t n, const double* a, const double* b, double* out);
  // w[i] = w[i] - lr * g[i]
  void (*sgd_step)(std::size_t n, double lr, const double* g, double* w);
  // Decoupled-weight-decay Adam update of w, m, v in place.
  void (*adamw_step)(std::size_t n, const AdamWArgs& args, const double* g,
                     double* w, double* m, double* v);
};

const KernelTable& scalar_table();

// nullptr when the variant was not compiled in or the CPU lacks it.
const KernelTable* avx2_table();
const KernelTable* neon_table();

// Every table usable on this machine, scalar first.
std::span<const KernelTable* const> available_tables();

// The table used by numerics. Picked once: HOPLAB_KERNELS=scalar|avx2|neon
// forces a variant, otherwise the widest available one wins.
const KernelTable& active();

}  // namespace hoplab::kernels
