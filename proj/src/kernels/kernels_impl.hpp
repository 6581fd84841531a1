// Copyright (c) 2026, hoplab authors
// SPDX-License-Identifier: Apache-2.0
//
// Shared by the kernel variants; not part of the public include tree.

#pragma once

#include <cmath>

#include "hoplab/kernels.hpp"

namespace hoplab::kernels {

// Reference per-element AdamW update. Vector variants use it for their tails
// and must reproduce its operation order in their lanes.
inline void adamw_element(const AdamWArgs& a, double g, double& w, double& m,
                          double& v) {
  m = a.beta1 * m + a.one_minus_beta1 * g;
  v = a.beta2 * v + a.one_minus_beta2 * (g * g);
  const double m_hat = m / a.bias_correction1;
  const double v_hat = v / a.bias_correction2;
  const double update = m_hat / (std::sqrt(v_hat) + a.eps) + a.weight_decay * w;
  w = w - a.lr * update;
}

namespace detail {
const KernelTable* avx2_table_if_compiled();
const KernelTable* neon_table_if_compiled();
}  // namespace detail

}  // namespace hoplab::kernels
