// Copyright (c) 2026, hoplab authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "hoplab/kernels.hpp"
#include "kernels_impl.hpp"

namespace hoplab::kernels {
namespace scalar {

void axpy(std::size_t n, double alpha, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void add(std::size_t n, const double* a, const double* b, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void scale(std::size_t n, double c, const double* a, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = c * a[i];
}

void mul(std::size_t n, const double* a, const double* b, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void sgd_step(std::size_t n, double lr, const double* g, double* w) {
  for (std::size_t i = 0; i < n; ++i) w[i] = w[i] - lr * g[i];
}

void adamw_step(std::size_t n, const AdamWArgs& a, const double* g, double* w,
                double* m, double* v) {
  for (std::size_t i = 0; i < n; ++i) {
    adamw_element(a, g[i], w[i], m[i], v[i]);
  }
}

}  // namespace scalar

const KernelTable& scalar_table() {
  static const KernelTable table{
      "scalar",       scalar::axpy,     scalar::add,        scalar::scale,
      scalar::mul,    scalar::sgd_step, scalar::adamw_step,
  };
  return table;
}

}  // namespace hoplab::kernels
