// Copyright (c) 2026, hoplab authors
// SPDX-License-Identifier: Apache-2.0
//
// NEON (AArch64) variants, two double lanes. vmulq/vaddq only; vfmaq would
// round differently from the scalar reference.

#include "kernels_impl.hpp"

#if defined(__aarch64__) && defined(__ARM_NEON)
#include <arm_neon.h>

namespace hoplab::kernels {
namespace neon {

constexpr std::size_t kLanes = 2;

void axpy(std::size_t n, double alpha, const double* x, double* y) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, vld1q_f64(x + i))));
  }
  for (; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void add(std::size_t n, const double* a, const double* b, double* out) {
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    vst1q_f64(out + i, vaddq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void scale(std::size_t n, double c, const double* a, double* out) {
  const float64x2_t vc = vdupq_n_f64(c);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    vst1q_f64(out + i, vmulq_f64(vc, vld1q_f64(a + i)));
  }
  for (; i < n; ++i) out[i] = c * a[i];
}

void mul(std::size_t n, const double* a, const double* b, double* out) {
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    vst1q_f64(out + i, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void sgd_step(std::size_t n, double lr, const double* g, double* w) {
  const float64x2_t vlr = vdupq_n_f64(lr);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    vst1q_f64(w + i, vsubq_f64(vld1q_f64(w + i), vmulq_f64(vlr, vld1q_f64(g + i))));
  }
  for (; i < n; ++i) w[i] = w[i] - lr * g[i];
}

void adamw_step(std::size_t n, const AdamWArgs& a, const double* g, double* w,
                double* m, double* v) {
  const float64x2_t b1 = vdupq_n_f64(a.beta1);
  const float64x2_t b2 = vdupq_n_f64(a.beta2);
  const float64x2_t omb1 = vdupq_n_f64(a.one_minus_beta1);
  const float64x2_t omb2 = vdupq_n_f64(a.one_minus_beta2);
  const float64x2_t bc1 = vdupq_n_f64(a.bias_correction1);
  const float64x2_t bc2 = vdupq_n_f64(a.bias_correction2);
  const float64x2_t eps = vdupq_n_f64(a.eps);
  const float64x2_t wd = vdupq_n_f64(a.weight_decay);
  const float64x2_t lr = vdupq_n_f64(a.lr);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const float64x2_t vg = vld1q_f64(g + i);
    const float64x2_t vw = vld1q_f64(w + i);
    float64x2_t vm = vld1q_f64(m + i);
    float64x2_t vv = vld1q_f64(v + i);
    vm = vaddq_f64(vmulq_f64(b1, vm), vmulq_f64(omb1, vg));
    vv = vaddq_f64(vmulq_f64(b2, vv), vmulq_f64(omb2, vmulq_f64(vg, vg)));
    const float64x2_t m_hat = vdivq_f64(vm, bc1);
    const float64x2_t v_hat = vdivq_f64(vv, bc2);
    const float64x2_t denom = vaddq_f64(vsqrtq_f64(v_hat), eps);
    const float64x2_t update = vaddq_f64(vdivq_f64(m_hat, denom), vmulq_f64(wd, vw));
    vst1q_f64(w + i, vsubq_f64(vw, vmulq_f64(lr, update)));
    vst1q_f64(m + i, vm);
    vst1q_f64(v + i, vv);
  }
  for (; i < n; ++i) adamw_element(a, g[i], w[i], m[i], v[i]);
}

}  // namespace neon

namespace detail {
const KernelTable* neon_table_if_compiled() {
  static const KernelTable table{
      "neon",     neon::axpy,     neon::add,        neon::scale,
      neon::mul,  neon::sgd_step, neon::adamw_step,
  };
  return &table;
}
}  // namespace detail

}  // namespace hoplab::kernels

#else

namespace hoplab::kernels::detail {
const KernelTable* neon_table_if_compiled() { return nullptr; }
}  // namespace hoplab::kernels::detail

#endif
