// Copyright (c) 2026, hoplab authors
// SPDX-License-Identifier: Apache-2.0
//
// AVX2 variants. This translation unit is built with -mavx2 (and without
// -mfma); it is only entered after a runtime CPU check.

#include "kernels_impl.hpp"

#if defined(__AVX2__)
#include <immintrin.h>

namespace hoplab::kernels {
namespace avx2 {

constexpr std::size_t kLanes = 4;

void axpy(std::size_t n, double alpha, const double* x, double* y) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void add(std::size_t n, const double* a, const double* b, double* out) {
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i),
                                            _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void scale(std::size_t n, double c, const double* a, double* out) {
  const __m256d vc = _mm256_set1_pd(c);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(vc, _mm256_loadu_pd(a + i)));
  }
  for (; i < n; ++i) out[i] = c * a[i];
}

void mul(std::size_t n, const double* a, const double* b, double* out) {
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i),
                                            _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void sgd_step(std::size_t n, double lr, const double* g, double* w) {
  const __m256d vlr = _mm256_set1_pd(lr);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d step = _mm256_mul_pd(vlr, _mm256_loadu_pd(g + i));
    _mm256_storeu_pd(w + i, _mm256_sub_pd(_mm256_loadu_pd(w + i), step));
  }
  for (; i < n; ++i) w[i] = w[i] - lr * g[i];
}

void adamw_step(std::size_t n, const AdamWArgs& a, const double* g, double* w,
                double* m, double* v) {
  const __m256d b1 = _mm256_set1_pd(a.beta1);
  const __m256d b2 = _mm256_set1_pd(a.beta2);
  const __m256d omb1 = _mm256_set1_pd(a.one_minus_beta1);
  const __m256d omb2 = _mm256_set1_pd(a.one_minus_beta2);
  const __m256d bc1 = _mm256_set1_pd(a.bias_correction1);
  const __m256d bc2 = _mm256_set1_pd(a.bias_correction2);
  const __m256d eps = _mm256_set1_pd(a.eps);
  const __m256d wd = _mm256_set1_pd(a.weight_decay);
  const __m256d lr = _mm256_set1_pd(a.lr);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d vg = _mm256_loadu_pd(g + i);
    const __m256d vw = _mm256_loadu_pd(w + i);
    __m256d vm = _mm256_loadu_pd(m + i);
    __m256d vv = _mm256_loadu_pd(v + i);
    vm = _mm256_add_pd(_mm256_mul_pd(b1, vm), _mm256_mul_pd(omb1, vg));
    vv = _mm256_add_pd(_mm256_mul_pd(b2, vv),
                       _mm256_mul_pd(omb2, _mm256_mul_pd(vg, vg)));
    const __m256d m_hat = _mm256_div_pd(vm, bc1);
    const __m256d v_hat = _mm256_div_pd(vv, bc2);
    const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(v_hat), eps);
    const __m256d update =
        _mm256_add_pd(_mm256_div_pd(m_hat, denom), _mm256_mul_pd(wd, vw));
    _mm256_storeu_pd(w + i, _mm256_sub_pd(vw, _mm256_mul_pd(lr, update)));
    _mm256_storeu_pd(m + i, vm);
    _mm256_storeu_pd(v + i, vv);
  }
  for (; i < n; ++i) adamw_element(a, g[i], w[i], m[i], v[i]);
}

}  // namespace avx2

namespace detail {
const KernelTable* avx2_table_if_compiled() {
  static const KernelTable table{
      "avx2",      avx2::axpy,     avx2::add,        avx2::scale,
      avx2::mul,   avx2::sgd_step, avx2::adamw_step,
  };
  return &table;
}
}  // namespace detail

}  // namespace hoplab::kernels

#else

namespace hoplab::kernels::detail {
const KernelTable* avx2_table_if_compiled() { return nullptr; }
}  // namespace hoplab::kernels::detail

#endif
