// AVX2/FMA variants of the float32 kernels. Compiled with -mavx2 -mfma in a
// dedicated TU; only reached after a runtime cpuid check in kernels.cpp.

#include <immintrin.h>

#include <cmath>
#include <cstddef>

#include "textclf/kernels.hpp"

namespace textclf::kernels {

namespace {

inline float hsum256(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  __m128 s = _mm_add_ps(lo, hi);
  s = _mm_add_ps(s, _mm_movehl_ps(s, s));
  s = _mm_add_ss(s, _mm_shuffle_ps(s, s, 0x55));
  return _mm_cvtss_f32(s);
}

void affine_avx2(const float* W, const float* x, const float* b, float* y,
                 std::size_t out_dim, std::size_t in_dim) {
  for (std::size_t r = 0; r < out_dim; ++r) {
    const float* row = W + r * in_dim;
    __m256 acc0 = _mm256_setzero_ps();
    __m256 acc1 = _mm256_setzero_ps();
    std::size_t c = 0;
    for (; c + 16 <= in_dim; c += 16) {
      acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(row + c), _mm256_loadu_ps(x + c), acc0);
      acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(row + c + 8), _mm256_loadu_ps(x + c + 8), acc1);
    }
    for (; c + 8 <= in_dim; c += 8) {
      acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(row + c), _mm256_loadu_ps(x + c), acc0);
    }
    float acc = hsum256(_mm256_add_ps(acc0, acc1));
    for (; c < in_dim; ++c) acc += row[c] * x[c];
    y[r] = acc + b[r];
  }
}

void matvec_t_avx2(const float* W, const float* dy, float* dx,
                   std::size_t out_dim, std::size_t in_dim) {
  std::size_t c = 0;
  for (; c + 8 <= in_dim; c += 8) _mm256_storeu_ps(dx + c, _mm256_setzero_ps());
  for (; c < in_dim; ++c) dx[c] = 0.0f;
  for (std::size_t r = 0; r < out_dim; ++r) {
    const float* row = W + r * in_dim;
    const __m256 g = _mm256_set1_ps(dy[r]);
    std::size_t i = 0;
    for (; i + 8 <= in_dim; i += 8) {
      __m256 acc = _mm256_loadu_ps(dx + i);
      acc = _mm256_fmadd_ps(g, _mm256_loadu_ps(row + i), acc);
      _mm256_storeu_ps(dx + i, acc);
    }
    for (; i < in_dim; ++i) dx[i] += dy[r] * row[i];
  }
}

void axpy_avx2(float a, const float* x, float* y, std::size_t n) {
  const __m256 va = _mm256_set1_ps(a);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 acc = _mm256_loadu_ps(y + i);
    acc = _mm256_fmadd_ps(va, _mm256_loadu_ps(x + i), acc);
    _mm256_storeu_ps(y + i, acc);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void outer_accum_avx2(const float* dy, const float* x, float* dW,
                      std::size_t out_dim, std::size_t in_dim) {
  for (std::size_t r = 0; r < out_dim; ++r) {
    axpy_avx2(dy[r], x, dW + r * in_dim, in_dim);
  }
}

void relu_avx2(float* x, std::size_t n) {
  const __m256 zero = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(x + i, _mm256_max_ps(_mm256_loadu_ps(x + i), zero));
  }
  for (; i < n; ++i) x[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void adam_avx2(float* theta, float* m, float* v, const float* g, std::size_t n,
               float lr, float beta1, float beta2, float eps, float bc1,
               float bc2) {
  const __m256 vb1 = _mm256_set1_ps(beta1);
  const __m256 vb1c = _mm256_set1_ps(1.0f - beta1);
  const __m256 vb2 = _mm256_set1_ps(beta2);
  const __m256 vb2c = _mm256_set1_ps(1.0f - beta2);
  const __m256 vlr = _mm256_set1_ps(lr);
  const __m256 veps = _mm256_set1_ps(eps);
  const __m256 rbc1 = _mm256_set1_ps(1.0f / bc1);
  const __m256 rbc2 = _mm256_set1_ps(1.0f / bc2);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 gi = _mm256_loadu_ps(g + i);
    __m256 mi = _mm256_loadu_ps(m + i);
    __m256 vi = _mm256_loadu_ps(v + i);
    mi = _mm256_add_ps(_mm256_mul_ps(vb1, mi), _mm256_mul_ps(vb1c, gi));
    vi = _mm256_add_ps(_mm256_mul_ps(vb2, vi),
                       _mm256_mul_ps(vb2c, _mm256_mul_ps(gi, gi)));
    _mm256_storeu_ps(m + i, mi);
    _mm256_storeu_ps(v + i, vi);
    const __m256 mhat = _mm256_mul_ps(mi, rbc1);
    const __m256 vhat = _mm256_mul_ps(vi, rbc2);
    const __m256 denom = _mm256_add_ps(_mm256_sqrt_ps(vhat), veps);
    __m256 th = _mm256_loadu_ps(theta + i);
    th = _mm256_sub_ps(th, _mm256_div_ps(_mm256_mul_ps(vlr, mhat), denom));
    _mm256_storeu_ps(theta + i, th);
  }
  for (; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0f - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0f - beta2) * g[i] * g[i];
    const float mhat = m[i] / bc1;
    const float vhat = v[i] / bc2;
    theta[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

const KernelsF32 kAvx2 = {
    affine_avx2, matvec_t_avx2, axpy_avx2,
    outer_accum_avx2, relu_avx2, adam_avx2, "avx2",
};

}  // namespace

const KernelsF32& avx2_f32() { return kAvx2; }

}  // namespace textclf::kernels
