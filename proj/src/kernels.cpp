#include "textclf/kernels.hpp"

#include <atomic>
#include <cmath>

namespace textclf::kernels {

namespace {

void affine_scalar(const float* W, const float* x, const float* b, float* y,
                   std::size_t out_dim, std::size_t in_dim) {
  for (std::size_t r = 0; r < out_dim; ++r) {
    const float* row = W + r * in_dim;
    float acc = 0.0f;
    for (std::size_t c = 0; c < in_dim; ++c) acc += row[c] * x[c];
    y[r] = acc + b[r];
  }
}

void matvec_t_scalar(const float* W, const float* dy, float* dx,
                     std::size_t out_dim, std::size_t in_dim) {
  for (std::size_t c = 0; c < in_dim; ++c) dx[c] = 0.0f;
  for (std::size_t r = 0; r < out_dim; ++r) {
    const float* row = W + r * in_dim;
    const float g = dy[r];
    for (std::size_t c = 0; c < in_dim; ++c) dx[c] += g * row[c];
  }
}

void axpy_scalar(float a, const float* x, float* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void outer_accum_scalar(const float* dy, const float* x, float* dW,
                        std::size_t out_dim, std::size_t in_dim) {
  for (std::size_t r = 0; r < out_dim; ++r) {
    float* row = dW + r * in_dim;
    const float g = dy[r];
    for (std::size_t c = 0; c < in_dim; ++c) row[c] += g * x[c];
  }
}

void relu_scalar(float* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void adam_scalar(float* theta, float* m, float* v, const float* g,
                 std::size_t n, float lr, float beta1, float beta2, float eps,
                 float bc1, float bc2) {
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0f - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0f - beta2) * g[i] * g[i];
    const float mhat = m[i] / bc1;
    const float vhat = v[i] / bc2;
    theta[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

const KernelsF32 kScalar = {
    affine_scalar, matvec_t_scalar, axpy_scalar,
    outer_accum_scalar, relu_scalar, adam_scalar, "scalar",
};

std::atomic<bool> g_force_scalar{false};

}  // namespace

const KernelsF32& scalar_f32() { return kScalar; }

#if defined(TEXTCLF_HAVE_AVX2_TU)
const KernelsF32& avx2_f32();  // defined in kernels_avx2.cpp
#endif

bool avx2_available() {
#if defined(TEXTCLF_HAVE_AVX2_TU) && defined(__GNUC__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelsF32& f32() {
  if (g_force_scalar.load(std::memory_order_relaxed)) return kScalar;
#if defined(TEXTCLF_HAVE_AVX2_TU)
  static const bool has_avx2 = avx2_available();
  if (has_avx2) return avx2_f32();
#endif
  return kScalar;
}

void force_scalar(bool on) { g_force_scalar.store(on, std::memory_order_relaxed); }

}  // namespace textclf::kernels
