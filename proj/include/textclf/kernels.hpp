#pragma once

#include <cstddef>

// Float32 inner-loop kernels. A scalar reference implementation always
// exists; an AVX2 variant is selected at runtime when the CPU supports it.
// Double-precision callers use the generic loops in widemlp.hpp directly.

namespace textclf::kernels {

struct KernelsF32 {
  // y = W x + b, W row-major (out x in)
  void (*affine)(const float* W, const float* x, const float* b, float* y,
                 std::size_t out_dim, std::size_t in_dim);
  // dx = W^T dy, W row-major (out x in)
  void (*matvec_t)(const float* W, const float* dy, float* dx,
                   std::size_t out_dim, std::size_t in_dim);
  // y += a * x
  void (*axpy)(float a, const float* x, float* y, std::size_t n);
  // dW += dy * x^T, dW row-major (out x in)
  void (*outer_accum)(const float* dy, const float* x, float* dW,
                      std::size_t out_dim, std::size_t in_dim);
  void (*relu)(float* x, std::size_t n);
  // Adam with precomputed bias corrections bc1 = 1-b1^t, bc2 = 1-b2^t
  void (*adam)(float* theta, float* m, float* v, const float* g, std::size_t n,
               float lr, float beta1, float beta2, float eps, float bc1,
               float bc2);
  const char* name;
};

const KernelsF32& scalar_f32();

// Dispatched variant (AVX2 when available, otherwise scalar).
const KernelsF32& f32();

// Test hook: force the scalar path regardless of CPU support.
void force_scalar(bool on);

bool avx2_available();

}  // namespace textclf::kernels
