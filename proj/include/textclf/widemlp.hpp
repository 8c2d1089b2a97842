#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "textclf/kernels.hpp"

namespace textclf {

enum class InputMode : std::uint32_t { SparseBag = 0, Dense = 1 };

struct DropoutSpec {
  double ratio = 0.5;
  std::uint64_t seed = 0;
};

// One affine layer. For the sparse-bag first layer the weight is stored as
// an embedding matrix (in_dim x out_dim, one row per vocabulary token) so
// bag aggregation walks contiguous rows. Every other layer is the usual
// row-major out_dim x in_dim.
template <class T>
struct Layer {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  bool embedding_layout = false;
  std::vector<T> weight;
  std::vector<T> bias;
};

template <class T>
struct MLPParams {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  std::size_t n_classes = 0;
  std::size_t depth = 1;  // number of hidden layers, 1 or 2
  InputMode mode = InputMode::SparseBag;
  std::vector<Layer<T>> layers;  // depth+1 entries
};

template <class T>
struct Gradients {
  std::vector<Layer<T>> layers;
};

template <class T>
struct ForwardCache {
  std::vector<std::uint32_t> in_idx;  // sparse input
  std::vector<T> in_val;              // sparse weights or dense input copy
  std::vector<std::vector<T>> pre;    // pre-activation per hidden layer
  std::vector<std::vector<T>> act;    // post relu+dropout per hidden layer
  std::vector<std::vector<T>> scale;  // dropout scale (0 or 1/(1-p)); empty in eval
};

// ---- elementwise helpers: float goes through the dispatched kernels ----

template <class T>
inline void affine_op(const T* W, const T* x, const T* b, T* y, std::size_t out,
                      std::size_t in) {
  if constexpr (std::is_same_v<T, float>) {
    kernels::f32().affine(W, x, b, y, out, in);
  } else {
    for (std::size_t r = 0; r < out; ++r) {
      const T* row = W + r * in;
      T acc = 0;
      for (std::size_t c = 0; c < in; ++c) acc += row[c] * x[c];
      y[r] = acc + b[r];
    }
  }
}

template <class T>
inline void matvec_t_op(const T* W, const T* dy, T* dx, std::size_t out,
                        std::size_t in) {
  if constexpr (std::is_same_v<T, float>) {
    kernels::f32().matvec_t(W, dy, dx, out, in);
  } else {
    for (std::size_t c = 0; c < in; ++c) dx[c] = 0;
    for (std::size_t r = 0; r < out; ++r)
      for (std::size_t c = 0; c < in; ++c) dx[c] += dy[r] * W[r * in + c];
  }
}

template <class T>
inline void axpy_op(T a, const T* x, T* y, std::size_t n) {
  if constexpr (std::is_same_v<T, float>) {
    kernels::f32().axpy(a, x, y, n);
  } else {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
  }
}

template <class T>
inline void outer_accum_op(const T* dy, const T* x, T* dW, std::size_t out,
                           std::size_t in) {
  if constexpr (std::is_same_v<T, float>) {
    kernels::f32().outer_accum(dy, x, dW, out, in);
  } else {
    for (std::size_t r = 0; r < out; ++r)
      for (std::size_t c = 0; c < in; ++c) dW[r * in + c] += dy[r] * x[c];
  }
}

template <class T>
inline void relu_op(T* x, std::size_t n) {
  if constexpr (std::is_same_v<T, float>) {
    kernels::f32().relu(x, n);
  } else {
    for (std::size_t i = 0; i < n; ++i) x[i] = x[i] > 0 ? x[i] : T(0);
  }
}

// ---- model ----

// First layer ~ N(0,1); subsequent layers uniform(+-1/sqrt(fan_in)) for
// weights and biases; first-layer bias starts at zero. Deterministic in seed.
template <class T>
MLPParams<T> init_params(std::size_t input_dim, std::size_t hidden_dim,
                         std::size_t n_classes, std::size_t depth,
                         std::uint64_t seed, InputMode mode = InputMode::SparseBag) {
  if (input_dim == 0 || hidden_dim == 0 || n_classes == 0)
    throw std::invalid_argument("init_params: dimensions must be positive");
  if (depth != 1 && depth != 2)
    throw std::invalid_argument("init_params: depth must be 1 or 2");
  MLPParams<T> p;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  p.n_classes = n_classes;
  p.depth = depth;
  p.mode = mode;

  std::mt19937 rng(static_cast<std::uint32_t>(seed ^ (seed >> 32)));
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<std::size_t> outs;
  for (std::size_t k = 0; k < depth; ++k) outs.push_back(hidden_dim);
  outs.push_back(n_classes);

  std::size_t in = input_dim;
  for (std::size_t k = 0; k < outs.size(); ++k) {
    Layer<T> layer;
    layer.in_dim = in;
    layer.out_dim = outs[k];
    layer.embedding_layout = (k == 0 && mode == InputMode::SparseBag);
    layer.weight.resize(in * outs[k]);
    layer.bias.assign(outs[k], T(0));
    if (k == 0) {
      for (auto& w : layer.weight) w = static_cast<T>(normal(rng));
    } else {
      const double bound = 1.0 / std::sqrt(static_cast<double>(in));
      std::uniform_real_distribution<double> uni(-bound, bound);
      for (auto& w : layer.weight) w = static_cast<T>(uni(rng));
      for (auto& b : layer.bias) b = static_cast<T>(uni(rng));
    }
    p.layers.push_back(std::move(layer));
    in = outs[k];
  }
  return p;
}

// W1 x + b1 computed as a weighted sum of embedding rows.
template <class T>
std::vector<T> aggregate_embeddings(const MLPParams<T>& p,
                                    std::span<const std::uint32_t> idx,
                                    std::span<const T> val) {
  if (p.mode != InputMode::SparseBag)
    throw std::logic_error("aggregate_embeddings: model is not in sparse-bag mode");
  const Layer<T>& l0 = p.layers.front();
  std::vector<T> h(l0.bias.begin(), l0.bias.end());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] >= l0.in_dim)
      throw std::out_of_range("aggregate_embeddings: index beyond input_dim");
    axpy_op(val[k], l0.weight.data() + static_cast<std::size_t>(idx[k]) * l0.out_dim,
            h.data(), l0.out_dim);
  }
  return h;
}

namespace detail {

// Hidden stack after the first pre-activation: relu -> dropout per hidden
// layer, affine between, final affine to logits.
template <class T>
std::vector<T> run_stack(const MLPParams<T>& p, std::vector<T> h, bool train,
                         double dropout, std::mt19937* rng,
                         ForwardCache<T>* cache) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (std::size_t k = 0; k < p.depth; ++k) {
    if (cache) cache->pre.push_back(h);
    relu_op(h.data(), h.size());
    if (train && dropout > 0.0) {
      if (!rng) throw std::logic_error("forward: train-mode dropout needs an RNG");
      const T keep_scale = static_cast<T>(1.0 / (1.0 - dropout));
      std::vector<T> scale(h.size());
      for (std::size_t i = 0; i < h.size(); ++i) {
        scale[i] = uni(*rng) < dropout ? T(0) : keep_scale;
        h[i] *= scale[i];
      }
      if (cache) cache->scale.push_back(std::move(scale));
    } else if (cache) {
      cache->scale.emplace_back();  // identity
    }
    if (cache) cache->act.push_back(h);
    const Layer<T>& next = p.layers[k + 1];
    std::vector<T> y(next.out_dim);
    affine_op(next.weight.data(), h.data(), next.bias.data(), y.data(),
              next.out_dim, next.in_dim);
    h = std::move(y);
  }
  return h;
}

}  // namespace detail

template <class T>
std::vector<T> forward_sparse(const MLPParams<T>& p,
                              std::span<const std::uint32_t> idx,
                              std::span<const T> val, bool train,
                              double dropout = 0.0, std::mt19937* rng = nullptr,
                              ForwardCache<T>* cache = nullptr) {
  if (cache) {
    *cache = ForwardCache<T>{};
    cache->in_idx.assign(idx.begin(), idx.end());
    cache->in_val.assign(val.begin(), val.end());
  }
  std::vector<T> h = aggregate_embeddings(p, idx, val);
  return detail::run_stack(p, std::move(h), train, dropout, rng, cache);
}

template <class T>
std::vector<T> forward_dense(const MLPParams<T>& p, std::span<const T> x,
                             bool train, double dropout = 0.0,
                             std::mt19937* rng = nullptr,
                             ForwardCache<T>* cache = nullptr) {
  if (p.mode != InputMode::Dense)
    throw std::logic_error("forward_dense: model is not in dense mode");
  if (x.size() != p.input_dim)
    throw std::invalid_argument("forward_dense: input width mismatch");
  if (cache) {
    *cache = ForwardCache<T>{};
    cache->in_val.assign(x.begin(), x.end());
  }
  const Layer<T>& l0 = p.layers.front();
  std::vector<T> h(l0.out_dim);
  affine_op(l0.weight.data(), x.data(), l0.bias.data(), h.data(), l0.out_dim,
            l0.in_dim);
  return detail::run_stack(p, std::move(h), train, dropout, rng, cache);
}

template <class T>
Gradients<T> make_gradients(const MLPParams<T>& p) {
  Gradients<T> g;
  for (const auto& l : p.layers) {
    Layer<T> gl;
    gl.in_dim = l.in_dim;
    gl.out_dim = l.out_dim;
    gl.embedding_layout = l.embedding_layout;
    gl.weight.assign(l.weight.size(), T(0));
    gl.bias.assign(l.bias.size(), T(0));
    g.layers.push_back(std::move(gl));
  }
  return g;
}

template <class T>
void zero_gradients(Gradients<T>& g) {
  for (auto& l : g.layers) {
    std::fill(l.weight.begin(), l.weight.end(), T(0));
    std::fill(l.bias.begin(), l.bias.end(), T(0));
  }
}

// Accumulates (+=) into grads; caller zeroes between batches. The sparse
// first-layer gradient touches only rows present in the input bag.
template <class T>
void backward(const MLPParams<T>& p, const ForwardCache<T>& cache,
              const std::vector<T>& dlogits, Gradients<T>& grads) {
  if (cache.pre.size() != p.depth)
    throw std::logic_error("backward: cache does not match model depth");
  std::vector<T> dy(dlogits.begin(), dlogits.end());
  // layers depth..1: affine over hidden activations
  for (std::size_t k = p.depth; k >= 1; --k) {
    const Layer<T>& l = p.layers[k];
    Layer<T>& gl = grads.layers[k];
    const std::vector<T>& a = cache.act[k - 1];
    outer_accum_op(dy.data(), a.data(), gl.weight.data(), l.out_dim, l.in_dim);
    for (std::size_t r = 0; r < l.out_dim; ++r) gl.bias[r] += dy[r];
    std::vector<T> da(l.in_dim);
    matvec_t_op(l.weight.data(), dy.data(), da.data(), l.out_dim, l.in_dim);
    // undo dropout then relu
    const std::vector<T>& scale = cache.scale[k - 1];
    if (!scale.empty())
      for (std::size_t i = 0; i < da.size(); ++i) da[i] *= scale[i];
    const std::vector<T>& pre = cache.pre[k - 1];
    for (std::size_t i = 0; i < da.size(); ++i)
      if (!(pre[i] > 0)) da[i] = T(0);
    dy = std::move(da);
  }
  // first layer
  const Layer<T>& l0 = p.layers.front();
  Layer<T>& g0 = grads.layers.front();
  for (std::size_t r = 0; r < l0.out_dim; ++r) g0.bias[r] += dy[r];
  if (p.mode == InputMode::SparseBag) {
    for (std::size_t k = 0; k < cache.in_idx.size(); ++k) {
      axpy_op(cache.in_val[k], dy.data(),
              g0.weight.data() + static_cast<std::size_t>(cache.in_idx[k]) * l0.out_dim,
              l0.out_dim);
    }
  } else {
    outer_accum_op(dy.data(), cache.in_val.data(), g0.weight.data(), l0.out_dim,
                   l0.in_dim);
  }
}

template <class T>
std::size_t param_count(const MLPParams<T>& p) {
  std::size_t n = 0;
  for (const auto& l : p.layers) n += l.weight.size() + l.bias.size();
  return n;
}

// Checkpoint I/O (float32 little-endian payload, fixed header).
void save_checkpoint(const MLPParams<float>& p, const std::string& path);
MLPParams<float> load_checkpoint(const std::string& path);

}  // namespace textclf
