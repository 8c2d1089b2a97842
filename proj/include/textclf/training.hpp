#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "textclf/corpus.hpp"
#include "textclf/vectorizer.hpp"
#include "textclf/widemlp.hpp"

namespace textclf {

enum class InputRepr { Bow, Tfidf, Glove };

std::string repr_name(InputRepr r);
InputRepr parse_repr(const std::string& s);

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 16;
  double base_lr = 1e-3;
  double dropout = 0.5;
  std::uint64_t seed = 0;
  std::size_t n_runs = 5;
  InputRepr repr = InputRepr::Bow;
  std::size_t depth = 1;
  std::size_t hidden_dim = 1024;
  bool eval_each_epoch = false;
  std::size_t threads = 1;
};

template <class T>
struct AdamState {
  static constexpr double beta1 = 0.9;
  static constexpr double beta2 = 0.999;
  static constexpr double eps = 1e-8;
  std::uint64_t step = 0;
  std::vector<std::vector<T>> m_w, v_w, m_b, v_b;  // per layer

  static AdamState init(const MLPParams<T>& p) {
    AdamState s;
    for (const auto& l : p.layers) {
      s.m_w.emplace_back(l.weight.size(), T(0));
      s.v_w.emplace_back(l.weight.size(), T(0));
      s.m_b.emplace_back(l.bias.size(), T(0));
      s.v_b.emplace_back(l.bias.size(), T(0));
    }
    return s;
  }
};

// Numerically stabilized softmax cross-entropy. Returns the loss and the
// logit gradient softmax(z) - onehot(label).
template <class T>
std::pair<double, std::vector<T>> cross_entropy(std::span<const T> logits,
                                                std::int32_t label) {
  if (label < 0 || static_cast<std::size_t>(label) >= logits.size())
    throw std::out_of_range("cross_entropy: label out of range");
  double maxv = -std::numeric_limits<double>::infinity();
  for (const T z : logits) maxv = std::max(maxv, static_cast<double>(z));
  double denom = 0.0;
  for (const T z : logits) denom += std::exp(static_cast<double>(z) - maxv);
  const double loss =
      -(static_cast<double>(logits[static_cast<std::size_t>(label)]) - maxv -
        std::log(denom));
  std::vector<T> dlogits(logits.size());
  for (std::size_t c = 0; c < logits.size(); ++c) {
    const double p = std::exp(static_cast<double>(logits[c]) - maxv) / denom;
    dlogits[c] = static_cast<T>(p - (static_cast<std::size_t>(label) == c ? 1.0 : 0.0));
  }
  return {loss, std::move(dlogits)};
}

inline double linear_decay(std::uint64_t step, std::uint64_t total_steps,
                           double base_lr) {
  if (total_steps == 0) throw std::invalid_argument("linear_decay: total_steps == 0");
  return base_lr * (1.0 - static_cast<double>(step) / static_cast<double>(total_steps));
}

template <class T>
void adam_tensor(std::span<T> theta, std::span<T> m, std::span<T> v,
                 std::span<const T> g, double lr, double bc1, double bc2) {
  if constexpr (std::is_same_v<T, float>) {
    kernels::f32().adam(theta.data(), m.data(), v.data(), g.data(), theta.size(),
                        static_cast<float>(lr),
                        static_cast<float>(AdamState<T>::beta1),
                        static_cast<float>(AdamState<T>::beta2),
                        static_cast<float>(AdamState<T>::eps),
                        static_cast<float>(bc1), static_cast<float>(bc2));
  } else {
    const double b1 = AdamState<T>::beta1, b2 = AdamState<T>::beta2;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = static_cast<T>(b1 * m[i] + (1.0 - b1) * g[i]);
      v[i] = static_cast<T>(b2 * v[i] + (1.0 - b2) * g[i] * g[i]);
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      theta[i] -= static_cast<T>(lr * mhat / (std::sqrt(vhat) + AdamState<T>::eps));
    }
  }
}

template <class T>
void adam_step(AdamState<T>& state, MLPParams<T>& params,
               const Gradients<T>& grads, double lr) {
  if (state.m_w.size() != params.layers.size())
    throw std::invalid_argument("adam_step: state/params shape mismatch");
  ++state.step;
  const double bc1 = 1.0 - std::pow(AdamState<T>::beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(AdamState<T>::beta2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < params.layers.size(); ++k) {
    auto& l = params.layers[k];
    const auto& gl = grads.layers[k];
    if (gl.weight.size() != l.weight.size() || gl.bias.size() != l.bias.size())
      throw std::invalid_argument("adam_step: gradient shape mismatch");
    adam_tensor<T>(l.weight, state.m_w[k], state.v_w[k], gl.weight, lr, bc1, bc2);
    adam_tensor<T>(l.bias, state.m_b[k], state.v_b[k], gl.bias, lr, bc1, bc2);
  }
}

// Per-document model inputs, fixed before the training loop. For tfidf the
// idf model is fit on the train split only.
struct PreparedInputs {
  InputRepr repr = InputRepr::Bow;
  std::size_t input_dim = 0;
  std::vector<std::vector<std::uint32_t>> idx;  // sparse reprs
  std::vector<std::vector<float>> val;          // sparse weights or dense vectors
  IdfModel idf;                                 // tfidf only
};

PreparedInputs prepare_inputs(const Dataset& ds, std::size_t vocab_size,
                              InputRepr repr, const EmbeddingTable* glove = nullptr);

struct EpochLog {
  std::size_t run = 0;
  std::size_t epoch = 0;
  std::uint64_t step = 0;  // optimizer steps taken so far
  double lr = 0.0;
  double train_loss = 0.0;
  double test_accuracy = -1.0;  // < 0 when not evaluated
  double seconds_elapsed = 0.0;
};

struct TrainOutput {
  MLPParams<float> params;
  std::vector<EpochLog> log;
};

// Full protocol: per-epoch seeded reshuffle, last partial batch included,
// per-step linearly decaying lr over the total step count.
TrainOutput train(const Dataset& ds, const PreparedInputs& inputs,
                  const TrainConfig& cfg, std::size_t run_index = 0,
                  std::ostream* jsonl_log = nullptr);

std::vector<std::int32_t> predict(const MLPParams<float>& params,
                                  const PreparedInputs& inputs,
                                  const std::vector<std::size_t>& doc_ids,
                                  std::size_t threads = 1);

double evaluate(const MLPParams<float>& params, const Dataset& ds,
                const PreparedInputs& inputs, std::size_t threads = 1);

struct RunResult {
  std::vector<double> accuracies;
  std::vector<double> run_seconds;
  double mean = 0.0;
  double sd = 0.0;  // sample SD, 0 for a single run
  double total_seconds = 0.0;
  std::vector<EpochLog> log;
};

// Seeds are cfg.seed + 0 .. cfg.seed + n_runs-1.
RunResult run_experiment(const Dataset& ds, const TrainConfig& cfg,
                         std::size_t vocab_size,
                         const EmbeddingTable* glove = nullptr,
                         std::ostream* jsonl_log = nullptr);

}  // namespace textclf
