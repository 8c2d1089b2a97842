#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>

#include "doctest.h"
#include "textclf/training.hpp"
#include "textclf/widemlp.hpp"

using namespace textclf;

namespace {

// loss as a pure function of the parameters, for finite differencing
double loss_of(const MLPParams<double>& p, const std::vector<std::uint32_t>& idx,
               const std::vector<double>& val, const std::vector<double>& dense,
               std::int32_t label) {
  const std::vector<double> logits =
      p.mode == InputMode::SparseBag
          ? forward_sparse<double>(p, idx, val, false)
          : forward_dense<double>(p, dense, false);
  return cross_entropy<double>(logits, label).first;
}

}  // namespace

TEST_CASE("init_params determinism and shapes") {
  const auto a = init_params<float>(100, 16, 5, 1, 42);
  const auto b = init_params<float>(100, 16, 5, 1, 42);
  REQUIRE(a.layers.size() == 2);
  CHECK(a.layers[0].weight == b.layers[0].weight);
  CHECK(a.layers[1].weight == b.layers[1].weight);
  CHECK(a.layers[1].bias == b.layers[1].bias);
  const auto c = init_params<float>(100, 16, 5, 1, 43);
  CHECK(a.layers[0].weight != c.layers[0].weight);

  const auto big = init_params<float>(30522, 1024, 20, 1, 0);
  CHECK(big.layers[0].weight.size() == 30522u * 1024u);
  CHECK(big.layers[1].weight.size() == 1024u * 20u);

  CHECK_THROWS(init_params<float>(10, 8, 3, 3, 0));
  CHECK_THROWS(init_params<float>(0, 8, 3, 1, 0));
}

TEST_CASE("first layer init is standard normal (statistical)") {
  const auto p = init_params<double>(1000, 1000, 2, 1, 123);
  const auto& w = p.layers[0].weight;
  const double n = static_cast<double>(w.size());
  const double mean = std::accumulate(w.begin(), w.end(), 0.0) / n;
  double sq = 0.0;
  for (const double x : w) sq += (x - mean) * (x - mean);
  const double sd = std::sqrt(sq / n);
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(sd - 1.0) < 0.01);
}

TEST_CASE("subsequent layer init respects the fan-in bound") {
  const auto p = init_params<double>(50, 64, 4, 2, 7);
  const double bound1 = 1.0 / std::sqrt(64.0);
  for (const double w : p.layers[1].weight) CHECK(std::abs(w) <= bound1);
  for (const double b : p.layers[1].bias) CHECK(std::abs(b) <= bound1);
}

TEST_CASE("aggregate_embeddings: one-hot selects a column, empty gives bias") {
  auto p = init_params<double>(12, 6, 3, 1, 1);
  const std::vector<std::uint32_t> onehot_idx = {7};
  const std::vector<double> onehot_val = {1.0};
  const auto h = aggregate_embeddings<double>(p, onehot_idx, onehot_val);
  for (std::size_t r = 0; r < 6; ++r)
    CHECK(h[r] == doctest::Approx(p.layers[0].weight[7 * 6 + r] + p.layers[0].bias[r]));

  const auto hb = aggregate_embeddings<double>(p, {}, {});
  for (std::size_t r = 0; r < 6; ++r) CHECK(hb[r] == p.layers[0].bias[r]);

  const std::vector<std::uint32_t> bad = {12};
  const std::vector<double> bad_val = {1.0};
  CHECK_THROWS(aggregate_embeddings<double>(p, bad, bad_val));
}

TEST_CASE("sparse aggregation equals dense matvec (oracle, double)") {
  auto p = init_params<double>(40, 10, 3, 1, 5);
  std::mt19937 rng(8);
  std::normal_distribution<double> d(0.0, 2.0);
  for (int t = 0; t < 100; ++t) {
    std::vector<std::uint32_t> idx;
    std::vector<double> val, dense(40, 0.0);
    for (std::uint32_t i = 0; i < 40; ++i) {
      if (rng() % 3 == 0) {
        const double w = d(rng);
        if (w == 0.0) continue;
        idx.push_back(i);
        val.push_back(w);
        dense[i] = w;
      }
    }
    const auto h = aggregate_embeddings<double>(p, idx, val);
    for (std::size_t r = 0; r < 10; ++r) {
      double acc = p.layers[0].bias[r];
      for (std::size_t c = 0; c < 40; ++c)
        acc += dense[c] * p.layers[0].weight[c * 10 + r];
      CHECK(std::abs(acc - h[r]) <= 1e-12);
    }
  }
}

TEST_CASE("forward: dropout 0 in train mode equals eval mode") {
  auto p = init_params<float>(20, 8, 4, 2, 3);
  const std::vector<std::uint32_t> idx = {1, 5, 17};
  const std::vector<float> val = {1.0f, 2.0f, 1.0f};
  std::mt19937 rng(1);
  const auto train_logits = forward_sparse<float>(p, idx, val, true, 0.0, &rng);
  const auto eval_logits = forward_sparse<float>(p, idx, val, false);
  CHECK(train_logits == eval_logits);
}

TEST_CASE("forward depth-1 matches the closed-form expression") {
  auto p = init_params<double>(6, 4, 3, 1, 9);
  const std::vector<std::uint32_t> idx = {0, 3};
  const std::vector<double> val = {2.0, -1.0};
  const auto logits = forward_sparse<double>(p, idx, val, false);
  // hand route: z = W1 x + b1; a = relu(z); y = W2 a + b2
  std::vector<double> z(4), a(4), y(3);
  for (std::size_t r = 0; r < 4; ++r) {
    z[r] = p.layers[0].bias[r] + 2.0 * p.layers[0].weight[0 * 4 + r] -
           1.0 * p.layers[0].weight[3 * 4 + r];
    a[r] = z[r] > 0 ? z[r] : 0.0;
  }
  for (std::size_t r = 0; r < 3; ++r) {
    y[r] = p.layers[1].bias[r];
    for (std::size_t c = 0; c < 4; ++c) y[r] += p.layers[1].weight[r * 4 + c] * a[c];
  }
  for (std::size_t r = 0; r < 3; ++r) CHECK(logits[r] == doctest::Approx(y[r]).epsilon(1e-12));
}

TEST_CASE("all-zero input with zero biases gives zero logits") {
  auto p = init_params<double>(6, 4, 3, 1, 2);
  for (auto& l : p.layers) std::fill(l.bias.begin(), l.bias.end(), 0.0);
  const auto logits = forward_sparse<double>(p, {}, {}, false);
  for (const double v : logits) CHECK(v == 0.0);
}

TEST_CASE("model output depends on the input only through the bag") {
  auto p = init_params<float>(30, 8, 3, 1, 4);
  const std::vector<std::uint32_t> idx1 = {2, 9, 20};
  const std::vector<float> val1 = {1.0f, 3.0f, 2.0f};
  const std::vector<std::uint32_t> idx2 = {2, 9, 20};  // same bag
  const std::vector<float> val2 = {1.0f, 3.0f, 2.0f};
  CHECK(forward_sparse<float>(p, idx1, val1, false) ==
        forward_sparse<float>(p, idx2, val2, false));
}

TEST_CASE("dropout expectation: inverted dropout is unbiased") {
  auto p = init_params<double>(10, 6, 2, 1, 6);
  const std::vector<std::uint32_t> idx = {0, 4, 7};
  const std::vector<double> val = {1.5, 2.0, 1.0};
  ForwardCache<double> cache;
  forward_sparse<double>(p, idx, val, false, 0.0, nullptr, &cache);
  const std::vector<double> eval_act = cache.act[0];

  std::mt19937 rng(77);
  std::vector<double> mean(6, 0.0);
  const int reps = 100000;
  for (int t = 0; t < reps; ++t) {
    forward_sparse<double>(p, idx, val, true, 0.5, &rng, &cache);
    for (std::size_t i = 0; i < 6; ++i) mean[i] += cache.act[0][i];
  }
  for (std::size_t i = 0; i < 6; ++i) {
    mean[i] /= reps;
    if (std::abs(eval_act[i]) > 0.05)
      CHECK(mean[i] == doctest::Approx(eval_act[i]).epsilon(0.01));
  }
}

TEST_CASE("gradient check: analytic backward vs central differences") {
  std::mt19937 rng(15);
  std::normal_distribution<double> d(0.0, 1.0);
  for (const std::size_t depth : {1u, 2u}) {
    for (const bool sparse : {true, false}) {
      const std::size_t in_dim = sparse ? 20 : 7;
      auto p = init_params<double>(in_dim, 5, 4, depth, 21,
                                   sparse ? InputMode::SparseBag : InputMode::Dense);
      std::vector<std::uint32_t> idx;
      std::vector<double> val, dense(in_dim, 0.0);
      if (sparse) {
        idx = {1, 3, 9, 15};
        val = {1.0, 2.0, -0.5, 1.5};
      } else {
        for (auto& x : dense) x = d(rng);
      }
      const std::int32_t label = 2;

      ForwardCache<double> cache;
      const auto logits = sparse
                              ? forward_sparse<double>(p, idx, val, false, 0.0, nullptr, &cache)
                              : forward_dense<double>(p, dense, false, 0.0, nullptr, &cache);
      auto [loss0, dlogits] = cross_entropy<double>(logits, label);
      (void)loss0;
      auto grads = make_gradients(p);
      backward(p, cache, dlogits, grads);

      const double h = 1e-5;
      for (std::size_t k = 0; k < p.layers.size(); ++k) {
        auto check_tensor = [&](std::vector<double>& theta, const std::vector<double>& g) {
          for (std::size_t i = 0; i < theta.size(); ++i) {
            const double orig = theta[i];
            theta[i] = orig + h;
            const double lp = loss_of(p, idx, val, dense, label);
            theta[i] = orig - h;
            const double lm = loss_of(p, idx, val, dense, label);
            theta[i] = orig;
            const double num = (lp - lm) / (2 * h);
            const double denom = std::max(std::abs(num) + std::abs(g[i]), 1e-8);
            CHECK(std::abs(num - g[i]) / denom < 1e-4);
          }
        };
        check_tensor(p.layers[k].weight, grads.layers[k].weight);
        check_tensor(p.layers[k].bias, grads.layers[k].bias);
      }
    }
  }
}

TEST_CASE("backward: zero dlogits and absent-column sparsity") {
  auto p = init_params<double>(20, 5, 3, 1, 30);
  const std::vector<std::uint32_t> idx = {2, 11};
  const std::vector<double> val = {1.0, 2.0};
  ForwardCache<double> cache;
  forward_sparse<double>(p, idx, val, false, 0.0, nullptr, &cache);

  auto grads = make_gradients(p);
  const std::vector<double> zero(3, 0.0);
  backward(p, cache, zero, grads);
  for (const auto& l : grads.layers) {
    for (const double g : l.weight) CHECK(g == 0.0);
    for (const double g : l.bias) CHECK(g == 0.0);
  }

  const std::vector<double> dl = {1.0, -0.5, 0.25};
  backward(p, cache, dl, grads);
  for (std::uint32_t row = 0; row < 20; ++row) {
    const bool present = row == 2 || row == 11;
    bool any_nonzero = false;
    for (std::size_t c = 0; c < 5; ++c)
      any_nonzero |= grads.layers[0].weight[row * 5 + c] != 0.0;
    if (!present) CHECK(!any_nonzero);
  }
}

TEST_CASE("param_count matches the published model sizes") {
  const auto p1 = init_params<float>(30522, 1024, 20, 1, 0);
  CHECK(param_count(p1) == 31276052u);
  const auto p2 = init_params<float>(30522, 1024, 20, 2, 0);
  CHECK(param_count(p2) == 32325652u);
  const auto tiny = init_params<float>(1, 1, 1, 1, 0);
  // 1x1 embedding + bias + 1x1 output + bias
  CHECK(param_count(tiny) == 4u);
}

TEST_CASE("param_count equals scalars touched by a dense optimizer step") {
  auto p = init_params<float>(15, 6, 3, 2, 1);
  auto grads = make_gradients(p);
  for (auto& l : grads.layers) {
    std::fill(l.weight.begin(), l.weight.end(), 1.0f);
    std::fill(l.bias.begin(), l.bias.end(), 1.0f);
  }
  auto before = p;
  auto adam = AdamState<float>::init(p);
  adam_step(adam, p, grads, 1e-3);
  std::size_t changed = 0;
  for (std::size_t k = 0; k < p.layers.size(); ++k) {
    for (std::size_t i = 0; i < p.layers[k].weight.size(); ++i)
      changed += p.layers[k].weight[i] != before.layers[k].weight[i] ? 1 : 0;
    for (std::size_t i = 0; i < p.layers[k].bias.size(); ++i)
      changed += p.layers[k].bias[i] != before.layers[k].bias[i] ? 1 : 0;
  }
  CHECK(changed == param_count(p));
}

TEST_CASE("checkpoint round trip") {
  namespace fs = std::filesystem;
  const auto path = (fs::temp_directory_path() / "textclf_ckpt_test.bin").string();
  const auto p = init_params<float>(33, 9, 4, 2, 77);
  save_checkpoint(p, path);
  const auto q = load_checkpoint(path);
  CHECK(q.input_dim == p.input_dim);
  CHECK(q.depth == p.depth);
  CHECK(q.mode == p.mode);
  for (std::size_t k = 0; k < p.layers.size(); ++k) {
    CHECK(q.layers[k].weight == p.layers[k].weight);
    CHECK(q.layers[k].bias == p.layers[k].bias);
  }
  CHECK_THROWS(load_checkpoint("/nonexistent/ckpt.bin"));
}
