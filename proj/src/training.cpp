#include "textclf/training.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <ostream>
#include <random>
#include <thread>

#include "json.hpp"

namespace textclf {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void write_log_line(std::ostream& out, const EpochLog& e) {
  nlohmann::ordered_json j;
  j["run"] = e.run;
  j["epoch"] = e.epoch;
  j["step"] = e.step;
  j["lr"] = e.lr;
  j["train_loss"] = e.train_loss;
  if (e.test_accuracy >= 0.0) j["test_accuracy"] = e.test_accuracy;
  j["seconds_elapsed"] = e.seconds_elapsed;
  out << j.dump() << '\n';
}

}  // namespace

std::string repr_name(InputRepr r) {
  switch (r) {
    case InputRepr::Bow: return "bow";
    case InputRepr::Tfidf: return "tfidf";
    case InputRepr::Glove: return "glove";
  }
  return "?";
}

InputRepr parse_repr(const std::string& s) {
  if (s == "bow") return InputRepr::Bow;
  if (s == "tfidf") return InputRepr::Tfidf;
  if (s == "glove") return InputRepr::Glove;
  throw std::invalid_argument("unknown input representation: " + s);
}

PreparedInputs prepare_inputs(const Dataset& ds, std::size_t vocab_size,
                              InputRepr repr, const EmbeddingTable* glove) {
  PreparedInputs out;
  out.repr = repr;
  out.idx.resize(ds.documents.size());
  out.val.resize(ds.documents.size());

  if (repr == InputRepr::Glove) {
    if (!glove) throw std::invalid_argument("glove representation needs an embedding table");
    out.input_dim = glove->dim;
    for (const auto& d : ds.documents)
      out.val[static_cast<std::size_t>(d.id)] = average_pool(d.tokens.words, *glove);
    return out;
  }

  out.input_dim = vocab_size;
  if (repr == InputRepr::Tfidf) {
    std::vector<const TokenSequence*> train_docs;
    for (const auto& d : ds.documents)
      if (d.split == Split::Train) train_docs.push_back(&d.tokens);
    out.idf = fit_idf(train_docs, vocab_size);
  }
  for (const auto& d : ds.documents) {
    SparseVector v = count_bow(d.tokens);
    if (repr == InputRepr::Tfidf) v = tfidf(v, out.idf);
    auto& idx = out.idx[static_cast<std::size_t>(d.id)];
    auto& val = out.val[static_cast<std::size_t>(d.id)];
    idx.reserve(v.entries.size());
    val.reserve(v.entries.size());
    for (const auto& [i, w] : v.entries) {
      idx.push_back(i);
      val.push_back(w);
    }
  }
  return out;
}

TrainOutput train(const Dataset& ds, const PreparedInputs& inputs,
                  const TrainConfig& cfg, std::size_t run_index,
                  std::ostream* jsonl_log) {
  if (inputs.val.size() != ds.documents.size())
    throw std::invalid_argument("train: inputs do not match the dataset");
  const bool dense = inputs.repr == InputRepr::Glove;

  std::vector<std::size_t> train_ids;
  for (const auto& d : ds.documents)
    if (d.split == Split::Train) train_ids.push_back(static_cast<std::size_t>(d.id));
  if (train_ids.empty()) throw std::invalid_argument("train: empty train split");

  const std::uint64_t seed = cfg.seed + run_index;
  MLPParams<float> params = init_params<float>(
      inputs.input_dim, cfg.hidden_dim, ds.labels.size(), cfg.depth, seed,
      dense ? InputMode::Dense : InputMode::SparseBag);
  AdamState<float> adam = AdamState<float>::init(params);
  Gradients<float> grads = make_gradients(params);
  ForwardCache<float> cache;

  std::mt19937 rng(static_cast<std::uint32_t>(seed * 0x9E3779B97F4A7C15ull >> 32));

  const std::size_t batches_per_epoch =
      (train_ids.size() + cfg.batch_size - 1) / cfg.batch_size;
  const std::uint64_t total_steps =
      static_cast<std::uint64_t>(cfg.epochs) * batches_per_epoch;

  TrainOutput out;
  const auto t0 = Clock::now();
  std::uint64_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(train_ids.begin(), train_ids.end(), rng);
    double epoch_loss = 0.0;  // double accumulation for stable reporting
    double last_lr = 0.0;
    for (std::size_t b = 0; b < batches_per_epoch; ++b) {
      const std::size_t begin = b * cfg.batch_size;
      const std::size_t end = std::min(begin + cfg.batch_size, train_ids.size());
      const double inv_batch = 1.0 / static_cast<double>(end - begin);
      zero_gradients(grads);
      for (std::size_t i = begin; i < end; ++i) {
        const std::size_t doc = train_ids[i];
        std::vector<float> logits =
            dense ? forward_dense<float>(params, inputs.val[doc], true,
                                         cfg.dropout, &rng, &cache)
                  : forward_sparse<float>(params, inputs.idx[doc], inputs.val[doc],
                                          true, cfg.dropout, &rng, &cache);
        auto [loss, dlogits] = cross_entropy<float>(
            logits, ds.documents[doc].label_id);
        epoch_loss += loss;
        for (auto& g : dlogits) g = static_cast<float>(g * inv_batch);
        backward(params, cache, dlogits, grads);
      }
      last_lr = linear_decay(step, total_steps, cfg.base_lr);
      adam_step(adam, params, grads, last_lr);
      ++step;
    }
    EpochLog e;
    e.run = run_index;
    e.epoch = epoch;
    e.step = step;
    e.lr = last_lr;
    e.train_loss = epoch_loss / static_cast<double>(train_ids.size());
    if (cfg.eval_each_epoch) e.test_accuracy = evaluate(params, ds, inputs, cfg.threads);
    e.seconds_elapsed = seconds_since(t0);
    if (jsonl_log) write_log_line(*jsonl_log, e);
    out.log.push_back(e);
  }
  out.params = std::move(params);
  return out;
}

std::vector<std::int32_t> predict(const MLPParams<float>& params,
                                  const PreparedInputs& inputs,
                                  const std::vector<std::size_t>& doc_ids,
                                  std::size_t threads) {
  const bool dense = inputs.repr == InputRepr::Glove;
  std::vector<std::int32_t> preds(doc_ids.size());
  auto work = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const std::size_t doc = doc_ids[i];
      const std::vector<float> logits =
          dense ? forward_dense<float>(params, inputs.val[doc], false)
                : forward_sparse<float>(params, inputs.idx[doc], inputs.val[doc], false);
      // ties break toward the lowest class index
      std::size_t best = 0;
      for (std::size_t c = 1; c < logits.size(); ++c)
        if (logits[c] > logits[best]) best = c;
      preds[i] = static_cast<std::int32_t>(best);
    }
  };
  if (threads <= 1 || doc_ids.size() < 2 * threads) {
    work(0, doc_ids.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (doc_ids.size() + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      const std::size_t lo = t * chunk;
      const std::size_t hi = std::min(lo + chunk, doc_ids.size());
      if (lo >= hi) break;
      pool.emplace_back(work, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  return preds;
}

double evaluate(const MLPParams<float>& params, const Dataset& ds,
                const PreparedInputs& inputs, std::size_t threads) {
  std::vector<std::size_t> test_ids;
  std::vector<std::int32_t> labels;
  for (const auto& d : ds.documents) {
    if (d.split == Split::Test) {
      test_ids.push_back(static_cast<std::size_t>(d.id));
      labels.push_back(d.label_id);
    }
  }
  if (test_ids.empty()) throw std::invalid_argument("evaluate: empty test split");
  const auto preds = predict(params, inputs, test_ids, threads);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i)
    correct += preds[i] == labels[i] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(preds.size());
}

RunResult run_experiment(const Dataset& ds, const TrainConfig& cfg,
                         std::size_t vocab_size, const EmbeddingTable* glove,
                         std::ostream* jsonl_log) {
  if (cfg.n_runs == 0) throw std::invalid_argument("run_experiment: n_runs must be >= 1");
  const PreparedInputs inputs = prepare_inputs(ds, vocab_size, cfg.repr, glove);
  RunResult res;
  const auto t0 = Clock::now();
  for (std::size_t r = 0; r < cfg.n_runs; ++r) {
    const auto tr = Clock::now();
    TrainOutput out = train(ds, inputs, cfg, r, jsonl_log);
    res.accuracies.push_back(evaluate(out.params, ds, inputs, cfg.threads));
    res.run_seconds.push_back(seconds_since(tr));
    res.log.insert(res.log.end(), out.log.begin(), out.log.end());
  }
  res.total_seconds = seconds_since(t0);
  res.mean = std::accumulate(res.accuracies.begin(), res.accuracies.end(), 0.0) /
             static_cast<double>(res.accuracies.size());
  if (res.accuracies.size() > 1) {
    double ss = 0.0;
    for (const double a : res.accuracies) ss += (a - res.mean) * (a - res.mean);
    res.sd = std::sqrt(ss / static_cast<double>(res.accuracies.size() - 1));
  }
  return res;
}

}  // namespace textclf
