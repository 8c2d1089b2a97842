#include "textclf/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace textclf {

SparseMatrix SparseMatrix::identity(std::size_t n) {
  SparseMatrix m;
  m.n = n;
  m.row_ptr.resize(n + 1);
  m.col.resize(n);
  m.val.assign(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    m.row_ptr[i] = i;
    m.col[i] = static_cast<std::uint32_t>(i);
  }
  m.row_ptr[n] = n;
  return m;
}

std::vector<double> SparseMatrix::multiply_dense(const std::vector<double>& X,
                                                 std::size_t f) const {
  if (X.size() != n * f)
    throw std::invalid_argument("SparseMatrix::multiply_dense: shape mismatch");
  std::vector<double> out(n * f, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double* dst = out.data() + i * f;
    for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
      const double a = val[k];
      const double* src = X.data() + static_cast<std::size_t>(col[k]) * f;
      for (std::size_t c = 0; c < f; ++c) dst[c] += a * src[c];
    }
  }
  return out;
}

std::uint64_t WindowCounts::pair_key(std::int32_t a, std::int32_t b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (lo << 32) | hi;
}

WindowCounts window_counts(const std::vector<const std::vector<std::int32_t>*>& docs,
                           std::size_t window) {
  if (window < 1) throw std::invalid_argument("window_counts: window must be >= 1");
  WindowCounts wc;
  std::vector<std::int32_t> uniq;
  for (const auto* doc : docs) {
    const auto& ids = *doc;
    if (ids.empty()) continue;
    const std::size_t n_windows = ids.size() > window ? ids.size() - window + 1 : 1;
    for (std::size_t s = 0; s < n_windows; ++s) {
      const std::size_t e = std::min(s + window, ids.size());
      uniq.assign(ids.begin() + static_cast<std::ptrdiff_t>(s),
                  ids.begin() + static_cast<std::ptrdiff_t>(e));
      std::sort(uniq.begin(), uniq.end());
      uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
      for (const auto t : uniq) ++wc.token_windows[t];
      for (std::size_t a = 0; a < uniq.size(); ++a)
        for (std::size_t b = a + 1; b < uniq.size(); ++b)
          ++wc.pair_windows[WindowCounts::pair_key(uniq[a], uniq[b])];
      ++wc.total_windows;
    }
  }
  return wc;
}

double pmi(std::int32_t i, std::int32_t j, const WindowCounts& counts) {
  if (i == j) throw std::invalid_argument("pmi: i == j");
  const auto co = counts.pair_windows.find(WindowCounts::pair_key(i, j));
  if (co == counts.pair_windows.end() || co->second == 0)
    return -std::numeric_limits<double>::infinity();
  const double w = static_cast<double>(counts.total_windows);
  const double pij = static_cast<double>(co->second) / w;
  const double pi = static_cast<double>(counts.token_windows.at(i)) / w;
  const double pj = static_cast<double>(counts.token_windows.at(j)) / w;
  return std::log(pij / (pi * pj));
}

CooccurrenceGraph build_graph(const Dataset& ds, const GraphConfig& cfg,
                              const IdfModel& idf) {
  std::vector<const Document*> train_docs;
  for (const auto& d : ds.documents)
    if (d.split == Split::Train) train_docs.push_back(&d);
  if (train_docs.empty()) throw std::invalid_argument("build_graph: empty train corpus");

  // active vocabulary under the min-frequency knob
  std::unordered_map<std::int32_t, std::uint64_t> freq;
  for (const auto* d : train_docs)
    for (const auto t : d->tokens.ids) ++freq[t];
  CooccurrenceGraph g;
  for (const auto& [t, f] : freq)
    if (f >= cfg.min_token_freq) g.word_vocab_ids.push_back(t);
  std::sort(g.word_vocab_ids.begin(), g.word_vocab_ids.end());
  g.n_words = g.word_vocab_ids.size();
  g.n_docs = train_docs.size();
  for (std::size_t i = 0; i < g.word_vocab_ids.size(); ++i)
    g.word_node[g.word_vocab_ids[i]] = static_cast<std::uint32_t>(i);

  // window statistics over filtered token sequences
  std::vector<std::vector<std::int32_t>> filtered(train_docs.size());
  std::vector<const std::vector<std::int32_t>*> filtered_ptrs;
  for (std::size_t i = 0; i < train_docs.size(); ++i) {
    for (const auto t : train_docs[i]->tokens.ids)
      if (g.word_node.count(t)) filtered[i].push_back(t);
    filtered_ptrs.push_back(&filtered[i]);
  }
  const WindowCounts wc = window_counts(filtered_ptrs, cfg.window);

  const std::size_t n = g.n_nodes();
  std::vector<std::vector<std::pair<std::uint32_t, double>>> rows(n);
  auto add_sym = [&](std::uint32_t a, std::uint32_t b, double w) {
    rows[a].emplace_back(b, w);
    rows[b].emplace_back(a, w);
  };

  // word-word PMI edges
  for (const auto& [key, co] : wc.pair_windows) {
    const auto ta = static_cast<std::int32_t>(key >> 32);
    const auto tb = static_cast<std::int32_t>(key & 0xFFFFFFFFu);
    const double p = pmi(ta, tb, wc);
    if (p > cfg.pmi_threshold)
      add_sym(g.word_node.at(ta), g.word_node.at(tb), p);
  }

  // word-document TF-IDF edges (vectorizer formula, active tokens only)
  for (std::size_t di = 0; di < train_docs.size(); ++di) {
    const SparseVector v = tfidf(count_bow(train_docs[di]->tokens), idf);
    const auto doc_node = static_cast<std::uint32_t>(g.n_words + di);
    for (const auto& [tok, w] : v.entries) {
      auto it = g.word_node.find(static_cast<std::int32_t>(tok));
      if (it != g.word_node.end() && w != 0.0f)
        add_sym(it->second, doc_node, static_cast<double>(w));
    }
  }

  // unit self-loops
  for (std::size_t i = 0; i < n; ++i)
    rows[i].emplace_back(static_cast<std::uint32_t>(i), 1.0);

  // symmetric normalization
  std::vector<double> degree(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& [j, w] : rows[i]) degree[i] += w;
  SparseMatrix& A = g.adjacency;
  A.n = n;
  A.row_ptr.resize(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::sort(rows[i].begin(), rows[i].end());
    A.row_ptr[i + 1] = A.row_ptr[i] + rows[i].size();
  }
  A.col.reserve(A.row_ptr[n]);
  A.val.reserve(A.row_ptr[n]);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& [j, w] : rows[i]) {
      A.col.push_back(j);
      A.val.push_back(w / std::sqrt(degree[i] * degree[j]));
    }
  }
  g.normalized = true;
  return g;
}

std::vector<double> gcn_layer(const CooccurrenceGraph& g, const SparseMatrix& X,
                              const std::vector<double>& W, std::size_t f,
                              std::size_t d, bool activate) {
  if (X.n != g.n_nodes())
    throw std::invalid_argument("gcn_layer: feature rows must equal node count");
  if (W.size() != f * d) throw std::invalid_argument("gcn_layer: weight shape mismatch");
  // T = X W  (sparse n x f times dense f x d)
  std::vector<double> T(X.n * d, 0.0);
  for (std::size_t i = 0; i < X.n; ++i) {
    double* dst = T.data() + i * d;
    for (std::size_t k = X.row_ptr[i]; k < X.row_ptr[i + 1]; ++k) {
      const double a = X.val[k];
      const double* src = W.data() + static_cast<std::size_t>(X.col[k]) * d;
      for (std::size_t c = 0; c < d; ++c) dst[c] += a * src[c];
    }
  }
  std::vector<double> H = g.adjacency.multiply_dense(T, d);
  if (activate)
    for (auto& h : H) h = h > 0.0 ? h : 0.0;
  return H;
}

double verify_first_layer_equivalence(const CooccurrenceGraph& g,
                                      const std::vector<double>& E,
                                      std::size_t embed_dim, std::size_t samples,
                                      std::uint64_t seed) {
  const std::size_t n = g.n_nodes();
  if (E.size() != n * embed_dim)
    throw std::invalid_argument("verify_first_layer_equivalence: E shape mismatch");

  // route (a): one GCN layer on identity features with weight E
  const SparseMatrix I = SparseMatrix::identity(n);
  const std::vector<double> H = gcn_layer(g, I, E, n, embed_dim, /*activate=*/false);

  std::vector<std::size_t> doc_nodes;
  for (std::size_t i = 0; i < g.n_docs; ++i) doc_nodes.push_back(g.n_words + i);
  if (samples > 0 && samples < doc_nodes.size()) {
    std::mt19937_64 rng(seed);
    std::shuffle(doc_nodes.begin(), doc_nodes.end(), rng);
    doc_nodes.resize(samples);
  }

  // route (b): direct neighbor aggregation
  double max_dev = 0.0;
  std::vector<double> agg(embed_dim);
  const SparseMatrix& A = g.adjacency;
  for (const std::size_t i : doc_nodes) {
    std::fill(agg.begin(), agg.end(), 0.0);
    for (std::size_t k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) {
      const double a = A.val[k];
      const double* e = E.data() + static_cast<std::size_t>(A.col[k]) * embed_dim;
      for (std::size_t c = 0; c < embed_dim; ++c) agg[c] += a * e[c];
    }
    const double* h = H.data() + i * embed_dim;
    for (std::size_t c = 0; c < embed_dim; ++c)
      max_dev = std::max(max_dev, std::abs(h[c] - agg[c]));
  }
  return max_dev;
}

}  // namespace textclf
