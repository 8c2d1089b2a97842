#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "textclf/corpus.hpp"
#include "textclf/vectorizer.hpp"

namespace textclf {

// CSR, square, double precision.
struct SparseMatrix {
  std::size_t n = 0;
  std::vector<std::size_t> row_ptr;
  std::vector<std::uint32_t> col;
  std::vector<double> val;

  static SparseMatrix identity(std::size_t n);
  // rows x cols dense product: this (n x n) * X (n x f) -> n x f
  std::vector<double> multiply_dense(const std::vector<double>& X,
                                     std::size_t f) const;
};

struct WindowCounts {
  std::unordered_map<std::int32_t, std::uint64_t> token_windows;
  // key packs (min_id, max_id); self-pairs excluded
  std::unordered_map<std::uint64_t, std::uint64_t> pair_windows;
  std::uint64_t total_windows = 0;

  static std::uint64_t pair_key(std::int32_t a, std::int32_t b);
};

// Sliding windows of the given width, stride 1, per document; documents
// shorter than the window contribute a single window. A token or pair is
// counted at most once per window.
WindowCounts window_counts(const std::vector<const std::vector<std::int32_t>*>& docs,
                           std::size_t window);

// ln(P(i,j) / (P(i)P(j))) over windows; -inf when the pair never co-occurs.
double pmi(std::int32_t i, std::int32_t j, const WindowCounts& counts);

// Word nodes 0..n_words-1 (dense re-indexing of the active vocabulary),
// document nodes follow in train order.
struct CooccurrenceGraph {
  std::size_t n_words = 0;
  std::size_t n_docs = 0;
  bool normalized = false;
  SparseMatrix adjacency;
  std::vector<std::int32_t> word_vocab_ids;            // node -> vocab id
  std::unordered_map<std::int32_t, std::uint32_t> word_node;  // vocab id -> node

  std::size_t n_nodes() const { return n_words + n_docs; }
};

struct GraphConfig {
  std::size_t window = 20;
  double pmi_threshold = 0.0;  // keep word-word edges with PMI > threshold
  std::size_t min_token_freq = 1;
};

// PMI word-word edges, TF-IDF word-document edges, unit self-loops, then
// symmetric normalization D^(-1/2) (A+I) D^(-1/2). Train split only.
CooccurrenceGraph build_graph(const Dataset& ds, const GraphConfig& cfg,
                              const IdfModel& idf);

// H = ReLU(A_hat X W); X sparse n x f, W dense f x d row-major. With
// activate=false returns the pre-activation.
std::vector<double> gcn_layer(const CooccurrenceGraph& g, const SparseMatrix& X,
                              const std::vector<double>& W, std::size_t f,
                              std::size_t d, bool activate = true);

// Appendix-style identity check: row i of gcn_layer(identity features,
// weight E) vs the direct aggregation sum_j a_ij E_j over document nodes.
// Returns the max elementwise absolute deviation over `samples` document
// nodes (all of them when samples == 0).
double verify_first_layer_equivalence(const CooccurrenceGraph& g,
                                      const std::vector<double>& E,
                                      std::size_t embed_dim,
                                      std::size_t samples = 0,
                                      std::uint64_t seed = 0);

}  // namespace textclf
