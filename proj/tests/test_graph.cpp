#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "textclf/graph.hpp"

using namespace textclf;

namespace {

Document doc(std::int32_t id, std::vector<std::int32_t> ids, Split split,
             std::int32_t label = 0) {
  Document d;
  d.id = id;
  d.label_id = label;
  d.split = split;
  d.tokens.ids = std::move(ids);
  return d;
}

IdfModel fit_train_idf(const Dataset& ds, std::size_t vocab_size) {
  std::vector<const TokenSequence*> train;
  for (const auto& d : ds.documents)
    if (d.split == Split::Train) train.push_back(&d.tokens);
  return fit_idf(train, vocab_size);
}

// dense lookup into a CSR matrix; 0.0 for absent entries
double at(const SparseMatrix& m, std::size_t i, std::size_t j) {
  for (std::size_t k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k)
    if (m.col[k] == j) return m.val[k];
  return 0.0;
}

}  // namespace

TEST_CASE("SparseMatrix identity and multiply_dense") {
  const auto I = SparseMatrix::identity(3);
  const std::vector<double> X = {1, 2, 3, 4, 5, 6};  // 3x2
  CHECK(I.multiply_dense(X, 2) == X);

  SparseMatrix m;  // [[0,2],[1,0]]
  m.n = 2;
  m.row_ptr = {0, 1, 2};
  m.col = {1, 0};
  m.val = {2.0, 1.0};
  const std::vector<double> Y = {10, 20};  // 2x1
  CHECK(m.multiply_dense(Y, 1) == std::vector<double>{40, 10});
  CHECK_THROWS(m.multiply_dense(X, 2));
}

TEST_CASE("window_counts hand enumerations") {
  const std::vector<std::int32_t> ab = {0, 1};
  const auto wc = window_counts({&ab}, 2);
  CHECK(wc.total_windows == 1);
  CHECK(wc.token_windows.at(0) == 1);
  CHECK(wc.token_windows.at(1) == 1);
  CHECK(wc.pair_windows.at(WindowCounts::pair_key(0, 1)) == 1);
  CHECK(WindowCounts::pair_key(0, 1) == WindowCounts::pair_key(1, 0));

  // repeated token: counted once per window, no self-pairs
  const std::vector<std::int32_t> aaa = {5, 5, 5};
  const auto wc2 = window_counts({&aaa}, 2);
  CHECK(wc2.total_windows == 2);
  CHECK(wc2.token_windows.at(5) == 2);
  CHECK(wc2.pair_windows.empty());

  // a document shorter than the window still yields one window
  const std::vector<std::int32_t> single = {7};
  const auto wc3 = window_counts({&single}, 20);
  CHECK(wc3.total_windows == 1);
  CHECK(wc3.token_windows.at(7) == 1);

  // windows never straddle documents
  const std::vector<std::int32_t> d1 = {0, 1}, d2 = {2, 3};
  const auto wc4 = window_counts({&d1, &d2}, 10);
  CHECK(wc4.total_windows == 2);
  CHECK(wc4.pair_windows.count(WindowCounts::pair_key(0, 2)) == 0);
  CHECK(wc4.pair_windows.count(WindowCounts::pair_key(1, 3)) == 0);

  // empty documents contribute nothing
  const std::vector<std::int32_t> empty;
  CHECK(window_counts({&empty}, 5).total_windows == 0);
  CHECK_THROWS(window_counts({&ab}, 0));
}

TEST_CASE("sliding window count for long documents") {
  std::vector<std::int32_t> longdoc(30);
  for (std::size_t i = 0; i < 30; ++i) longdoc[i] = static_cast<std::int32_t>(i);
  const auto wc = window_counts({&longdoc}, 20);
  CHECK(wc.total_windows == 11);  // 30 - 20 + 1
  // token 0 appears only in the first window; token 15 in windows 0..11
  CHECK(wc.token_windows.at(0) == 1);
  CHECK(wc.token_windows.at(15) == 11);
}

TEST_CASE("pmi closed-form values") {
  const std::vector<std::int32_t> d1 = {0, 1}, d2 = {2, 3};
  const auto wc = window_counts({&d1, &d2}, 10);
  // P(0,1)=1/2, P(0)=P(1)=1/2 -> ln((1/2)/(1/4)) = ln 2
  CHECK(pmi(0, 1, wc) == doctest::Approx(std::log(2.0)));
  CHECK(pmi(1, 0, wc) == pmi(0, 1, wc));
  CHECK(pmi(0, 2, wc) == -std::numeric_limits<double>::infinity());
  CHECK_THROWS(pmi(0, 0, wc));

  // independence gives exactly zero PMI
  const std::vector<std::int32_t> both = {0, 1}, a = {0, 2};
  const auto wc2 = window_counts({&both, &a}, 10);
  // P(0,1)=1/2, P(0)=1, P(1)=1/2
  CHECK(pmi(0, 1, wc2) == doctest::Approx(0.0));
}

TEST_CASE("build_graph: two-node exact adjacency") {
  Dataset ds;
  ds.labels = {"x"};
  ds.documents.push_back(doc(0, {7}, Split::Train));
  const auto idf = fit_train_idf(ds, 8);
  const auto g = build_graph(ds, GraphConfig{}, idf);
  CHECK(g.n_words == 1);
  CHECK(g.n_docs == 1);
  CHECK(g.word_vocab_ids == std::vector<std::int32_t>{7});
  REQUIRE(g.n_nodes() == 2);
  // tfidf weight of the only token is 1 after L2 normalization; self-loops 1;
  // degrees are 2 and 2, so every normalized entry is 0.5
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      CHECK(at(g.adjacency, i, j) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("build_graph toy corpus structure") {
  // train: [2,3], [2,3], [1]; test: [4] must not appear anywhere
  Dataset ds;
  ds.labels = {"x", "y"};
  ds.documents.push_back(doc(0, {2, 3}, Split::Train, 0));
  ds.documents.push_back(doc(1, {2, 3}, Split::Train, 1));
  ds.documents.push_back(doc(2, {1}, Split::Train, 0));
  ds.documents.push_back(doc(3, {4}, Split::Test, 0));
  const auto idf = fit_train_idf(ds, 5);
  const auto g = build_graph(ds, GraphConfig{}, idf);

  CHECK(g.n_words == 3);  // tokens 1,2,3 — test-only token 4 excluded
  CHECK(g.n_docs == 3);   // train docs only (inductive gap)
  CHECK(g.word_vocab_ids == std::vector<std::int32_t>{1, 2, 3});
  CHECK(g.word_node.count(4) == 0);
  CHECK(g.normalized);

  const auto& A = g.adjacency;
  const std::uint32_t w1 = g.word_node.at(1), w2 = g.word_node.at(2),
                      w3 = g.word_node.at(3);
  // word-word: P(2,3)=2/3 vs P(2)P(3)=4/9 -> pmi = ln(3/2) > 0, edge present
  CHECK(at(A, w2, w3) > 0.0);
  // 1 never co-occurs with 2 or 3
  CHECK(at(A, w1, w2) == 0.0);
  CHECK(at(A, w1, w3) == 0.0);
  // word-doc edges: docs 0,1 touch words 2,3; doc 2 touches word 1
  const std::size_t doc0 = g.n_words + 0, doc2 = g.n_words + 2;
  CHECK(at(A, w2, doc0) > 0.0);
  CHECK(at(A, w3, doc0) > 0.0);
  CHECK(at(A, w1, doc0) == 0.0);
  CHECK(at(A, w1, doc2) > 0.0);
  // no doc-doc edges
  CHECK(at(A, doc0, doc2) == 0.0);
  // self-loops survive normalization
  for (std::size_t i = 0; i < g.n_nodes(); ++i) CHECK(at(A, i, i) > 0.0);
  // symmetry of the normalized adjacency
  for (std::size_t i = 0; i < g.n_nodes(); ++i)
    for (std::size_t j = 0; j < g.n_nodes(); ++j)
      CHECK(at(A, i, j) == doctest::Approx(at(A, j, i)).epsilon(1e-15));
}

TEST_CASE("build_graph knobs: pmi threshold and min token frequency") {
  Dataset ds;
  ds.labels = {"x"};
  ds.documents.push_back(doc(0, {2, 3}, Split::Train));
  ds.documents.push_back(doc(1, {2, 3}, Split::Train));
  ds.documents.push_back(doc(2, {1}, Split::Train));
  const auto idf = fit_train_idf(ds, 4);

  GraphConfig strict;
  strict.pmi_threshold = 10.0;  // above ln(3/2): kills the word-word edge
  const auto g = build_graph(ds, strict, idf);
  CHECK(at(g.adjacency, g.word_node.at(2), g.word_node.at(3)) == 0.0);

  GraphConfig freq2;
  freq2.min_token_freq = 2;  // token 1 appears once
  const auto g2 = build_graph(ds, freq2, idf);
  CHECK(g2.n_words == 2);
  CHECK(g2.word_node.count(1) == 0);

  Dataset empty;
  empty.labels = {"x"};
  empty.documents.push_back(doc(0, {1}, Split::Test));
  CHECK_THROWS(build_graph(empty, GraphConfig{}, idf));
}

TEST_CASE("gcn_layer matches a hand computation") {
  Dataset ds;
  ds.labels = {"x"};
  ds.documents.push_back(doc(0, {7}, Split::Train));
  const auto g = build_graph(ds, GraphConfig{}, fit_train_idf(ds, 8));
  // adjacency is [[.5,.5],[.5,.5]]; identity features, W = [e0; e1] (2x1)
  const auto I = SparseMatrix::identity(2);
  const std::vector<double> W = {3.0, -1.0};
  const auto pre = gcn_layer(g, I, W, 2, 1, /*activate=*/false);
  CHECK(pre[0] == doctest::Approx(1.0));
  CHECK(pre[1] == doctest::Approx(1.0));
  const std::vector<double> Wneg = {-3.0, 1.0};
  const auto act = gcn_layer(g, I, Wneg, 2, 1, /*activate=*/true);
  CHECK(act[0] == 0.0);  // ReLU clamps -1
  CHECK(act[1] == 0.0);
  CHECK_THROWS(gcn_layer(g, SparseMatrix::identity(3), W, 3, 1));
  CHECK_THROWS(gcn_layer(g, I, W, 2, 7));
}

TEST_CASE("first GCN layer equals direct neighbor aggregation") {
  // a larger random corpus so the check is not vacuous
  std::mt19937 rng(21);
  Dataset ds;
  ds.labels = {"x", "y"};
  for (int i = 0; i < 40; ++i) {
    std::vector<std::int32_t> ids;
    const std::size_t len = 3 + rng() % 25;
    for (std::size_t k = 0; k < len; ++k)
      ids.push_back(static_cast<std::int32_t>(rng() % 30));
    ds.documents.push_back(doc(i, std::move(ids),
                               i < 30 ? Split::Train : Split::Test,
                               static_cast<std::int32_t>(i % 2)));
  }
  const auto g = build_graph(ds, GraphConfig{}, fit_train_idf(ds, 30));
  REQUIRE(g.n_docs == 30);

  const std::size_t dim = 8;
  std::vector<double> E(g.n_nodes() * dim);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (auto& e : E) e = nd(rng);

  CHECK(verify_first_layer_equivalence(g, E, dim) <= 1e-12);
  // sampled variant stays within the same bound
  CHECK(verify_first_layer_equivalence(g, E, dim, 5, 99) <= 1e-12);
  CHECK_THROWS(verify_first_layer_equivalence(g, E, dim + 1));
}

TEST_CASE("equivalence check detects a perturbed aggregation") {
  Dataset ds;
  ds.labels = {"x"};
  ds.documents.push_back(doc(0, {1, 2}, Split::Train));
  ds.documents.push_back(doc(1, {2, 3}, Split::Train));
  auto g = build_graph(ds, GraphConfig{}, fit_train_idf(ds, 4));
  const std::size_t dim = 4;
  std::vector<double> E(g.n_nodes() * dim, 1.0);
  CHECK(verify_first_layer_equivalence(g, E, dim) <= 1e-12);

  // break symmetry of the adjacency: A_ij for a doc row changes while the
  // dense-product route sees the same perturbed matrix — both routes share A,
  // so instead corrupt a single doc-row entry and recompute route (a) by hand
  // to confirm the deviation metric reports genuine disagreement.
  const std::size_t doc_row = g.n_words;
  const std::size_t k = g.adjacency.row_ptr[doc_row];
  SparseMatrix I = SparseMatrix::identity(g.n_nodes());
  const auto H = gcn_layer(g, I, E, g.n_nodes(), dim, false);
  g.adjacency.val[k] += 0.25;
  std::vector<double> agg(dim, 0.0);
  const auto& A = g.adjacency;
  for (std::size_t kk = A.row_ptr[doc_row]; kk < A.row_ptr[doc_row + 1]; ++kk)
    for (std::size_t c = 0; c < dim; ++c)
      agg[c] += A.val[kk] * E[A.col[kk] * dim + c];
  double dev = 0.0;
  for (std::size_t c = 0; c < dim; ++c)
    dev = std::max(dev, std::abs(H[doc_row * dim + c] - agg[c]));
  CHECK(dev > 0.2);
}
