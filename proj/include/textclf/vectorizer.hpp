#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "textclf/tokenizer.hpp"

namespace textclf {

// Sparse vector over vocabulary dimensions; indices strictly increasing,
// explicit zeros never stored.
struct SparseVector {
  std::vector<std::pair<std::uint32_t, float>> entries;
};

struct IdfModel {
  std::vector<std::uint32_t> doc_freq;  // per-token training-document frequency
  std::size_t n_train_docs = 0;
  std::vector<double> idf;  // ln((1+N)/(1+df)) + 1
};

struct EmbeddingTable {
  std::size_t dim = 0;
  std::unordered_map<std::string, std::vector<float>> vectors;
};

SparseVector count_bow(const TokenSequence& seq);

IdfModel fit_idf(const std::vector<const TokenSequence*>& train_docs,
                 std::size_t vocab_size);

// idf reweighting followed by L2 normalization; all-zero stays all-zero.
SparseVector tfidf(const SparseVector& bow, const IdfModel& idf);

EmbeddingTable load_glove(const std::string& path, std::size_t dim);

// Mean of embeddings over word occurrences; OOV words are skipped (excluded
// from the denominator). Zero vector when nothing matches.
std::vector<float> average_pool(const std::vector<std::string>& words,
                                const EmbeddingTable& table);

}  // namespace textclf
