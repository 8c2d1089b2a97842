#include "textclf/vectorizer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace textclf {

SparseVector count_bow(const TokenSequence& seq) {
  std::vector<std::int32_t> ids = seq.ids;
  std::sort(ids.begin(), ids.end());
  SparseVector v;
  for (std::size_t i = 0; i < ids.size();) {
    std::size_t j = i;
    while (j < ids.size() && ids[j] == ids[i]) ++j;
    v.entries.emplace_back(static_cast<std::uint32_t>(ids[i]),
                           static_cast<float>(j - i));
    i = j;
  }
  return v;
}

IdfModel fit_idf(const std::vector<const TokenSequence*>& train_docs,
                 std::size_t vocab_size) {
  if (train_docs.empty()) throw std::runtime_error("fit_idf: empty training set");
  IdfModel m;
  m.n_train_docs = train_docs.size();
  m.doc_freq.assign(vocab_size, 0);
  std::vector<std::uint8_t> seen(vocab_size, 0);
  for (const auto* doc : train_docs) {
    for (const auto id : doc->ids) seen[static_cast<std::size_t>(id)] = 1;
    for (const auto id : doc->ids) {
      const auto t = static_cast<std::size_t>(id);
      if (seen[t]) {
        ++m.doc_freq[t];
        seen[t] = 0;
      }
    }
  }
  m.idf.resize(vocab_size);
  const double n = static_cast<double>(m.n_train_docs);
  for (std::size_t t = 0; t < vocab_size; ++t) {
    m.idf[t] = std::log((1.0 + n) / (1.0 + static_cast<double>(m.doc_freq[t]))) + 1.0;
  }
  return m;
}

SparseVector tfidf(const SparseVector& bow, const IdfModel& idf) {
  SparseVector out;
  out.entries.reserve(bow.entries.size());
  double sumsq = 0.0;
  for (const auto& [i, w] : bow.entries) {
    if (i >= idf.idf.size()) throw std::runtime_error("tfidf: index beyond idf table");
    const double x = static_cast<double>(w) * idf.idf[i];
    sumsq += x * x;
    out.entries.emplace_back(i, static_cast<float>(x));
  }
  if (sumsq > 0.0) {
    const double inv = 1.0 / std::sqrt(sumsq);
    for (auto& [i, w] : out.entries) w = static_cast<float>(w * inv);
  }
  return out;
}

EmbeddingTable load_glove(const std::string& path, std::size_t dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open embedding file: " + path);
  EmbeddingTable table;
  table.dim = dim;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    std::vector<float> vec;
    vec.reserve(dim);
    double x;
    while (ss >> x) vec.push_back(static_cast<float>(x));
    if (vec.size() != dim)
      throw std::runtime_error("embedding line " + std::to_string(lineno) + ": got " +
                               std::to_string(vec.size()) + " values, expected " +
                               std::to_string(dim));
    table.vectors[word] = std::move(vec);
  }
  return table;
}

std::vector<float> average_pool(const std::vector<std::string>& words,
                                const EmbeddingTable& table) {
  std::vector<double> acc(table.dim, 0.0);
  std::size_t matched = 0;
  for (const auto& w : words) {
    auto it = table.vectors.find(w);
    if (it == table.vectors.end()) continue;
    ++matched;
    for (std::size_t k = 0; k < table.dim; ++k) acc[k] += it->second[k];
  }
  std::vector<float> out(table.dim, 0.0f);
  if (matched > 0) {
    for (std::size_t k = 0; k < table.dim; ++k)
      out[k] = static_cast<float>(acc[k] / static_cast<double>(matched));
  }
  return out;
}

}  // namespace textclf
