#include "textclf/corpus.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

namespace textclf {

namespace {

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

struct MetaLine {
  std::string id, split, label;
};

MetaLine parse_meta(const std::string& line, std::size_t lineno) {
  const auto t1 = line.find('\t');
  const auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
  if (t1 == std::string::npos || t2 == std::string::npos)
    throw std::runtime_error("meta line " + std::to_string(lineno) +
                             ": expected id<TAB>split<TAB>label");
  MetaLine m;
  m.id = line.substr(0, t1);
  m.split = line.substr(t1 + 1, t2 - t1 - 1);
  m.label = line.substr(t2 + 1);
  if (m.label.empty())
    throw std::runtime_error("meta line " + std::to_string(lineno) + ": empty label");
  return m;
}

Split parse_split(const std::string& s, std::size_t lineno) {
  if (s == "train") return Split::Train;
  if (s == "test") return Split::Test;
  throw std::runtime_error("meta line " + std::to_string(lineno) +
                           ": unknown split '" + s + "'");
}

}  // namespace

std::size_t Dataset::n_train() const {
  std::size_t n = 0;
  for (const auto& d : documents) n += d.split == Split::Train ? 1 : 0;
  return n;
}

std::size_t Dataset::n_test() const { return documents.size() - n_train(); }

Dataset load_dataset(const std::string& text_path, const std::string& meta_path,
                     const Vocabulary& vocab, const std::string& name) {
  const auto texts = read_lines(text_path);
  const auto metas = read_lines(meta_path);
  if (texts.size() != metas.size())
    throw std::runtime_error("line-count mismatch: " + std::to_string(texts.size()) +
                             " texts vs " + std::to_string(metas.size()) + " meta lines");
  Dataset ds;
  ds.name = name;
  std::unordered_map<std::string, std::int32_t> label_ids;
  ds.documents.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const auto m = parse_meta(metas[i], i);
    Document doc;
    doc.id = static_cast<std::int32_t>(i);
    doc.split = parse_split(m.split, i);
    auto [it, inserted] =
        label_ids.emplace(m.label, static_cast<std::int32_t>(ds.labels.size()));
    if (inserted) ds.labels.push_back(m.label);
    doc.label_id = it->second;
    doc.tokens = encode(texts[i], vocab);
    ds.documents.push_back(std::move(doc));
  }
  return ds;
}

DatasetStats dataset_stats(const Dataset& ds) {
  if (ds.documents.empty()) throw std::runtime_error("empty dataset");
  DatasetStats st;
  st.n_total = ds.documents.size();
  st.n_train = ds.n_train();
  st.n_test = ds.n_test();
  st.n_classes = ds.labels.size();
  double sum = 0.0, sumsq = 0.0;
  for (const auto& d : ds.documents) {
    const double len = static_cast<double>(d.tokens.words.size());
    sum += len;
    sumsq += len * len;
  }
  const double n = static_cast<double>(st.n_total);
  st.mean_len = sum / n;
  const double var = sumsq / n - st.mean_len * st.mean_len;
  st.sd_len = std::sqrt(var > 0.0 ? var : 0.0);
  return st;
}

void prepare_dataset(const std::string& corpus_path, const std::string& meta_path,
                     const std::string& name, const std::string& out_dir) {
  const auto texts = read_lines(corpus_path);
  const auto metas = read_lines(meta_path);
  if (texts.size() != metas.size())
    throw std::runtime_error("line-count mismatch between corpus and meta file");
  std::filesystem::create_directories(out_dir);
  const auto text_out = std::filesystem::path(out_dir) / (name + ".texts.txt");
  const auto meta_out = std::filesystem::path(out_dir) / (name + ".meta.tsv");
  std::ofstream tout(text_out, std::ios::binary);
  std::ofstream mout(meta_out, std::ios::binary);
  if (!tout || !mout) throw std::runtime_error("cannot write into " + out_dir);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const auto m = parse_meta(metas[i], i);
    parse_split(m.split, i);  // validate
    std::string flat = texts[i];
    for (auto& c : flat)
      if (c == '\n' || c == '\r') c = ' ';
    tout << flat << '\n';
    mout << i << '\t' << m.split << '\t' << m.label << '\n';
  }
}

}  // namespace textclf
