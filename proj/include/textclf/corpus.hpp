#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "textclf/tokenizer.hpp"

namespace textclf {

enum class Split : std::uint8_t { Train, Test };

struct Document {
  std::int32_t id = 0;
  TokenSequence tokens;
  std::int32_t label_id = 0;
  Split split = Split::Train;
};

struct Dataset {
  std::string name;
  std::vector<Document> documents;
  std::vector<std::string> labels;  // first-appearance order

  std::size_t n_train() const;
  std::size_t n_test() const;
};

struct DatasetStats {
  std::size_t n_total = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::size_t n_classes = 0;
  double mean_len = 0.0;  // words per document, pre-subword
  double sd_len = 0.0;    // population SD
};

// Layout: <name>.texts.txt has one document per line; <name>.meta.tsv line i
// is "id<TAB>split<TAB>label" for text line i.
Dataset load_dataset(const std::string& text_path, const std::string& meta_path,
                     const Vocabulary& vocab, const std::string& name = "");

DatasetStats dataset_stats(const Dataset& ds);

// TextGCN-distribution converter backing the `prepare` subcommand: meta file
// with "id<TAB>train|test<TAB>label" lines plus a corpus file with one
// document per line. Writes <out_dir>/<name>.texts.txt and <name>.meta.tsv
// with ids renumbered to line numbers and embedded newlines flattened.
void prepare_dataset(const std::string& corpus_path, const std::string& meta_path,
                     const std::string& name, const std::string& out_dir);

}  // namespace textclf
