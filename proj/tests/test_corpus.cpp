#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "textclf/corpus.hpp"

using namespace textclf;
namespace fs = std::filesystem;

namespace {

Vocabulary vocab() {
  return Vocabulary({"[UNK]", "good", "bad", "movie", "film", "great", "awful"});
}

struct TempDataset {
  fs::path dir, texts, meta;
  TempDataset(const std::vector<std::string>& text_lines,
              const std::vector<std::string>& meta_lines) {
    static int counter = 0;
    dir = fs::temp_directory_path() / ("textclf_ds_" + std::to_string(counter++));
    fs::create_directories(dir);
    texts = dir / "toy.texts.txt";
    meta = dir / "toy.meta.tsv";
    std::ofstream t(texts), m(meta);
    for (const auto& l : text_lines) t << l << '\n';
    for (const auto& l : meta_lines) m << l << '\n';
  }
};

}  // namespace

TEST_CASE("load_dataset basic construction") {
  TempDataset td({"good movie", "bad film"},
                 {"0\ttrain\tpos", "1\ttest\tneg"});
  const auto v = vocab();
  const auto ds = load_dataset(td.texts.string(), td.meta.string(), v, "toy");
  CHECK(ds.documents.size() == 2);
  CHECK(ds.n_train() == 1);
  CHECK(ds.n_test() == 1);
  CHECK(ds.labels == std::vector<std::string>{"pos", "neg"});
  CHECK(ds.documents[0].tokens.words == std::vector<std::string>{"good", "movie"});
}

TEST_CASE("load_dataset error paths") {
  const auto v = vocab();
  SUBCASE("unknown split") {
    TempDataset td({"good"}, {"0\tvalidation\tpos"});
    CHECK_THROWS(load_dataset(td.texts.string(), td.meta.string(), v));
  }
  SUBCASE("line-count mismatch") {
    TempDataset td({"good", "bad"}, {"0\ttrain\tpos"});
    CHECK_THROWS(load_dataset(td.texts.string(), td.meta.string(), v));
  }
  SUBCASE("empty label") {
    TempDataset td({"good"}, {"0\ttrain\t"});
    CHECK_THROWS(load_dataset(td.texts.string(), td.meta.string(), v));
  }
}

TEST_CASE("reload idempotence and partition integrity") {
  TempDataset td({"good movie", "bad film", "great film"},
                 {"0\ttrain\tpos", "1\ttest\tneg", "2\ttrain\tpos"});
  const auto v = vocab();
  const auto a = load_dataset(td.texts.string(), td.meta.string(), v);
  const auto b = load_dataset(td.texts.string(), td.meta.string(), v);
  REQUIRE(a.documents.size() == b.documents.size());
  for (std::size_t i = 0; i < a.documents.size(); ++i) {
    CHECK(a.documents[i].id == b.documents[i].id);
    CHECK(a.documents[i].label_id == b.documents[i].label_id);
    CHECK(a.documents[i].split == b.documents[i].split);
    CHECK(a.documents[i].tokens.ids == b.documents[i].tokens.ids);
  }
  // contiguous unique ids
  for (std::size_t i = 0; i < a.documents.size(); ++i)
    CHECK(a.documents[i].id == static_cast<std::int32_t>(i));
}

TEST_CASE("dataset_stats counts and lengths") {
  TempDataset td({"good movie", "bad", "great awful film"},
                 {"0\ttrain\ta", "1\ttrain\tb", "2\ttest\ta"});
  const auto v = vocab();
  const auto ds = load_dataset(td.texts.string(), td.meta.string(), v);
  const auto st = dataset_stats(ds);
  CHECK(st.n_total == 3);
  CHECK(st.n_train == 2);
  CHECK(st.n_test == 1);
  CHECK(st.n_classes == 2);
  CHECK(st.mean_len == doctest::Approx(2.0));  // lengths 2,1,3
  CHECK(st.sd_len == doctest::Approx(std::sqrt(2.0 / 3.0)));  // population SD
}

TEST_CASE("single 3-word document") {
  TempDataset td({"good bad movie"}, {"0\ttrain\ta"});
  const auto st = dataset_stats(load_dataset(td.texts.string(), td.meta.string(), vocab()));
  CHECK(st.mean_len == doctest::Approx(3.0));
  CHECK(st.sd_len == doctest::Approx(0.0));
}

TEST_CASE("stats invariant under document order") {
  TempDataset td({"good movie", "bad", "great awful film", "film film"},
                 {"0\ttrain\ta", "1\ttrain\tb", "2\ttest\ta", "3\ttest\tb"});
  auto ds = load_dataset(td.texts.string(), td.meta.string(), vocab());
  const auto st1 = dataset_stats(ds);
  std::mt19937 rng(5);
  std::shuffle(ds.documents.begin(), ds.documents.end(), rng);
  const auto st2 = dataset_stats(ds);
  CHECK(st1.mean_len == st2.mean_len);
  CHECK(st1.sd_len == st2.sd_len);
  CHECK(st1.n_train == st2.n_train);
}

TEST_CASE("zero-token documents are kept") {
  TempDataset td({"good", ""}, {"0\ttrain\ta", "1\ttest\ta"});
  const auto ds = load_dataset(td.texts.string(), td.meta.string(), vocab());
  CHECK(ds.documents.size() == 2);
  CHECK(ds.documents[1].tokens.ids.empty());
}

TEST_CASE("prepare_dataset renumbers and flattens") {
  static int counter = 0;
  const auto dir = fs::temp_directory_path() / ("textclf_prep_" + std::to_string(counter++));
  fs::create_directories(dir);
  const auto corpus = dir / "raw.txt";
  const auto meta = dir / "rawmeta.txt";
  {
    std::ofstream c(corpus), m(meta);
    c << "good movie\nbad film\n";
    m << "17\ttrain\tpos\n99\ttest\tneg\n";
  }
  prepare_dataset(corpus.string(), meta.string(), "mini", (dir / "out").string());
  const auto ds = load_dataset((dir / "out/mini.texts.txt").string(),
                               (dir / "out/mini.meta.tsv").string(), vocab(), "mini");
  CHECK(ds.documents.size() == 2);
  CHECK(ds.documents[0].id == 0);
  CHECK(ds.documents[1].split == Split::Test);
}
