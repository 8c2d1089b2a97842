// textclf: bag-of-words text categorization CLI.
// Subcommands: prepare, stats, train, eval, bench, graph, verify.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "textclf/corpus.hpp"
#include "textclf/graph.hpp"
#include "textclf/kernels.hpp"
#include "textclf/metrics.hpp"
#include "textclf/tokenizer.hpp"
#include "textclf/training.hpp"
#include "textclf/vectorizer.hpp"
#include "textclf/widemlp.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitVerify = 4;
constexpr const char* kVersion = "0.1.0";

std::string iso_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%FT%TZ", std::gmtime(&t));
  return buf;
}

std::uint64_t fnv1a_file(const fs::path& path, std::uint64_t h = 0xcbf29ce484222325ull) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for fingerprint: " + path.string());
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ull;
    }
  }
  return h;
}

struct DatasetPaths {
  fs::path texts, meta;
  std::string name;
};

// --dataset accepts a directory with exactly one <name>.texts.txt, or a name
// resolved under $TEXTCAT_DATA_DIR.
DatasetPaths resolve_dataset(const std::string& arg) {
  fs::path dir(arg);
  if (!fs::is_directory(dir)) {
    if (const char* root = std::getenv("TEXTCAT_DATA_DIR")) {
      const fs::path alt = fs::path(root) / arg;
      if (fs::is_directory(alt)) dir = alt;
    }
  }
  if (!fs::is_directory(dir))
    throw std::runtime_error("dataset directory not found: " + arg);
  DatasetPaths p;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto fname = e.path().filename().string();
    const auto pos = fname.find(".texts.txt");
    if (pos != std::string::npos && pos + 10 == fname.size()) {
      if (!p.name.empty())
        throw std::runtime_error("multiple *.texts.txt files in " + dir.string());
      p.name = fname.substr(0, pos);
      p.texts = e.path();
    }
  }
  if (p.name.empty())
    throw std::runtime_error("no *.texts.txt in " + dir.string() +
                             " (run the prepare subcommand first)");
  p.meta = dir / (p.name + ".meta.tsv");
  if (!fs::exists(p.meta))
    throw std::runtime_error("missing meta file: " + p.meta.string());
  return p;
}

fs::path resolve_vocab(const std::string& flag, const fs::path& dataset_dir) {
  if (!flag.empty()) return flag;
  const fs::path local = dataset_dir / "vocab.txt";
  if (fs::exists(local)) return local;
  if (const char* root = std::getenv("TEXTCAT_DATA_DIR")) {
    const fs::path global = fs::path(root) / "vocab.txt";
    if (fs::exists(global)) return global;
  }
  throw std::runtime_error("no vocabulary file: pass --vocab or place vocab.txt "
                           "next to the dataset");
}

ordered_json make_manifest(const std::string& subcommand,
                           const ordered_json& config,
                           const DatasetPaths* ds) {
  ordered_json m;
  m["subcommand"] = subcommand;
  m["config"] = config;
  if (ds) {
    std::uint64_t h = fnv1a_file(ds->texts);
    h = fnv1a_file(ds->meta, h);
    std::ostringstream ss;
    ss << std::hex << h;
    m["dataset_fingerprint"] = ss.str();
    m["dataset_name"] = ds->name;
  }
  m["tool_version"] = kVersion;
  m["started_at"] = iso_now();
  return m;
}

void write_json(const fs::path& path, const ordered_json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

// ---- toy fixtures for verify ----

textclf::Vocabulary toy_vocab() {
  return textclf::Vocabulary(
      {"[UNK]", "the", "cat", "dog", "sat", "mat", "ran", "fast", "big",
       "was", "on", "a", "and", "slow"});
}

textclf::Dataset toy_dataset(const textclf::Vocabulary& vocab) {
  const std::vector<std::tuple<std::string, std::string, std::string>> rows = {
      {"the cat sat on the mat", "train", "animal"},
      {"the dog ran fast", "train", "animal"},
      {"a big dog and a cat", "train", "animal"},
      {"the mat was big", "train", "thing"},
      {"a slow dog sat", "train", "animal"},
      {"the big mat", "train", "thing"},
      {"the cat was fast", "test", "animal"},
      {"a big slow mat", "test", "thing"},
  };
  textclf::Dataset ds;
  ds.name = "toy";
  std::unordered_map<std::string, std::int32_t> label_ids;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& [text, split, label] = rows[i];
    textclf::Document d;
    d.id = static_cast<std::int32_t>(i);
    d.split = split == "train" ? textclf::Split::Train : textclf::Split::Test;
    auto [it, ins] = label_ids.emplace(label, static_cast<std::int32_t>(ds.labels.size()));
    if (ins) ds.labels.push_back(label);
    d.label_id = it->second;
    d.tokens = textclf::encode(text, vocab);
    ds.documents.push_back(std::move(d));
  }
  return ds;
}

int cmd_verify(std::size_t metric_cases, std::ostream& out) {
  bool all_ok = true;

  // Metric equivalence: accuracy == micro-F1 for single-label multiclass.
  {
    std::mt19937_64 rng(7);
    double max_dev = 0.0;
    for (std::size_t t = 0; t < metric_cases; ++t) {
      const std::size_t C = 2 + rng() % 51;
      const std::size_t n = 1 + rng() % 1000;
      std::vector<std::int32_t> preds(n), labels(n);
      for (std::size_t i = 0; i < n; ++i) {
        preds[i] = static_cast<std::int32_t>(rng() % C);
        labels[i] = static_cast<std::int32_t>(rng() % C);
      }
      const double acc = textclf::accuracy(preds, labels);
      const double f1 = textclf::micro_f1(textclf::tally(preds, labels, C));
      max_dev = std::max(max_dev, std::abs(acc - f1));
    }
    const bool ok = max_dev <= 1e-12;
    all_ok &= ok;
    out << (ok ? "PASS" : "FAIL") << " micro-F1 == accuracy over "
        << metric_cases << " random cases (max deviation " << max_dev << ")\n";
  }

  // Graph first-layer equivalence on the toy corpus.
  {
    const auto vocab = toy_vocab();
    const auto ds = toy_dataset(vocab);
    std::vector<const textclf::TokenSequence*> train_docs;
    for (const auto& d : ds.documents)
      if (d.split == textclf::Split::Train) train_docs.push_back(&d.tokens);
    const auto idf = textclf::fit_idf(train_docs, vocab.size());
    textclf::GraphConfig gcfg;
    gcfg.window = 3;
    const auto g = textclf::build_graph(ds, gcfg, idf);
    const std::size_t dim = 5;
    std::mt19937_64 rng(11);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> E(g.n_nodes() * dim);
    for (auto& e : E) e = normal(rng);
    const double dev = textclf::verify_first_layer_equivalence(g, E, dim);
    const bool ok = dev <= 1e-12;
    all_ok &= ok;
    out << (ok ? "PASS" : "FAIL")
        << " GCN first layer == embedding aggregation on toy graph (max deviation "
        << dev << ")\n";
  }

  // Sparse-bag forward equals dense matmul forward.
  {
    std::mt19937 rng(3);
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::size_t vocab_size = 40, hidden = 8, classes = 3;
    auto params = textclf::init_params<double>(vocab_size, hidden, classes, 1, 17);
    double max_dev = 0.0;
    for (int t = 0; t < 100; ++t) {
      std::vector<std::uint32_t> idx;
      std::vector<double> val, dense(vocab_size, 0.0);
      for (std::uint32_t i = 0; i < vocab_size; ++i) {
        if (rng() % 4 == 0) {
          const double w = std::abs(normal(rng)) + 0.1;
          idx.push_back(i);
          val.push_back(w);
          dense[i] = w;
        }
      }
      const auto h = textclf::aggregate_embeddings<double>(params, idx, val);
      // dense route: explicit W1 x + b1 from the embedding rows
      const auto& l0 = params.layers.front();
      for (std::size_t r = 0; r < hidden; ++r) {
        double acc = l0.bias[r];
        for (std::size_t cidx = 0; cidx < vocab_size; ++cidx)
          acc += dense[cidx] * l0.weight[cidx * hidden + r];
        max_dev = std::max(max_dev, std::abs(acc - h[r]));
      }
    }
    const bool ok = max_dev <= 1e-12;
    all_ok &= ok;
    out << (ok ? "PASS" : "FAIL")
        << " sparse-bag forward == dense matmul (max deviation " << max_dev << ")\n";
  }

  out << (all_ok ? "verify: all checks passed\n" : "verify: FAILURES detected\n");
  return all_ok ? 0 : kExitVerify;
}

textclf::DatasetStats stats_for(const DatasetPaths& dp, const fs::path& vocab_path,
                                textclf::Dataset* out_ds = nullptr) {
  const auto vocab = textclf::Vocabulary::from_file(vocab_path.string());
  auto ds = textclf::load_dataset(dp.texts.string(), dp.meta.string(), vocab, dp.name);
  const auto st = textclf::dataset_stats(ds);
  if (out_ds) *out_ds = std::move(ds);
  return st;
}

ordered_json stats_json(const std::string& name, const textclf::DatasetStats& st) {
  ordered_json j;
  j["dataset"] = name;
  j["n_total"] = st.n_total;
  j["n_train"] = st.n_train;
  j["n_test"] = st.n_test;
  j["n_classes"] = st.n_classes;
  j["mean_len"] = st.mean_len;
  j["sd_len"] = st.sd_len;
  return j;
}

ordered_json config_json(const textclf::TrainConfig& cfg) {
  ordered_json j;
  j["repr"] = textclf::repr_name(cfg.repr);
  j["depth"] = cfg.depth;
  j["hidden"] = cfg.hidden_dim;
  j["epochs"] = cfg.epochs;
  j["batch_size"] = cfg.batch_size;
  j["lr"] = cfg.base_lr;
  j["dropout"] = cfg.dropout;
  j["seed"] = cfg.seed;
  j["runs"] = cfg.n_runs;
  j["threads"] = cfg.threads;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bag-of-words text categorization (WideMLP) toolkit"};
  app.require_subcommand(1);
  app.set_config("--config");
  app.set_version_flag("--version", kVersion);

  // prepare
  auto* prep = app.add_subcommand("prepare", "Convert a TextGCN-layout corpus into the prepared dataset layout");
  std::string prep_corpus, prep_meta, prep_name, prep_out;
  prep->add_option("--corpus", prep_corpus, "corpus file, one document per line")->required();
  prep->add_option("--meta", prep_meta, "meta file: id<TAB>train|test<TAB>label")->required();
  prep->add_option("--name", prep_name, "dataset name")->required();
  prep->add_option("--out", prep_out, "output directory")->required();

  // stats
  auto* stats = app.add_subcommand("stats", "Dataset statistics (counts, mean/SD words per document)");
  std::string stats_dataset, stats_vocab, stats_json_out;
  stats->add_option("--dataset", stats_dataset)->required();
  stats->add_option("--vocab", stats_vocab);
  stats->add_option("--json", stats_json_out, "also write stats JSON here");

  // train / bench share options
  textclf::TrainConfig cfg;
  std::string tr_dataset, tr_vocab, tr_glove, tr_out, tr_repr = "bow";
  std::size_t tr_glove_dim = 300;
  bool tr_eval_each_epoch = false;
  auto add_train_opts = [&](CLI::App* c) {
    c->add_option("--dataset", tr_dataset)->required();
    c->add_option("--vocab", tr_vocab);
    c->add_option("--repr", tr_repr)->check(CLI::IsMember({"bow", "tfidf", "glove"}));
    c->add_option("--depth", cfg.depth)->check(CLI::IsMember({1, 2}));
    c->add_option("--hidden", cfg.hidden_dim);
    c->add_option("--epochs", cfg.epochs);
    c->add_option("--batch-size", cfg.batch_size);
    c->add_option("--lr", cfg.base_lr);
    c->add_option("--dropout", cfg.dropout)->check(CLI::Range(0.0, 0.999));
    c->add_option("--seed", cfg.seed);
    c->add_option("--runs", cfg.n_runs);
    c->add_option("--out", tr_out)->required();
    c->add_option("--glove", tr_glove, "GloVe text file (repr=glove)");
    c->add_option("--glove-dim", tr_glove_dim);
    c->add_option("--threads", cfg.threads);
    c->add_flag("--eval-each-epoch", tr_eval_each_epoch);
  };
  auto* train = app.add_subcommand("train", "Train WideMLP and report 5-run mean/SD accuracy");
  add_train_opts(train);
  auto* bench = app.add_subcommand("bench", "Run the experiment protocol and record wall-clock timings");
  add_train_opts(bench);

  // eval
  auto* evalc = app.add_subcommand("eval", "Evaluate a checkpoint on the test split");
  std::string ev_dataset, ev_vocab, ev_glove, ev_ckpt, ev_repr = "bow";
  std::size_t ev_threads = 1, ev_glove_dim = 300;
  evalc->add_option("--dataset", ev_dataset)->required();
  evalc->add_option("--vocab", ev_vocab);
  evalc->add_option("--checkpoint", ev_ckpt)->required();
  evalc->add_option("--repr", ev_repr)->check(CLI::IsMember({"bow", "tfidf", "glove"}));
  evalc->add_option("--glove", ev_glove);
  evalc->add_option("--glove-dim", ev_glove_dim);
  evalc->add_option("--threads", ev_threads);

  // graph
  auto* graph = app.add_subcommand("graph", "Build the word-document graph and check the first-layer equivalence");
  std::string gr_dataset, gr_vocab, gr_out = "graph_stats.json", gr_dump;
  textclf::GraphConfig gcfg;
  std::size_t gr_embed_dim = 16;
  graph->add_option("--dataset", gr_dataset)->required();
  graph->add_option("--vocab", gr_vocab);
  graph->add_option("--window", gcfg.window);
  graph->add_option("--min-freq", gcfg.min_token_freq);
  graph->add_option("--pmi-threshold", gcfg.pmi_threshold);
  graph->add_option("--embed-dim", gr_embed_dim);
  graph->add_option("--out", gr_out);
  graph->add_option("--dump-adjacency", gr_dump, "write edges as 'i j weight' lines");

  // verify
  auto* verify = app.add_subcommand("verify", "Run the built-in equivalence checks");
  std::size_t vf_cases = 10000;
  verify->add_option("--metric-cases", vf_cases);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*prep) {
      textclf::prepare_dataset(prep_corpus, prep_meta, prep_name, prep_out);
      ordered_json c;
      c["corpus"] = prep_corpus;
      c["meta"] = prep_meta;
      c["name"] = prep_name;
      auto manifest = make_manifest("prepare", c, nullptr);
      manifest["finished_at"] = iso_now();
      write_json(fs::path(prep_out) / (prep_name + ".manifest.json"), manifest);
      std::cout << "prepared dataset '" << prep_name << "' in " << prep_out << "\n";
      return 0;
    }

    if (*stats) {
      const auto dp = resolve_dataset(stats_dataset);
      const auto vocab_path = resolve_vocab(stats_vocab, dp.texts.parent_path());
      const auto st = stats_for(dp, vocab_path);
      std::cout << "dataset   " << dp.name << "\n"
                << "N         " << st.n_total << "\n"
                << "#Train    " << st.n_train << "\n"
                << "#Test     " << st.n_test << "\n"
                << "#Classes  " << st.n_classes << "\n"
                << "words/doc " << st.mean_len << " +- " << st.sd_len << "\n";
      if (!stats_json_out.empty())
        write_json(stats_json_out, stats_json(dp.name, st));
      return 0;
    }

    if (*train || *bench) {
      cfg.repr = textclf::parse_repr(tr_repr);
      cfg.eval_each_epoch = tr_eval_each_epoch;
      const auto dp = resolve_dataset(tr_dataset);
      const auto vocab_path = resolve_vocab(tr_vocab, dp.texts.parent_path());
      const auto vocab = textclf::Vocabulary::from_file(vocab_path.string());
      const auto ds = textclf::load_dataset(dp.texts.string(), dp.meta.string(), vocab, dp.name);

      textclf::EmbeddingTable glove;
      const textclf::EmbeddingTable* glove_ptr = nullptr;
      if (cfg.repr == textclf::InputRepr::Glove) {
        if (tr_glove.empty())
          throw std::runtime_error("--glove PATH is required with --repr glove");
        glove = textclf::load_glove(tr_glove, tr_glove_dim);
        glove_ptr = &glove;
      }

      fs::create_directories(tr_out);
      auto manifest = make_manifest(*train ? "train" : "bench", config_json(cfg), &dp);

      std::ofstream metrics_log(fs::path(tr_out) / "metrics.jsonl");
      const auto res = textclf::run_experiment(ds, cfg, vocab.size(), glove_ptr, &metrics_log);

      ordered_json results;
      results["dataset"] = dp.name;
      results["model"] = std::string(cfg.repr == textclf::InputRepr::Tfidf ? "tfidf+" :
                                     cfg.repr == textclf::InputRepr::Glove ? "glove+" : "") +
                         (cfg.depth == 2 ? "widemlp-2" : "widemlp");
      results["config"] = config_json(cfg);
      results["runs"] = res.accuracies;
      results["mean"] = res.mean;
      results["sd"] = res.sd;
      results["run_seconds"] = res.run_seconds;
      results["total_seconds"] = res.total_seconds;
      write_json(fs::path(tr_out) / "results.json", results);
      manifest["finished_at"] = iso_now();
      write_json(fs::path(tr_out) / "manifest.json", manifest);

      // keep the last run's parameters for eval
      const textclf::PreparedInputs inputs =
          textclf::prepare_inputs(ds, vocab.size(), cfg.repr, glove_ptr);
      const auto last = textclf::train(ds, inputs, cfg, cfg.n_runs - 1, nullptr);
      textclf::save_checkpoint(last.params, (fs::path(tr_out) / "model.bin").string());

      std::cout << dp.name << " " << results["model"].get<std::string>()
                << ": mean accuracy " << res.mean * 100.0 << " (sd "
                << res.sd * 100.0 << ") over " << cfg.n_runs << " runs, "
                << res.total_seconds << "s total\n";
      return 0;
    }

    if (*evalc) {
      const auto dp = resolve_dataset(ev_dataset);
      const auto vocab_path = resolve_vocab(ev_vocab, dp.texts.parent_path());
      const auto vocab = textclf::Vocabulary::from_file(vocab_path.string());
      const auto ds = textclf::load_dataset(dp.texts.string(), dp.meta.string(), vocab, dp.name);
      const auto repr = textclf::parse_repr(ev_repr);
      textclf::EmbeddingTable glove;
      const textclf::EmbeddingTable* glove_ptr = nullptr;
      if (repr == textclf::InputRepr::Glove) {
        if (ev_glove.empty()) throw std::runtime_error("--glove PATH is required with --repr glove");
        glove = textclf::load_glove(ev_glove, ev_glove_dim);
        glove_ptr = &glove;
      }
      const auto inputs = textclf::prepare_inputs(ds, vocab.size(), repr, glove_ptr);
      const auto params = textclf::load_checkpoint(ev_ckpt);
      const double acc = textclf::evaluate(params, ds, inputs, ev_threads);
      std::cout << "accuracy " << acc << "\n";
      return 0;
    }

    if (*graph) {
      const auto dp = resolve_dataset(gr_dataset);
      const auto vocab_path = resolve_vocab(gr_vocab, dp.texts.parent_path());
      const auto vocab = textclf::Vocabulary::from_file(vocab_path.string());
      const auto ds = textclf::load_dataset(dp.texts.string(), dp.meta.string(), vocab, dp.name);
      std::vector<const textclf::TokenSequence*> train_docs;
      for (const auto& d : ds.documents)
        if (d.split == textclf::Split::Train) train_docs.push_back(&d.tokens);
      const auto idf = textclf::fit_idf(train_docs, vocab.size());
      const auto g = textclf::build_graph(ds, gcfg, idf);

      std::mt19937_64 rng(42);
      std::normal_distribution<double> normal(0.0, 1.0);
      std::vector<double> E(g.n_nodes() * gr_embed_dim);
      for (auto& e : E) e = normal(rng);
      const double dev = textclf::verify_first_layer_equivalence(g, E, gr_embed_dim);

      // edge-weight histogram over the normalized adjacency
      std::vector<std::size_t> hist(10, 0);
      double max_w = 0.0;
      for (const double w : g.adjacency.val) max_w = std::max(max_w, w);
      for (const double w : g.adjacency.val) {
        auto b = max_w > 0.0 ? static_cast<std::size_t>(w / max_w * 9.999) : 0;
        ++hist[std::min<std::size_t>(b, 9)];
      }

      ordered_json j;
      j["dataset"] = dp.name;
      j["window"] = gcfg.window;
      j["n_word_nodes"] = g.n_words;
      j["n_doc_nodes"] = g.n_docs;
      j["n_entries"] = g.adjacency.val.size();
      j["edge_weight_hist"] = hist;
      j["max_normalized_weight"] = max_w;
      j["first_layer_equivalence_max_deviation"] = dev;
      write_json(gr_out, j);
      std::cout << "graph: " << g.n_words << " word + " << g.n_docs
                << " doc nodes, " << g.adjacency.val.size()
                << " stored entries, equivalence deviation " << dev << "\n";

      if (!gr_dump.empty()) {
        std::ofstream dump(gr_dump);
        const auto& A = g.adjacency;
        for (std::size_t i = 0; i < A.n; ++i)
          for (std::size_t k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k)
            dump << i << ' ' << A.col[k] << ' ' << A.val[k] << '\n';
      }
      return dev <= 1e-12 ? 0 : kExitVerify;
    }

    if (*verify) return cmd_verify(vf_cases, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return 0;
}
