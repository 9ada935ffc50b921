// Copyright 2026 The txscan Authors
// SPDX-License-Identifier: Apache-2.0

#include "txscan/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "txscan/baselines.hpp"
#include "txscan/detector.hpp"
#include "txscan/errors.hpp"
#include "txscan/evalkit.hpp"
#include "txscan/io.hpp"
#include "txscan/mlm.hpp"
#include "txscan/nn/checkpoint.hpp"
#include "txscan/parallel.hpp"
#include "txscan/rng.hpp"
#include "txscan/synth.hpp"
#include "txscan/tokenizer.hpp"
#include "txscan/trace.hpp"

namespace txscan::cli {

namespace {

namespace fs = std::filesystem;

struct GlobalOpts {
  std::uint64_t seed = 0;
  int workers = 0;  // 0 = hardware concurrency

  int effective_workers() const {
    if (workers > 0) return workers;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
  }
};

struct SplitData {
  std::vector<trace::Transaction> train_benign;
  std::vector<trace::Transaction> test;  // held-out benign, then malicious
};

/// Training data is always the chronological head of the benign population;
/// the test set is the benign tail plus every labeled-malicious transaction.
SplitData split_for_run(const std::vector<trace::Transaction>& all,
                        double fraction) {
  std::vector<trace::Transaction> benign, malicious;
  for (const auto& tx : all) {
    if (tx.label == trace::Label::Malicious)
      malicious.push_back(tx);
    else
      benign.push_back(tx);
  }
  if (benign.empty()) throw EmptyDataset("no benign transactions in file");
  SplitData out;
  auto [train, test] = trace::split_dataset(benign, fraction);
  out.train_benign = std::move(train);
  out.test = std::move(test);
  out.test.insert(out.test.end(), malicious.begin(), malicious.end());
  return out;
}

std::vector<tok::EncodedSequence> encode_all(
    const std::vector<trace::Transaction>& txs, const tok::Vocabulary& vocab,
    int max_len) {
  std::vector<tok::EncodedSequence> out;
  out.reserve(txs.size());
  for (const auto& tx : txs)
    out.push_back(tok::encode(trace::flatten(tx), vocab, max_len, tx.tx_id));
  return out;
}

io::ManifestInput manifest_input(const std::string& path) {
  io::ManifestInput m;
  m.path = path;
  m.fnv64 = io::hash_file(path);
  m.bytes = static_cast<std::uint64_t>(fs::file_size(path));
  return m;
}

tok::Vocabulary load_vocab_checked(const std::string& path) {
  tok::Vocabulary vocab = tok::load_vocabulary(path);
  if (vocab.pad_id() < 0 || vocab.mask_id() < 0 || vocab.oov_id() < 0 ||
      vocab.cls_id() < 0)
    throw IOError("vocabulary lacks the required special tokens");
  return vocab;
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

struct SynthOpts {
  std::string out_dir = "run/synth";
  int n_benign = 500;
  int n_anomalies = 10;
  synth::SynthConfig cfg;
  std::vector<std::string> kind_names;
};

int cmd_synth(const GlobalOpts& g, SynthOpts& o) {
  o.cfg.seed = derive_seed(g.seed, "synth");
  if (!o.kind_names.empty()) {
    o.cfg.anomaly_kinds.clear();
    for (const auto& name : o.kind_names)
      o.cfg.anomaly_kinds.push_back(synth::parse_anomaly_kind(name));
  }

  auto txs = synth::gen_benign(o.cfg, o.n_benign);
  if (o.n_anomalies > 0) {
    auto anomalies = synth::inject_anomalies(
        txs, o.cfg.anomaly_kinds, o.n_anomalies, o.cfg.seed,
        txs.back().order_key + 1000);
    txs.insert(txs.end(), anomalies.begin(), anomalies.end());
  }

  fs::create_directories(o.out_dir);
  const std::string traces_path = o.out_dir + "/traces.jsonl";
  io::write_trace_file(txs, traces_path);
  io::write_manifest(o.out_dir + "/manifest.json", "synth", g.seed, {},
                     {traces_path});
  std::cout << "wrote " << txs.size() << " transactions (" << o.n_benign
            << " benign, " << o.n_anomalies << " anomalous) to " << traces_path
            << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// build-tokenizer
// ---------------------------------------------------------------------------

struct TokenizerOpts {
  std::string traces;
  std::string out_dir = "run/tokenizer";
  double train_fraction = 0.8;
  int top_n = tok::kDefaultTopAddresses;
  int size_cap = tok::kDefaultSizeCap;
};

int cmd_build_tokenizer(const GlobalOpts& g, const TokenizerOpts& o) {
  auto all = io::read_trace_file(o.traces);
  SplitData split = split_for_run(all, o.train_fraction);

  std::vector<std::vector<trace::Lexeme>> corpus;
  corpus.reserve(split.train_benign.size());
  for (const auto& tx : split.train_benign)
    corpus.push_back(trace::flatten(tx));

  tok::Vocabulary vocab = tok::build_vocabulary(corpus, o.top_n, o.size_cap);

  fs::create_directories(o.out_dir);
  const std::string vocab_path = o.out_dir + "/vocab.jsonl";
  tok::save_vocabulary(vocab, vocab_path);
  io::write_manifest(o.out_dir + "/manifest.json", "build-tokenizer", g.seed,
                     {manifest_input(o.traces)}, {vocab_path});
  std::cout << "vocabulary: " << vocab.size() << " tokens ("
            << vocab.specials().size() << " special, "
            << vocab.addresses().size() << " address, "
            << vocab.subwords().size() << " subword) -> " << vocab_path
            << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainOpts {
  std::string traces;
  std::string vocab;
  std::string out_dir = "run/model";
  std::string objective = "mlm";
  double train_fraction = 0.8;
  mlm::TrainHyper hyper;
  int d_model = 64;
  int n_heads = 4;
  int n_layers = 2;
  int d_ff = 0;  // 0 = 4 * d_model
  double rope_base = 10000.0;
};

int cmd_train(const GlobalOpts& g, TrainOpts& o) {
  auto all = io::read_trace_file(o.traces);
  SplitData split = split_for_run(all, o.train_fraction);
  tok::Vocabulary vocab = load_vocab_checked(o.vocab);

  nn::ModelConfig config;
  config.vocab_size = vocab.size();
  config.d_model = o.d_model;
  config.n_heads = o.n_heads;
  config.n_layers = o.n_layers;
  config.d_ff = o.d_ff > 0 ? o.d_ff : 4 * o.d_model;
  config.max_len = o.hyper.max_len;
  config.rope_base = o.rope_base;
  config.attention_mode = o.objective == "causal"
                              ? nn::AttentionMode::Causal
                              : nn::AttentionMode::Bidirectional;

  o.hyper.seed = derive_seed(g.seed, "train");
  o.hyper.workers = g.effective_workers();

  auto corpus = encode_all(split.train_benign, vocab, o.hyper.max_len);

  fs::create_directories(o.out_dir);
  const std::string metrics_path = o.out_dir + "/metrics.jsonl";
  std::error_code ec;
  fs::remove(metrics_path, ec);  // fresh log per run

  auto ckpt = mlm::train(
      config, vocab, corpus, o.hyper,
      o.objective == "causal" ? mlm::Objective::Causal : mlm::Objective::Mlm,
      [&metrics_path](const mlm::EpochMetrics& em) {
        io::append_metrics(em, metrics_path);
        std::cout << "epoch " << em.epoch << " mean_masked_ce "
                  << em.mean_masked_ce << " lr " << em.lr << '\n';
      });

  const std::string ckpt_path = o.out_dir + "/model.ckpt";
  nn::save_checkpoint(ckpt, ckpt_path);
  io::write_manifest(o.out_dir + "/manifest.json", "train", g.seed,
                     {manifest_input(o.traces), manifest_input(o.vocab)},
                     {ckpt_path, metrics_path});
  std::cout << "checkpoint -> " << ckpt_path << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// score
// ---------------------------------------------------------------------------

struct ScoreOpts {
  std::string traces;
  std::string vocab;
  std::string ckpt;
  std::string out_dir = "run/scores";
  std::string scorer = "mask-predict";
  double train_fraction = 0.8;
  detect::DetectorConfig detector;
  std::string embed_mode = "cls";
  double gamma = 0.0;  // 0 = 1 / d_model
  int simsiam_epochs = 50;
  double simsiam_lr = 1e-3;
  int d_out = 64;
  int gmm_k = 1;
};

int cmd_score(const GlobalOpts& g, ScoreOpts& o) {
  auto all = io::read_trace_file(o.traces);
  SplitData split = split_for_run(all, o.train_fraction);
  tok::Vocabulary vocab = load_vocab_checked(o.vocab);
  const detect::Scorer scorer = detect::parse_scorer(o.scorer);
  o.detector.seed = derive_seed(g.seed, "score");
  const int workers = g.effective_workers();

  nn::Checkpoint model;
  const bool needs_model = scorer == detect::Scorer::MaskPredict ||
                           scorer == detect::Scorer::CausalNll ||
                           scorer == detect::Scorer::Kde;
  int max_len = tok::kDefaultSizeCap;
  if (needs_model) {
    if (o.ckpt.empty())
      throw IOError("scorer '" + o.scorer + "' needs --ckpt");
    model = nn::load_checkpoint(o.ckpt);
    if (model.config.vocab_size != vocab.size())
      throw CorruptCheckpoint("checkpoint vocabulary size (" +
                              std::to_string(model.config.vocab_size) +
                              ") does not match the vocabulary file (" +
                              std::to_string(vocab.size()) + ")");
    max_len = model.config.max_len;
  }

  auto test_seqs = encode_all(split.test, vocab, max_len);
  std::vector<detect::AnomalyScore> scores(test_seqs.size());

  switch (scorer) {
    case detect::Scorer::MaskPredict: {
      parallel_for(static_cast<int>(test_seqs.size()), workers, [&](int i) {
        scores[i] =
            detect::mask_predict_score(model, vocab, test_seqs[i], o.detector);
      });
      break;
    }
    case detect::Scorer::CausalNll: {
      parallel_for(static_cast<int>(test_seqs.size()), workers, [&](int i) {
        scores[i] = detect::causal_nll_score(model, test_seqs[i]);
      });
      break;
    }
    case detect::Scorer::LengthHeuristic: {
      for (std::size_t i = 0; i < test_seqs.size(); ++i)
        scores[i] = baseline::length_score(test_seqs[i]);
      break;
    }
    case detect::Scorer::Gmm: {
      auto train_seqs = encode_all(split.train_benign, vocab, max_len);
      if (train_seqs.empty()) throw EmptyDataset("empty training split");
      const std::uint64_t proj_seed = derive_seed(g.seed, "bow-projection");
      std::vector<std::vector<double>> feats(train_seqs.size());
      parallel_for(static_cast<int>(train_seqs.size()), workers, [&](int i) {
        feats[i] = baseline::bow_features(train_seqs[i], vocab, o.d_out,
                                          proj_seed);
      });
      auto gmm = baseline::fit_gmm(feats, o.gmm_k,
                                   derive_seed(g.seed, "gmm-init"));
      std::vector<std::vector<double>> test_feats(test_seqs.size());
      parallel_for(static_cast<int>(test_seqs.size()), workers, [&](int i) {
        test_feats[i] =
            baseline::bow_features(test_seqs[i], vocab, o.d_out, proj_seed);
      });
      for (std::size_t i = 0; i < test_seqs.size(); ++i)
        scores[i] = baseline::gmm_score(gmm, test_feats[i],
                                        test_seqs[i].source_tx_id);
      fs::create_directories(o.out_dir);
      std::ofstream dump(o.out_dir + "/gmm.json", std::ios::binary);
      dump << baseline::gmm_to_json(gmm) << '\n';
      break;
    }
    case detect::Scorer::Kde: {
      auto train_seqs = encode_all(split.train_benign, vocab, max_len);
      if (train_seqs.empty()) throw EmptyDataset("empty training split");
      const auto mode = o.embed_mode == "average" ? detect::EmbedMode::Average
                                                  : detect::EmbedMode::Cls;
      std::vector<std::vector<float>> train_embeds(train_seqs.size());
      parallel_for(static_cast<int>(train_seqs.size()), workers, [&](int i) {
        train_embeds[i] =
            detect::embed(model, train_seqs[i], mode, vocab.pad_id());
      });
      auto heads = detect::simsiam_refine(train_embeds, o.simsiam_epochs,
                                          o.simsiam_lr,
                                          derive_seed(g.seed, "simsiam"));
      std::vector<std::vector<float>> projected(train_embeds.size());
      for (std::size_t i = 0; i < train_embeds.size(); ++i)
        projected[i] = heads.project(train_embeds[i]);
      const double gamma =
          o.gamma > 0.0 ? o.gamma : 1.0 / model.config.d_model;
      parallel_for(static_cast<int>(test_seqs.size()), workers, [&](int i) {
        auto e = detect::embed(model, test_seqs[i], mode, vocab.pad_id());
        scores[i] = detect::kde_score(projected, heads.project(e), gamma,
                                      test_seqs[i].source_tx_id);
      });
      break;
    }
  }

  fs::create_directories(o.out_dir);
  const std::string scores_path = o.out_dir + "/scores.jsonl";
  io::write_scores(scores, scores_path);
  std::vector<io::ManifestInput> inputs = {manifest_input(o.traces),
                                           manifest_input(o.vocab)};
  if (!o.ckpt.empty()) inputs.push_back(manifest_input(o.ckpt));
  io::write_manifest(o.out_dir + "/manifest.json", "score", g.seed, inputs,
                     {scores_path});
  std::cout << "scored " << scores.size() << " transactions with " << o.scorer
            << " -> " << scores_path << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

struct EvalOpts {
  std::string scores;
  std::string traces;
  std::string out_dir = "run/report";
  std::vector<int> k_list = {5, 10, 15};
  bool table = false;
};

int cmd_eval(const GlobalOpts& g, const EvalOpts& o) {
  auto scores = io::read_scores(o.scores);
  auto txs = io::read_trace_file(o.traces);
  eval::Labels labels;
  for (const auto& tx : txs) labels[tx.tx_id] = tx.label;

  eval::DetectionReport rep = eval::report(scores, labels, o.k_list);

  fs::create_directories(o.out_dir);
  const std::string report_path = o.out_dir + "/report.json";
  {
    std::ofstream out(report_path, std::ios::binary);
    if (!out) throw IOError("cannot write report: " + report_path);
    out << eval::report_to_json(rep) << '\n';
  }
  io::write_manifest(o.out_dir + "/manifest.json", "eval", g.seed,
                     {manifest_input(o.scores), manifest_input(o.traces)},
                     {report_path});
  if (o.table) std::cout << eval::render_table({rep});
  std::cout << "report -> " << report_path << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// inspect
// ---------------------------------------------------------------------------

struct InspectOpts {
  std::string traces;
  std::string vocab;
  std::string tx_id;
  int max_len = 1024;
};

int cmd_inspect(const InspectOpts& o) {
  auto txs = io::read_trace_file(o.traces);
  const trace::Transaction* tx = nullptr;
  for (const auto& t : txs)
    if (t.tx_id == o.tx_id) tx = &t;
  if (tx == nullptr) throw EmptyDataset("tx_id not found: " + o.tx_id);
  tok::Vocabulary vocab = load_vocab_checked(o.vocab);

  auto lexemes = trace::flatten(*tx);
  auto seq = tok::encode(lexemes, vocab, o.max_len, tx->tx_id);
  std::cout << "tx " << tx->tx_id << " (" << lexemes.size() << " lexemes, "
            << seq.n_tokens << " tokens)\n";
  for (std::size_t i = 0; i < seq.ids.size(); ++i) {
    const tok::TokenId id = seq.ids[i];
    std::cout << i << '\t' << id << '\t' << vocab.token_text(id) << '\n';
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"transaction-trace anomaly scanner"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "flat key=value configuration file");

  GlobalOpts g;
  app.add_option("--seed", g.seed, "global seed; stage seeds derive from it");
  app.add_option("--workers", g.workers,
                 "worker threads (0 = hardware concurrency)");

  SynthOpts synth_opts;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset");
  synth_cmd->add_option("--out-dir", synth_opts.out_dir, "output directory");
  synth_cmd->add_option("--n-benign", synth_opts.n_benign, "benign count")
      ->check(CLI::PositiveNumber);
  synth_cmd->add_option("--n-anomalies", synth_opts.n_anomalies,
                        "anomaly count")
      ->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--apps", synth_opts.cfg.n_apps, "application count")
      ->check(CLI::Range(1, 10));
  synth_cmd->add_option("--addresses-per-app",
                        synth_opts.cfg.addresses_per_app, "address pool size")
      ->check(CLI::PositiveNumber);
  synth_cmd->add_option("--templates-per-app",
                        synth_opts.cfg.call_templates_per_app,
                        "call templates per app")
      ->check(CLI::PositiveNumber);
  synth_cmd->add_option("--depth-max", synth_opts.cfg.depth_max,
                        "maximum call depth")
      ->check(CLI::Range(1, trace::kDefaultDepthCap));
  synth_cmd->add_option("--kinds", synth_opts.kind_names,
                        "anomaly kinds (subset of shuffled-calls,"
                        " foreign-address-burst, value-outlier,"
                        " truncated-structure)")
      ->delimiter(',');

  TokenizerOpts tok_opts;
  auto* tok_cmd =
      app.add_subcommand("build-tokenizer", "build and save the vocabulary");
  tok_cmd->add_option("--traces", tok_opts.traces, "trace file")->required();
  tok_cmd->add_option("--out-dir", tok_opts.out_dir, "output directory");
  tok_cmd->add_option("--train-fraction", tok_opts.train_fraction,
                      "per-app chronological training fraction")
      ->check(CLI::Range(1e-9, 1.0 - 1e-9));
  tok_cmd->add_option("--top-n", tok_opts.top_n, "addresses to retain")
      ->check(CLI::NonNegativeNumber);
  tok_cmd->add_option("--size-cap", tok_opts.size_cap, "total dictionary size")
      ->check(CLI::PositiveNumber);

  TrainOpts train_opts;
  auto* train_cmd = app.add_subcommand("train", "train an encoder");
  train_cmd->add_option("--traces", train_opts.traces, "trace file")
      ->required();
  train_cmd->add_option("--vocab", train_opts.vocab, "vocabulary file")
      ->required();
  train_cmd->add_option("--out-dir", train_opts.out_dir, "output directory");
  train_cmd->add_option("--objective", train_opts.objective,
                        "training objective")
      ->check(CLI::IsMember({"mlm", "causal"}));
  train_cmd->add_option("--train-fraction", train_opts.train_fraction, "")
      ->check(CLI::Range(1e-9, 1.0 - 1e-9));
  train_cmd->add_option("--epochs", train_opts.hyper.total_epochs, "")
      ->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--warmup-epochs", train_opts.hyper.warmup_epochs, "")
      ->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--batch-size", train_opts.hyper.batch_size, "")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--grad-accum", train_opts.hyper.grad_accum,
                        "micro-batches per optimizer step")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--lr", train_opts.hyper.base_lr, "base learning rate");
  train_cmd->add_option("--weight-decay", train_opts.hyper.weight_decay, "");
  train_cmd->add_option("--mask-ratio", train_opts.hyper.mask_ratio,
                        "fraction of tokens masked per sequence")
      ->check(CLI::Range(1e-9, 1.0 - 1e-9));
  train_cmd->add_option("--max-len", train_opts.hyper.max_len, "")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--d-model", train_opts.d_model, "")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--heads", train_opts.n_heads, "")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--layers", train_opts.n_layers, "")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--d-ff", train_opts.d_ff, "0 = 4 * d_model")
      ->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--rope-base", train_opts.rope_base, "");

  ScoreOpts score_opts;
  auto* score_cmd =
      app.add_subcommand("score", "score held-out transactions");
  score_cmd->add_option("--traces", score_opts.traces, "trace file")
      ->required();
  score_cmd->add_option("--vocab", score_opts.vocab, "vocabulary file")
      ->required();
  score_cmd->add_option("--ckpt", score_opts.ckpt, "model checkpoint");
  score_cmd->add_option("--out-dir", score_opts.out_dir, "output directory");
  score_cmd
      ->add_option("--scorer", score_opts.scorer, "scoring method")
      ->check(CLI::IsMember(
          {"mask-predict", "causal-nll", "kde", "gmm", "length"}));
  score_cmd->add_option("--train-fraction", score_opts.train_fraction, "")
      ->check(CLI::Range(1e-9, 1.0 - 1e-9));
  score_cmd->add_option("--detect-g", score_opts.detector.detect_g,
                        "detection mask ratio")
      ->check(CLI::Range(1e-9, 1.0 - 1e-9));
  score_cmd->add_option("--top-s", score_opts.detector.top_s,
                        "candidate set size")
      ->check(CLI::PositiveNumber);
  score_cmd->add_option("--repeats", score_opts.detector.repeats,
                        "masking repeats averaged per transaction")
      ->check(CLI::PositiveNumber);
  score_cmd->add_option("--embed-mode", score_opts.embed_mode, "kde embedding")
      ->check(CLI::IsMember({"cls", "average"}));
  score_cmd->add_option("--gamma", score_opts.gamma,
                        "kde kernel parameter (0 = 1/d_model)");
  score_cmd->add_option("--simsiam-epochs", score_opts.simsiam_epochs, "")
      ->check(CLI::NonNegativeNumber);
  score_cmd->add_option("--simsiam-lr", score_opts.simsiam_lr, "");
  score_cmd->add_option("--d-out", score_opts.d_out,
                        "bag-of-tokens projection width")
      ->check(CLI::PositiveNumber);
  score_cmd->add_option("--gmm-k", score_opts.gmm_k, "mixture components")
      ->check(CLI::PositiveNumber);

  EvalOpts eval_opts;
  auto* eval_cmd =
      app.add_subcommand("eval", "top-k detection report from scores");
  eval_cmd->add_option("--scores", eval_opts.scores, "score file")->required();
  eval_cmd->add_option("--traces", eval_opts.traces,
                       "trace file with ground-truth labels")
      ->required();
  eval_cmd->add_option("--out-dir", eval_opts.out_dir, "output directory");
  eval_cmd->add_option("--k", eval_opts.k_list, "k thresholds")
      ->delimiter(',');
  eval_cmd->add_flag("--table", eval_opts.table, "print a comparison table");

  InspectOpts inspect_opts;
  auto* inspect_cmd =
      app.add_subcommand("inspect", "decode one transaction's tokens");
  inspect_cmd->add_option("--traces", inspect_opts.traces, "trace file")
      ->required();
  inspect_cmd->add_option("--vocab", inspect_opts.vocab, "vocabulary file")
      ->required();
  inspect_cmd->add_option("--tx-id", inspect_opts.tx_id, "transaction id")
      ->required();
  inspect_cmd->add_option("--max-len", inspect_opts.max_len, "")
      ->check(CLI::PositiveNumber);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage error
  }

  try {
    if (synth_cmd->parsed()) return cmd_synth(g, synth_opts);
    if (tok_cmd->parsed()) return cmd_build_tokenizer(g, tok_opts);
    if (train_cmd->parsed()) return cmd_train(g, train_opts);
    if (score_cmd->parsed()) return cmd_score(g, score_opts);
    if (eval_cmd->parsed()) return cmd_eval(g, eval_opts);
    if (inspect_cmd->parsed()) return cmd_inspect(inspect_opts);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace txscan::cli
