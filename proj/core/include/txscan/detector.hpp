// Copyright 2026 The txscan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "txscan/mlm.hpp"
#include "txscan/nn/checkpoint.hpp"
#include "txscan/tokenizer.hpp"

namespace txscan::detect {

enum class Scorer { MaskPredict, CausalNll, Kde, Gmm, LengthHeuristic };

std::string scorer_name(Scorer s);
Scorer parse_scorer(const std::string& name);

/// Higher score always means more anomalous, for every scorer.
struct AnomalyScore {
  std::string tx_id;
  double score = 0.0;
  Scorer scorer = Scorer::MaskPredict;
  std::map<std::string, double> detail;
};

struct DetectorConfig {
  double detect_g = 0.15;
  int top_s = 3;
  int repeats = 1;
  std::uint64_t seed = 0;
};

/// Ids of the top_s highest logits in a row, ties broken by ascending id.
std::vector<tok::TokenId> top_candidates(std::span<const float> logits,
                                         int top_s);

/// Failed-prediction-ratio score: mask detect_g of the eligible tokens with
/// a per-(seed, tx, repeat) derived plan, run the model, and count masked
/// positions whose true token is absent from its top_s candidate set.
/// Score = misses / n_masked, averaged over cfg.repeats.
AnomalyScore mask_predict_score(const nn::Checkpoint& model,
                                const tok::Vocabulary& vocab,
                                const tok::EncodedSequence& seq,
                                const DetectorConfig& cfg);

/// Mean masked cross entropy under the same masking procedure; used to
/// compare reconstruction losses between populations.
double masked_reconstruction_ce(const nn::Checkpoint& model,
                                const tok::Vocabulary& vocab,
                                const tok::EncodedSequence& seq, double g,
                                std::uint64_t seed);

/// Negated sum of conditional log likelihoods under a causal model. The
/// leading [CLS] acts as the start-of-sequence context, so every content
/// token contributes one term. Throws WrongAttentionMode for a
/// bidirectional model.
AnomalyScore causal_nll_score(const nn::Checkpoint& model,
                              const tok::EncodedSequence& seq);

enum class EmbedMode { Cls, Average };

/// Final-layer hidden state at position 0 (Cls) or the mean over non-pad
/// positions (Average).
std::vector<float> embed(const nn::Checkpoint& model,
                         const tok::EncodedSequence& seq, EmbedMode mode,
                         tok::TokenId pad_id);

/// One-layer affine projection/prediction heads refined on all-positive
/// pairs with a stop-gradient target branch and negative cosine loss.
struct SimSiamHeads {
  nn::Mat<float> proj_w, proj_b;  // f
  nn::Mat<float> pred_w, pred_b;  // h
  std::vector<double> epoch_loss;

  std::vector<float> project(std::span<const float> e) const;
};

/// Loss of one pair under given heads (both symmetrized halves).
double simsiam_pair_loss(const SimSiamHeads& heads, std::span<const float> a,
                         std::span<const float> b);

SimSiamHeads simsiam_refine(const std::vector<std::vector<float>>& embeddings,
                            int epochs, double lr, std::uint64_t seed);

/// (1/gamma) * log sum_i exp(-gamma * ||query - e_i||^2), computed with a
/// max shift; the anomaly score is its negation.
double kde_log_density(const std::vector<std::vector<float>>& train_embeds,
                       std::span<const float> query, double gamma);

AnomalyScore kde_score(const std::vector<std::vector<float>>& train_embeds,
                       std::span<const float> query, double gamma,
                       const std::string& tx_id = {});

}  // namespace txscan::detect
