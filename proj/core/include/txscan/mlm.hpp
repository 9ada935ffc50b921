// Copyright 2026 The txscan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "txscan/nn/checkpoint.hpp"
#include "txscan/nn/encoder.hpp"
#include "txscan/tokenizer.hpp"

namespace txscan::mlm {

/// Positions selected for masking, sorted ascending. Positions never cover
/// [PAD] tokens or the leading [CLS].
struct MaskingPlan {
  std::vector<int> positions;
  std::uint64_t seed = 0;
};

struct TrainHyper {
  double base_lr = 5e-5;
  int warmup_epochs = 1;
  int total_epochs = 100;
  int batch_size = 20;
  int grad_accum = 1;
  double mask_ratio = 0.15;  // g
  std::uint64_t seed = 0;
  int max_len = 1024;
  double weight_decay = 0.0;
  int workers = 1;
};

enum class Objective { Mlm, Causal };

struct EpochMetrics {
  int epoch = 0;
  double mean_masked_ce = 0.0;
  double lr = 0.0;
  double wall_time_s = 0.0;
};

using MetricsSink = std::function<void(const EpochMetrics&)>;

/// Maskable positions: everything except [PAD] ids and a leading [CLS].
std::vector<int> eligible_positions(std::span<const tok::TokenId> ids,
                                    tok::TokenId pad_id, tok::TokenId cls_id);

/// Samples ceil(g * n_eligible) positions (at least 1) without replacement
/// using the seeded generator. Throws NoEligiblePositions.
MaskingPlan make_masking_plan(const tok::EncodedSequence& seq,
                              const tok::Vocabulary& vocab, double g,
                              std::uint64_t seed);

/// Replaces ids at plan positions with [MASK]; returns the masked ids and
/// the original ids at those positions (aligned with plan.positions).
std::pair<std::vector<tok::TokenId>, std::vector<tok::TokenId>> apply_mask(
    const tok::EncodedSequence& seq, const MaskingPlan& plan,
    tok::TokenId mask_id);

/// Runs total_epochs of seeded-shuffle MLM (or next-token, for Causal)
/// training with Adam under the warmup+cosine schedule, reporting one
/// metrics record per epoch. Returns the final checkpoint. Deterministic
/// for a fixed (config, corpus, hyper) regardless of worker count.
nn::Checkpoint train(const nn::ModelConfig& config,
                     const tok::Vocabulary& vocab,
                     const std::vector<tok::EncodedSequence>& corpus,
                     const TrainHyper& hyper,
                     Objective objective = Objective::Mlm,
                     const MetricsSink& metrics = {});

}  // namespace txscan::mlm
