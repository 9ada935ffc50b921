// Copyright 2026 The txscan Authors
// SPDX-License-Identifier: Apache-2.0

#include "txscan/mlm.hpp"

#include <chrono>
#include <cmath>

#include "txscan/errors.hpp"
#include "txscan/nn/adam.hpp"
#include "txscan/parallel.hpp"
#include "txscan/rng.hpp"

namespace txscan::mlm {

std::vector<int> eligible_positions(std::span<const tok::TokenId> ids,
                                    tok::TokenId pad_id, tok::TokenId cls_id) {
  std::vector<int> out;
  for (std::size_t p = 0; p < ids.size(); ++p) {
    if (ids[p] == pad_id) continue;
    if (p == 0 && ids[p] == cls_id) continue;
    out.push_back(static_cast<int>(p));
  }
  return out;
}

MaskingPlan make_masking_plan(const tok::EncodedSequence& seq,
                              const tok::Vocabulary& vocab, double g,
                              std::uint64_t seed) {
  if (!(g > 0.0 && g < 1.0)) throw RangeError("mask ratio must lie in (0, 1)");
  std::vector<int> eligible =
      eligible_positions(seq.ids, vocab.pad_id(), vocab.cls_id());
  if (eligible.empty())
    throw NoEligiblePositions("sequence has no maskable positions");

  // nudge before the ceiling so g * n that is integral up to roundoff
  // does not gain an extra position
  const double exact = g * static_cast<double>(eligible.size());
  std::size_t count = static_cast<std::size_t>(std::ceil(exact - 1e-9));
  count = std::max<std::size_t>(1, std::min(count, eligible.size()));

  Rng rng(seed);
  auto picks = rng.sample_without_replacement(eligible.size(), count);
  MaskingPlan plan;
  plan.seed = seed;
  plan.positions.reserve(count);
  for (std::size_t i : picks) plan.positions.push_back(eligible[i]);
  return plan;
}

std::pair<std::vector<tok::TokenId>, std::vector<tok::TokenId>> apply_mask(
    const tok::EncodedSequence& seq, const MaskingPlan& plan,
    tok::TokenId mask_id) {
  std::vector<tok::TokenId> masked = seq.ids;
  std::vector<tok::TokenId> targets;
  targets.reserve(plan.positions.size());
  for (int pos : plan.positions) {
    if (pos < 0 || pos >= static_cast<int>(masked.size()))
      throw PositionOutOfRange("mask position outside sequence");
    targets.push_back(masked[pos]);
    masked[pos] = mask_id;
  }
  return {std::move(masked), std::move(targets)};
}

namespace {

struct MemberResult {
  nn::ModelParams<float> grads;
  double loss = 0.0;
  std::size_t n_predicted = 0;
  bool has_signal = false;
};

}  // namespace

nn::Checkpoint train(const nn::ModelConfig& config,
                     const tok::Vocabulary& vocab,
                     const std::vector<tok::EncodedSequence>& corpus,
                     const TrainHyper& hyper, Objective objective,
                     const MetricsSink& metrics) {
  config.validate();
  if (corpus.empty()) throw EmptyCorpus("cannot train on an empty corpus");
  if (!(hyper.mask_ratio > 0.0 && hyper.mask_ratio < 1.0))
    throw RangeError("mask_ratio must lie in (0, 1)");
  if (hyper.total_epochs < hyper.warmup_epochs)
    throw RangeError("total_epochs must be >= warmup_epochs");
  if (hyper.batch_size < 1 || hyper.grad_accum < 1)
    throw RangeError("batch_size and grad_accum must be >= 1");
  if (objective == Objective::Causal &&
      config.attention_mode != nn::AttentionMode::Causal)
    throw WrongAttentionMode("causal objective needs causal attention");

  nn::Checkpoint ckpt;
  ckpt.config = config;
  ckpt.params =
      nn::init_params<float>(config, derive_seed(hyper.seed, "init"));
  if (hyper.total_epochs == 0) return ckpt;

  const std::size_t n = corpus.size();
  const std::int64_t micro_per_epoch =
      static_cast<std::int64_t>((n + hyper.batch_size - 1) / hyper.batch_size);
  const std::int64_t steps_per_epoch =
      (micro_per_epoch + hyper.grad_accum - 1) / hyper.grad_accum;
  const std::int64_t total_steps = steps_per_epoch * hyper.total_epochs;
  std::int64_t warmup_steps = steps_per_epoch * hyper.warmup_epochs;
  if (warmup_steps >= total_steps) warmup_steps = total_steps - 1;

  nn::AdamState<float> opt = nn::AdamState<float>::zeros_like(config);
  nn::AdamHyper adam;
  adam.weight_decay = hyper.weight_decay;

  nn::ModelParams<float> accum = nn::ModelParams<float>::zeros_like(config);
  std::vector<MemberResult> members(hyper.batch_size);
  for (auto& m : members)
    m.grads = nn::ModelParams<float>::zeros_like(config);

  std::int64_t step = 0;
  const auto train_start = std::chrono::steady_clock::now();

  for (int epoch = 0; epoch < hyper.total_epochs; ++epoch) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng shuffle_rng(mix64(hyper.seed ^ static_cast<std::uint64_t>(epoch)));
    shuffle_rng.shuffle(order);

    double epoch_loss_sum = 0.0;
    std::size_t epoch_predicted = 0;
    double last_lr = 0.0;

    std::size_t cursor = 0;
    std::int64_t micro_index = 0;
    int accum_members = 0;
    accum.zero();

    while (cursor < n) {
      const int batch_n =
          static_cast<int>(std::min<std::size_t>(hyper.batch_size, n - cursor));

      parallel_for(batch_n, hyper.workers, [&](int bi) {
        const tok::EncodedSequence& seq = corpus[order[cursor + bi]];
        MemberResult& mr = members[bi];
        mr.has_signal = false;
        mr.loss = 0.0;
        mr.n_predicted = 0;

        if (objective == Objective::Mlm) {
          const std::uint64_t plan_seed =
              derive_seed(hyper.seed, static_cast<std::uint64_t>(epoch),
                          fnv1a64(seq.source_tx_id));
          MaskingPlan plan =
              make_masking_plan(seq, vocab, hyper.mask_ratio, plan_seed);
          auto [masked, targets] = apply_mask(seq, plan, vocab.mask_id());
          auto res = nn::backward<float>(config, ckpt.params, masked, targets,
                                         plan.positions);
          mr.grads = std::move(res.grads);
          mr.loss = res.loss;
          mr.n_predicted = plan.positions.size();
          mr.has_signal = true;
        } else {
          // next-token objective: row p predicts ids[p + 1]
          if (seq.ids.size() < 2) return;
          std::vector<int> positions(seq.ids.size() - 1);
          std::vector<tok::TokenId> targets(seq.ids.size() - 1);
          for (std::size_t p = 0; p + 1 < seq.ids.size(); ++p) {
            positions[p] = static_cast<int>(p);
            targets[p] = seq.ids[p + 1];
          }
          auto res = nn::backward<float>(config, ckpt.params, seq.ids, targets,
                                         positions);
          mr.grads = std::move(res.grads);
          mr.loss = res.loss;
          mr.n_predicted = positions.size();
          mr.has_signal = true;
        }
      });

      // deterministic ordered reduction, independent of worker count
      for (int bi = 0; bi < batch_n; ++bi) {
        MemberResult& mr = members[bi];
        if (!mr.has_signal) continue;
        if (!std::isfinite(mr.loss))
          throw DivergenceError("training loss became non-finite");
        nn::for_each_tensor_pair(
            accum, mr.grads,
            [](const std::string&, nn::Mat<float>& a, nn::Mat<float>& g) {
              axpy(a, g);
            });
        epoch_loss_sum += mr.loss * static_cast<double>(mr.n_predicted);
        epoch_predicted += mr.n_predicted;
        ++accum_members;
      }

      cursor += batch_n;
      ++micro_index;

      const bool flush = (micro_index % hyper.grad_accum == 0) || cursor >= n;
      if (flush && accum_members > 0) {
        const float inv = 1.0f / static_cast<float>(accum_members);
        nn::for_each_tensor(accum,
                            [&](const std::string&, nn::Mat<float>& m) {
                              for (auto& x : m.v) x *= inv;
                            });
        ++step;
        last_lr = nn::lr_at(step, warmup_steps, total_steps, hyper.base_lr);
        nn::adam_step(ckpt.params, accum, opt, last_lr, adam);
        accum.zero();
        accum_members = 0;
      }
    }

    if (metrics) {
      EpochMetrics em;
      em.epoch = epoch;
      em.mean_masked_ce =
          epoch_predicted > 0
              ? epoch_loss_sum / static_cast<double>(epoch_predicted)
              : 0.0;
      em.lr = last_lr;
      em.wall_time_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                        train_start)
              .count();
      metrics(em);
    }
  }
  return ckpt;
}

}  // namespace txscan::mlm
