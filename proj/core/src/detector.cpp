// Copyright 2026 The txscan Authors
// SPDX-License-Identifier: Apache-2.0

#include "txscan/detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "txscan/errors.hpp"
#include "txscan/nn/adam.hpp"
#include "txscan/rng.hpp"

namespace txscan::detect {

std::string scorer_name(Scorer s) {
  switch (s) {
    case Scorer::MaskPredict:
      return "mask-predict";
    case Scorer::CausalNll:
      return "causal-nll";
    case Scorer::Kde:
      return "kde";
    case Scorer::Gmm:
      return "gmm";
    case Scorer::LengthHeuristic:
      return "length";
  }
  return "mask-predict";
}

Scorer parse_scorer(const std::string& name) {
  if (name == "mask-predict") return Scorer::MaskPredict;
  if (name == "causal-nll") return Scorer::CausalNll;
  if (name == "kde") return Scorer::Kde;
  if (name == "gmm") return Scorer::Gmm;
  if (name == "length") return Scorer::LengthHeuristic;
  throw RangeError("unknown scorer: " + name);
}

std::vector<tok::TokenId> top_candidates(std::span<const float> logits,
                                         int top_s) {
  if (top_s < 1) throw RangeError("top_s must be >= 1");
  // (logit desc, id asc); small fixed-size insertion keeps this O(V * s)
  std::vector<tok::TokenId> best;
  best.reserve(top_s);
  auto better = [&](tok::TokenId a, tok::TokenId b) {
    if (logits[a] != logits[b]) return logits[a] > logits[b];
    return a < b;
  };
  for (tok::TokenId id = 0; id < static_cast<tok::TokenId>(logits.size());
       ++id) {
    if (static_cast<int>(best.size()) < top_s) {
      best.push_back(id);
      std::sort(best.begin(), best.end(), better);
    } else if (better(id, best.back())) {
      best.back() = id;
      std::sort(best.begin(), best.end(), better);
    }
  }
  return best;
}

AnomalyScore mask_predict_score(const nn::Checkpoint& model,
                                const tok::Vocabulary& vocab,
                                const tok::EncodedSequence& seq,
                                const DetectorConfig& cfg) {
  if (cfg.repeats < 1) throw RangeError("repeats must be >= 1");
  double score_sum = 0.0;
  std::int64_t total_masked = 0, total_missed = 0;
  for (int r = 1; r <= cfg.repeats; ++r) {
    const std::uint64_t plan_seed = derive_seed(
        cfg.seed, fnv1a64(seq.source_tx_id), static_cast<std::uint64_t>(r));
    mlm::MaskingPlan plan =
        mlm::make_masking_plan(seq, vocab, cfg.detect_g, plan_seed);
    auto [masked, targets] = mlm::apply_mask(seq, plan, vocab.mask_id());
    auto fwd = nn::encoder_forward<float>(model.config, model.params, masked);

    std::int64_t misses = 0;
    for (std::size_t i = 0; i < plan.positions.size(); ++i) {
      const float* row = fwd.logits.row(plan.positions[i]);
      auto cands = top_candidates(
          std::span<const float>(row, static_cast<std::size_t>(fwd.logits.cols)),
          cfg.top_s);
      if (std::find(cands.begin(), cands.end(), targets[i]) == cands.end())
        ++misses;
    }
    score_sum += static_cast<double>(misses) /
                 static_cast<double>(plan.positions.size());
    total_masked += static_cast<std::int64_t>(plan.positions.size());
    total_missed += misses;
  }

  AnomalyScore out;
  out.tx_id = seq.source_tx_id;
  out.scorer = Scorer::MaskPredict;
  out.score = score_sum / static_cast<double>(cfg.repeats);
  out.detail["n_masked"] = static_cast<double>(total_masked);
  out.detail["n_missed"] = static_cast<double>(total_missed);
  out.detail["repeats"] = static_cast<double>(cfg.repeats);
  return out;
}

double masked_reconstruction_ce(const nn::Checkpoint& model,
                                const tok::Vocabulary& vocab,
                                const tok::EncodedSequence& seq, double g,
                                std::uint64_t seed) {
  const std::uint64_t plan_seed =
      derive_seed(seed, fnv1a64(seq.source_tx_id), 1);
  mlm::MaskingPlan plan = mlm::make_masking_plan(seq, vocab, g, plan_seed);
  auto [masked, targets] = mlm::apply_mask(seq, plan, vocab.mask_id());
  auto fwd = nn::encoder_forward<float>(model.config, model.params, masked);
  return nn::mlm_loss(fwd.logits, targets, plan.positions);
}

AnomalyScore causal_nll_score(const nn::Checkpoint& model,
                              const tok::EncodedSequence& seq) {
  if (model.config.attention_mode != nn::AttentionMode::Causal)
    throw WrongAttentionMode("causal NLL needs a causal-attention model");
  if (seq.ids.empty()) throw EmptySequence("cannot score an empty sequence");

  auto fwd = nn::encoder_forward<float>(model.config, model.params, seq.ids);
  double nll = 0.0;
  // row p-1 conditions on tokens <= p-1 and predicts token p; the leading
  // [CLS] plays start-of-sequence
  for (std::size_t p = 1; p < seq.ids.size(); ++p) {
    const float* row = fwd.logits.row(static_cast<int>(p - 1));
    const int vocab_n = fwd.logits.cols;
    float row_max = row[0];
    for (int c = 1; c < vocab_n; ++c) row_max = std::max(row_max, row[c]);
    double denom = 0.0;
    for (int c = 0; c < vocab_n; ++c)
      denom += std::exp(static_cast<double>(row[c] - row_max));
    nll += std::log(denom) + static_cast<double>(row_max) -
           static_cast<double>(row[seq.ids[p]]);
  }

  AnomalyScore out;
  out.tx_id = seq.source_tx_id;
  out.scorer = Scorer::CausalNll;
  out.score = nll;
  out.detail["n_tokens"] = static_cast<double>(seq.ids.size());
  return out;
}

std::vector<float> embed(const nn::Checkpoint& model,
                         const tok::EncodedSequence& seq, EmbedMode mode,
                         tok::TokenId pad_id) {
  if (seq.ids.empty()) throw EmptySequence("cannot embed an empty sequence");
  auto fwd = nn::encoder_forward<float>(model.config, model.params, seq.ids);
  const int d = fwd.hidden.cols;
  std::vector<float> out(d, 0.0f);
  if (mode == EmbedMode::Cls) {
    const float* row = fwd.hidden.row(0);
    out.assign(row, row + d);
    return out;
  }
  int counted = 0;
  for (int s = 0; s < fwd.hidden.rows; ++s) {
    if (seq.ids[s] == pad_id) continue;
    const float* row = fwd.hidden.row(s);
    for (int c = 0; c < d; ++c) out[c] += row[c];
    ++counted;
  }
  for (float& x : out) x /= static_cast<float>(counted);
  return out;
}

// ---------------------------------------------------------------------------
// SimSiam refinement
// ---------------------------------------------------------------------------

namespace {

std::vector<float> affine(const nn::Mat<float>& w, const nn::Mat<float>& b,
                          std::span<const float> x) {
  std::vector<float> out(w.rows, 0.0f);
  for (int r = 0; r < w.rows; ++r) {
    const float* wrow = w.row(r);
    float acc = b.v[r];
    for (int c = 0; c < w.cols; ++c) acc += wrow[c] * x[c];
    out[r] = acc;
  }
  return out;
}

double norm(std::span<const float> x) {
  double s = 0.0;
  for (float v : x) s += static_cast<double>(v) * v;
  return std::sqrt(s);
}

double dot(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += static_cast<double>(a[i]) * b[i];
  return s;
}

/// Negative cosine D(p, z) and dD/dp (z is treated as constant).
double neg_cosine(std::span<const float> p, std::span<const float> z,
                  std::vector<float>* dp) {
  const double np = norm(p), nz = norm(z);
  if (dp != nullptr) dp->assign(p.size(), 0.0f);
  if (np == 0.0 || nz == 0.0) return 0.0;
  const double cos = dot(p, z) / (np * nz);
  if (dp != nullptr) {
    for (std::size_t i = 0; i < p.size(); ++i)
      (*dp)[i] = static_cast<float>((cos * p[i] / np - z[i] / nz) / np);
  }
  return -cos;
}

}  // namespace

std::vector<float> SimSiamHeads::project(std::span<const float> e) const {
  return affine(proj_w, proj_b, e);
}

double simsiam_pair_loss(const SimSiamHeads& heads, std::span<const float> a,
                         std::span<const float> b) {
  auto za = affine(heads.proj_w, heads.proj_b, a);
  auto zb = affine(heads.proj_w, heads.proj_b, b);
  auto pa = affine(heads.pred_w, heads.pred_b, za);
  auto pb = affine(heads.pred_w, heads.pred_b, zb);
  return 0.5 * (neg_cosine(pa, zb, nullptr) + neg_cosine(pb, za, nullptr));
}

SimSiamHeads simsiam_refine(const std::vector<std::vector<float>>& embeddings,
                            int epochs, double lr, std::uint64_t seed) {
  if (embeddings.size() < 2)
    throw TooFewEmbeddings("simsiam needs at least two embeddings");
  const int d = static_cast<int>(embeddings.front().size());

  SimSiamHeads heads;
  heads.proj_w = nn::Mat<float>(d, d);
  heads.pred_w = nn::Mat<float>(d, d);
  heads.proj_b = nn::Mat<float>(1, d);
  heads.pred_b = nn::Mat<float>(1, d);
  for (int i = 0; i < d; ++i) {
    heads.proj_w.at(i, i) = 1.0f;
    heads.pred_w.at(i, i) = 1.0f;
  }

  nn::Mat<float> g_proj_w(d, d), g_pred_w(d, d), g_proj_b(1, d), g_pred_b(1, d);
  nn::Mat<float> m_proj_w(d, d), m_pred_w(d, d), m_proj_b(1, d), m_pred_b(1, d);
  nn::Mat<float> v_proj_w(d, d), v_pred_w(d, d), v_proj_b(1, d), v_pred_b(1, d);
  nn::AdamHyper adam;

  std::vector<float> dp;
  const std::size_t n = embeddings.size();

  for (int epoch = 0; epoch < epochs; ++epoch) {
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(epoch)));
    rng.shuffle(perm);

    g_proj_w.zero();
    g_pred_w.zero();
    g_proj_b.zero();
    g_pred_b.zero();
    double loss_sum = 0.0;

    for (std::size_t i = 0; i < n; ++i) {
      std::span<const float> ea(embeddings[i]);
      std::span<const float> eb(embeddings[perm[i]]);
      auto za = affine(heads.proj_w, heads.proj_b, ea);
      auto zb = affine(heads.proj_w, heads.proj_b, eb);
      auto pa = affine(heads.pred_w, heads.pred_b, za);
      auto pb = affine(heads.pred_w, heads.pred_b, zb);

      // symmetric halves; the z branch is stop-gradient
      struct Half {
        std::span<const float> p_in;  // projector output feeding h
        const std::vector<float>* p;
        const std::vector<float>* z;
        std::span<const float> e;  // raw embedding feeding f
      };
      const Half halves[2] = {{za, &pa, &zb, ea}, {zb, &pb, &za, eb}};
      for (const Half& h : halves) {
        loss_sum += 0.5 * neg_cosine(*h.p, *h.z, &dp);
        for (int r = 0; r < d; ++r) {
          const float dpr = 0.5f * dp[r];
          g_pred_b.v[r] += dpr;
          float* wrow = g_pred_w.row(r);
          for (int c = 0; c < d; ++c) wrow[c] += dpr * h.p_in[c];
        }
        // through h into the projector
        for (int c = 0; c < d; ++c) {
          float dz = 0.0f;
          for (int r = 0; r < d; ++r)
            dz += 0.5f * dp[r] * heads.pred_w.at(r, c);
          g_proj_b.v[c] += dz;
          float* wrow = g_proj_w.row(c);
          for (int k = 0; k < d; ++k) wrow[k] += dz * h.e[k];
        }
      }
    }

    heads.epoch_loss.push_back(loss_sum / static_cast<double>(n));

    const float inv = 1.0f / static_cast<float>(n);
    for (auto* g : {&g_proj_w, &g_pred_w, &g_proj_b, &g_pred_b})
      for (auto& x : g->v) x *= inv;
    const std::int64_t step = epoch + 1;
    nn::adam_step_tensor(heads.proj_w, g_proj_w, m_proj_w, v_proj_w, step, lr,
                         adam);
    nn::adam_step_tensor(heads.proj_b, g_proj_b, m_proj_b, v_proj_b, step, lr,
                         adam);
    nn::adam_step_tensor(heads.pred_w, g_pred_w, m_pred_w, v_pred_w, step, lr,
                         adam);
    nn::adam_step_tensor(heads.pred_b, g_pred_b, m_pred_b, v_pred_b, step, lr,
                         adam);
  }
  return heads;
}

// ---------------------------------------------------------------------------
// KDE scoring
// ---------------------------------------------------------------------------

double kde_log_density(const std::vector<std::vector<float>>& train_embeds,
                       std::span<const float> query, double gamma) {
  if (train_embeds.empty())
    throw EmptyTrainSet("KDE needs at least one training embedding");
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw InvalidGamma("gamma must be positive and finite");

  double max_exponent = -std::numeric_limits<double>::infinity();
  std::vector<double> exponents;
  exponents.reserve(train_embeds.size());
  for (const auto& e : train_embeds) {
    if (e.size() != query.size())
      throw DimensionMismatch("KDE embedding dimension mismatch");
    double d2 = 0.0;
    for (std::size_t i = 0; i < query.size(); ++i) {
      const double diff = static_cast<double>(query[i]) - e[i];
      d2 += diff * diff;
    }
    const double x = -gamma * d2;
    exponents.push_back(x);
    max_exponent = std::max(max_exponent, x);
  }
  double acc = 0.0;
  for (double x : exponents) acc += std::exp(x - max_exponent);
  return (max_exponent + std::log(acc)) / gamma;
}

AnomalyScore kde_score(const std::vector<std::vector<float>>& train_embeds,
                       std::span<const float> query, double gamma,
                       const std::string& tx_id) {
  AnomalyScore out;
  out.tx_id = tx_id;
  out.scorer = Scorer::Kde;
  out.score = -kde_log_density(train_embeds, query, gamma);
  out.detail["n_train"] = static_cast<double>(train_embeds.size());
  out.detail["gamma"] = gamma;
  return out;
}

}  // namespace txscan::detect
