// Copyright 2026 The txscan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "txscan/nn/mat.hpp"
#include "txscan/nn/model.hpp"

namespace txscan::nn {

using TokenId = std::int32_t;

constexpr double kLayerNormEps = 1e-5;

// ---------------------------------------------------------------------------
// Rotary position embedding
// ---------------------------------------------------------------------------

/// Per-position cos/sin for each dimension pair; shared by every head and
/// layer of a forward pass.
template <typename T>
struct RopeTable {
  Mat<T> cos_t, sin_t;  // [seq x head_dim/2]
};

template <typename T>
RopeTable<T> make_rope_table(std::span<const int> positions, int head_dim,
                             double rope_base) {
  if (head_dim % 2 != 0)
    throw OddDimension("rotary embedding needs an even head dimension");
  const int half = head_dim / 2;
  RopeTable<T> t;
  t.cos_t = Mat<T>(static_cast<int>(positions.size()), half);
  t.sin_t = Mat<T>(static_cast<int>(positions.size()), half);
  for (std::size_t s = 0; s < positions.size(); ++s) {
    for (int i = 0; i < half; ++i) {
      double freq = std::pow(rope_base, -2.0 * i / head_dim);
      double angle = static_cast<double>(positions[s]) * freq;
      t.cos_t.at(static_cast<int>(s), i) = static_cast<T>(std::cos(angle));
      t.sin_t.at(static_cast<int>(s), i) = static_cast<T>(std::sin(angle));
    }
  }
  return t;
}

/// Rotates each dimension pair (2i, 2i+1) of every row. sign = -1 applies
/// the inverse rotation (used by the backward pass).
template <typename T>
void rope_rotate_inplace(Mat<T>& x, const RopeTable<T>& table, int sign = 1) {
  if (x.cols % 2 != 0)
    throw OddDimension("rotary embedding needs an even head dimension");
  const int half = x.cols / 2;
  for (int s = 0; s < x.rows; ++s) {
    T* row = x.row(s);
    const T* c = table.cos_t.row(s);
    const T* sn = table.sin_t.row(s);
    for (int i = 0; i < half; ++i) {
      T x0 = row[2 * i], x1 = row[2 * i + 1];
      T si = sign < 0 ? -sn[i] : sn[i];
      row[2 * i] = x0 * c[i] - x1 * si;
      row[2 * i + 1] = x0 * si + x1 * c[i];
    }
  }
}

/// vectors: [seq x head_dim]; each pair (2i, 2i+1) rotated by
/// pos * rope_base^(-2i/head_dim).
template <typename T>
Mat<T> rope_apply(const Mat<T>& vectors, std::span<const int> positions,
                  double rope_base) {
  if (static_cast<std::size_t>(vectors.rows) != positions.size())
    throw ShapeError("rope_apply: one position per row required");
  RopeTable<T> table = make_rope_table<T>(positions, vectors.cols, rope_base);
  Mat<T> out = vectors;
  rope_rotate_inplace(out, table);
  return out;
}

// ---------------------------------------------------------------------------
// Attention
// ---------------------------------------------------------------------------

/// pad_mask: empty (no padding) or one byte per position, nonzero = real
/// token. Pad keys are masked out of every softmax; pad query rows yield
/// zero output.
inline bool attention_allowed(AttentionMode mode,
                              std::span<const std::uint8_t> pad_mask, int i,
                              int j) {
  if (mode == AttentionMode::Causal && j > i) return false;
  if (!pad_mask.empty() && pad_mask[j] == 0) return false;
  return true;
}

namespace detail {

template <typename T>
void check_attention_shapes(const Mat<T>& q, const Mat<T>& k, const Mat<T>& v,
                            std::span<const std::uint8_t> pad_mask) {
  if (q.cols != k.cols || k.rows != v.rows || q.rows != k.rows)
    throw ShapeError("attention: Q/K/V shapes disagree");
  if (!pad_mask.empty() &&
      pad_mask.size() != static_cast<std::size_t>(q.rows))
    throw ShapeError("attention: pad mask length mismatch");
}

}  // namespace detail

/// softmax(Q K^T / sqrt(d) + mask) V, materializing the full score matrix.
/// probs_out, when given, receives the softmax rows (used for backward).
template <typename T>
Mat<T> attention(const Mat<T>& q, const Mat<T>& k, const Mat<T>& v,
                 AttentionMode mode,
                 std::span<const std::uint8_t> pad_mask = {},
                 Mat<T>* probs_out = nullptr) {
  detail::check_attention_shapes(q, k, v, pad_mask);
  const int seq = q.rows;
  const T scale = static_cast<T>(1.0 / std::sqrt(static_cast<double>(q.cols)));

  Mat<T> scores(seq, seq);
  matmul_bt(q, k, scores);

  Mat<T> probs(seq, seq);
  for (int i = 0; i < seq; ++i) {
    const bool pad_query = !pad_mask.empty() && pad_mask[i] == 0;
    T row_max = -std::numeric_limits<T>::infinity();
    for (int j = 0; j < seq; ++j) {
      if (!pad_query && attention_allowed(mode, pad_mask, i, j))
        row_max = std::max(row_max, scores.at(i, j) * scale);
    }
    T denom = T(0);
    for (int j = 0; j < seq; ++j) {
      T p = T(0);
      if (!pad_query && attention_allowed(mode, pad_mask, i, j)) {
        p = std::exp(scores.at(i, j) * scale - row_max);
        denom += p;
      }
      probs.at(i, j) = p;
    }
    if (denom > T(0)) {
      for (int j = 0; j < seq; ++j) probs.at(i, j) /= denom;
    }
  }

  Mat<T> out(seq, v.cols);
  matmul(probs, v, out);
  if (probs_out != nullptr) *probs_out = std::move(probs);
  return out;
}

/// Streaming-softmax attention: identical result to attention() up to
/// roundoff, never materializing more than one block of scores per query
/// row. block must be >= 1.
template <typename T>
Mat<T> attention_tiled(const Mat<T>& q, const Mat<T>& k, const Mat<T>& v,
                       AttentionMode mode,
                       std::span<const std::uint8_t> pad_mask, int block) {
  detail::check_attention_shapes(q, k, v, pad_mask);
  if (block < 1) throw InvalidBlock("attention block must be >= 1");
  const int seq = q.rows;
  const int dim = v.cols;
  const T scale = static_cast<T>(1.0 / std::sqrt(static_cast<double>(q.cols)));

  Mat<T> out(seq, dim);
  std::vector<T> block_scores(block);
  std::vector<T> acc(dim);

  for (int i = 0; i < seq; ++i) {
    T* out_row = out.row(i);
    if (!pad_mask.empty() && pad_mask[i] == 0) continue;  // zero row

    T run_max = -std::numeric_limits<T>::infinity();
    T run_denom = T(0);
    std::fill(acc.begin(), acc.end(), T(0));

    for (int start = 0; start < seq; start += block) {
      const int end = std::min(start + block, seq);

      // scores for the allowed entries of this tile
      T tile_max = -std::numeric_limits<T>::infinity();
      for (int j = start; j < end; ++j) {
        T s = -std::numeric_limits<T>::infinity();
        if (attention_allowed(mode, pad_mask, i, j)) {
          const T* qrow = q.row(i);
          const T* krow = k.row(j);
          T dot = T(0);
          for (int c = 0; c < q.cols; ++c) dot += qrow[c] * krow[c];
          s = dot * scale;
          tile_max = std::max(tile_max, s);
        }
        block_scores[j - start] = s;
      }
      if (tile_max == -std::numeric_limits<T>::infinity()) continue;

      T tile_denom = T(0);
      const T new_max = std::max(run_max, tile_max);
      const T rescale = run_denom > T(0) ? std::exp(run_max - new_max) : T(0);
      for (int c = 0; c < dim; ++c) acc[c] *= rescale;
      run_denom *= rescale;
      for (int j = start; j < end; ++j) {
        const T s = block_scores[j - start];
        if (s == -std::numeric_limits<T>::infinity()) continue;
        const T w = std::exp(s - new_max);
        tile_denom += w;
        const T* vrow = v.row(j);
        for (int c = 0; c < dim; ++c) acc[c] += w * vrow[c];
      }
      run_denom += tile_denom;
      run_max = new_max;
    }

    if (run_denom > T(0))
      for (int c = 0; c < dim; ++c) out_row[c] = acc[c] / run_denom;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Layer norm and GELU
// ---------------------------------------------------------------------------

template <typename T>
struct NormStats {
  std::vector<T> mean, rstd;  // per row
};

template <typename T>
Mat<T> layer_norm(const Mat<T>& x, const Mat<T>& gain, const Mat<T>& bias,
                  NormStats<T>* stats = nullptr) {
  Mat<T> out(x.rows, x.cols);
  if (stats != nullptr) {
    stats->mean.assign(x.rows, T(0));
    stats->rstd.assign(x.rows, T(0));
  }
  for (int s = 0; s < x.rows; ++s) {
    const T* row = x.row(s);
    T mean = T(0);
    for (int c = 0; c < x.cols; ++c) mean += row[c];
    mean /= static_cast<T>(x.cols);
    T var = T(0);
    for (int c = 0; c < x.cols; ++c) {
      T d = row[c] - mean;
      var += d * d;
    }
    var /= static_cast<T>(x.cols);
    T rstd = T(1) / std::sqrt(var + static_cast<T>(kLayerNormEps));
    if (stats != nullptr) {
      stats->mean[s] = mean;
      stats->rstd[s] = rstd;
    }
    T* orow = out.row(s);
    for (int c = 0; c < x.cols; ++c)
      orow[c] = (row[c] - mean) * rstd * gain.v[c] + bias.v[c];
  }
  return out;
}

/// dx for y = norm(x) * g + b given cached stats; accumulates dg, db.
template <typename T>
Mat<T> layer_norm_backward(const Mat<T>& dout, const Mat<T>& x,
                           const Mat<T>& gain, const NormStats<T>& stats,
                           Mat<T>& dgain, Mat<T>& dbias) {
  Mat<T> dx(x.rows, x.cols);
  const T inv_n = T(1) / static_cast<T>(x.cols);
  for (int s = 0; s < x.rows; ++s) {
    const T* xrow = x.row(s);
    const T* drow = dout.row(s);
    const T mean = stats.mean[s];
    const T rstd = stats.rstd[s];
    T sum_dy = T(0), sum_dy_y = T(0);
    for (int c = 0; c < x.cols; ++c) {
      const T y = (xrow[c] - mean) * rstd;
      const T dy = drow[c] * gain.v[c];
      dgain.v[c] += drow[c] * y;
      dbias.v[c] += drow[c];
      sum_dy += dy;
      sum_dy_y += dy * y;
    }
    T* dxrow = dx.row(s);
    for (int c = 0; c < x.cols; ++c) {
      const T y = (xrow[c] - mean) * rstd;
      const T dy = drow[c] * gain.v[c];
      dxrow[c] = rstd * (dy - sum_dy * inv_n - y * sum_dy_y * inv_n);
    }
  }
  return dx;
}

template <typename T>
T gelu(T x) {
  return static_cast<T>(0.5) * x *
         (T(1) + std::erf(x * static_cast<T>(0.7071067811865475)));
}

template <typename T>
T gelu_grad(T x) {
  const T cdf =
      static_cast<T>(0.5) *
      (T(1) + std::erf(x * static_cast<T>(0.7071067811865475)));
  const T pdf = std::exp(static_cast<T>(-0.5) * x * x) *
                static_cast<T>(0.3989422804014327);
  return cdf + x * pdf;
}

// ---------------------------------------------------------------------------
// Encoder forward
// ---------------------------------------------------------------------------

template <typename T>
struct LayerCache {
  Mat<T> x_in;                   // residual input to the attention block
  Mat<T> ln1_out;                // [seq x d]
  NormStats<T> ln1_stats;
  std::vector<Mat<T>> q_rot, k_rot, v_head;  // per head, [seq x hd]
  std::vector<Mat<T>> probs;                 // per head, [seq x seq]
  Mat<T> ctx;                    // concatenated head outputs, pre-Wo
  Mat<T> x_mid;                  // after attention residual
  Mat<T> ln2_out;
  NormStats<T> ln2_stats;
  Mat<T> ff_pre;                 // [seq x d_ff], pre-GELU
  Mat<T> ff_act;                 // [seq x d_ff]
};

template <typename T>
struct ForwardCache {
  std::vector<LayerCache<T>> layers;
  Mat<T> x_final;  // residual stream before the final norm
  NormStats<T> lnf_stats;
  Mat<T> hidden;   // final-norm output
};

template <typename T>
struct ForwardResult {
  Mat<T> hidden;  // [seq x d_model]
  Mat<T> logits;  // [seq x vocab]
};

namespace detail {

template <typename T>
void split_head(const Mat<T>& x, int head, int head_dim, Mat<T>& out) {
  out = Mat<T>(x.rows, head_dim);
  const int offset = head * head_dim;
  for (int s = 0; s < x.rows; ++s) {
    const T* src = x.row(s) + offset;
    T* dst = out.row(s);
    for (int c = 0; c < head_dim; ++c) dst[c] = src[c];
  }
}

template <typename T>
void place_head(const Mat<T>& head_mat, int head, int head_dim, Mat<T>& x) {
  const int offset = head * head_dim;
  for (int s = 0; s < x.rows; ++s) {
    const T* src = head_mat.row(s);
    T* dst = x.row(s) + offset;
    for (int c = 0; c < head_dim; ++c) dst[c] = src[c];
  }
}

template <typename T>
void add_bias(Mat<T>& x, const Mat<T>& bias) {
  for (int s = 0; s < x.rows; ++s) {
    T* row = x.row(s);
    for (int c = 0; c < x.cols; ++c) row[c] += bias.v[c];
  }
}

}  // namespace detail

/// Pre-norm transformer stack. attention_block = 0 selects the exact
/// (naive) kernel; > 0 selects the tiled streaming kernel with that block
/// size. cache must be non-null when a backward pass will follow (the
/// backward pass requires the naive kernel's cached probabilities).
template <typename T>
ForwardResult<T> encoder_forward(const ModelConfig& cfg,
                                 const ModelParams<T>& params,
                                 std::span<const TokenId> ids,
                                 std::span<const std::uint8_t> pad_mask = {},
                                 ForwardCache<T>* cache = nullptr,
                                 int attention_block = 0) {
  cfg.validate();
  const int seq = static_cast<int>(ids.size());
  if (seq == 0) throw EmptySequence("encoder_forward: empty sequence");
  if (seq > cfg.max_len)
    throw SequenceTooLong("sequence length exceeds model max_len");
  if (!pad_mask.empty() && pad_mask.size() != ids.size())
    throw ShapeError("pad mask length mismatch");
  const int d = cfg.d_model;
  const int hd = cfg.head_dim();

  std::vector<int> positions(seq);
  for (int i = 0; i < seq; ++i) positions[i] = i;
  RopeTable<T> rope = make_rope_table<T>(positions, hd, cfg.rope_base);

  Mat<T> x(seq, d);
  for (int s = 0; s < seq; ++s) {
    TokenId id = ids[s];
    if (id < 0 || id >= cfg.vocab_size)
      throw ShapeError("token id out of vocabulary range");
    const T* emb = params.embedding.row(id);
    T* row = x.row(s);
    for (int c = 0; c < d; ++c) row[c] = emb[c];
  }

  if (cache != nullptr) cache->layers.assign(cfg.n_layers, LayerCache<T>{});

  Mat<T> q(seq, d), k(seq, d), v(seq, d), ctx(seq, d), attn_out(seq, d);
  Mat<T> qh, kh, vh;
  for (int li = 0; li < cfg.n_layers; ++li) {
    const LayerParams<T>& lp = params.layers[li];
    LayerCache<T>* lc = cache != nullptr ? &cache->layers[li] : nullptr;
    if (lc != nullptr) lc->x_in = x;

    NormStats<T> ln1_stats;
    Mat<T> ln1_out = layer_norm(x, lp.ln1_g, lp.ln1_b, &ln1_stats);

    matmul_bt(ln1_out, lp.wq, q);
    matmul_bt(ln1_out, lp.wk, k);
    matmul_bt(ln1_out, lp.wv, v);

    if (lc != nullptr) {
      lc->q_rot.resize(cfg.n_heads);
      lc->k_rot.resize(cfg.n_heads);
      lc->v_head.resize(cfg.n_heads);
      lc->probs.resize(cfg.n_heads);
    }
    for (int h = 0; h < cfg.n_heads; ++h) {
      detail::split_head(q, h, hd, qh);
      detail::split_head(k, h, hd, kh);
      detail::split_head(v, h, hd, vh);
      rope_rotate_inplace(qh, rope);
      rope_rotate_inplace(kh, rope);
      Mat<T> head_out;
      if (lc != nullptr) {
        head_out =
            attention(qh, kh, vh, cfg.attention_mode, pad_mask, &lc->probs[h]);
        lc->q_rot[h] = qh;
        lc->k_rot[h] = kh;
        lc->v_head[h] = vh;
      } else if (attention_block > 0) {
        head_out = attention_tiled(qh, kh, vh, cfg.attention_mode, pad_mask,
                                   attention_block);
      } else {
        head_out = attention(qh, kh, vh, cfg.attention_mode, pad_mask);
      }
      detail::place_head(head_out, h, hd, ctx);
    }

    matmul_bt(ctx, lp.wo, attn_out);
    axpy(x, attn_out);
    if (lc != nullptr) {
      lc->ln1_out = std::move(ln1_out);
      lc->ln1_stats = std::move(ln1_stats);
      lc->ctx = ctx;
      lc->x_mid = x;
    }

    NormStats<T> ln2_stats;
    Mat<T> ln2_out = layer_norm(x, lp.ln2_g, lp.ln2_b, &ln2_stats);
    Mat<T> ff_pre(seq, cfg.d_ff);
    matmul_bt(ln2_out, lp.w1, ff_pre);
    detail::add_bias(ff_pre, lp.b1);
    Mat<T> ff_act(seq, cfg.d_ff);
    for (std::size_t i = 0; i < ff_pre.size(); ++i)
      ff_act.v[i] = gelu(ff_pre.v[i]);
    Mat<T> ff_out(seq, d);
    matmul_bt(ff_act, lp.w2, ff_out);
    detail::add_bias(ff_out, lp.b2);
    axpy(x, ff_out);

    if (lc != nullptr) {
      lc->ln2_out = std::move(ln2_out);
      lc->ln2_stats = std::move(ln2_stats);
      lc->ff_pre = std::move(ff_pre);
      lc->ff_act = std::move(ff_act);
    }
  }

  NormStats<T> lnf_stats;
  Mat<T> hidden = layer_norm(x, params.lnf_g, params.lnf_b, &lnf_stats);
  if (cache != nullptr) {
    cache->x_final = std::move(x);
    cache->lnf_stats = std::move(lnf_stats);
    cache->hidden = hidden;
  }

  ForwardResult<T> res;
  res.logits = Mat<T>(seq, cfg.vocab_size);
  matmul_bt(hidden, params.embedding, res.logits);
  detail::add_bias(res.logits, params.mlm_bias);
  res.hidden = std::move(hidden);
  return res;
}

// ---------------------------------------------------------------------------
// Loss and backward
// ---------------------------------------------------------------------------

/// Mean masked cross entropy: targets[i] is the original token at
/// masked_positions[i].
template <typename T>
double mlm_loss(const Mat<T>& logits, std::span<const TokenId> targets,
                std::span<const int> masked_positions) {
  if (masked_positions.empty())
    throw NoMaskedPositions("mlm_loss needs at least one masked position");
  if (targets.size() != masked_positions.size())
    throw ShapeError("one target per masked position required");
  double total = 0.0;
  for (std::size_t i = 0; i < masked_positions.size(); ++i) {
    const int pos = masked_positions[i];
    if (pos < 0 || pos >= logits.rows)
      throw PositionOutOfRange("masked position outside sequence");
    const TokenId target = targets[i];
    if (target < 0 || target >= logits.cols)
      throw ShapeError("target id outside vocabulary");
    const T* row = logits.row(pos);
    T row_max = row[0];
    for (int c = 1; c < logits.cols; ++c) row_max = std::max(row_max, row[c]);
    double denom = 0.0;
    for (int c = 0; c < logits.cols; ++c)
      denom += std::exp(static_cast<double>(row[c] - row_max));
    total += std::log(denom) + static_cast<double>(row_max) -
             static_cast<double>(row[target]);
  }
  return total / static_cast<double>(masked_positions.size());
}

template <typename T>
struct BackwardResult {
  ModelParams<T> grads;
  double loss = 0.0;
};

/// Exact reverse-mode gradients of mlm_loss(encoder_forward(...)) with
/// respect to every parameter tensor. ids is the (already masked) input.
template <typename T>
BackwardResult<T> backward(const ModelConfig& cfg, const ModelParams<T>& params,
                           std::span<const TokenId> ids,
                           std::span<const TokenId> targets,
                           std::span<const int> masked_positions,
                           std::span<const std::uint8_t> pad_mask = {}) {
  ForwardCache<T> cache;
  ForwardResult<T> fwd = encoder_forward(cfg, params, ids, pad_mask, &cache);

  BackwardResult<T> res;
  res.loss = mlm_loss(fwd.logits, targets, masked_positions);
  res.grads = ModelParams<T>::zeros_like(cfg);
  ModelParams<T>& g = res.grads;

  const int seq = static_cast<int>(ids.size());
  const int d = cfg.d_model;
  const int hd = cfg.head_dim();
  const T inv_n = T(1) / static_cast<T>(masked_positions.size());

  std::vector<int> positions(seq);
  for (int i = 0; i < seq; ++i) positions[i] = i;
  RopeTable<T> rope = make_rope_table<T>(positions, hd, cfg.rope_base);

  // d loss / d logits, nonzero only on masked rows
  Mat<T> dlogits(seq, cfg.vocab_size);
  for (std::size_t i = 0; i < masked_positions.size(); ++i) {
    const int pos = masked_positions[i];
    const T* row = fwd.logits.row(pos);
    T* drow = dlogits.row(pos);
    T row_max = row[0];
    for (int c = 1; c < cfg.vocab_size; ++c) row_max = std::max(row_max, row[c]);
    T denom = T(0);
    for (int c = 0; c < cfg.vocab_size; ++c)
      denom += std::exp(row[c] - row_max);
    for (int c = 0; c < cfg.vocab_size; ++c)
      drow[c] += std::exp(row[c] - row_max) / denom * inv_n;
    drow[targets[i]] -= inv_n;
  }

  // logits = hidden E^T + b
  for (int s = 0; s < seq; ++s) {
    const T* drow = dlogits.row(s);
    for (int c = 0; c < cfg.vocab_size; ++c) g.mlm_bias.v[c] += drow[c];
  }
  Mat<T> dhidden(seq, d);
  matmul(dlogits, params.embedding, dhidden);          // [seq x d]
  matmul_at(dlogits, cache.hidden, g.embedding);       // logits path into E

  // final layer norm
  Mat<T> dx = layer_norm_backward(dhidden, cache.x_final, params.lnf_g,
                                  cache.lnf_stats, g.lnf_g, g.lnf_b);

  Mat<T> dq(seq, d), dk(seq, d), dv(seq, d), dctx(seq, d);
  Mat<T> dqh, dkh, dvh(0, 0);
  for (int li = cfg.n_layers - 1; li >= 0; --li) {
    const LayerParams<T>& lp = params.layers[li];
    LayerParams<T>& lg = g.layers[li];
    const LayerCache<T>& lc = cache.layers[li];

    // feed-forward block: x2 = x_mid + W2 gelu(W1 ln2(x_mid) + b1) + b2
    Mat<T> dff_out = dx;  // residual passthrough keeps dx as well
    for (int s = 0; s < seq; ++s) {
      const T* drow = dff_out.row(s);
      for (int c = 0; c < d; ++c) lg.b2.v[c] += drow[c];
    }
    matmul_at(dff_out, lc.ff_act, lg.w2);
    Mat<T> dff_act(seq, cfg.d_ff);
    matmul(dff_out, lp.w2, dff_act);
    for (std::size_t i = 0; i < dff_act.size(); ++i)
      dff_act.v[i] *= gelu_grad(lc.ff_pre.v[i]);
    for (int s = 0; s < seq; ++s) {
      const T* drow = dff_act.row(s);
      for (int c = 0; c < cfg.d_ff; ++c) lg.b1.v[c] += drow[c];
    }
    matmul_at(dff_act, lc.ln2_out, lg.w1);
    Mat<T> dln2_out(seq, d);
    matmul(dff_act, lp.w1, dln2_out);
    Mat<T> dx_mid = layer_norm_backward(dln2_out, lc.x_mid, lp.ln2_g,
                                        lc.ln2_stats, lg.ln2_g, lg.ln2_b);
    axpy(dx_mid, dx);  // add residual gradient
    dx = std::move(dx_mid);

    // attention block: x_mid = x_in + Wo ctx
    Mat<T> dattn = dx;  // residual passthrough below
    matmul_at(dattn, lc.ctx, lg.wo);
    matmul(dattn, lp.wo, dctx);

    dq.zero();
    dk.zero();
    dv.zero();
    for (int h = 0; h < cfg.n_heads; ++h) {
      Mat<T> dctx_h;
      detail::split_head(dctx, h, hd, dctx_h);
      const Mat<T>& probs = lc.probs[h];

      Mat<T> dv_h(seq, hd);
      matmul_at(probs, dctx_h, dv_h);

      Mat<T> dprobs(seq, seq);
      matmul_bt(dctx_h, lc.v_head[h], dprobs);

      // softmax backward, folding in the 1/sqrt(hd) scale
      const T scale = static_cast<T>(1.0 / std::sqrt(static_cast<double>(hd)));
      Mat<T> dscores(seq, seq);
      for (int i = 0; i < seq; ++i) {
        const T* prow = probs.row(i);
        const T* dprow = dprobs.row(i);
        T dot = T(0);
        for (int j = 0; j < seq; ++j) dot += prow[j] * dprow[j];
        T* dsrow = dscores.row(i);
        for (int j = 0; j < seq; ++j)
          dsrow[j] = prow[j] * (dprow[j] - dot) * scale;
      }

      dqh = Mat<T>(seq, hd);
      matmul(dscores, lc.k_rot[h], dqh);
      dkh = Mat<T>(seq, hd);
      matmul_at(dscores, lc.q_rot[h], dkh);
      rope_rotate_inplace(dqh, rope, -1);
      rope_rotate_inplace(dkh, rope, -1);

      detail::place_head(dqh, h, hd, dq);
      detail::place_head(dkh, h, hd, dk);
      detail::place_head(dv_h, h, hd, dv);
    }

    matmul_at(dq, lc.ln1_out, lg.wq);
    matmul_at(dk, lc.ln1_out, lg.wk);
    matmul_at(dv, lc.ln1_out, lg.wv);
    Mat<T> dln1_out(seq, d);
    matmul(dq, lp.wq, dln1_out);
    {
      Mat<T> tmp(seq, d);
      matmul(dk, lp.wk, tmp);
      axpy(dln1_out, tmp);
      matmul(dv, lp.wv, tmp);
      axpy(dln1_out, tmp);
    }
    Mat<T> dx_in = layer_norm_backward(dln1_out, lc.x_in, lp.ln1_g,
                                       lc.ln1_stats, lg.ln1_g, lg.ln1_b);
    axpy(dx_in, dx);  // residual gradient
    dx = std::move(dx_in);
  }

  // embedding lookup scatter
  for (int s = 0; s < seq; ++s) {
    const T* drow = dx.row(s);
    T* erow = g.embedding.row(ids[s]);
    for (int c = 0; c < d; ++c) erow[c] += drow[c];
  }
  return res;
}

}  // namespace txscan::nn
