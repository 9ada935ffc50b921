// Copyright 2026 The txscan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "txscan/nn/mat.hpp"
#include "txscan/rng.hpp"

namespace txscan::nn {

enum class AttentionMode { Bidirectional, Causal };
enum class Precision { F32, F64 };

struct ModelConfig {
  int vocab_size = 0;
  int d_model = 64;
  int n_heads = 4;
  int n_layers = 2;
  int d_ff = 128;
  int max_len = 256;
  double rope_base = 10000.0;
  AttentionMode attention_mode = AttentionMode::Bidirectional;
  Precision precision = Precision::F32;

  int head_dim() const { return d_model / n_heads; }

  void validate() const {
    if (vocab_size <= 0) throw ShapeError("vocab_size must be positive");
    if (d_model % n_heads != 0)
      throw ShapeError("d_model must be divisible by n_heads");
    if (head_dim() % 2 != 0)
      throw OddDimension("head dimension must be even for rotary embedding");
    if (max_len < 1) throw ShapeError("max_len must be >= 1");
  }
};

template <typename T>
struct LayerParams {
  Mat<T> wq, wk, wv, wo;      // [d_model x d_model]
  Mat<T> w1, b1;              // [d_ff x d_model], [1 x d_ff]
  Mat<T> w2, b2;              // [d_model x d_ff], [1 x d_model]
  Mat<T> ln1_g, ln1_b;        // [1 x d_model]
  Mat<T> ln2_g, ln2_b;        // [1 x d_model]
};

/// Encoder weights. The MLM head is weight-tied: logits use the embedding
/// matrix transposed plus mlm_bias.
template <typename T>
struct ModelParams {
  Mat<T> embedding;  // [vocab x d_model]
  std::vector<LayerParams<T>> layers;
  Mat<T> lnf_g, lnf_b;  // final layer norm, [1 x d_model]
  Mat<T> mlm_bias;      // [1 x vocab]

  static ModelParams zeros_like(const ModelConfig& cfg) {
    ModelParams p;
    p.embedding = Mat<T>(cfg.vocab_size, cfg.d_model);
    p.layers.resize(cfg.n_layers);
    for (auto& l : p.layers) {
      l.wq = l.wk = l.wv = l.wo = Mat<T>(cfg.d_model, cfg.d_model);
      l.w1 = Mat<T>(cfg.d_ff, cfg.d_model);
      l.b1 = Mat<T>(1, cfg.d_ff);
      l.w2 = Mat<T>(cfg.d_model, cfg.d_ff);
      l.b2 = Mat<T>(1, cfg.d_model);
      l.ln1_g = l.ln1_b = l.ln2_g = l.ln2_b = Mat<T>(1, cfg.d_model);
    }
    p.lnf_g = p.lnf_b = Mat<T>(1, cfg.d_model);
    p.mlm_bias = Mat<T>(1, cfg.vocab_size);
    return p;
  }

  void zero() {
    for_each_tensor(*this, [](const std::string&, Mat<T>& m) { m.zero(); });
  }
};

/// Visits every parameter tensor in a stable order; this order defines the
/// checkpoint manifest and the Adam moment layout.
template <typename T, typename Fn>
void for_each_tensor(ModelParams<T>& p, Fn&& fn) {
  fn("embedding", p.embedding);
  for (std::size_t i = 0; i < p.layers.size(); ++i) {
    auto& l = p.layers[i];
    std::string prefix = "layer" + std::to_string(i) + ".";
    fn(prefix + "wq", l.wq);
    fn(prefix + "wk", l.wk);
    fn(prefix + "wv", l.wv);
    fn(prefix + "wo", l.wo);
    fn(prefix + "w1", l.w1);
    fn(prefix + "b1", l.b1);
    fn(prefix + "w2", l.w2);
    fn(prefix + "b2", l.b2);
    fn(prefix + "ln1_g", l.ln1_g);
    fn(prefix + "ln1_b", l.ln1_b);
    fn(prefix + "ln2_g", l.ln2_g);
    fn(prefix + "ln2_b", l.ln2_b);
  }
  fn("final_norm.g", p.lnf_g);
  fn("final_norm.b", p.lnf_b);
  fn("mlm_bias", p.mlm_bias);
}

template <typename T, typename Fn>
void for_each_tensor(const ModelParams<T>& p, Fn&& fn) {
  for_each_tensor(const_cast<ModelParams<T>&>(p),
                  [&fn](const std::string& name, Mat<T>& m) {
                    fn(name, const_cast<const Mat<T>&>(m));
                  });
}

/// Pairwise traversal (params + grads, params + moments, ...). The two
/// param sets must have identical structure.
template <typename T, typename Fn>
void for_each_tensor_pair(ModelParams<T>& a, ModelParams<T>& b, Fn&& fn) {
  std::vector<Mat<T>*> bs;
  for_each_tensor(b, [&bs](const std::string&, Mat<T>& m) { bs.push_back(&m); });
  std::size_t i = 0;
  for_each_tensor(a, [&](const std::string& name, Mat<T>& m) {
    fn(name, m, *bs[i++]);
  });
}

/// Normal(0, 0.02) weights, unit layer-norm gains, zero biases. The
/// residual output projections (wo, w2) are scaled down by 1/sqrt(2L) so a
/// fresh pre-norm stack injects per-layer updates at embedding scale
/// instead of swamping the residual stream.
template <typename T>
ModelParams<T> init_params(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  ModelParams<T> p = ModelParams<T>::zeros_like(cfg);
  Rng rng(seed);
  auto fill_normal = [&rng](Mat<T>& m, double scale) {
    for (auto& x : m.v) x = static_cast<T>(scale * rng.normal());
  };
  const double base = 0.02;
  const double resid = base / std::sqrt(2.0 * cfg.n_layers);
  fill_normal(p.embedding, base);
  for (auto& l : p.layers) {
    fill_normal(l.wq, base);
    fill_normal(l.wk, base);
    fill_normal(l.wv, base);
    fill_normal(l.wo, resid);
    fill_normal(l.w1, base);
    fill_normal(l.w2, resid);
    std::fill(l.ln1_g.v.begin(), l.ln1_g.v.end(), T(1));
    std::fill(l.ln2_g.v.begin(), l.ln2_g.v.end(), T(1));
  }
  std::fill(p.lnf_g.v.begin(), p.lnf_g.v.end(), T(1));
  return p;
}

template <typename T>
std::size_t param_count(const ModelParams<T>& p) {
  std::size_t n = 0;
  for_each_tensor(p, [&n](const std::string&, const Mat<T>& m) { n += m.size(); });
  return n;
}

}  // namespace txscan::nn
