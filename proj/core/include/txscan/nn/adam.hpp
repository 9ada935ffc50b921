// Copyright 2026 The txscan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>

#include "txscan/nn/model.hpp"

namespace txscan::nn {

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

/// First/second moment accumulators, same shape family as the parameters.
template <typename T>
struct AdamState {
  ModelParams<T> m, v;
  std::int64_t step = 0;

  static AdamState zeros_like(const ModelConfig& cfg) {
    AdamState s;
    s.m = ModelParams<T>::zeros_like(cfg);
    s.v = ModelParams<T>::zeros_like(cfg);
    return s;
  }
};

/// Bias-corrected Adam on one flat tensor. Decoupled weight decay.
template <typename T>
void adam_step_tensor(Mat<T>& param, const Mat<T>& grad, Mat<T>& m, Mat<T>& v,
                      std::int64_t step, double lr, const AdamHyper& h) {
  if (!param.same_shape(grad) || !param.same_shape(m) || !param.same_shape(v))
    throw ShapeError("adam_step: tensor shapes disagree");
  const double bc1 = 1.0 - std::pow(h.beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(h.beta2, static_cast<double>(step));
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = static_cast<double>(grad.v[i]);
    const double m_new = h.beta1 * m.v[i] + (1.0 - h.beta1) * g;
    const double v_new = h.beta2 * v.v[i] + (1.0 - h.beta2) * g * g;
    m.v[i] = static_cast<T>(m_new);
    v.v[i] = static_cast<T>(v_new);
    const double m_hat = m_new / bc1;
    const double v_hat = v_new / bc2;
    double update = lr * m_hat / (std::sqrt(v_hat) + h.eps);
    if (h.weight_decay != 0.0)
      update += lr * h.weight_decay * static_cast<double>(param.v[i]);
    param.v[i] -= static_cast<T>(update);
  }
}

/// One optimizer step over the whole parameter set; bumps the step counter.
template <typename T>
void adam_step(ModelParams<T>& params, const ModelParams<T>& grads,
               AdamState<T>& state, double lr, const AdamHyper& h = {}) {
  ++state.step;
  std::vector<Mat<T>*> gs, ms, vs;
  for_each_tensor(const_cast<ModelParams<T>&>(grads),
                  [&gs](const std::string&, Mat<T>& t) { gs.push_back(&t); });
  for_each_tensor(state.m,
                  [&ms](const std::string&, Mat<T>& t) { ms.push_back(&t); });
  for_each_tensor(state.v,
                  [&vs](const std::string&, Mat<T>& t) { vs.push_back(&t); });
  std::size_t i = 0;
  for_each_tensor(params, [&](const std::string&, Mat<T>& p) {
    adam_step_tensor(p, *gs[i], *ms[i], *vs[i], state.step, lr, h);
    ++i;
  });
}

/// Linear warmup to base_lr over warmup_steps, then cosine decay to zero at
/// total_steps.
inline double lr_at(std::int64_t step, std::int64_t warmup_steps,
                    std::int64_t total_steps, double base_lr) {
  if (step < 0 || step > total_steps)
    throw RangeError("lr_at: step outside [0, total_steps]");
  if (warmup_steps >= total_steps)
    throw RangeError("lr_at: warmup_steps must be < total_steps");
  if (step < warmup_steps)
    return base_lr * static_cast<double>(step) /
           static_cast<double>(warmup_steps);
  const double progress = static_cast<double>(step - warmup_steps) /
                          static_cast<double>(total_steps - warmup_steps);
  return base_lr * 0.5 * (1.0 + std::cos(3.14159265358979323846 * progress));
}

}  // namespace txscan::nn
