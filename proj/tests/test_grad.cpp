// Copyright 2026 The txscan Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <vector>

#include "txscan/nn/encoder.hpp"
#include "txscan/rng.hpp"

using namespace txscan;
using nn::Mat;
using nn::ModelConfig;
using nn::ModelParams;

namespace {

ModelConfig tiny_config() {
  ModelConfig cfg;
  cfg.vocab_size = 50;
  cfg.d_model = 16;
  cfg.n_heads = 2;
  cfg.n_layers = 2;
  cfg.d_ff = 32;
  cfg.max_len = 32;
  return cfg;
}

struct GradCheckCase {
  ModelConfig cfg;
  ModelParams<double> params;
  std::vector<nn::TokenId> ids;
  std::vector<nn::TokenId> targets;
  std::vector<int> positions;
};

GradCheckCase make_case(std::uint64_t seed) {
  GradCheckCase c;
  c.cfg = tiny_config();
  c.params = nn::init_params<double>(c.cfg, seed);
  Rng rng(seed + 1);
  const int seq = 12;
  for (int i = 0; i < seq; ++i)
    c.ids.push_back(static_cast<nn::TokenId>(rng.uniform(c.cfg.vocab_size)));
  for (int p : {2, 5, 9}) {
    c.positions.push_back(p);
    c.targets.push_back(static_cast<nn::TokenId>(rng.uniform(c.cfg.vocab_size)));
  }
  return c;
}

double loss_of(const GradCheckCase& c) {
  auto fwd = nn::encoder_forward<double>(c.cfg, c.params, c.ids);
  return nn::mlm_loss(fwd.logits, c.targets, c.positions);
}

/// Central finite differences against the analytic gradient on n_coords
/// randomly chosen parameter coordinates. Returns the max relative error.
double fd_max_rel_error(GradCheckCase& c, int n_coords, std::uint64_t seed,
                        double h = 1e-5) {
  auto analytic =
      nn::backward<double>(c.cfg, c.params, c.ids, c.targets, c.positions);

  std::vector<Mat<double>*> tensors;
  nn::for_each_tensor(c.params, [&](const std::string&, Mat<double>& m) {
    tensors.push_back(&m);
  });
  std::vector<Mat<double>*> grads;
  nn::for_each_tensor(analytic.grads, [&](const std::string&, Mat<double>& m) {
    grads.push_back(&m);
  });

  std::size_t total = 0;
  for (auto* t : tensors) total += t->size();

  Rng rng(seed);
  double worst = 0.0;
  for (int k = 0; k < n_coords; ++k) {
    std::size_t flat = rng.uniform(total);
    std::size_t ti = 0;
    while (flat >= tensors[ti]->size()) {
      flat -= tensors[ti]->size();
      ++ti;
    }
    double& slot = tensors[ti]->v[flat];
    const double keep = slot;
    slot = keep + h;
    const double up = loss_of(c);
    slot = keep - h;
    const double down = loss_of(c);
    slot = keep;

    const double numeric = (up - down) / (2.0 * h);
    const double exact = grads[ti]->v[flat];
    const double denom = std::max({std::fabs(numeric), std::fabs(exact), 1e-8});
    worst = std::max(worst, std::fabs(numeric - exact) / denom);
  }
  return worst;
}

}  // namespace

TEST_CASE("analytic gradients match central finite differences") {
  auto c = make_case(123);
  const double err = fd_max_rel_error(c, 60, 77);
  CHECK(err < 1e-3);
}

TEST_CASE("gradients stay finite on random inputs") {
  auto c = make_case(9);
  auto res = nn::backward<double>(c.cfg, c.params, c.ids, c.targets,
                                  c.positions);
  CHECK(std::isfinite(res.loss));
  nn::for_each_tensor(res.grads, [&](const std::string&, Mat<double>& m) {
    for (double g : m.v) REQUIRE(std::isfinite(g));
  });
}

TEST_CASE("a saturated correct prediction yields near-zero gradients") {
  // rig the model so the target token wins by a huge bias margin
  auto c = make_case(31);
  c.cfg.n_layers = 1;
  c.params = nn::init_params<double>(c.cfg, 31);
  c.positions = {3};
  c.targets = {7};
  c.params.mlm_bias.v[7] = 50.0;  // softmax prob ~ 1 at every position
  auto res = nn::backward<double>(c.cfg, c.params, c.ids, c.targets,
                                  c.positions);
  CHECK(res.loss < 1e-6);
  double norm = 0.0;
  nn::for_each_tensor(res.grads, [&](const std::string&, Mat<double>& m) {
    for (double g : m.v) norm += g * g;
  });
  CHECK(std::sqrt(norm) < 1e-6);
}

TEST_CASE("gradient check with causal attention") {
  auto c = make_case(55);
  c.cfg.attention_mode = nn::AttentionMode::Causal;
  const double err = fd_max_rel_error(c, 40, 19);
  CHECK(err < 1e-3);
}
