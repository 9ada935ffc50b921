// Copyright 2026 The txscan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "txscan/detector.hpp"
#include "txscan/tokenizer.hpp"

namespace txscan::baseline {

/// Sequence length as the sole anomaly signal (longer = more anomalous).
detect::AnomalyScore length_score(const tok::EncodedSequence& seq);

/// L1-normalized token-count histogram projected to d_out dimensions by a
/// seeded random +-1/sqrt(d_out) matrix. Columns of the projection matrix
/// are generated deterministically from (seed, token id), so the feature
/// map is fixed per run and independent of evaluation order.
std::vector<double> token_histogram(const tok::EncodedSequence& seq,
                                    const tok::Vocabulary& vocab);
std::vector<double> bow_features(const tok::EncodedSequence& seq,
                                 const tok::Vocabulary& vocab, int d_out,
                                 std::uint64_t seed);

struct GmmParams {
  int k = 1;
  std::vector<double> weights;                // simplex
  std::vector<std::vector<double>> means;     // k x d
  std::vector<std::vector<double>> variances; // k x d, diagonal, >= reg_eps
  double reg_eps = 1e-6;
  std::vector<double> train_log_likelihood;   // per EM iteration
};

/// K = 1: closed-form mean and diagonal variance. K > 1: EM with seeded
/// k-means++ initialization; covariances floored at reg_eps; stops when the
/// log-likelihood gain drops below tol or after max_iters. The training
/// log likelihood never decreases across iterations.
GmmParams fit_gmm(const std::vector<std::vector<double>>& features, int k,
                  std::uint64_t seed, int max_iters = 100, double tol = 1e-7,
                  double reg_eps = 1e-6);

/// Negative log likelihood under the mixture via a stable log-sum-exp.
double gmm_neg_log_likelihood(const GmmParams& params,
                              std::span<const double> x);
detect::AnomalyScore gmm_score(const GmmParams& params,
                               std::span<const double> x,
                               const std::string& tx_id = {});

std::string gmm_to_json(const GmmParams& params);
GmmParams gmm_from_json(const std::string& text);

}  // namespace txscan::baseline
