// Copyright 2026 The txscan Authors
// SPDX-License-Identifier: Apache-2.0

#include "txscan/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <json.hpp>

#include "txscan/errors.hpp"
#include "txscan/rng.hpp"

namespace txscan::baseline {

using nlohmann::json;

detect::AnomalyScore length_score(const tok::EncodedSequence& seq) {
  detect::AnomalyScore out;
  out.tx_id = seq.source_tx_id;
  out.scorer = detect::Scorer::LengthHeuristic;
  out.score = static_cast<double>(seq.n_tokens);
  return out;
}

std::vector<double> token_histogram(const tok::EncodedSequence& seq,
                                    const tok::Vocabulary& vocab) {
  if (seq.ids.empty()) throw EmptySequence("cannot featurize an empty sequence");
  std::vector<double> hist(vocab.size(), 0.0);
  for (tok::TokenId id : seq.ids) {
    if (id < 0 || id >= vocab.size())
      throw UnknownId("token id outside vocabulary: " + std::to_string(id));
    hist[id] += 1.0;
  }
  const double total = static_cast<double>(seq.ids.size());
  for (double& x : hist) x /= total;
  return hist;
}

std::vector<double> bow_features(const tok::EncodedSequence& seq,
                                 const tok::Vocabulary& vocab, int d_out,
                                 std::uint64_t seed) {
  if (d_out < 1) throw RangeError("d_out must be >= 1");
  std::vector<double> hist = token_histogram(seq, vocab);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d_out));
  std::vector<double> out(d_out, 0.0);
  for (std::size_t col = 0; col < hist.size(); ++col) {
    if (hist[col] == 0.0) continue;
    // one deterministic sign column per token id
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(col)));
    for (int r = 0; r < d_out; ++r) {
      const double sign = (rng.next_u64() & 1u) != 0 ? scale : -scale;
      out[r] += sign * hist[col];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Gaussian mixture
// ---------------------------------------------------------------------------

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

/// log N(x; mu, diag(var)) for one component.
double log_gaussian(std::span<const double> x, const std::vector<double>& mean,
                    const std::vector<double>& var) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - mean[i];
    acc += -0.5 * (kLog2Pi + std::log(var[i]) + d * d / var[i]);
  }
  return acc;
}

double log_sum_exp(std::span<const double> xs) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : xs) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - m);
  return m + std::log(acc);
}

/// Seeded k-means++ centers.
std::vector<std::vector<double>> kmeanspp_init(
    const std::vector<std::vector<double>>& xs, int k, Rng& rng) {
  std::vector<std::vector<double>> centers;
  centers.push_back(xs[rng.uniform(xs.size())]);
  std::vector<double> d2(xs.size(), 0.0);
  while (static_cast<int>(centers.size()) < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : centers) {
        double acc = 0.0;
        for (std::size_t j = 0; j < c.size(); ++j) {
          const double d = xs[i][j] - c[j];
          acc += d * d;
        }
        best = std::min(best, acc);
      }
      d2[i] = best;
      total += best;
    }
    std::size_t pick;
    if (total <= 0.0) {
      pick = rng.uniform(xs.size());
    } else {
      double target = rng.next_unit() * total;
      pick = 0;
      for (; pick + 1 < xs.size(); ++pick) {
        target -= d2[pick];
        if (target <= 0.0) break;
      }
    }
    centers.push_back(xs[pick]);
  }
  return centers;
}

}  // namespace

GmmParams fit_gmm(const std::vector<std::vector<double>>& features, int k,
                  std::uint64_t seed, int max_iters, double tol,
                  double reg_eps) {
  if (k < 1) throw RangeError("k must be >= 1");
  if (static_cast<int>(features.size()) < k)
    throw TooFewSamples("need at least k samples to fit k components");
  const std::size_t n = features.size();
  const std::size_t d = features.front().size();
  for (const auto& f : features)
    if (f.size() != d) throw DimensionMismatch("feature dimensions disagree");

  GmmParams params;
  params.k = k;
  params.reg_eps = reg_eps;

  if (k == 1) {
    std::vector<double> mean(d, 0.0), var(d, 0.0);
    for (const auto& f : features)
      for (std::size_t j = 0; j < d; ++j) mean[j] += f[j];
    for (double& m : mean) m /= static_cast<double>(n);
    for (const auto& f : features)
      for (std::size_t j = 0; j < d; ++j) {
        const double diff = f[j] - mean[j];
        var[j] += diff * diff;
      }
    bool all_floored = true;
    for (double& v : var) {
      v /= static_cast<double>(n);
      if (v > reg_eps)
        all_floored = false;
      else
        v = reg_eps;
    }
    if (all_floored && n > 1)
      throw DegenerateData("zero variance in every dimension");
    params.weights = {1.0};
    params.means = {std::move(mean)};
    params.variances = {std::move(var)};
    return params;
  }

  Rng rng(seed);
  params.means = kmeanspp_init(features, k, rng);
  params.weights.assign(k, 1.0 / k);
  params.variances.assign(k, std::vector<double>(d, 0.0));
  {
    // shared initial variance: overall diagonal spread of the data
    std::vector<double> mean(d, 0.0), var(d, reg_eps);
    for (const auto& f : features)
      for (std::size_t j = 0; j < d; ++j) mean[j] += f[j];
    for (double& m : mean) m /= static_cast<double>(n);
    for (const auto& f : features)
      for (std::size_t j = 0; j < d; ++j) {
        const double diff = f[j] - mean[j];
        var[j] += diff * diff / static_cast<double>(n);
      }
    for (auto& v : params.variances) v = var;
  }

  std::vector<std::vector<double>> resp(n, std::vector<double>(k, 0.0));
  double prev_ll = -std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < max_iters; ++iter) {
    // E step
    double ll = 0.0;
    std::vector<double> comp(k);
    for (std::size_t i = 0; i < n; ++i) {
      for (int c = 0; c < k; ++c)
        comp[c] = std::log(params.weights[c]) +
                  log_gaussian(features[i], params.means[c],
                               params.variances[c]);
      const double lse = log_sum_exp(comp);
      ll += lse;
      for (int c = 0; c < k; ++c) resp[i][c] = std::exp(comp[c] - lse);
    }
    params.train_log_likelihood.push_back(ll);

    // M step
    for (int c = 0; c < k; ++c) {
      double nk = 0.0;
      for (std::size_t i = 0; i < n; ++i) nk += resp[i][c];
      if (nk <= 0.0) nk = 1e-12;
      params.weights[c] = nk / static_cast<double>(n);
      std::vector<double> mean(d, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j)
          mean[j] += resp[i][c] * features[i][j];
      for (double& m : mean) m /= nk;
      std::vector<double> var(d, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) {
          const double diff = features[i][j] - mean[j];
          var[j] += resp[i][c] * diff * diff;
        }
      for (double& v : var) v = std::max(v / nk, reg_eps);
      params.means[c] = std::move(mean);
      params.variances[c] = std::move(var);
    }

    if (iter > 0 && ll - prev_ll < tol) break;
    prev_ll = ll;
  }
  return params;
}

double gmm_neg_log_likelihood(const GmmParams& params,
                              std::span<const double> x) {
  if (params.k < 1 || params.means.empty())
    throw RangeError("GMM parameters are empty");
  if (x.size() != params.means.front().size())
    throw DimensionMismatch("query dimension does not match the GMM");
  std::vector<double> comp(params.k);
  for (int c = 0; c < params.k; ++c)
    comp[c] = std::log(params.weights[c]) +
              log_gaussian(x, params.means[c], params.variances[c]);
  return -log_sum_exp(comp);
}

detect::AnomalyScore gmm_score(const GmmParams& params,
                               std::span<const double> x,
                               const std::string& tx_id) {
  detect::AnomalyScore out;
  out.tx_id = tx_id;
  out.scorer = detect::Scorer::Gmm;
  out.score = gmm_neg_log_likelihood(params, x);
  out.detail["k"] = static_cast<double>(params.k);
  return out;
}

std::string gmm_to_json(const GmmParams& params) {
  json doc;
  doc["K"] = params.k;
  doc["weights"] = params.weights;
  doc["means"] = params.means;
  doc["covariances"] = params.variances;
  doc["reg_eps"] = params.reg_eps;
  return doc.dump();
}

GmmParams gmm_from_json(const std::string& text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw IOError("malformed GMM parameter document");
  GmmParams params;
  params.k = doc.at("K").get<int>();
  params.weights = doc.at("weights").get<std::vector<double>>();
  params.means = doc.at("means").get<std::vector<std::vector<double>>>();
  params.variances =
      doc.at("covariances").get<std::vector<std::vector<double>>>();
  params.reg_eps = doc.at("reg_eps").get<double>();
  return params;
}

}  // namespace txscan::baseline
