// Copyright 2026 The txscan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "txscan/trace.hpp"

namespace txscan::synth {

enum class AnomalyKind {
  ShuffledCalls,
  ForeignAddressBurst,
  ValueOutlier,
  TruncatedStructure,
};

std::string anomaly_kind_name(AnomalyKind kind);
AnomalyKind parse_anomaly_kind(const std::string& name);

struct SynthConfig {
  int n_apps = 3;
  int addresses_per_app = 12;
  int call_templates_per_app = 6;
  int depth_max = 3;
  // log10 bounds for transaction-level fields; data arguments use
  // per-template magnitudes inside [arg_log10_min, arg_log10_max]
  double value_log10_min = 5.0;
  double value_log10_max = 8.0;
  double gas_log10_min = 4.0;
  double gas_log10_max = 6.0;
  double arg_log10_min = 3.0;
  double arg_log10_max = 7.0;
  std::vector<std::string> log_vocab = {
      "Program {app} invoke [{n}]",
      "Program {app} consumed {n} compute units",
      "Program {app} success",
      "Transfer completed",
  };
  std::vector<AnomalyKind> anomaly_kinds = {
      AnomalyKind::ShuffledCalls,
      AnomalyKind::ForeignAddressBurst,
      AnomalyKind::ValueOutlier,
      AnomalyKind::TruncatedStructure,
  };
  std::uint64_t seed = 0;
};

/// Per-application identity derived deterministically from the config seed.
struct AppProfile {
  std::string name;
  std::vector<std::string> addresses;
};

std::vector<AppProfile> app_profiles(const SynthConfig& cfg);

/// n benign transactions from app-specific probabilistic call templates,
/// with strictly increasing order keys starting at order_base.
std::vector<trace::Transaction> gen_benign(
    const SynthConfig& cfg, int n, std::int64_t order_base = 1600000000);

/// Structural/numerical perturbation of a benign transaction; the result
/// carries a fresh tx_id and a Malicious label, and still parses and
/// flattens. Throws NotApplicable when the transaction lacks the structure
/// the kind needs (e.g. ShuffledCalls on a single-call transaction).
trace::Transaction inject_anomaly(const trace::Transaction& tx,
                                  AnomalyKind kind, std::uint64_t seed);

/// count anomalies drawn from source transactions, cycling through kinds
/// and skipping donors a kind does not apply to. Order keys are rebased to
/// order_base so anomalies sort after the benign population.
std::vector<trace::Transaction> inject_anomalies(
    std::span<const trace::Transaction> source,
    const std::vector<AnomalyKind>& kinds, int count, std::uint64_t seed,
    std::int64_t order_base);

}  // namespace txscan::synth
