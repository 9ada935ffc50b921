// Copyright 2026 The txscan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "txscan/detector.hpp"
#include "txscan/evalkit.hpp"
#include "txscan/mlm.hpp"
#include "txscan/trace.hpp"

namespace txscan::io {

/// Newline-delimited trace records, one transaction per line.
std::vector<trace::Transaction> read_trace_file(const std::string& path,
                                                int depth_cap =
                                                    trace::kDefaultDepthCap);
void write_trace_file(const std::vector<trace::Transaction>& txs,
                      const std::string& path);

/// Score records: {tx_id, scorer, score, n_masked, n_missed, repeats}.
void write_scores(const std::vector<detect::AnomalyScore>& scores,
                  const std::string& path);
std::vector<detect::AnomalyScore> read_scores(const std::string& path);

/// Metrics log: one record per epoch.
void append_metrics(const mlm::EpochMetrics& metrics, const std::string& path);

/// 64-bit FNV-1a of a file's bytes, for run manifests.
std::uint64_t hash_file(const std::string& path);

struct ManifestInput {
  std::string path;
  std::uint64_t fnv64 = 0;
  std::uint64_t bytes = 0;
};

/// Records what a run consumed and produced; written into the run directory.
void write_manifest(const std::string& path, const std::string& command,
                    std::uint64_t seed,
                    const std::vector<ManifestInput>& inputs,
                    const std::vector<std::string>& outputs);

}  // namespace txscan::io
