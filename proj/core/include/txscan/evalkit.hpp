// Copyright 2026 The txscan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "txscan/detector.hpp"
#include "txscan/trace.hpp"

namespace txscan::eval {

/// tx_id -> predicted anomalous?
using Predictions = std::map<std::string, bool>;
using Labels = std::map<std::string, trace::Label>;

struct Confusion {
  long tp = 0, fp = 0, fn = 0, tn = 0;
  double fpr = 0.0;
  std::optional<double> recall;  // null when there are no positives
  double precision = 0.0;
  bool precision_defined = false;  // false when tp + fp == 0
};

struct ReportEntry {
  int k = 0;
  Confusion c;
};

struct DetectionReport {
  std::string scorer;
  std::vector<ReportEntry> entries;
  long n_benign = 0;
  long n_malicious = 0;
  double auc = 0.0;  // probability a random malicious outranks a random benign
};

/// Sorts descending by score, ties by ascending tx_id; the first
/// min(k, n) transactions are labeled anomalous. Throws DuplicateTxId.
Predictions rank_and_label(const std::vector<detect::AnomalyScore>& scores,
                           int k);

/// recall = tp/(tp+fn) (null when tp+fn = 0); precision = tp/(tp+fp)
/// (0 + flag when tp+fp = 0); fpr = fp/(fp+tn). Every prediction must have
/// a benign/malicious ground-truth label.
Confusion confusion_metrics(const Predictions& predictions,
                            const Labels& labels);

/// One confusion entry per k plus the ranking AUC (ties count one half).
DetectionReport report(const std::vector<detect::AnomalyScore>& scores,
                       const Labels& labels, const std::vector<int>& k_list);

std::string report_to_json(const DetectionReport& rep);
DetectionReport report_from_json(const std::string& text);

/// Plain-text comparison table: one row per scorer, FPR/Recall/Precision
/// columns grouped per k.
std::string render_table(const std::vector<DetectionReport>& reports);

}  // namespace txscan::eval
