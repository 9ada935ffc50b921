// Copyright 2026 The txscan Authors
// SPDX-License-Identifier: Apache-2.0

#include "txscan/evalkit.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "txscan/errors.hpp"

namespace txscan::eval {

using nlohmann::json;

namespace {

std::vector<const detect::AnomalyScore*> sorted_by_rank(
    const std::vector<detect::AnomalyScore>& scores) {
  std::vector<const detect::AnomalyScore*> order;
  order.reserve(scores.size());
  for (const auto& s : scores) order.push_back(&s);
  std::sort(order.begin(), order.end(),
            [](const detect::AnomalyScore* a, const detect::AnomalyScore* b) {
              if (a->score != b->score) return a->score > b->score;
              return a->tx_id < b->tx_id;
            });
  return order;
}

trace::Label require_label(const Labels& labels, const std::string& tx_id) {
  auto it = labels.find(tx_id);
  if (it == labels.end())
    throw RangeError("no ground-truth label for tx_id: " + tx_id);
  if (it->second == trace::Label::Unknown)
    throw RangeError("ground-truth label is unknown for tx_id: " + tx_id);
  return it->second;
}

}  // namespace

Predictions rank_and_label(const std::vector<detect::AnomalyScore>& scores,
                           int k) {
  if (k < 0) throw RangeError("k must be >= 0");
  auto order = sorted_by_rank(scores);
  Predictions out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    auto [it, inserted] = out.emplace(order[i]->tx_id,
                                      i < static_cast<std::size_t>(k));
    if (!inserted)
      throw DuplicateTxId("duplicate tx_id in score list: " + order[i]->tx_id);
  }
  return out;
}

Confusion confusion_metrics(const Predictions& predictions,
                            const Labels& labels) {
  Confusion c;
  for (const auto& [tx_id, anomalous] : predictions) {
    const bool malicious = require_label(labels, tx_id) ==
                           trace::Label::Malicious;
    if (anomalous && malicious)
      ++c.tp;
    else if (anomalous && !malicious)
      ++c.fp;
    else if (!anomalous && malicious)
      ++c.fn;
    else
      ++c.tn;
  }
  c.fpr = (c.fp + c.tn) > 0
              ? static_cast<double>(c.fp) / static_cast<double>(c.fp + c.tn)
              : 0.0;
  if (c.tp + c.fn > 0)
    c.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  c.precision_defined = (c.tp + c.fp) > 0;
  c.precision = c.precision_defined ? static_cast<double>(c.tp) /
                                          static_cast<double>(c.tp + c.fp)
                                    : 0.0;
  return c;
}

DetectionReport report(const std::vector<detect::AnomalyScore>& scores,
                       const Labels& labels, const std::vector<int>& k_list) {
  if (k_list.empty()) throw RangeError("k_list must be non-empty");
  DetectionReport rep;
  if (!scores.empty()) rep.scorer = detect::scorer_name(scores.front().scorer);

  for (const auto& s : scores) {
    if (require_label(labels, s.tx_id) == trace::Label::Malicious)
      ++rep.n_malicious;
    else
      ++rep.n_benign;
  }

  for (int k : k_list) {
    ReportEntry entry;
    entry.k = k;
    entry.c = confusion_metrics(rank_and_label(scores, k), labels);
    rep.entries.push_back(entry);
  }

  // Mann-Whitney AUC with half credit for score ties
  if (rep.n_benign > 0 && rep.n_malicious > 0) {
    double wins = 0.0;
    for (const auto& mal : scores) {
      if (require_label(labels, mal.tx_id) != trace::Label::Malicious)
        continue;
      for (const auto& ben : scores) {
        if (require_label(labels, ben.tx_id) == trace::Label::Malicious)
          continue;
        if (mal.score > ben.score)
          wins += 1.0;
        else if (mal.score == ben.score)
          wins += 0.5;
      }
    }
    rep.auc = wins / (static_cast<double>(rep.n_benign) *
                      static_cast<double>(rep.n_malicious));
  }
  return rep;
}

namespace {

json confusion_to_json(const Confusion& c) {
  json out;
  out["tp"] = c.tp;
  out["fp"] = c.fp;
  out["fn"] = c.fn;
  out["tn"] = c.tn;
  out["fpr"] = c.fpr;
  if (c.recall.has_value())
    out["recall"] = *c.recall;
  else
    out["recall"] = nullptr;
  out["precision"] = c.precision;
  out["precision_defined"] = c.precision_defined;
  return out;
}

}  // namespace

std::string report_to_json(const DetectionReport& rep) {
  json doc;
  doc["scorer"] = rep.scorer;
  doc["n_benign"] = rep.n_benign;
  doc["n_malicious"] = rep.n_malicious;
  doc["auc"] = rep.auc;
  doc["entries"] = json::array();
  for (const auto& e : rep.entries) {
    json entry;
    entry["k"] = e.k;
    entry["metrics"] = confusion_to_json(e.c);
    doc["entries"].push_back(entry);
  }
  return doc.dump(2);
}

DetectionReport report_from_json(const std::string& text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw IOError("malformed report document");
  DetectionReport rep;
  rep.scorer = doc.value("scorer", "");
  rep.n_benign = doc.value("n_benign", 0L);
  rep.n_malicious = doc.value("n_malicious", 0L);
  rep.auc = doc.value("auc", 0.0);
  for (const auto& entry : doc.at("entries")) {
    ReportEntry e;
    e.k = entry.at("k").get<int>();
    const json& m = entry.at("metrics");
    e.c.tp = m.at("tp").get<long>();
    e.c.fp = m.at("fp").get<long>();
    e.c.fn = m.at("fn").get<long>();
    e.c.tn = m.at("tn").get<long>();
    e.c.fpr = m.at("fpr").get<double>();
    if (!m.at("recall").is_null()) e.c.recall = m.at("recall").get<double>();
    e.c.precision = m.at("precision").get<double>();
    e.c.precision_defined = m.at("precision_defined").get<bool>();
    rep.entries.push_back(e);
  }
  return rep;
}

std::string render_table(const std::vector<DetectionReport>& reports) {
  std::ostringstream out;
  if (reports.empty()) return "";

  auto pct = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f%%", v * 100.0);
    return std::string(buf);
  };

  out << "Method";
  for (const auto& e : reports.front().entries)
    out << " | k=" << e.k << ": FPR Recall Precision";
  out << '\n';
  for (const auto& rep : reports) {
    out << rep.scorer;
    for (const auto& e : rep.entries) {
      out << " | " << pct(e.c.fpr) << ' '
          << (e.c.recall.has_value() ? pct(*e.c.recall) : std::string("n/a"))
          << ' ' << pct(e.c.precision);
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace txscan::eval
