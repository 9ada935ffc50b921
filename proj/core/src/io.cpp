// Copyright 2026 The txscan Authors
// SPDX-License-Identifier: Apache-2.0

#include "txscan/io.hpp"

#include <fstream>

#include <json.hpp>

#include "txscan/errors.hpp"
#include "txscan/rng.hpp"

namespace txscan::io {

using nlohmann::json;

std::vector<trace::Transaction> read_trace_file(const std::string& path,
                                                int depth_cap) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IOError("cannot open trace file: " + path);
  std::vector<trace::Transaction> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(trace::parse_transaction(line, depth_cap));
    } catch (const Error& e) {
      throw SchemaError(path + ":" + std::to_string(line_no) + ": " +
                        e.what());
    }
  }
  return out;
}

void write_trace_file(const std::vector<trace::Transaction>& txs,
                      const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IOError("cannot open trace file for write: " + path);
  for (const auto& tx : txs) out << trace::transaction_to_record(tx) << '\n';
  if (!out) throw IOError("failed writing trace file: " + path);
}

void write_scores(const std::vector<detect::AnomalyScore>& scores,
                  const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IOError("cannot open score file for write: " + path);
  for (const auto& s : scores) {
    json rec;
    rec["tx_id"] = s.tx_id;
    rec["scorer"] = detect::scorer_name(s.scorer);
    rec["score"] = s.score;
    auto detail = [&s](const char* key) {
      auto it = s.detail.find(key);
      return it == s.detail.end() ? 0.0 : it->second;
    };
    rec["n_masked"] = static_cast<std::int64_t>(detail("n_masked"));
    rec["n_missed"] = static_cast<std::int64_t>(detail("n_missed"));
    rec["repeats"] = static_cast<std::int64_t>(detail("repeats"));
    out << rec.dump() << '\n';
  }
  if (!out) throw IOError("failed writing score file: " + path);
}

std::vector<detect::AnomalyScore> read_scores(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IOError("cannot open score file: " + path);
  std::vector<detect::AnomalyScore> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded()) throw IOError("malformed score record in " + path);
    detect::AnomalyScore s;
    s.tx_id = rec.at("tx_id").get<std::string>();
    s.scorer = detect::parse_scorer(rec.at("scorer").get<std::string>());
    s.score = rec.at("score").get<double>();
    s.detail["n_masked"] = rec.value("n_masked", 0.0);
    s.detail["n_missed"] = rec.value("n_missed", 0.0);
    s.detail["repeats"] = rec.value("repeats", 0.0);
    out.push_back(std::move(s));
  }
  return out;
}

void append_metrics(const mlm::EpochMetrics& metrics,
                    const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw IOError("cannot open metrics log: " + path);
  json rec;
  rec["epoch"] = metrics.epoch;
  rec["mean_masked_ce"] = metrics.mean_masked_ce;
  rec["lr"] = metrics.lr;
  rec["wall_time_s"] = metrics.wall_time_s;
  out << rec.dump() << '\n';
}

std::uint64_t hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IOError("cannot open file for hashing: " + path);
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ull;
    }
    if (got < static_cast<std::streamsize>(sizeof(buf))) break;
  }
  return h;
}

void write_manifest(const std::string& path, const std::string& command,
                    std::uint64_t seed,
                    const std::vector<ManifestInput>& inputs,
                    const std::vector<std::string>& outputs) {
  json doc;
  doc["tool"] = "txscan";
  doc["version"] = "0.1.0";
  doc["command"] = command;
  doc["seed"] = seed;
  doc["inputs"] = json::array();
  for (const auto& i : inputs) {
    json rec;
    rec["path"] = i.path;
    rec["fnv64"] = i.fnv64;
    rec["bytes"] = i.bytes;
    doc["inputs"].push_back(rec);
  }
  doc["outputs"] = outputs;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IOError("cannot write manifest: " + path);
  out << doc.dump(2) << '\n';
}

}  // namespace txscan::io
