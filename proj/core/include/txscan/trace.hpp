// Copyright 2026 The txscan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace txscan::trace {

enum class ValueKind { Address, Number, Text };

struct TraceValue {
  ValueKind kind = ValueKind::Number;
  std::string raw;
};

/// One internal call of a transaction. Children preserve source order.
struct TraceNode {
  std::string call_kind;  // e.g. CALL, DELEGATECALL, invoke
  TraceValue callee;      // Address
  std::vector<TraceValue> inputs;
  std::vector<TraceValue> outputs;
  std::vector<std::string> logs;
  std::vector<TraceNode> children;
};

enum class Label { Benign, Malicious, Unknown };

struct Transaction {
  std::string tx_id;
  std::string application;
  std::int64_t order_key = 0;  // block timestamp
  Label label = Label::Unknown;
  TraceValue sender, receiver;  // Address
  TraceValue value, gas;        // Number
  std::vector<TraceNode> roots;
};

enum class LexKind { Special, Address, Number, Text };

/// Typed pre-token unit produced by flattening. Number text is already
/// hex-normalized when emitted by flatten().
struct Lexeme {
  LexKind kind = LexKind::Special;
  std::string text;

  bool operator==(const Lexeme&) const = default;
};

inline Lexeme special(std::string text) {
  return Lexeme{LexKind::Special, std::move(text)};
}

constexpr int kDefaultDepthCap = 64;

std::string_view label_name(Label l);
Label parse_label(std::string_view s);

/// Maps a raw call-kind string onto the closed special-marker set:
/// [CALL], [DELEGATECALL], [STATICCALL], [INVOKE], else [OTHER_CALL].
std::string call_kind_marker(std::string_view call_kind);

/// Parses one newline-delimited trace record (a JSON document) into a
/// Transaction. Unknown extra fields are ignored. Throws SchemaError for a
/// missing/ill-typed required field and DepthError when `calls` nests
/// deeper than depth_cap.
Transaction parse_transaction(std::string_view record,
                              int depth_cap = kDefaultDepthCap);

/// Serializes back to the trace record format accepted by
/// parse_transaction (used by the synthetic generator).
std::string transaction_to_record(const Transaction& tx);

/// Pre-order DFS flattening. The transaction header (sender, receiver,
/// value, gas) is emitted once before the first root; each node emits
///   [START] <kind marker> <callee> [Ins] {data|address <value>}*
///   [OUTs] {data|address <value>}* <one Text lexeme per log line>
///   <children...> [END]
/// Number values are hex-normalized on emission.
std::vector<Lexeme> flatten(const Transaction& tx);

/// Chronological per-application split: within each application the
/// earliest floor(fraction * n) transactions by (order_key, tx_id) go to
/// train, the rest to test. Throws EmptyDataset.
std::pair<std::vector<Transaction>, std::vector<Transaction>> split_dataset(
    const std::vector<Transaction>& txs, double train_fraction);

}  // namespace txscan::trace
