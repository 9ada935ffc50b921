// Copyright 2026 The txscan Authors
// SPDX-License-Identifier: Apache-2.0

#include "txscan/trace.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

#include <json.hpp>

#include "txscan/errors.hpp"
#include "txscan/numeral.hpp"

namespace txscan::trace {

using nlohmann::json;

std::string_view label_name(Label l) {
  switch (l) {
    case Label::Benign:
      return "benign";
    case Label::Malicious:
      return "malicious";
    case Label::Unknown:
      return "unknown";
  }
  return "unknown";
}

Label parse_label(std::string_view s) {
  if (s == "benign") return Label::Benign;
  if (s == "malicious") return Label::Malicious;
  if (s == "unknown") return Label::Unknown;
  throw SchemaError("unknown label value: " + std::string(s));
}

std::string call_kind_marker(std::string_view call_kind) {
  std::string upper(call_kind);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  if (upper == "CALL") return "[CALL]";
  if (upper == "DELEGATECALL") return "[DELEGATECALL]";
  if (upper == "STATICCALL") return "[STATICCALL]";
  if (upper == "INVOKE") return "[INVOKE]";
  return "[OTHER_CALL]";
}

namespace {

const json& require_field(const json& doc, const char* name) {
  auto it = doc.find(name);
  if (it == doc.end())
    throw SchemaError(std::string("missing required field: ") + name);
  return *it;
}

std::string require_string(const json& doc, const char* name) {
  const json& v = require_field(doc, name);
  if (!v.is_string())
    throw SchemaError(std::string("field is not a string: ") + name);
  return v.get<std::string>();
}

TraceValue parse_address_value(const std::string& raw, const char* where) {
  if (!is_hex_address(raw))
    throw SchemaError(std::string(where) + " is not a hex address: " + raw);
  return TraceValue{ValueKind::Address, raw};
}

TraceValue parse_number_value(const std::string& raw, const char* where) {
  if (!is_numeral(raw))
    throw SchemaError(std::string(where) + " is not a numeral: " + raw);
  return TraceValue{ValueKind::Number, raw};
}

std::vector<TraceValue> parse_arg_list(const json& doc, const char* name) {
  std::vector<TraceValue> out;
  auto it = doc.find(name);
  if (it == doc.end()) return out;  // optional, defaults to empty
  if (!it->is_array())
    throw SchemaError(std::string(name) + " is not an array");
  for (const json& arg : *it) {
    if (!arg.is_object()) throw SchemaError("argument is not an object");
    std::string kind = require_string(arg, "kind");
    std::string value = require_string(arg, "value");
    if (kind == "address")
      out.push_back(parse_address_value(value, "argument"));
    else if (kind == "data")
      out.push_back(parse_number_value(value, "argument"));
    else
      throw SchemaError("unknown argument kind: " + kind);
  }
  return out;
}

TraceNode parse_call(const json& doc, int depth, int depth_cap) {
  if (depth > depth_cap) throw DepthError("call nesting exceeds depth cap");
  if (!doc.is_object()) throw SchemaError("call is not an object");
  TraceNode node;
  node.call_kind = require_string(doc, "type");
  node.callee = parse_address_value(require_string(doc, "address"), "callee");
  node.inputs = parse_arg_list(doc, "input");
  node.outputs = parse_arg_list(doc, "output");
  if (auto it = doc.find("logs"); it != doc.end()) {
    if (!it->is_array()) throw SchemaError("logs is not an array");
    for (const json& line : *it) {
      if (!line.is_string()) throw SchemaError("log line is not a string");
      node.logs.push_back(line.get<std::string>());
    }
  }
  if (auto it = doc.find("calls"); it != doc.end()) {
    if (!it->is_array()) throw SchemaError("calls is not an array");
    for (const json& sub : *it)
      node.children.push_back(parse_call(sub, depth + 1, depth_cap));
  }
  return node;
}

}  // namespace

Transaction parse_transaction(std::string_view record, int depth_cap) {
  json doc = json::parse(record, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object())
    throw SchemaError("record is not a JSON object");

  Transaction tx;
  tx.tx_id = require_string(doc, "tx_id");
  tx.application = require_string(doc, "application");
  const json& ok = require_field(doc, "order_key");
  if (!ok.is_number_integer())
    throw SchemaError("order_key is not an integer");
  tx.order_key = ok.get<std::int64_t>();
  if (tx.order_key < 0) throw SchemaError("order_key is negative");
  tx.label = parse_label(require_string(doc, "label"));
  tx.sender = parse_address_value(require_string(doc, "from"), "from");
  tx.receiver = parse_address_value(require_string(doc, "to"), "to");
  tx.value = parse_number_value(require_string(doc, "value"), "value");
  tx.gas = parse_number_value(require_string(doc, "gas"), "gas");
  if (auto it = doc.find("calls"); it != doc.end()) {
    if (!it->is_array()) throw SchemaError("calls is not an array");
    for (const json& call : *it)
      tx.roots.push_back(parse_call(call, 1, depth_cap));
  }
  return tx;
}

namespace {

json value_to_json(const TraceValue& v) {
  json out;
  out["kind"] = v.kind == ValueKind::Address ? "address" : "data";
  out["value"] = v.raw;
  return out;
}

json call_to_json(const TraceNode& node) {
  json out;
  out["type"] = node.call_kind;
  out["address"] = node.callee.raw;
  out["input"] = json::array();
  for (const auto& v : node.inputs) out["input"].push_back(value_to_json(v));
  out["output"] = json::array();
  for (const auto& v : node.outputs) out["output"].push_back(value_to_json(v));
  out["logs"] = node.logs;
  out["calls"] = json::array();
  for (const auto& child : node.children)
    out["calls"].push_back(call_to_json(child));
  return out;
}

void flatten_node(const TraceNode& node, std::vector<Lexeme>& out) {
  out.push_back(special("[START]"));
  out.push_back(special(call_kind_marker(node.call_kind)));
  out.push_back(Lexeme{LexKind::Address, node.callee.raw});
  out.push_back(special("[Ins]"));
  for (const auto& arg : node.inputs) {
    if (arg.kind == ValueKind::Address) {
      out.push_back(special("address"));
      out.push_back(Lexeme{LexKind::Address, arg.raw});
    } else {
      out.push_back(special("data"));
      out.push_back(Lexeme{LexKind::Number, normalize_number(arg.raw)});
    }
  }
  out.push_back(special("[OUTs]"));
  for (const auto& arg : node.outputs) {
    if (arg.kind == ValueKind::Address) {
      out.push_back(special("address"));
      out.push_back(Lexeme{LexKind::Address, arg.raw});
    } else {
      out.push_back(special("data"));
      out.push_back(Lexeme{LexKind::Number, normalize_number(arg.raw)});
    }
  }
  for (const auto& line : node.logs)
    out.push_back(Lexeme{LexKind::Text, line});
  for (const auto& child : node.children) flatten_node(child, out);
  out.push_back(special("[END]"));
}

}  // namespace

std::string transaction_to_record(const Transaction& tx) {
  json doc;
  doc["tx_id"] = tx.tx_id;
  doc["application"] = tx.application;
  doc["order_key"] = tx.order_key;
  doc["label"] = std::string(label_name(tx.label));
  doc["from"] = tx.sender.raw;
  doc["to"] = tx.receiver.raw;
  doc["value"] = tx.value.raw;
  doc["gas"] = tx.gas.raw;
  doc["calls"] = json::array();
  for (const auto& root : tx.roots) doc["calls"].push_back(call_to_json(root));
  return doc.dump();
}

std::vector<Lexeme> flatten(const Transaction& tx) {
  std::vector<Lexeme> out;
  out.push_back(Lexeme{LexKind::Address, tx.sender.raw});
  out.push_back(Lexeme{LexKind::Address, tx.receiver.raw});
  out.push_back(Lexeme{LexKind::Number, normalize_number(tx.value.raw)});
  out.push_back(Lexeme{LexKind::Number, normalize_number(tx.gas.raw)});
  for (const auto& root : tx.roots) flatten_node(root, out);
  return out;
}

std::pair<std::vector<Transaction>, std::vector<Transaction>> split_dataset(
    const std::vector<Transaction>& txs, double train_fraction) {
  if (txs.empty()) throw EmptyDataset("no transactions to split");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw RangeError("train_fraction must lie in (0, 1)");

  std::map<std::string, std::vector<const Transaction*>> by_app;
  for (const auto& tx : txs) by_app[tx.application].push_back(&tx);

  std::vector<Transaction> train, test;
  for (auto& [app, list] : by_app) {
    std::sort(list.begin(), list.end(),
              [](const Transaction* a, const Transaction* b) {
                if (a->order_key != b->order_key)
                  return a->order_key < b->order_key;
                return a->tx_id < b->tx_id;
              });
    // nudge before flooring so fractions like 0.7 * 10 do not land on
    // 6.999999... and lose a transaction
    std::size_t n_train = static_cast<std::size_t>(std::floor(
        train_fraction * static_cast<double>(list.size()) + 1e-9));
    for (std::size_t i = 0; i < list.size(); ++i)
      (i < n_train ? train : test).push_back(*list[i]);
  }
  return {std::move(train), std::move(test)};
}

}  // namespace txscan::trace
