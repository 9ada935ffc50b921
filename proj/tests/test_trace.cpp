// Copyright 2026 The txscan Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <map>

#include "txscan/errors.hpp"
#include "txscan/synth.hpp"
#include "txscan/trace.hpp"

using namespace txscan;
using trace::LexKind;
using trace::Lexeme;

namespace {

const char* kAddrA = "0x00000000000000000000000000000000000000aa";
const char* kAddrB = "0x00000000000000000000000000000000000000bb";

std::string minimal_record(const std::string& calls) {
  return std::string(R"({"tx_id":"0x01","application":"app","order_key":5,)"
                     R"("label":"benign","from":")") +
         kAddrA + R"(","to":")" + kAddrB +
         R"(","value":"1000","gas":"21000","calls":)" + calls + "}";
}

}  // namespace

TEST_CASE("parse_transaction maps a single call with one data input") {
  auto tx = trace::parse_transaction(minimal_record(
      R"([{"type":"CALL","address":"0x00000000000000000000000000000000000000cc",)"
      R"("input":[{"kind":"data","value":"255"}],"output":[],"logs":[],"calls":[]}])"));
  CHECK(tx.tx_id == "0x01");
  CHECK(tx.order_key == 5);
  CHECK(tx.label == trace::Label::Benign);
  REQUIRE(tx.roots.size() == 1);
  REQUIRE(tx.roots[0].inputs.size() == 1);
  CHECK(tx.roots[0].inputs[0].kind == trace::ValueKind::Number);
  CHECK(tx.roots[0].inputs[0].raw == "255");
  CHECK(tx.roots[0].outputs.empty());
}

TEST_CASE("parse_transaction keeps log lines verbatim") {
  auto tx = trace::parse_transaction(minimal_record(
      R"([{"type":"invoke","address":"0x00000000000000000000000000000000000000cc",)"
      R"("logs":["Program PhoeNi invoke [2]"]}])"));
  REQUIRE(tx.roots.size() == 1);
  REQUIRE(tx.roots[0].logs.size() == 1);
  CHECK(tx.roots[0].logs[0] == "Program PhoeNi invoke [2]");
}

TEST_CASE("parse_transaction rejects a record without tx_id") {
  std::string record =
      std::string(R"({"application":"app","order_key":5,"label":"benign",)"
                  R"("from":")") +
      kAddrA + R"(","to":")" + kAddrB +
      R"(","value":"1","gas":"1","calls":[]})";
  CHECK_THROWS_AS(trace::parse_transaction(record), SchemaError);
}

TEST_CASE("parse_transaction ignores unknown extra fields") {
  auto record = minimal_record("[]");
  record.insert(record.size() - 1, R"(,"extra_field":{"nested":true})");
  CHECK_NOTHROW(trace::parse_transaction(record));
}

TEST_CASE("parse_transaction enforces the recursion cap") {
  std::string calls = "[]";
  for (int i = 0; i < 70; ++i) {
    calls = std::string(
                R"([{"type":"CALL","address":"0x00000000000000000000000000000000000000cc","calls":)") +
            calls + "}]";
  }
  CHECK_THROWS_AS(trace::parse_transaction(minimal_record(calls)), DepthError);
}

TEST_CASE("flatten emits header then marker-delimited calls") {
  auto tx = trace::parse_transaction(minimal_record(
      R"([{"type":"CALL","address":"0x00000000000000000000000000000000000000cc",)"
      R"("input":[{"kind":"data","value":"255"}],)"
      R"("output":[{"kind":"data","value":"7"}],"logs":[],"calls":[]}])"));
  auto lex = trace::flatten(tx);

  const std::string hex255 =
      "0x00000000000000000000000000000000000000ff";
  const std::string hex7 = "0x0000000000000000000000000000000000000007";
  std::vector<Lexeme> expected = {
      {LexKind::Address, kAddrA},
      {LexKind::Address, kAddrB},
      {LexKind::Number, "0x00000000000000000000000000000000000003e8"},
      {LexKind::Number, "0x0000000000000000000000000000000000005208"},
      trace::special("[START]"),
      trace::special("[CALL]"),
      {LexKind::Address, "0x00000000000000000000000000000000000000cc"},
      trace::special("[Ins]"),
      trace::special("data"),
      {LexKind::Number, hex255},
      trace::special("[OUTs]"),
      trace::special("data"),
      {LexKind::Number, hex7},
      trace::special("[END]"),
  };
  CHECK(lex == expected);
}

TEST_CASE("flatten nests child markers inside the parent") {
  auto tx = trace::parse_transaction(minimal_record(
      R"([{"type":"CALL","address":"0x00000000000000000000000000000000000000cc",)"
      R"("calls":[{"type":"DELEGATECALL",)"
      R"("address":"0x00000000000000000000000000000000000000dd"}]}])"));
  auto lex = trace::flatten(tx);

  std::vector<std::string> markers;
  for (const auto& l : lex)
    if (l.kind == LexKind::Special &&
        (l.text == "[START]" || l.text == "[END]" || l.text == "[CALL]" ||
         l.text == "[DELEGATECALL]"))
      markers.push_back(l.text);
  CHECK(markers == std::vector<std::string>{"[START]", "[CALL]", "[START]",
                                            "[DELEGATECALL]", "[END]",
                                            "[END]"});
}

TEST_CASE("flatten of a rootless transaction yields only the header") {
  auto tx = trace::parse_transaction(minimal_record("[]"));
  auto lex = trace::flatten(tx);
  REQUIRE(lex.size() == 4);
  CHECK(lex[0].kind == LexKind::Address);
  CHECK(lex[3].kind == LexKind::Number);
}

TEST_CASE("flatten normalizes call kinds to the closed marker set") {
  CHECK(trace::call_kind_marker("call") == "[CALL]");
  CHECK(trace::call_kind_marker("Invoke") == "[INVOKE]");
  CHECK(trace::call_kind_marker("STATICCALL") == "[STATICCALL]");
  CHECK(trace::call_kind_marker("CREATE2") == "[OTHER_CALL]");
}

TEST_CASE("flatten markers balance like parentheses on synthetic traces") {
  synth::SynthConfig cfg;
  cfg.seed = 11;
  auto txs = synth::gen_benign(cfg, 50);
  for (const auto& tx : txs) {
    auto lex = trace::flatten(tx);
    int depth = 0, starts = 0;
    for (const auto& l : lex) {
      if (l.kind != LexKind::Special) continue;
      if (l.text == "[START]") {
        ++depth;
        ++starts;
      } else if (l.text == "[END]") {
        --depth;
        REQUIRE(depth >= 0);
      }
    }
    CHECK(depth == 0);
    CHECK(starts > 0);
    // deterministic re-flatten
    CHECK(trace::flatten(tx) == lex);
  }
}

TEST_CASE("split_dataset sends the earliest floor(f*n) to train") {
  std::vector<trace::Transaction> txs;
  for (int i = 0; i < 10; ++i) {
    trace::Transaction tx;
    tx.tx_id = "0x" + std::to_string(i);
    tx.application = "app";
    tx.order_key = 100 - i;  // reversed on purpose
    txs.push_back(tx);
  }
  auto [train, test] = trace::split_dataset(txs, 0.8);
  REQUIRE(train.size() == 8);
  REQUIRE(test.size() == 2);
  for (const auto& tx : train) CHECK(tx.order_key <= 98);
  for (const auto& tx : test) CHECK(tx.order_key >= 99);
}

TEST_CASE("split_dataset splits per application") {
  std::vector<trace::Transaction> txs;
  for (int a = 0; a < 2; ++a) {
    for (int i = 0; i < 5; ++i) {
      trace::Transaction tx;
      tx.tx_id = "0x" + std::to_string(a * 5 + i);
      tx.application = a == 0 ? "alpha" : "beta";
      tx.order_key = i;
      txs.push_back(tx);
    }
  }
  auto [train, test] = trace::split_dataset(txs, 0.8);
  CHECK(train.size() == 8);
  CHECK(test.size() == 2);
  std::map<std::string, int> train_per_app;
  for (const auto& tx : train) ++train_per_app[tx.application];
  CHECK(train_per_app["alpha"] == 4);
  CHECK(train_per_app["beta"] == 4);
}

TEST_CASE("split_dataset floor rule on a single transaction") {
  std::vector<trace::Transaction> txs(1);
  txs[0].tx_id = "0x1";
  txs[0].application = "app";
  auto [train, test] = trace::split_dataset(txs, 0.8);
  CHECK(train.empty());
  CHECK(test.size() == 1);
}

TEST_CASE("split_dataset rejects an empty input") {
  CHECK_THROWS_AS(trace::split_dataset({}, 0.8), EmptyDataset);
}

TEST_CASE("split_dataset never leaks future transactions into train") {
  synth::SynthConfig cfg;
  cfg.seed = 3;
  cfg.n_apps = 3;
  auto txs = synth::gen_benign(cfg, 120);
  auto [train, test] = trace::split_dataset(txs, 0.7);
  std::map<std::string, std::int64_t> max_train, min_test;
  for (const auto& tx : train) {
    auto [it, fresh] = max_train.emplace(tx.application, tx.order_key);
    if (!fresh) it->second = std::max(it->second, tx.order_key);
  }
  for (const auto& tx : test) {
    auto [it, fresh] = min_test.emplace(tx.application, tx.order_key);
    if (!fresh) it->second = std::min(it->second, tx.order_key);
  }
  for (const auto& [app, hi] : max_train) {
    if (auto it = min_test.find(app); it != min_test.end())
      CHECK(hi <= it->second);
  }
}

TEST_CASE("trace records round-trip through serialization") {
  synth::SynthConfig cfg;
  cfg.seed = 9;
  auto txs = synth::gen_benign(cfg, 10);
  for (const auto& tx : txs) {
    auto reparsed = trace::parse_transaction(trace::transaction_to_record(tx));
    CHECK(trace::flatten(reparsed) == trace::flatten(tx));
    CHECK(reparsed.tx_id == tx.tx_id);
    CHECK(reparsed.label == tx.label);
  }
}
