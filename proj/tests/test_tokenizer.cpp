// Copyright 2026 The txscan Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

#include "txscan/errors.hpp"
#include "txscan/numeral.hpp"
#include "txscan/rng.hpp"
#include "txscan/tokenizer.hpp"

using namespace txscan;
using trace::LexKind;
using trace::Lexeme;

namespace {

tok::Vocabulary toy_vocab(std::vector<std::string> addresses,
                          std::vector<std::string> subwords,
                          int size_cap = 1000) {
  return tok::assemble_vocabulary(tok::default_specials(), std::move(addresses),
                                  std::move(subwords), size_cap);
}

/// Every valid segmentation of word into pieces (first bare, rest ##'d).
void enumerate_segmentations(const std::string& word, std::size_t pos,
                             bool cont, const std::set<std::string>& pieces,
                             std::vector<std::string>& current,
                             std::vector<std::vector<std::string>>& out) {
  if (pos == word.size()) {
    out.push_back(current);
    return;
  }
  for (std::size_t len = 1; len <= word.size() - pos; ++len) {
    std::string cand = (cont ? "##" : "") + word.substr(pos, len);
    if (!pieces.count(cand)) continue;
    current.push_back(cand);
    enumerate_segmentations(word, pos + len, true, pieces, current, out);
    current.pop_back();
  }
}

/// Test-local reimplementation of the longest-match-first rule.
std::vector<std::string> greedy_oracle(const std::string& word,
                                       const std::set<std::string>& pieces) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  bool cont = false;
  while (pos < word.size()) {
    std::string best;
    for (std::size_t len = word.size() - pos; len >= 1; --len) {
      std::string cand = (cont ? "##" : "") + word.substr(pos, len);
      if (pieces.count(cand)) {
        best = cand;
        break;
      }
    }
    REQUIRE(!best.empty());
    out.push_back(best);
    pos += best.size() - (cont ? 2 : 0);
    cont = true;
  }
  return out;
}

}  // namespace

TEST_CASE("count_addresses tallies and merges additively") {
  std::vector<std::vector<Lexeme>> corpus = {
      {{LexKind::Address, "0xaa"}, {LexKind::Address, "0xAA"}},
      {{LexKind::Address, "0xbb"}, {LexKind::Number, "0x01"}},
  };
  auto table = tok::count_addresses(corpus);
  CHECK(table.counts.at("0xaa") == 2);  // case-folded
  CHECK(table.counts.at("0xbb") == 1);

  CHECK(tok::count_addresses({}).counts.empty());

  tok::AddressFrequencyTable left, right;
  left.add(corpus[0]);
  right.add(corpus[1]);
  left.merge(right);
  CHECK(left.counts == table.counts);
}

TEST_CASE("build_address_vocab ranks by count then address") {
  tok::AddressFrequencyTable t;
  t.counts = {{"0xa", 5}, {"0xb", 2}, {"0xc", 1}};
  CHECK(tok::build_address_vocab(t, 2) ==
        std::vector<std::string>{"0xa", "0xb"});

  auto vocab = toy_vocab({"0xa", "0xb"}, {"x"});
  CHECK(vocab.address_id("0xc") == vocab.oov_id());

  tok::AddressFrequencyTable tie;
  tie.counts = {{"0xa", 3}, {"0xb", 3}};
  CHECK(tok::build_address_vocab(tie, 1) == std::vector<std::string>{"0xa"});

  CHECK(tok::kDefaultTopAddresses == 7000);
}

TEST_CASE("normalize_number produces 40 zero-padded hex digits") {
  CHECK(normalize_number("255") ==
        "0x00000000000000000000000000000000000000ff");
  CHECK(normalize_number("0xFF") == normalize_number("255"));
  CHECK(normalize_number("0") ==
        "0x0000000000000000000000000000000000000000");
  CHECK(normalize_number("255").size() == 42);
  CHECK_THROWS_AS(normalize_number("-3"), ParseError);
  CHECK_THROWS_AS(normalize_number("12a"), ParseError);
  CHECK_THROWS_AS(normalize_number(""), ParseError);
}

TEST_CASE("normalize_number overflows to minimal width past 2^160") {
  NormalizeStats stats;
  // 2^160 exactly
  std::string big = "0x1";
  big.append(40, '0');
  auto out = normalize_number(big, &stats);
  CHECK(out == big);
  CHECK(stats.overflow_count == 1);
  // 2^160 - 1 still pads to 40
  std::string max160 = "0x";
  max160.append(40, 'f');
  CHECK(normalize_number(max160, &stats) == max160);
  CHECK(stats.overflow_count == 1);
}

TEST_CASE("normalize_number is idempotent and value-preserving") {
  Rng rng(42);
  for (int i = 0; i < 500; ++i) {
    // random decimal up to ~48 digits (beyond and below 2^160)
    std::string dec;
    const int digits = 1 + static_cast<int>(rng.uniform(48));
    for (int d = 0; d < digits; ++d)
      dec.push_back(static_cast<char>('0' + rng.uniform(10)));
    auto once = normalize_number(dec);
    CHECK(normalize_number(once) == once);
    CHECK(BigUint::parse(once) == BigUint::parse(dec));
  }
}

TEST_CASE("train_wordpiece first merge on the toy corpus is 'ab'") {
  // units: abab -> a ##b ##a ##b ; ab -> a ##b
  // (a,##b) is the only pair occurring at least twice, so it merges first
  std::vector<std::string> fragments = {"abab", "ab"};
  auto table = tok::train_wordpiece(fragments, 10);
  // alphabet {##a, ##b, a} sorted, then merges
  REQUIRE(table.size() >= 4);
  CHECK(table[3] == "ab");
  CHECK(std::count(table.begin(), table.end(), "ab") == 1);
}

TEST_CASE("train_wordpiece on a single letter is just the alphabet") {
  std::vector<std::string> fragments = {"a"};
  CHECK(tok::train_wordpiece(fragments, 5) == std::vector<std::string>{"a"});
}

TEST_CASE("train_wordpiece rejects target below the alphabet size") {
  std::vector<std::string> fragments = {"ab"};
  CHECK_THROWS_AS(tok::train_wordpiece(fragments, 1), CapacityError);
}

TEST_CASE("assemble_vocabulary fills the cap exactly when pieces suffice") {
  std::vector<std::string> specials;
  for (int i = 0; i < 12; ++i) specials.push_back("[S" + std::to_string(i) + "]");
  std::vector<std::string> addresses;
  for (int i = 0; i < 7000; ++i) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "0x%040x", i);
    addresses.emplace_back(buf);
  }
  std::vector<std::string> subwords;
  for (int i = 0; i < 24000; ++i) subwords.push_back("p" + std::to_string(i));

  auto vocab =
      tok::assemble_vocabulary(specials, addresses, subwords, 30000, 7000);
  CHECK(vocab.subwords().size() == 22988);
  CHECK(vocab.size() == 30000);
  // truncation respects merge order
  CHECK(vocab.subwords().front() == "p0");
  CHECK(vocab.subwords().back() == "p22987");
}

TEST_CASE("assemble_vocabulary small case and capacity error") {
  auto vocab = tok::assemble_vocabulary({"[PAD]", "[MASK]"}, {"0xa"}, {"q"}, 10);
  CHECK(vocab.size() == 4);

  std::vector<std::string> specials = {"[PAD]", "[MASK]"};
  CHECK_THROWS_AS(tok::assemble_vocabulary(specials, {"0xa"}, {}, 3),
                  CapacityError);
}

TEST_CASE("vocabulary zones are disjoint and contiguous") {
  auto vocab = toy_vocab({"0xaa", "0xbb"}, {"a", "b", "ab"});
  std::set<tok::TokenId> seen;
  for (tok::TokenId id = 0; id < vocab.size(); ++id) {
    const int zone_hits = static_cast<int>(vocab.is_special(id)) +
                          static_cast<int>(vocab.is_address(id)) +
                          static_cast<int>(vocab.is_subword(id));
    CHECK(zone_hits == 1);
    CHECK(seen.insert(id).second);
  }
  CHECK(vocab.size() ==
        static_cast<tok::TokenId>(vocab.specials().size() +
                                  vocab.addresses().size() +
                                  vocab.subwords().size()));
}

TEST_CASE("encode maps unretained addresses to OOV") {
  auto vocab = toy_vocab({"0xaa"}, {"x"});
  std::vector<Lexeme> lex = {{LexKind::Address, "0xdeadbeef"}};
  auto seq = tok::encode(lex, vocab, 128);
  REQUIRE(seq.ids.size() == 2);  // [CLS] + OOV
  CHECK(seq.ids[0] == vocab.cls_id());
  CHECK(seq.ids[1] == vocab.oov_id());
}

TEST_CASE("encode truncates to max_len keeping the head") {
  auto vocab = toy_vocab({"0xaa"}, {"a", "##a"});
  std::vector<Lexeme> lex = {
      {LexKind::Address, "0xaa"},
      {LexKind::Address, "0xaa"},
      {LexKind::Address, "0xaa"},
      {LexKind::Address, "0xaa"},
  };
  auto full = tok::encode(lex, vocab, 128);
  REQUIRE(full.ids.size() == 5);
  auto cut = tok::encode(lex, vocab, 3);
  CHECK(cut.n_tokens == 3);
  CHECK(std::equal(cut.ids.begin(), cut.ids.end(), full.ids.begin()));
}

TEST_CASE("encode segments greedily by longest match") {
  std::set<std::string> pieces = {"a", "b", "ab", "##a", "##b", "##ab"};
  auto vocab = toy_vocab({}, {"a", "b", "ab", "##a", "##b", "##ab"});

  // all segmentations of "abab" must include the greedy one
  std::vector<std::vector<std::string>> all;
  std::vector<std::string> scratch;
  enumerate_segmentations("abab", 0, false, pieces, scratch, all);
  CHECK(all.size() > 1);

  auto expected_pieces = greedy_oracle("abab", pieces);
  CHECK(expected_pieces == std::vector<std::string>{"ab", "##ab"});
  CHECK(std::find(all.begin(), all.end(), expected_pieces) != all.end());

  std::vector<Lexeme> lex = {{LexKind::Text, "abab"}};
  auto seq = tok::encode(lex, vocab, 128);
  REQUIRE(seq.ids.size() == 1 + expected_pieces.size());
  for (std::size_t i = 0; i < expected_pieces.size(); ++i)
    CHECK(vocab.token_text(seq.ids[i + 1]) == expected_pieces[i]);
}

TEST_CASE("greedy encoding never beats character-level length") {
  Rng rng(7);
  std::vector<std::string> fragments;
  for (int i = 0; i < 60; ++i) {
    std::string f;
    const int len = 1 + static_cast<int>(rng.uniform(10));
    for (int c = 0; c < len; ++c)
      f.push_back(static_cast<char>('a' + rng.uniform(3)));
    fragments.push_back(f);
  }
  auto table = tok::train_wordpiece(fragments, 40);
  auto vocab = toy_vocab({}, table);
  for (const auto& f : fragments) {
    auto ids = tok::segment_fragment(f, vocab);
    CHECK(ids.size() <= f.size());
    for (auto id : ids) CHECK(id != vocab.oov_id());
  }
}

TEST_CASE("unsegmentable characters map to OOV") {
  auto vocab = toy_vocab({}, {"a", "##a"});
  auto ids = tok::segment_fragment("aZa", vocab);
  REQUIRE(ids.size() == 3);
  CHECK(ids[0] != vocab.oov_id());
  CHECK(ids[1] == vocab.oov_id());
  CHECK(ids[2] != vocab.oov_id());
}

TEST_CASE("decode inverts encode on in-vocab lexeme streams") {
  std::vector<std::vector<Lexeme>> corpus;
  std::vector<Lexeme> doc = {
      {LexKind::Number, normalize_number("123456789")},
      {LexKind::Number, normalize_number("42")},
      {LexKind::Text, "Program invoke units"},
  };
  corpus.push_back(doc);
  auto vocab = tok::build_vocabulary(corpus, 10, 400);

  std::vector<Lexeme> stream = {
      trace::special("[START]"),
      trace::special("[CALL]"),
      trace::special("data"),
      {LexKind::Number, normalize_number("42")},
      {LexKind::Text, "invoke"},
      trace::special("[END]"),
  };
  auto seq = tok::encode(stream, vocab, 512);
  auto back = tok::decode(seq.ids, vocab);
  CHECK(back == stream);
}

TEST_CASE("decode maps the OOV id to the [OOV] special") {
  auto vocab = toy_vocab({}, {"a"});
  std::vector<tok::TokenId> ids = {vocab.oov_id()};
  auto lex = tok::decode(ids, vocab);
  REQUIRE(lex.size() == 1);
  CHECK(lex[0] == trace::special("[OOV]"));
}

TEST_CASE("decode rejects ids outside the vocabulary") {
  auto vocab = toy_vocab({}, {"a"});
  std::vector<tok::TokenId> ids = {vocab.size()};
  CHECK_THROWS_AS(tok::decode(ids, vocab), UnknownId);
}

TEST_CASE("encode is deterministic") {
  std::vector<std::vector<Lexeme>> corpus = {
      {{LexKind::Text, "alpha beta gamma"},
       {LexKind::Number, normalize_number("777")}}};
  auto vocab = tok::build_vocabulary(corpus, 5, 300);
  std::vector<Lexeme> lex = corpus[0];
  auto a = tok::encode(lex, vocab, 256);
  auto b = tok::encode(lex, vocab, 256);
  CHECK(a.ids == b.ids);
}

TEST_CASE("vocabulary save/load reproduces identical encodings") {
  std::vector<std::vector<Lexeme>> corpus;
  for (int i = 0; i < 20; ++i) {
    corpus.push_back({{LexKind::Address, "0xaa" + std::to_string(i % 3)},
                      {LexKind::Number, normalize_number(std::to_string(i * 37))},
                      {LexKind::Text, "Program step " + std::to_string(i % 4)}});
  }
  auto vocab = tok::build_vocabulary(corpus, 2, 300);
  const std::string path = "test_vocab.jsonl";
  tok::save_vocabulary(vocab, path);
  auto loaded = tok::load_vocabulary(path);

  CHECK(loaded.size() == vocab.size());
  for (const auto& lexemes : corpus) {
    auto a = tok::encode(lexemes, vocab, 256);
    auto b = tok::encode(lexemes, loaded, 256);
    CHECK(a.ids == b.ids);
  }

  // byte-exact re-save
  tok::save_vocabulary(loaded, path + ".2");
  std::ifstream f1(path, std::ios::binary), f2(path + ".2", std::ios::binary);
  std::string s1((std::istreambuf_iterator<char>(f1)),
                 std::istreambuf_iterator<char>());
  std::string s2((std::istreambuf_iterator<char>(f2)),
                 std::istreambuf_iterator<char>());
  CHECK(s1 == s2);
  std::remove(path.c_str());
  std::remove((path + ".2").c_str());
}
