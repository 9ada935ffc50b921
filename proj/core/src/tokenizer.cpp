// Copyright 2026 The txscan Authors
// SPDX-License-Identifier: Apache-2.0

#include "txscan/tokenizer.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include <json.hpp>

#include "txscan/errors.hpp"

namespace txscan::tok {

using nlohmann::json;

const std::vector<std::string>& default_specials() {
  static const std::vector<std::string> specials = {
      "[PAD]",        "[MASK]",       "[OOV]",    "[CLS]",
      "[START]",      "[END]",        "[CALL]",   "[DELEGATECALL]",
      "[STATICCALL]", "[INVOKE]",     "[OTHER_CALL]", "[Ins]",
      "[OUTs]",       "data",         "address"};
  return specials;
}

namespace {

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i])))
      ++i;
    std::size_t start = i;
    while (i < text.size() &&
           !std::isspace(static_cast<unsigned char>(text[i])))
      ++i;
    if (i > start) words.emplace_back(text.substr(start, i - start));
  }
  return words;
}

}  // namespace

void AddressFrequencyTable::add(std::span<const trace::Lexeme> lexemes) {
  for (const auto& lex : lexemes)
    if (lex.kind == trace::LexKind::Address) ++counts[to_lower(lex.text)];
}

void AddressFrequencyTable::merge(const AddressFrequencyTable& other) {
  for (const auto& [addr, n] : other.counts) counts[addr] += n;
}

AddressFrequencyTable count_addresses(
    std::span<const std::vector<trace::Lexeme>> corpus) {
  AddressFrequencyTable table;
  for (const auto& lexemes : corpus) table.add(lexemes);
  return table;
}

std::vector<std::string> build_address_vocab(const AddressFrequencyTable& freqs,
                                             int top_n) {
  if (top_n < 0) throw RangeError("top_n must be >= 0");
  std::vector<std::pair<std::string, std::uint64_t>> ranked(
      freqs.counts.begin(), freqs.counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (ranked.size() > static_cast<std::size_t>(top_n)) ranked.resize(top_n);
  std::vector<std::string> out;
  out.reserve(ranked.size());
  for (auto& [addr, n] : ranked) out.push_back(std::move(addr));
  return out;
}

// ---------------------------------------------------------------------------
// WordPiece training
// ---------------------------------------------------------------------------

namespace {

struct WordEntry {
  std::vector<int> units;  // indices into the unit table
  std::uint64_t count = 0;
};

struct PairKey {
  int left, right;
  bool operator==(const PairKey&) const = default;
};

struct PairKeyHash {
  std::size_t operator()(const PairKey& k) const {
    return std::hash<std::uint64_t>()(
        (static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.left)) << 32) |
        static_cast<std::uint32_t>(k.right));
  }
};

}  // namespace

std::vector<std::string> train_wordpiece(std::span<const std::string> fragments,
                                         int target_pieces) {
  // dedupe fragments; merge decisions depend only on multiplicities
  std::map<std::string, std::uint64_t> word_counts;
  for (const auto& f : fragments)
    if (!f.empty()) ++word_counts[f];

  std::vector<std::string> unit_text;  // index -> piece text
  std::map<std::string, int> unit_ids;
  auto intern = [&](const std::string& s) {
    auto [it, inserted] = unit_ids.emplace(s, static_cast<int>(unit_text.size()));
    if (inserted) unit_text.push_back(s);
    return it->second;
  };

  // split every word into single-character units, first bare, rest ##'d
  std::vector<WordEntry> words;
  words.reserve(word_counts.size());
  for (const auto& [word, count] : word_counts) {
    WordEntry entry;
    entry.count = count;
    bool first = true;
    for (char c : word) {
      std::string piece = first ? std::string(1, c) : "##" + std::string(1, c);
      entry.units.push_back(intern(piece));
      first = false;
    }
    words.push_back(std::move(entry));
  }

  std::vector<std::string> alphabet = unit_text;
  std::sort(alphabet.begin(), alphabet.end());
  if (target_pieces < static_cast<int>(alphabet.size()))
    throw CapacityError("target_pieces smaller than the fragment alphabet");

  std::vector<std::string> merges;
  int total_pieces = static_cast<int>(alphabet.size());

  while (total_pieces < target_pieces) {
    // occurrence count per unit and per adjacent pair, weighted by word count
    std::vector<std::uint64_t> unit_counts(unit_text.size(), 0);
    std::unordered_map<PairKey, std::uint64_t, PairKeyHash> pair_counts;
    for (const auto& w : words) {
      for (std::size_t i = 0; i < w.units.size(); ++i) {
        unit_counts[w.units[i]] += w.count;
        if (i + 1 < w.units.size())
          pair_counts[PairKey{w.units[i], w.units[i + 1]}] += w.count;
      }
    }

    // best score = pair / (left * right), compared exactly via
    // cross-multiplication; ties by ascending (left, right) text
    bool found = false;
    PairKey best{0, 0};
    std::uint64_t best_pair = 0, best_den_l = 0, best_den_r = 0;
    for (const auto& [key, count] : pair_counts) {
      if (count < 2) continue;
      std::uint64_t dl = unit_counts[key.left];
      std::uint64_t dr = unit_counts[key.right];
      bool better;
      if (!found) {
        better = true;
      } else {
        // count/(dl*dr) vs best_pair/(best_den_l*best_den_r)
        unsigned __int128 lhs = static_cast<unsigned __int128>(count) *
                                best_den_l * best_den_r;
        unsigned __int128 rhs = static_cast<unsigned __int128>(best_pair) *
                                dl * dr;
        if (lhs != rhs) {
          better = lhs > rhs;
        } else {
          auto tie = [&](const PairKey& a, const PairKey& b) {
            if (unit_text[a.left] != unit_text[b.left])
              return unit_text[a.left] < unit_text[b.left];
            return unit_text[a.right] < unit_text[b.right];
          };
          better = tie(key, best);
        }
      }
      if (better) {
        found = true;
        best = key;
        best_pair = count;
        best_den_l = dl;
        best_den_r = dr;
      }
    }
    if (!found) break;  // no pair occurs at least twice

    // right element of an adjacent pair is always a continuation piece
    const std::string& right = unit_text[best.right];
    std::string merged_text = unit_text[best.left] + right.substr(2);
    int merged = intern(merged_text);
    merges.push_back(merged_text);
    ++total_pieces;

    for (auto& w : words) {
      std::vector<int>& u = w.units;
      std::size_t out = 0;
      for (std::size_t i = 0; i < u.size(); ++i) {
        if (i + 1 < u.size() && u[i] == best.left && u[i + 1] == best.right) {
          u[out++] = merged;
          ++i;
        } else {
          u[out++] = u[i];
        }
      }
      u.resize(out);
    }
  }

  std::vector<std::string> table = alphabet;
  table.insert(table.end(), merges.begin(), merges.end());
  return table;
}

// ---------------------------------------------------------------------------
// Vocabulary assembly and lookup
// ---------------------------------------------------------------------------

Vocabulary assemble_vocabulary(std::vector<std::string> specials,
                               std::vector<std::string> addresses,
                               std::vector<std::string> subwords, int size_cap,
                               int top_n_addresses) {
  const int reserved = static_cast<int>(specials.size() + addresses.size());
  if (reserved >= size_cap)
    throw CapacityError("specials and addresses leave no room for subwords");

  const int subword_room = size_cap - reserved;
  if (static_cast<int>(subwords.size()) > subword_room)
    subwords.resize(subword_room);  // truncate by merge order

  Vocabulary v;
  v.size_cap_ = size_cap;
  v.top_n_addresses_ = top_n_addresses;
  v.specials_ = std::move(specials);
  v.addresses_ = std::move(addresses);
  v.subwords_ = std::move(subwords);

  TokenId next = 0;
  for (const auto& s : v.specials_) {
    v.special_ids_.emplace(s, next);
    v.id_to_token_.push_back(s);
    ++next;
  }
  v.address_begin_ = next;
  for (const auto& a : v.addresses_) {
    v.address_ids_.emplace(to_lower(a), next);
    v.id_to_token_.push_back(a);
    ++next;
  }
  v.subword_begin_ = next;
  for (const auto& s : v.subwords_) {
    v.subword_ids_.emplace(s, next);
    v.id_to_token_.push_back(s);
    int chars = static_cast<int>(s.starts_with("##") ? s.size() - 2 : s.size());
    v.max_piece_chars_ = std::max(v.max_piece_chars_, chars);
    ++next;
  }

  auto find_special = [&](const char* name) -> TokenId {
    auto it = v.special_ids_.find(name);
    return it == v.special_ids_.end() ? -1 : it->second;
  };
  v.pad_id_ = find_special("[PAD]");
  v.mask_id_ = find_special("[MASK]");
  v.oov_id_ = find_special("[OOV]");
  v.cls_id_ = find_special("[CLS]");
  return v;
}

TokenId Vocabulary::special_id(std::string_view token) const {
  auto it = special_ids_.find(std::string(token));
  if (it == special_ids_.end())
    throw UnknownId("unknown special token: " + std::string(token));
  return it->second;
}

TokenId Vocabulary::address_id(std::string_view address) const {
  auto it = address_ids_.find(to_lower(address));
  return it == address_ids_.end() ? oov_id_ : it->second;
}

TokenId Vocabulary::subword_id(std::string_view piece) const {
  auto it = subword_ids_.find(std::string(piece));
  return it == subword_ids_.end() ? -1 : it->second;
}

const std::string& Vocabulary::token_text(TokenId id) const {
  if (id < 0 || id >= size())
    throw UnknownId("token id out of range: " + std::to_string(id));
  return id_to_token_[id];
}

// ---------------------------------------------------------------------------
// Encoding / decoding
// ---------------------------------------------------------------------------

std::vector<TokenId> segment_fragment(std::string_view fragment,
                                      const Vocabulary& vocab) {
  std::vector<TokenId> out;
  std::size_t pos = 0;
  bool continuation = false;
  while (pos < fragment.size()) {
    std::size_t best_len = 0;
    TokenId best_id = -1;
    std::string candidate = continuation ? "##" : "";
    const std::size_t prefix = candidate.size();
    const std::size_t max_len =
        std::min(fragment.size() - pos,
                 static_cast<std::size_t>(std::max(1, vocab.max_piece_chars())));
    for (std::size_t len = 1; len <= max_len; ++len) {
      candidate.resize(prefix + len);
      std::copy_n(fragment.begin() + pos, len, candidate.begin() + prefix);
      TokenId id = vocab.subword_id(candidate);
      if (id >= 0) {
        best_len = len;
        best_id = id;
      }
    }
    if (best_id < 0) {
      out.push_back(vocab.oov_id());  // unsegmentable character
      pos += 1;
    } else {
      out.push_back(best_id);
      pos += best_len;
    }
    continuation = true;
  }
  return out;
}

EncodedSequence encode(std::span<const trace::Lexeme> lexemes,
                       const Vocabulary& vocab, int max_len,
                       std::string source_tx_id) {
  EncodedSequence seq;
  seq.source_tx_id = std::move(source_tx_id);
  seq.ids.push_back(vocab.cls_id());
  for (const auto& lex : lexemes) {
    switch (lex.kind) {
      case trace::LexKind::Special:
        seq.ids.push_back(vocab.special_id(lex.text));
        break;
      case trace::LexKind::Address:
        seq.ids.push_back(vocab.address_id(lex.text));
        break;
      case trace::LexKind::Number: {
        auto pieces = segment_fragment(lex.text, vocab);
        seq.ids.insert(seq.ids.end(), pieces.begin(), pieces.end());
        break;
      }
      case trace::LexKind::Text:
        for (const auto& word : split_words(lex.text)) {
          auto pieces = segment_fragment(word, vocab);
          seq.ids.insert(seq.ids.end(), pieces.begin(), pieces.end());
        }
        break;
    }
  }
  if (static_cast<int>(seq.ids.size()) > max_len) seq.ids.resize(max_len);
  seq.n_tokens = static_cast<std::int64_t>(seq.ids.size());
  return seq;
}

std::vector<trace::Lexeme> decode(std::span<const TokenId> ids,
                                  const Vocabulary& vocab) {
  std::vector<trace::Lexeme> out;
  std::string fragment;

  auto hex_shaped = [](const std::string& s) {
    if (s.size() < 3 || s[0] != '0' || s[1] != 'x') return false;
    return std::all_of(s.begin() + 2, s.end(), [](unsigned char c) {
      return std::isxdigit(c) && !std::isupper(c);
    });
  };
  auto flush = [&] {
    if (fragment.empty()) return;
    trace::LexKind kind =
        hex_shaped(fragment) ? trace::LexKind::Number : trace::LexKind::Text;
    out.push_back(trace::Lexeme{kind, fragment});
    fragment.clear();
  };

  std::size_t begin = 0, end = ids.size();
  if (begin < end && ids[begin] == vocab.cls_id()) ++begin;  // encode framing
  while (end > begin && ids[end - 1] == vocab.pad_id()) --end;

  for (std::size_t i = begin; i < end; ++i) {
    TokenId id = ids[i];
    if (id < 0 || id >= vocab.size())
      throw UnknownId("token id out of range: " + std::to_string(id));
    if (vocab.is_special(id)) {
      flush();
      out.push_back(trace::special(vocab.token_text(id)));
    } else if (vocab.is_address(id)) {
      flush();
      out.push_back(trace::Lexeme{trace::LexKind::Address, vocab.token_text(id)});
    } else {
      const std::string& piece = vocab.token_text(id);
      if (piece.starts_with("##") && !fragment.empty()) {
        fragment += piece.substr(2);
      } else {
        flush();
        fragment = piece;
      }
    }
  }
  flush();
  return out;
}

Vocabulary build_vocabulary(std::span<const std::vector<trace::Lexeme>> corpus,
                            int top_n, int size_cap) {
  AddressFrequencyTable freqs = count_addresses(corpus);
  std::vector<std::string> addresses = build_address_vocab(freqs, top_n);

  std::vector<std::string> fragments;
  for (const auto& lexemes : corpus) {
    for (const auto& lex : lexemes) {
      if (lex.kind == trace::LexKind::Number) {
        fragments.push_back(lex.text);
      } else if (lex.kind == trace::LexKind::Text) {
        for (auto& word : split_words(lex.text))
          fragments.push_back(std::move(word));
      }
    }
  }

  const auto& specials = default_specials();
  int reserved = static_cast<int>(specials.size() + addresses.size());
  if (reserved >= size_cap)
    throw CapacityError("size_cap too small for specials plus addresses");
  auto subwords = train_wordpiece(fragments, size_cap - reserved);
  return assemble_vocabulary(specials, addresses, std::move(subwords), size_cap,
                             top_n);
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

void save_vocabulary(const Vocabulary& vocab, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IOError("cannot open vocabulary file for write: " + path);
  json header;
  header["size_cap"] = vocab.size_cap();
  header["top_n_addresses"] = vocab.top_n_addresses();
  header["specials_version"] = kSpecialsVersion;
  out << header.dump() << '\n';
  TokenId id = 0;
  auto dump_zone = [&](const std::vector<std::string>& tokens,
                       const char* zone) {
    for (const auto& token : tokens) {
      json rec;
      rec["token"] = token;
      rec["id"] = id++;
      rec["zone"] = zone;
      out << rec.dump() << '\n';
    }
  };
  dump_zone(vocab.specials(), "special");
  dump_zone(vocab.addresses(), "address");
  dump_zone(vocab.subwords(), "subword");
  if (!out) throw IOError("failed writing vocabulary file: " + path);
}

Vocabulary load_vocabulary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IOError("cannot open vocabulary file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw IOError("empty vocabulary file: " + path);
  json header = json::parse(line, nullptr, false);
  if (header.is_discarded() || !header.contains("size_cap") ||
      !header.contains("top_n_addresses"))
    throw IOError("malformed vocabulary header");
  if (header.value("specials_version", -1) != kSpecialsVersion)
    throw IOError("unsupported specials_version in vocabulary file");

  std::vector<std::string> specials, addresses, subwords;
  TokenId expect = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded()) throw IOError("malformed vocabulary record");
    if (rec.value("id", -1) != expect++)
      throw IOError("vocabulary ids are not contiguous");
    std::string zone = rec.value("zone", "");
    std::string token = rec.value("token", "");
    if (zone == "special")
      specials.push_back(token);
    else if (zone == "address")
      addresses.push_back(token);
    else if (zone == "subword")
      subwords.push_back(token);
    else
      throw IOError("unknown vocabulary zone: " + zone);
  }
  return assemble_vocabulary(std::move(specials), std::move(addresses),
                             std::move(subwords), header["size_cap"].get<int>(),
                             header["top_n_addresses"].get<int>());
}

}  // namespace txscan::tok
