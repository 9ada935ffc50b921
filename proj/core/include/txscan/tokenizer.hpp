// Copyright 2026 The txscan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "txscan/trace.hpp"

namespace txscan::tok {

using TokenId = std::int32_t;

/// The fixed special-token set, in id order. Zone 1 of every vocabulary.
const std::vector<std::string>& default_specials();

constexpr int kSpecialsVersion = 1;
constexpr int kDefaultTopAddresses = 7000;
constexpr int kDefaultSizeCap = 30000;

struct AddressFrequencyTable {
  std::map<std::string, std::uint64_t> counts;  // lowercase address -> count

  void add(std::span<const trace::Lexeme> lexemes);
  void merge(const AddressFrequencyTable& other);
};

/// Three-zone token dictionary: specials, then retained addresses, then
/// learned subwords. Ids are contiguous across zones.
class Vocabulary {
 public:
  Vocabulary() = default;

  const std::vector<std::string>& specials() const { return specials_; }
  const std::vector<std::string>& addresses() const { return addresses_; }
  const std::vector<std::string>& subwords() const { return subwords_; }
  int size_cap() const { return size_cap_; }
  int top_n_addresses() const { return top_n_addresses_; }
  TokenId size() const { return static_cast<TokenId>(id_to_token_.size()); }

  TokenId pad_id() const { return pad_id_; }
  TokenId mask_id() const { return mask_id_; }
  TokenId oov_id() const { return oov_id_; }
  TokenId cls_id() const { return cls_id_; }

  TokenId special_id(std::string_view token) const;  // throws UnknownId
  /// Address id, or oov_id when the address was not retained.
  TokenId address_id(std::string_view address) const;
  /// Subword id, or -1 when absent.
  TokenId subword_id(std::string_view piece) const;

  /// Longest subword piece, counted without the "##" prefix. Bounds the
  /// greedy matcher's lookahead.
  int max_piece_chars() const { return max_piece_chars_; }

  bool is_special(TokenId id) const { return id >= 0 && id < address_begin_; }
  bool is_address(TokenId id) const {
    return id >= address_begin_ && id < subword_begin_;
  }
  bool is_subword(TokenId id) const {
    return id >= subword_begin_ && id < size();
  }

  const std::string& token_text(TokenId id) const;  // throws UnknownId

  friend Vocabulary assemble_vocabulary(std::vector<std::string> specials,
                                        std::vector<std::string> addresses,
                                        std::vector<std::string> subwords,
                                        int size_cap, int top_n_addresses);

 private:
  std::vector<std::string> specials_, addresses_, subwords_;
  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, TokenId> special_ids_, address_ids_,
      subword_ids_;
  int size_cap_ = kDefaultSizeCap;
  int top_n_addresses_ = kDefaultTopAddresses;
  int max_piece_chars_ = 0;
  TokenId address_begin_ = 0, subword_begin_ = 0;
  TokenId pad_id_ = 0, mask_id_ = 0, oov_id_ = 0, cls_id_ = 0;
};

struct EncodedSequence {
  std::vector<TokenId> ids;
  std::int64_t n_tokens = 0;
  std::string source_tx_id;
};

AddressFrequencyTable count_addresses(
    std::span<const std::vector<trace::Lexeme>> corpus);

/// Top-n addresses by descending count, ties by ascending address string.
std::vector<std::string> build_address_vocab(const AddressFrequencyTable& freqs,
                                             int top_n = kDefaultTopAddresses);

/// WordPiece training over already-split fragments (hex-normalized numbers
/// and whitespace-split log words). Iterative pair merging scored by
/// pair_count / (left_count * right_count), highest first, ties broken by
/// the ascending (left, right) string pair. Merging stops at target_pieces
/// total units or when no adjacent pair occurs at least twice. The returned
/// table lists the seed alphabet (sorted) followed by merged pieces in
/// merge order; continuations carry the "##" prefix.
std::vector<std::string> train_wordpiece(std::span<const std::string> fragments,
                                         int target_pieces);

/// Lays the three zones out as specials -> addresses -> subwords, truncating
/// subwords by merge order so the total hits size_cap exactly when enough
/// pieces exist. Throws CapacityError when specials + addresses fill the cap.
Vocabulary assemble_vocabulary(std::vector<std::string> specials,
                               std::vector<std::string> addresses,
                               std::vector<std::string> subwords, int size_cap,
                               int top_n_addresses = kDefaultTopAddresses);

/// Greedy longest-match segmentation of one fragment (no whitespace).
/// First piece bare, continuations ##-prefixed; a character with no
/// matching piece becomes oov_id.
std::vector<TokenId> segment_fragment(std::string_view fragment,
                                      const Vocabulary& vocab);

/// Lexemes -> ids. Prepends [CLS]; truncates to max_len keeping the head.
/// Text lexemes are split on whitespace and each word segmented
/// independently.
EncodedSequence encode(std::span<const trace::Lexeme> lexemes,
                       const Vocabulary& vocab, int max_len,
                       std::string source_tx_id = {});

/// Inverse of encode up to OOV collapse, subword re-joining, and the
/// encode-time framing: the leading [CLS] and trailing [PAD]s are dropped,
/// and each whitespace-split word decodes to its own lexeme. Subword
/// fragments shaped like 0x-hex decode as Number, otherwise Text.
std::vector<trace::Lexeme> decode(std::span<const TokenId> ids,
                                  const Vocabulary& vocab);

/// Full pipeline used by the CLI: count addresses, retain the top n, train
/// subwords on number/log fragments, assemble.
Vocabulary build_vocabulary(std::span<const std::vector<trace::Lexeme>> corpus,
                            int top_n = kDefaultTopAddresses,
                            int size_cap = kDefaultSizeCap);

/// Line-delimited record serialization. load(save(v)) reproduces identical
/// encodings byte for byte.
void save_vocabulary(const Vocabulary& vocab, const std::string& path);
Vocabulary load_vocabulary(const std::string& path);

}  // namespace txscan::tok
