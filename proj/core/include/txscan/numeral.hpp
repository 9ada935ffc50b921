// Copyright 2026 The txscan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace txscan {

/// Unsigned big integer as little-endian 32-bit limbs. Only the handful of
/// operations the tokenizer and the synthetic generator need.
struct BigUint {
  std::vector<std::uint32_t> limbs;  // empty == 0

  static BigUint from_u64(std::uint64_t v);
  /// Parses a non-negative numeral: decimal digits, or 0x/0X hex digits.
  /// Throws ParseError on anything else (sign, empty, stray chars).
  static BigUint parse(std::string_view raw);

  void mul_add_small(std::uint32_t mul, std::uint32_t add);
  void normalize();  // strip leading zero limbs

  bool is_zero() const { return limbs.empty(); }
  std::size_t bit_length() const;
  bool operator==(const BigUint&) const = default;

  std::string to_hex() const;      // minimal width, lowercase, no 0x
  std::string to_decimal() const;  // base-10, no leading zeros
};

/// True if raw would be accepted by BigUint::parse.
bool is_numeral(std::string_view raw);

/// True for "0x" + one or more hex digits (any case).
bool is_hex_address(std::string_view raw);

/// Tally of values that exceeded the fixed-width hex format.
struct NormalizeStats {
  std::uint64_t overflow_count = 0;
};

/// Canonical fixed-width hex form of a numeral: "0x" followed by exactly 40
/// lowercase hex digits (zero-padded) for values below 2^160. Larger values
/// fall back to minimal-width hex and bump stats->overflow_count.
/// Throws ParseError for non-numerals.
std::string normalize_number(std::string_view raw,
                             NormalizeStats* stats = nullptr);

}  // namespace txscan
