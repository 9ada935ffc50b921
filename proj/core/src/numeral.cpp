// Copyright 2026 The txscan Authors
// SPDX-License-Identifier: Apache-2.0

#include "txscan/numeral.hpp"

#include <algorithm>
#include <cctype>

#include "txscan/errors.hpp"

namespace txscan {

namespace {

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

BigUint BigUint::from_u64(std::uint64_t v) {
  BigUint out;
  while (v != 0) {
    out.limbs.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
    v >>= 32;
  }
  return out;
}

void BigUint::normalize() {
  while (!limbs.empty() && limbs.back() == 0) limbs.pop_back();
}

void BigUint::mul_add_small(std::uint32_t mul, std::uint32_t add) {
  std::uint64_t carry = add;
  for (auto& limb : limbs) {
    std::uint64_t t = static_cast<std::uint64_t>(limb) * mul + carry;
    limb = static_cast<std::uint32_t>(t & 0xffffffffu);
    carry = t >> 32;
  }
  while (carry != 0) {
    limbs.push_back(static_cast<std::uint32_t>(carry & 0xffffffffu));
    carry >>= 32;
  }
  normalize();
}

BigUint BigUint::parse(std::string_view raw) {
  if (raw.empty()) throw ParseError("empty numeral");
  BigUint out;
  if (raw.size() > 2 && raw[0] == '0' && (raw[1] == 'x' || raw[1] == 'X')) {
    for (char c : raw.substr(2)) {
      int d = hex_digit(c);
      if (d < 0) throw ParseError("bad hex digit in numeral: " + std::string(raw));
      out.mul_add_small(16, static_cast<std::uint32_t>(d));
    }
  } else {
    for (char c : raw) {
      if (c < '0' || c > '9')
        throw ParseError("bad decimal digit in numeral: " + std::string(raw));
      out.mul_add_small(10, static_cast<std::uint32_t>(c - '0'));
    }
  }
  return out;
}

std::size_t BigUint::bit_length() const {
  if (limbs.empty()) return 0;
  std::uint32_t top = limbs.back();
  std::size_t bits = (limbs.size() - 1) * 32;
  while (top != 0) {
    ++bits;
    top >>= 1;
  }
  return bits;
}

std::string BigUint::to_hex() const {
  if (limbs.empty()) return "0";
  static const char* digits = "0123456789abcdef";
  std::string out;
  for (std::size_t i = limbs.size(); i-- > 0;) {
    for (int shift = 28; shift >= 0; shift -= 4)
      out.push_back(digits[(limbs[i] >> shift) & 0xf]);
  }
  std::size_t first = out.find_first_not_of('0');
  return out.substr(first);
}

std::string BigUint::to_decimal() const {
  if (limbs.empty()) return "0";
  std::vector<std::uint32_t> work(limbs);
  std::string out;
  while (!work.empty()) {
    // divide the limb vector by 10, collect the remainder digit
    std::uint64_t rem = 0;
    for (std::size_t i = work.size(); i-- > 0;) {
      std::uint64_t cur = (rem << 32) | work[i];
      work[i] = static_cast<std::uint32_t>(cur / 10);
      rem = cur % 10;
    }
    out.push_back(static_cast<char>('0' + rem));
    while (!work.empty() && work.back() == 0) work.pop_back();
  }
  std::reverse(out.begin(), out.end());
  return out;
}

bool is_numeral(std::string_view raw) {
  if (raw.empty()) return false;
  if (raw.size() > 2 && raw[0] == '0' && (raw[1] == 'x' || raw[1] == 'X')) {
    for (char c : raw.substr(2))
      if (hex_digit(c) < 0) return false;
    return true;
  }
  for (char c : raw)
    if (c < '0' || c > '9') return false;
  return true;
}

bool is_hex_address(std::string_view raw) {
  if (raw.size() < 3 || raw[0] != '0' || raw[1] != 'x') return false;
  for (char c : raw.substr(2))
    if (hex_digit(c) < 0) return false;
  return true;
}

std::string normalize_number(std::string_view raw, NormalizeStats* stats) {
  BigUint v = BigUint::parse(raw);
  std::string hex = v.to_hex();
  if (v.bit_length() <= 160) {
    std::string out = "0x";
    out.append(40 - hex.size(), '0');
    out += hex;
    return out;
  }
  if (stats != nullptr) ++stats->overflow_count;
  return "0x" + hex;
}

}  // namespace txscan
