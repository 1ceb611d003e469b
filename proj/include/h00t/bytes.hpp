#pragma once

// Byte-string helpers shared by every module: hex rendering and MSB-first
// bit-range extraction (bit 0 is the most significant bit of byte 0).

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace h00t {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline Bytes to_bytes(std::string_view s) {
  return Bytes(s.begin(), s.end());
}

inline std::string to_string(ByteView b) {
  return std::string(b.begin(), b.end());
}

inline std::string to_hex(ByteView b) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(b.size() * 2);
  for (auto v : b) {
    out.push_back(digits[v >> 4]);
    out.push_back(digits[v & 0x0f]);
  }
  return out;
}

inline Bytes from_hex(std::string_view hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  if (hex.size() % 2 != 0) throw Error("hex string has odd length");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = nibble(hex[2 * i]);
    int lo = nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw Error("invalid hex digit");
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

inline bool get_bit(ByteView b, std::size_t i) {
  return (b[i / 8] >> (7 - i % 8)) & 1u;
}

inline void set_bit(std::span<std::uint8_t> b, std::size_t i, bool v) {
  auto mask = static_cast<std::uint8_t>(1u << (7 - i % 8));
  if (v)
    b[i / 8] |= mask;
  else
    b[i / 8] &= static_cast<std::uint8_t>(~mask);
}

/// Copies bits [first, first+count) into a fresh, left-aligned byte string.
/// Unused trailing bits of the last byte are zero.
inline Bytes extract_bits(ByteView src, std::size_t first, std::size_t count) {
  if (first + count > src.size() * 8) throw Error("bit range exceeds source length");
  Bytes out((count + 7) / 8, 0);
  if (first % 8 == 0) {
    std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(first / 8), out.size(), out.begin());
    if (count % 8 != 0) out.back() &= static_cast<std::uint8_t>(0xff << (8 - count % 8));
    return out;
  }
  for (std::size_t i = 0; i < count; ++i) set_bit(out, i, get_bit(src, first + i));
  return out;
}

/// Reads up to 64 bits starting at `first` as an unsigned integer (MSB first).
inline std::uint64_t read_bits_u64(ByteView src, std::size_t first, unsigned count) {
  if (count > 64) throw Error("cannot read more than 64 bits into an integer");
  if (first + count > src.size() * 8) throw Error("bit range exceeds source length");
  std::uint64_t v = 0;
  for (unsigned i = 0; i < count; ++i) v = (v << 1) | (get_bit(src, first + i) ? 1u : 0u);
  return v;
}

}  // namespace h00t
