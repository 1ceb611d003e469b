#pragma once

// Text rendering of hoots:
//
//   "#" tag1 " " "#" tag2 ... " " Base64(key_block_1 || ... || key_block_n || mac || ciphertext)
//
// Short tags are lowercase RFC 4648 base32 (5 bits per glyph, ceil(k/5)
// glyphs, unused trailing bits zero) so they survive case-insensitive
// hashtag search. The payload is standard padded Base64; its length is
// always a multiple of four glyphs. The number of key blocks equals the
// number of hashtag tokens. docs/wire-format.md has worked examples.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "h00t/bytes.hpp"
#include "h00t/tagcrypt.hpp"

namespace h00t {

namespace codec {

inline constexpr std::string_view kBase32Alphabet = "abcdefghijklmnopqrstuvwxyz234567";
inline constexpr std::string_view kBase64Alphabet =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

inline int base32_value(char c) {
  if (c >= 'a' && c <= 'z') return c - 'a';
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= '2' && c <= '7') return c - '2' + 26;
  return -1;
}

inline int base64_value(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}

inline std::string base64_encode(ByteView in) {
  std::string out;
  out.reserve((in.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= in.size(); i += 3) {
    std::uint32_t v = (in[i] << 16) | (in[i + 1] << 8) | in[i + 2];
    for (int s = 18; s >= 0; s -= 6) out.push_back(kBase64Alphabet[(v >> s) & 63]);
  }
  if (std::size_t rest = in.size() - i; rest > 0) {
    std::uint32_t v = in[i] << 16;
    if (rest == 2) v |= in[i + 1] << 8;
    out.push_back(kBase64Alphabet[(v >> 18) & 63]);
    out.push_back(kBase64Alphabet[(v >> 12) & 63]);
    out.push_back(rest == 2 ? kBase64Alphabet[(v >> 6) & 63] : '=');
    out.push_back('=');
  }
  return out;
}

}  // namespace codec

enum class TagEncoding { Base32, Base64 };

struct WireParams {
  static constexpr unsigned mac_bits = 160;
  static constexpr unsigned key_block_bits = 256;

  unsigned k = kDefaultShortTagBits;
  std::size_t glyph_budget = 140;
  /// Base64 short tags exist only to reproduce the original prototype's
  /// header arithmetic; they are case-sensitive and not search-safe.
  TagEncoding tag_encoding = TagEncoding::Base32;

  unsigned tag_glyphs() const {
    return tag_encoding == TagEncoding::Base32 ? (k + 4) / 5 : (k + 5) / 6;
  }
};

struct WireMessage {
  std::string text;

  /// Number of Unicode code points (glyphs) in the text.
  std::size_t glyphs() const {
    std::size_t n = 0;
    for (unsigned char c : text)
      if ((c & 0xc0) != 0x80) ++n;
    return n;
  }
  bool operator==(const WireMessage&) const = default;
};

class WireError : public Error {
public:
  enum class Kind { NoTag, MalformedTag, PayloadLength, NonAlphabet, OverBudget, Structure };

  WireError(Kind kind, const std::string& what) : Error("wire: " + what), kind_(kind) {}
  Kind kind() const { return kind_; }

private:
  Kind kind_;
};

inline std::string_view to_string(WireError::Kind k) {
  switch (k) {
    case WireError::Kind::NoTag: return "no-tag";
    case WireError::Kind::MalformedTag: return "malformed-tag";
    case WireError::Kind::PayloadLength: return "payload-length";
    case WireError::Kind::NonAlphabet: return "non-alphabet";
    case WireError::Kind::OverBudget: return "over-budget";
    case WireError::Kind::Structure: return "structure";
  }
  return "unknown";
}

class CapacityError : public Error {
public:
  CapacityError(std::size_t length, std::size_t capacity, std::size_t n_tags)
      : Error("message of " + std::to_string(length) + " bytes exceeds capacity of " +
              std::to_string(capacity) + " bytes for " + std::to_string(n_tags) + " tag(s)"),
        capacity_(capacity) {}
  std::size_t capacity() const { return capacity_; }

private:
  std::size_t capacity_;
};

inline std::string encode_short_tag(const ShortTag& tag, const WireParams& params) {
  const unsigned glyphs = params.tag_glyphs();
  const unsigned width = params.tag_encoding == TagEncoding::Base32 ? 5 : 6;
  // k bits left-aligned across the glyphs; trailing pad bits are zero.
  std::string out;
  out.reserve(glyphs);
  for (unsigned g = 0; g < glyphs; ++g) {
    unsigned v = 0;
    for (unsigned b = 0; b < width; ++b) {
      unsigned pos = g * width + b;
      unsigned bit = pos < tag.k ? static_cast<unsigned>((tag.value >> (tag.k - 1 - pos)) & 1u) : 0u;
      v = (v << 1) | bit;
    }
    out.push_back(params.tag_encoding == TagEncoding::Base32 ? codec::kBase32Alphabet[v]
                                                             : codec::kBase64Alphabet[v]);
  }
  return out;
}

inline ShortTag decode_short_tag(std::string_view token, const WireParams& params) {
  using K = WireError::Kind;
  const unsigned width = params.tag_encoding == TagEncoding::Base32 ? 5 : 6;
  if (token.size() != params.tag_glyphs())
    throw WireError(K::MalformedTag, "hashtag '" + std::string(token) + "' must have " +
                                         std::to_string(params.tag_glyphs()) + " glyphs");
  std::uint64_t value = 0;
  unsigned pos = 0;
  for (char c : token) {
    int v = params.tag_encoding == TagEncoding::Base32 ? codec::base32_value(c) : codec::base64_value(c);
    if (v < 0) throw WireError(K::NonAlphabet, "hashtag glyph '" + std::string(1, c) + "' not in alphabet");
    for (int b = static_cast<int>(width) - 1; b >= 0; --b, ++pos) {
      unsigned bit = (static_cast<unsigned>(v) >> b) & 1u;
      if (pos < params.k)
        value = (value << 1) | bit;
      else if (bit)
        throw WireError(K::MalformedTag, "hashtag has nonzero padding bits");
    }
  }
  return ShortTag{value, params.k};
}

/// Glyphs taken by n hashtag tokens, each followed by one space.
inline std::size_t header_glyphs(const WireParams& params, std::size_t n_tags) {
  return n_tags * (1 + params.tag_glyphs() + 1);
}

inline std::size_t payload_bytes(std::size_t n_tags, std::size_t message_bytes) {
  return n_tags * kKeyBlockBytes + kMacBytes + message_bytes;
}

inline std::size_t wire_glyphs(const WireParams& params, std::size_t n_tags, std::size_t message_bytes) {
  return header_glyphs(params, n_tags) + (payload_bytes(n_tags, message_bytes) + 2) / 3 * 4;
}

inline bool fits(const WireParams& params, std::size_t n_tags, std::size_t message_bytes) {
  return n_tags >= 1 && wire_glyphs(params, n_tags, message_bytes) <= params.glyph_budget;
}

/// Largest message (bytes) that encodes within the glyph budget for n tags.
/// Returns 0 when even an empty message does not fit; use fits() or
/// max_tags() to tell that case apart from a genuine capacity of zero.
inline std::size_t capacity(const WireParams& params, std::size_t n_tags) {
  if (n_tags == 0) throw Error("capacity requires at least one tag");
  const std::size_t header = header_glyphs(params, n_tags);
  if (header >= params.glyph_budget) return 0;
  const std::size_t max_payload = (params.glyph_budget - header) / 4 * 3;
  const std::size_t overhead = payload_bytes(n_tags, 0);
  return max_payload > overhead ? max_payload - overhead : 0;
}

inline std::size_t max_tags(const WireParams& params) {
  std::size_t n = 0;
  while (fits(params, n + 1, 0)) ++n;
  return n;
}

inline WireMessage encode(const Hoot& hoot, const WireParams& params) {
  using K = WireError::Kind;
  if (hoot.short_tags.empty()) throw WireError(K::NoTag, "hoot has no short tag");
  if (hoot.short_tags.size() != hoot.key_blocks.size())
    throw WireError(K::Structure, "short tag and key block counts differ");
  const std::size_t glyphs = wire_glyphs(params, hoot.short_tags.size(), hoot.ciphertext.size());
  if (glyphs > params.glyph_budget)
    throw WireError(K::OverBudget, "encoded hoot needs " + std::to_string(glyphs) + " glyphs; budget is " +
                                       std::to_string(params.glyph_budget));

  std::string text;
  text.reserve(glyphs);
  for (const auto& t : hoot.short_tags) {
    if (t.k != params.k) throw WireError(K::Structure, "short tag width differs from wire parameters");
    text += '#';
    text += encode_short_tag(t, params);
    text += ' ';
  }
  Bytes payload;
  payload.reserve(payload_bytes(hoot.short_tags.size(), hoot.ciphertext.size()));
  for (const auto& kb : hoot.key_blocks) payload.insert(payload.end(), kb.begin(), kb.end());
  payload.insert(payload.end(), hoot.mac.begin(), hoot.mac.end());
  payload.insert(payload.end(), hoot.ciphertext.begin(), hoot.ciphertext.end());
  text += codec::base64_encode(payload);
  return WireMessage{std::move(text)};
}

inline Hoot parse(std::string_view text, const WireParams& params) {
  using K = WireError::Kind;
  if (WireMessage{std::string(text)}.glyphs() > params.glyph_budget)
    throw WireError(K::OverBudget, "message longer than the glyph budget");

  std::vector<std::string_view> tokens;
  for (std::size_t start = 0;;) {
    std::size_t sp = text.find(' ', start);
    tokens.push_back(text.substr(start, sp == std::string_view::npos ? std::string_view::npos : sp - start));
    if (sp == std::string_view::npos) break;
    start = sp + 1;
  }
  if (tokens.empty() || tokens.front().empty() || tokens.front().front() != '#')
    throw WireError(K::NoTag, "message does not start with a hashtag");

  Hoot hoot;
  std::size_t i = 0;
  for (; i < tokens.size() && !tokens[i].empty() && tokens[i].front() == '#'; ++i)
    hoot.short_tags.push_back(decode_short_tag(tokens[i].substr(1), params));
  if (i == tokens.size()) throw WireError(K::PayloadLength, "missing payload");
  if (i + 1 != tokens.size() || tokens[i].empty())
    throw WireError(K::Structure, "expected exactly one payload token after the hashtags");

  const std::string_view p = tokens[i];
  if (p.size() % 4 != 0) throw WireError(K::PayloadLength, "payload length is not a multiple of 4 glyphs");
  std::size_t pad = 0;
  if (p.back() == '=') pad = (p[p.size() - 2] == '=') ? 2 : 1;
  Bytes bytes;
  bytes.reserve(p.size() / 4 * 3);
  for (std::size_t q = 0; q < p.size(); q += 4) {
    const bool last = q + 4 == p.size();
    std::uint32_t v = 0;
    for (std::size_t j = 0; j < 4; ++j) {
      const char c = p[q + j];
      int d = 0;
      if (c == '=' && last && j >= 4 - pad) {
        d = 0;
      } else {
        d = codec::base64_value(c);
        if (d < 0) throw WireError(K::NonAlphabet, "payload glyph '" + std::string(1, c) + "' not in alphabet");
      }
      v = (v << 6) | static_cast<std::uint32_t>(d);
    }
    const std::size_t n = last ? 3 - pad : 3;
    if (last && pad > 0 && (v & ((1u << (8 * pad)) - 1)) != 0)
      throw WireError(K::NonAlphabet, "payload has nonzero padding bits");
    for (std::size_t j = 0; j < n; ++j) bytes.push_back(static_cast<std::uint8_t>(v >> (16 - 8 * j)));
  }

  const std::size_t n_tags = hoot.short_tags.size();
  if (bytes.size() < payload_bytes(n_tags, 0))
    throw WireError(K::PayloadLength, "payload too short for " + std::to_string(n_tags) + " key block(s) and MAC");
  auto it = bytes.begin();
  for (std::size_t t = 0; t < n_tags; ++t) {
    KeyBlock kb{};
    std::copy_n(it, kb.size(), kb.begin());
    it += static_cast<std::ptrdiff_t>(kb.size());
    hoot.key_blocks.push_back(kb);
  }
  std::copy_n(it, hoot.mac.size(), hoot.mac.begin());
  it += static_cast<std::ptrdiff_t>(hoot.mac.size());
  hoot.ciphertext.assign(it, bytes.end());
  return hoot;
}

/// Seals only if the result is guaranteed to encode within the budget.
inline Hoot seal_checked(ByteView message, std::span<const TagMaterial> tags, const WireParams& params,
                         EntropySource& rng) {
  if (tags.empty()) throw Error("seal requires at least one plain tag");
  if (!fits(params, tags.size(), message.size()))
    throw CapacityError(message.size(), capacity(params, tags.size()), tags.size());
  return seal(message, tags, rng);
}

inline Hoot seal_checked(ByteView message, std::span<const PlainTag> tags, const KdfConfig& cfg,
                         const WireParams& params, EntropySource& rng) {
  if (tags.empty()) throw Error("seal requires at least one plain tag");
  if (!fits(params, tags.size(), message.size()))
    throw CapacityError(message.size(), capacity(params, tags.size()), tags.size());
  return seal(message, tags, cfg, params.k, rng);
}

}  // namespace h00t
