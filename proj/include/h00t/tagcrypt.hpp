#pragma once

// Tag derivation and hoot construction.
//
//   long tag   = KDF(plain tag)                 (SHA-1, or scrypt)
//   short tag  = long tag bits [0, k)           public, collision-prone
//   tag key    = long tag bits [k, k+128)       AES-128 key
//
// A hoot carries one short tag and one key block per recipient group, a
// single HMAC-SHA1 over the ciphertext, and the ciphertext:
//
//   C         = AES-CTR(k_enc, counter 0, M)
//   mac       = HMAC-SHA1(k_mac, C)
//   key block = AES-CTR(tag key, mac[0..8) || counter 0, k_enc || k_mac)
//
// The key-block counter is seeded from the MAC so that a group's tag key
// never reuses a keystream across hoots. See docs/wire-format.md.

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "h00t/bytes.hpp"
#include "h00t/crypto.hpp"
#include "h00t/entropy.hpp"

namespace h00t {

inline constexpr unsigned kMinShortTagBits = 6;
inline constexpr unsigned kMaxShortTagBits = 64;
inline constexpr unsigned kDefaultShortTagBits = 24;
inline constexpr unsigned kTagKeyBits = 128;
inline constexpr std::size_t kKeyBlockBytes = 32;
inline constexpr std::size_t kMacBytes = crypto::kSha1Bytes;

class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& what) : Error("config: " + what) {}
};

inline void validate_short_tag_bits(unsigned k) {
  if (k < kMinShortTagBits || k > kMaxShortTagBits)
    throw ConfigError("short tag length must be in [6, 64] bits, got " + std::to_string(k));
}

/// The secret hashtag shared by a group. Non-empty, no whitespace, at most
/// 256 bytes, no leading '#'.
class PlainTag {
public:
  static constexpr std::size_t kMaxBytes = 256;

  explicit PlainTag(std::string text) : text_(std::move(text)) {
    if (auto why = invalid_reason(text_)) throw Error("invalid plain tag: " + *why);
  }

  /// Accepts an optional leading '#' as typed by users and strips it.
  static PlainTag from_hashtag(std::string_view text) {
    if (!text.empty() && text.front() == '#') text.remove_prefix(1);
    return PlainTag(std::string(text));
  }

  static std::optional<std::string> invalid_reason(std::string_view t) {
    if (t.empty()) return "empty";
    if (t.size() > kMaxBytes) return "longer than 256 bytes";
    if (t.front() == '#') return "leading '#'";
    for (unsigned char c : t)
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f')
        return "contains whitespace";
    return std::nullopt;
  }

  const std::string& text() const { return text_; }
  ByteView bytes() const {
    return {reinterpret_cast<const std::uint8_t*>(text_.data()), text_.size()};
  }

  auto operator<=>(const PlainTag&) const = default;

private:
  std::string text_;
};

enum class KdfMode { FastHash, MemoryHard };

struct KdfConfig {
  KdfMode mode = KdfMode::FastHash;
  crypto::ScryptParams scrypt{};
  /// Requested long-tag width. Fast-hash mode natively yields 160 bits.
  unsigned output_bits = 160;
  /// Allow deterministic expansion past the native digest width.
  bool expand = true;

  static KdfConfig fast_hash() { return {}; }
  static KdfConfig memory_hard(crypto::ScryptParams p = {}) {
    KdfConfig c;
    c.mode = KdfMode::MemoryHard;
    c.scrypt = p;
    return c;
  }

  void validate() const {
    if (output_bits == 0 || output_bits % 8 != 0)
      throw ConfigError("KDF output bits must be a positive multiple of 8");
    if (mode == KdfMode::FastHash && output_bits > 160 && !expand)
      throw ConfigError("fast-hash yields 160 bits; more requires expansion");
    if (mode == KdfMode::MemoryHard) {
      const auto n = scrypt.n;
      if (n < 2 || (n & (n - 1)) != 0) throw ConfigError("scrypt work factor must be a power of two >= 2");
      if (scrypt.r == 0 || scrypt.p == 0) throw ConfigError("scrypt memory/parallelism factors must be >= 1");
    }
  }

  std::string describe() const {
    if (mode == KdfMode::FastHash) return "fast-hash(sha1)";
    return "memory-hard(scrypt N=" + std::to_string(scrypt.n) + " r=" + std::to_string(scrypt.r) +
           " p=" + std::to_string(scrypt.p) + ")";
  }

  bool operator==(const KdfConfig&) const = default;
};

struct LongTag {
  Bytes bytes;
  std::size_t bits() const { return bytes.size() * 8; }
  bool operator==(const LongTag&) const = default;
};

/// The first k bits of a long tag, held right-aligned in `value`.
struct ShortTag {
  std::uint64_t value = 0;
  unsigned k = kDefaultShortTagBits;
  auto operator<=>(const ShortTag&) const = default;
};

struct TagMaterial {
  ShortTag short_tag;
  crypto::AesKey tag_key{};
  bool operator==(const TagMaterial&) const = default;
};

struct SessionKeys {
  crypto::AesKey enc{};
  std::array<std::uint8_t, 16> mac{};
  bool operator==(const SessionKeys&) const = default;
};

using KeyBlock = std::array<std::uint8_t, kKeyBlockBytes>;
using Mac = crypto::Sha1Digest;

struct Hoot {
  std::vector<ShortTag> short_tags;
  std::vector<KeyBlock> key_blocks;
  Mac mac{};
  Bytes ciphertext;
  bool operator==(const Hoot&) const = default;
};

namespace detail {

inline constexpr std::string_view kScryptSalt = "#h00t/long-tag/v1";
inline constexpr std::string_view kExpandLabel = "h00t-expand";

// digest || HMAC(digest, label || 1) || HMAC(digest, label || 2) || ...
inline Bytes expand(ByteView seed, std::size_t out_bytes) {
  Bytes out(seed.begin(), seed.end());
  for (std::uint32_t i = 1; out.size() < out_bytes; ++i) {
    Bytes msg(kExpandLabel.begin(), kExpandLabel.end());
    for (int s = 24; s >= 0; s -= 8) msg.push_back(static_cast<std::uint8_t>(i >> s));
    auto block = crypto::hmac_sha1(seed, msg);
    out.insert(out.end(), block.begin(), block.end());
  }
  out.resize(out_bytes);
  return out;
}

inline crypto::AesIv key_block_iv(const Mac& mac) {
  crypto::AesIv iv{};
  std::copy_n(mac.begin(), 8, iv.begin());
  return iv;
}

}  // namespace detail

inline LongTag derive_long_tag(const PlainTag& tag, const KdfConfig& cfg) {
  cfg.validate();
  const std::size_t out_bytes = cfg.output_bits / 8;
  if (cfg.mode == KdfMode::FastHash) {
    auto d = crypto::sha1(tag.bytes());
    if (out_bytes <= d.size()) return LongTag{Bytes(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(out_bytes))};
    return LongTag{detail::expand(d, out_bytes)};
  }
  const auto salt = to_bytes(detail::kScryptSalt);
  return LongTag{crypto::scrypt(tag.bytes(), salt, cfg.scrypt, out_bytes)};
}

inline ShortTag short_tag_of(ByteView long_tag_bytes, unsigned k) {
  return ShortTag{read_bits_u64(long_tag_bytes, 0, k), k};
}

inline TagMaterial split_tag(const LongTag& long_tag, unsigned k) {
  validate_short_tag_bits(k);
  if (long_tag.bits() < k + kTagKeyBits)
    throw Error("long tag has " + std::to_string(long_tag.bits()) + " bits; need " +
                std::to_string(k + kTagKeyBits));
  TagMaterial m;
  m.short_tag = short_tag_of(long_tag.bytes, k);
  auto key = extract_bits(long_tag.bytes, k, kTagKeyBits);
  std::copy(key.begin(), key.end(), m.tag_key.begin());
  return m;
}

/// Derives a long tag wide enough for k and splits it.
inline TagMaterial derive_tag(const PlainTag& tag, const KdfConfig& cfg, unsigned k) {
  validate_short_tag_bits(k);
  const unsigned need = ((k + kTagKeyBits + 7) / 8) * 8;
  KdfConfig eff = cfg;
  if (eff.output_bits < need) {
    if (!eff.expand)
      throw ConfigError("KDF output of " + std::to_string(cfg.output_bits) + " bits is below k+128 = " +
                        std::to_string(k + kTagKeyBits) + " and expansion is disabled");
    eff.output_bits = need;
  }
  return split_tag(derive_long_tag(tag, eff), k);
}

inline SessionKeys fresh_session_keys(EntropySource& rng) {
  std::array<std::uint8_t, 32> raw{};
  rng.fill(raw);
  SessionKeys keys;
  std::copy_n(raw.begin(), 16, keys.enc.begin());
  std::copy_n(raw.begin() + 16, 16, keys.mac.begin());
  return keys;
}

/// Seals under already-derived tag material with explicit session keys.
inline Hoot seal_with_keys(ByteView message, std::span<const TagMaterial> tags, const SessionKeys& keys) {
  if (tags.empty()) throw Error("seal requires at least one plain tag");
  Hoot h;
  h.ciphertext = crypto::aes128_ctr(keys.enc, crypto::AesIv{}, message);
  h.mac = crypto::hmac_sha1(keys.mac, h.ciphertext);

  std::array<std::uint8_t, kKeyBlockBytes> plain{};
  std::copy(keys.enc.begin(), keys.enc.end(), plain.begin());
  std::copy(keys.mac.begin(), keys.mac.end(), plain.begin() + 16);
  const auto iv = detail::key_block_iv(h.mac);
  for (const auto& t : tags) {
    KeyBlock kb{};
    crypto::aes128_ctr(t.tag_key, iv, plain, kb);
    h.short_tags.push_back(t.short_tag);
    h.key_blocks.push_back(kb);
  }
  return h;
}

inline Hoot seal(ByteView message, std::span<const TagMaterial> tags, EntropySource& rng) {
  if (tags.empty()) throw Error("seal requires at least one plain tag");
  return seal_with_keys(message, tags, fresh_session_keys(rng));
}

inline Hoot seal(ByteView message, std::span<const PlainTag> tags, const KdfConfig& cfg, unsigned k,
                 EntropySource& rng) {
  if (tags.empty()) throw Error("seal requires at least one plain tag");
  std::vector<TagMaterial> material;
  material.reserve(tags.size());
  for (const auto& t : tags) material.push_back(derive_tag(t, cfg, k));
  return seal(message, material, rng);
}

/// Recovers the session keys from key block `index` and checks them against
/// the MAC. Returns them only if the MAC verifies.
inline std::optional<SessionKeys> unlock_keys(const Hoot& hoot, std::size_t index, const TagMaterial& tag) {
  std::array<std::uint8_t, kKeyBlockBytes> plain{};
  crypto::aes128_ctr(tag.tag_key, detail::key_block_iv(hoot.mac), hoot.key_blocks[index], plain);
  SessionKeys keys;
  std::copy_n(plain.begin(), 16, keys.enc.begin());
  std::copy_n(plain.begin() + 16, 16, keys.mac.begin());
  auto mac = crypto::hmac_sha1(keys.mac, hoot.ciphertext);
  if (!crypto::equal_ct(mac, hoot.mac)) return std::nullopt;
  return keys;
}

/// Tries every position carrying this group's short tag. The MAC is checked
/// before the message is decrypted; a foreign hoot on a colliding short tag
/// is a plain no-match.
inline std::optional<Bytes> open(const Hoot& hoot, const TagMaterial& tag) {
  if (hoot.short_tags.size() != hoot.key_blocks.size()) return std::nullopt;
  for (std::size_t i = 0; i < hoot.short_tags.size(); ++i) {
    if (hoot.short_tags[i] != tag.short_tag) continue;
    if (auto keys = unlock_keys(hoot, i, tag))
      return crypto::aes128_ctr(keys->enc, crypto::AesIv{}, hoot.ciphertext);
  }
  return std::nullopt;
}

inline std::optional<Bytes> open(const Hoot& hoot, const PlainTag& tag, const KdfConfig& cfg, unsigned k) {
  return open(hoot, derive_tag(tag, cfg, k));
}

}  // namespace h00t

template <>
struct std::hash<h00t::ShortTag> {
  std::size_t operator()(const h00t::ShortTag& t) const noexcept {
    return std::hash<std::uint64_t>{}(t.value * 0x9e3779b97f4a7c15ull ^ t.k);
  }
};
