#pragma once

// Thin RAII wrappers over the OpenSSL primitives the protocol is built from:
// SHA-1, HMAC-SHA1, AES-128 in counter mode and scrypt. Algorithm handles are
// fetched once per process; contexts are per call or per owning object.

#include <array>
#include <cstdint>
#include <memory>
#include <string>

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/core_names.h>
#include <openssl/params.h>
#include <openssl/kdf.h>
#include <openssl/rand.h>

#include "h00t/bytes.hpp"

namespace h00t::crypto {

inline constexpr std::size_t kSha1Bytes = 20;
inline constexpr std::size_t kAesKeyBytes = 16;
inline constexpr std::size_t kAesBlockBytes = 16;

using Sha1Digest = std::array<std::uint8_t, kSha1Bytes>;
using AesKey = std::array<std::uint8_t, kAesKeyBytes>;
using AesIv = std::array<std::uint8_t, kAesBlockBytes>;

class CryptoError : public Error {
public:
  explicit CryptoError(const std::string& what) : Error("crypto: " + what) {}
};

namespace detail {

struct MdDeleter {
  void operator()(EVP_MD* p) const { EVP_MD_free(p); }
};
struct MdCtxDeleter {
  void operator()(EVP_MD_CTX* p) const { EVP_MD_CTX_free(p); }
};
struct CipherDeleter {
  void operator()(EVP_CIPHER* p) const { EVP_CIPHER_free(p); }
};
struct CipherCtxDeleter {
  void operator()(EVP_CIPHER_CTX* p) const { EVP_CIPHER_CTX_free(p); }
};
struct MacDeleter {
  void operator()(EVP_MAC* p) const { EVP_MAC_free(p); }
};
struct MacCtxDeleter {
  void operator()(EVP_MAC_CTX* p) const { EVP_MAC_CTX_free(p); }
};

// A keyless HMAC-SHA1 context; callers dup it and supply the key at init.
inline const EVP_MAC_CTX* hmac_sha1_template() {
  static const std::unique_ptr<EVP_MAC, MacDeleter> mac(EVP_MAC_fetch(nullptr, "HMAC", nullptr));
  if (!mac) throw CryptoError("HMAC unavailable");
  static const std::unique_ptr<EVP_MAC_CTX, MacCtxDeleter> ctx = [] {
    std::unique_ptr<EVP_MAC_CTX, MacCtxDeleter> c(EVP_MAC_CTX_new(mac.get()));
    char digest[] = "SHA1";
    const OSSL_PARAM params[] = {OSSL_PARAM_construct_utf8_string("digest", digest, 0), OSSL_PARAM_construct_end()};
    if (!c || EVP_MAC_CTX_set_params(c.get(), params) != 1) throw CryptoError("HMAC-SHA1 setup failed");
    return c;
  }();
  return ctx.get();
}

inline const EVP_MD* sha1_md() {
  static const std::unique_ptr<EVP_MD, MdDeleter> md(EVP_MD_fetch(nullptr, "SHA1", nullptr));
  if (!md) throw CryptoError("SHA1 unavailable");
  return md.get();
}

inline const EVP_CIPHER* aes128_ctr_cipher() {
  static const std::unique_ptr<EVP_CIPHER, CipherDeleter> c(
      EVP_CIPHER_fetch(nullptr, "AES-128-CTR", nullptr));
  if (!c) throw CryptoError("AES-128-CTR unavailable");
  return c.get();
}

}  // namespace detail

/// Incremental SHA-1 with a reusable context; the collider keeps one per
/// worker so the hot loop does not allocate.
class Sha1 {
public:
  Sha1() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_) throw CryptoError("EVP_MD_CTX_new failed");
  }

  Sha1Digest operator()(ByteView data) {
    Sha1Digest out{};
    unsigned int len = 0;
    if (EVP_DigestInit_ex2(ctx_.get(), detail::sha1_md(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx_.get(), data.data(), data.size()) != 1 ||
        EVP_DigestFinal_ex(ctx_.get(), out.data(), &len) != 1)
      throw CryptoError("SHA1 failed");
    return out;
  }

  Sha1Digest operator()(std::string_view data) {
    return (*this)(ByteView(reinterpret_cast<const std::uint8_t*>(data.data()), data.size()));
  }

private:
  std::unique_ptr<EVP_MD_CTX, detail::MdCtxDeleter> ctx_;
};

inline Sha1Digest sha1(ByteView data) {
  return Sha1{}(data);
}

inline Sha1Digest hmac_sha1(ByteView key, ByteView data) {
  Sha1Digest out{};
  std::size_t len = 0;
  // One context per thread; EVP_MAC_init with a key starts a fresh MAC.
  thread_local const std::unique_ptr<EVP_MAC_CTX, detail::MacCtxDeleter> ctx(
      EVP_MAC_CTX_dup(detail::hmac_sha1_template()));
  if (!ctx || EVP_MAC_init(ctx.get(), key.data(), key.size(), nullptr) != 1 ||
      EVP_MAC_update(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_MAC_final(ctx.get(), out.data(), &len, out.size()) != 1 || len != out.size())
    throw CryptoError("HMAC-SHA1 failed");
  return out;
}

/// AES-128 in counter mode. The IV is the full initial 128-bit counter block.
/// Encryption and decryption are the same operation.
inline void aes128_ctr(const AesKey& key, const AesIv& iv, ByteView in, std::span<std::uint8_t> out) {
  if (out.size() < in.size()) throw CryptoError("output buffer too small");
  std::unique_ptr<EVP_CIPHER_CTX, detail::CipherCtxDeleter> ctx(EVP_CIPHER_CTX_new());
  int len = 0;
  if (!ctx ||
      EVP_EncryptInit_ex2(ctx.get(), detail::aes128_ctr_cipher(), key.data(), iv.data(), nullptr) != 1 ||
      EVP_EncryptUpdate(ctx.get(), out.data(), &len, in.data(), static_cast<int>(in.size())) != 1)
    throw CryptoError("AES-128-CTR failed");
}

inline Bytes aes128_ctr(const AesKey& key, const AesIv& iv, ByteView in) {
  Bytes out(in.size());
  aes128_ctr(key, iv, in, out);
  return out;
}

struct ScryptParams {
  std::uint64_t n = 1u << 15;  // work factor (CPU/memory cost), power of two
  std::uint64_t r = 8;         // block size (memory factor)
  std::uint64_t p = 1;         // parallelism

  std::uint64_t memory_bytes() const { return 128 * r * (n + p); }
  bool operator==(const ScryptParams&) const = default;
};

inline Bytes scrypt(ByteView password, ByteView salt, const ScryptParams& params, std::size_t out_len) {
  Bytes out(out_len);
  const std::uint64_t maxmem = 2 * params.memory_bytes() + (1u << 20);
  if (EVP_PBE_scrypt(reinterpret_cast<const char*>(password.data()), password.size(), salt.data(),
                     salt.size(), params.n, params.r, params.p, maxmem, out.data(), out.size()) != 1)
    throw CryptoError("scrypt failed (check N is a power of two and memory limits)");
  return out;
}

inline void random_bytes(std::span<std::uint8_t> out) {
  if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1)
    throw CryptoError("RAND_bytes failed");
}

inline bool equal_ct(ByteView a, ByteView b) {
  return a.size() == b.size() && CRYPTO_memcmp(a.data(), b.data(), a.size()) == 0;
}

}  // namespace h00t::crypto
