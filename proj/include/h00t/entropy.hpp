#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "h00t/crypto.hpp"

namespace h00t {

/// Source of session-key randomness injected into sealing.
class EntropySource {
public:
  virtual ~EntropySource() = default;
  virtual void fill(std::span<std::uint8_t> out) = 0;
};

/// Operating-system CSPRNG (OpenSSL RAND_bytes).
class SystemEntropy final : public EntropySource {
public:
  void fill(std::span<std::uint8_t> out) override { crypto::random_bytes(out); }
};

/// Reproducible keystream: AES-128-CTR keyed by SHA-1 of the seed. Only for
/// tests and seeded simulations; sealed messages become predictable to
/// anyone who knows the seed.
class SeededEntropy final : public EntropySource {
public:
  explicit SeededEntropy(std::uint64_t seed) {
    std::string s = "h00t-seeded-entropy:" + std::to_string(seed);
    auto d = crypto::sha1(ByteView(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
    std::copy_n(d.begin(), key_.size(), key_.begin());
  }

  void fill(std::span<std::uint8_t> out) override {
    static constexpr std::array<std::uint8_t, crypto::kAesBlockBytes> zero{};
    std::size_t done = 0;
    while (done < out.size()) {
      crypto::AesIv iv{};
      std::uint64_t c = counter_++;
      for (int i = 0; i < 8; ++i) iv[15 - i] = static_cast<std::uint8_t>(c >> (8 * i));
      std::array<std::uint8_t, crypto::kAesBlockBytes> block{};
      crypto::aes128_ctr(key_, iv, zero, block);
      std::size_t n = std::min(block.size(), out.size() - done);
      std::copy_n(block.begin(), n, out.begin() + static_cast<std::ptrdiff_t>(done));
      done += n;
    }
  }

private:
  crypto::AesKey key_{};
  std::uint64_t counter_ = 0;
};

}  // namespace h00t
