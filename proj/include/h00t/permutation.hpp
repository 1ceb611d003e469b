#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>

namespace h00t {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Seeded bijection on [0, size): a balanced Feistel network over the
/// smallest even-width power-of-two domain covering `size`, with cycle
/// walking back into range. Visits every index exactly once without
/// materialising the sequence.
class IndexPermutation {
public:
  static constexpr int kRounds = 6;

  IndexPermutation(std::uint64_t size, std::uint64_t seed) : size_(size) {
    if (size == 0) throw std::invalid_argument("permutation over an empty domain");
    unsigned bits = 2;
    while (bits < 64 && (std::uint64_t{1} << bits) < size) bits += 2;
    half_bits_ = bits / 2;
    half_mask_ = half_bits_ == 32 ? 0xffffffffull : ((std::uint64_t{1} << half_bits_) - 1);
    std::uint64_t s = seed;
    for (auto& k : keys_) k = s = splitmix64(s);
  }

  std::uint64_t size() const { return size_; }

  std::uint64_t operator()(std::uint64_t index) const {
    if (index >= size_) throw std::out_of_range("permutation index out of range");
    std::uint64_t x = encrypt(index);
    while (x >= size_) x = encrypt(x);
    return x;
  }

private:
  std::uint64_t encrypt(std::uint64_t x) const {
    std::uint64_t left = (x >> half_bits_) & half_mask_;
    std::uint64_t right = x & half_mask_;
    for (auto k : keys_) {
      std::uint64_t next = left ^ (splitmix64(right ^ k) & half_mask_);
      left = right;
      right = next;
    }
    return (left << half_bits_) | right;
  }

  std::uint64_t size_;
  unsigned half_bits_ = 1;
  std::uint64_t half_mask_ = 1;
  std::array<std::uint64_t, kRounds> keys_{};
};

}  // namespace h00t
