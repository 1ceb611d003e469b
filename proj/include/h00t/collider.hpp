#pragma once

// Find-Tag: append suffixes drawn from an alphabet to a prefix until the
// derived short tag equals a target short tag.
//
// Candidates are addressed by position in a visit order: identity order for
// exhaustive search, a seeded permutation for random search. Shards are
// strided slices of that order (offset, offset+stride, ...), so sharded
// results merge back into exactly the unsharded result.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <iterator>
#include <limits>
#include <optional>
#include <stop_token>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "h00t/crypto.hpp"
#include "h00t/permutation.hpp"
#include "h00t/tagcrypt.hpp"

namespace h00t {

inline constexpr std::string_view kAlphanumeric62 =
    "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz";

class SearchError : public Error {
public:
  explicit SearchError(const std::string& what) : Error("collider: " + what) {}
};

enum class SearchMode { Exhaustive, RandomUntilN };

struct SearchSpec {
  std::string prefix;
  std::variant<PlainTag, ShortTag> target = ShortTag{};
  std::string alphabet = std::string(kAlphanumeric62);
  unsigned suffix_length = 3;
  SearchMode mode = SearchMode::Exhaustive;
  std::uint64_t want = 1;  // matches to collect in RandomUntilN mode
  unsigned k = kDefaultShortTagBits;
  KdfConfig kdf = KdfConfig::fast_hash();
  std::uint64_t seed = 0;
  std::uint64_t shard_offset = 0;
  std::uint64_t shard_stride = 1;

  /// |alphabet|^suffix_length; throws if it does not fit in 64 bits.
  std::uint64_t space_size() const {
    if (alphabet.empty()) throw SearchError("empty suffix alphabet");
    std::uint64_t n = 1;
    for (unsigned i = 0; i < suffix_length; ++i) {
      if (n > std::numeric_limits<std::uint64_t>::max() / alphabet.size())
        throw SearchError("search space |A|^L exceeds 64 bits");
      n *= alphabet.size();
    }
    return n;
  }

  /// The suffix at a given index: base-|A| digits, most significant first.
  std::string suffix(std::uint64_t index) const {
    std::string s(suffix_length, alphabet.front());
    for (unsigned i = suffix_length; i-- > 0;) {
      s[i] = alphabet[index % alphabet.size()];
      index /= alphabet.size();
    }
    return s;
  }
};

struct Match {
  PlainTag plain_tag;
  ShortTag short_tag;
  std::uint64_t position = 0;  // place in the visit order
  bool operator==(const Match&) const = default;
};

struct SearchResult {
  std::vector<Match> matches;
  std::uint64_t candidates_tried = 0;
  double elapsed_seconds = 0.0;
};

namespace detail {

// The collider also accepts widths below the wire minimum, which keeps
// exhaustive checks against a brute-force oracle cheap.
inline void validate_search_bits(unsigned k) {
  if (k < 1 || k > kMaxShortTagBits)
    throw ConfigError("search short tag length must be in [1, 64] bits, got " + std::to_string(k));
}

inline ShortTag plain_short_tag(const PlainTag& tag, const KdfConfig& kdf, unsigned k) {
  validate_search_bits(k);
  if (k >= kMinShortTagBits) return derive_tag(tag, kdf, k).short_tag;
  const ShortTag wide = derive_tag(tag, kdf, kMinShortTagBits).short_tag;
  return ShortTag{wide.value >> (kMinShortTagBits - k), k};
}

inline void validate(const SearchSpec& spec) {
  validate_search_bits(spec.k);
  spec.kdf.validate();
  (void)spec.space_size();
  for (std::size_t i = 0; i < spec.alphabet.size(); ++i) {
    const unsigned char c = static_cast<unsigned char>(spec.alphabet[i]);
    if (c <= ' ' || c == '#' || c >= 0x80) throw SearchError("alphabet glyphs must be printable ASCII other than '#'");
    if (spec.alphabet.find(spec.alphabet[i], i + 1) != std::string::npos)
      throw SearchError("alphabet contains a repeated glyph");
  }
  if (auto why = PlainTag::invalid_reason(spec.prefix + spec.suffix(0)))
    throw SearchError("candidate plain tags would be invalid: " + *why);
  if (spec.shard_stride == 0) throw SearchError("shard stride must be >= 1");
  if (spec.mode == SearchMode::RandomUntilN && spec.want == 0) throw SearchError("want must be >= 1");
}

/// Short tag of a candidate; fast-hash mode takes the digest prefix directly.
class CandidateHasher {
public:
  CandidateHasher(const KdfConfig& kdf, unsigned k) : kdf_(kdf), k_(k) {}

  ShortTag operator()(const std::string& candidate) {
    if (kdf_.mode == KdfMode::FastHash) return short_tag_of(sha1_(candidate), k_);
    return plain_short_tag(PlainTag(candidate), kdf_, k_);
  }

private:
  KdfConfig kdf_;
  unsigned k_;
  crypto::Sha1 sha1_;
};

}  // namespace detail

inline ShortTag resolve_target(const SearchSpec& spec) {
  if (const auto* t = std::get_if<ShortTag>(&spec.target)) {
    if (t->k != spec.k) throw SearchError("target short tag width differs from k");
    return *t;
  }
  return detail::plain_short_tag(std::get<PlainTag>(spec.target), spec.kdf, spec.k);
}

/// Memory-hard KDFs multiply search cost by the per-guess KDF cost.
inline bool search_is_slow(const SearchSpec& spec) {
  return spec.kdf.mode == KdfMode::MemoryHard;
}

inline SearchResult find_tag(const SearchSpec& spec, std::stop_token stop = {}) {
  detail::validate(spec);
  const auto start = std::chrono::steady_clock::now();
  const ShortTag target = resolve_target(spec);
  const std::uint64_t size = spec.space_size();
  std::optional<IndexPermutation> order;
  if (spec.mode == SearchMode::RandomUntilN) order.emplace(size, spec.seed);

  detail::CandidateHasher hasher(spec.kdf, spec.k);
  SearchResult result;
  std::string candidate = spec.prefix + spec.suffix(0);
  const std::size_t base = spec.prefix.size();
  const std::uint64_t radix = spec.alphabet.size();

  for (std::uint64_t pos = spec.shard_offset; pos < size; pos += spec.shard_stride) {
    if (stop.stop_requested()) break;
    std::uint64_t index = order ? (*order)(pos) : pos;
    for (unsigned i = spec.suffix_length; i-- > 0;) {
      candidate[base + i] = spec.alphabet[index % radix];
      index /= radix;
    }
    ++result.candidates_tried;
    const ShortTag tag = hasher(candidate);
    if (tag == target) {
      result.matches.push_back(Match{PlainTag(candidate), tag, pos});
      if (spec.mode == SearchMode::RandomUntilN && result.matches.size() >= spec.want) break;
    }
    if (spec.shard_stride > size - pos) break;
  }

  if (spec.suffix_length == 0 && spec.shard_offset == 0 && result.matches.empty())
    throw SearchError("suffix length 0 leaves only the prefix, which does not collide with the target");
  result.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

/// Splits a spec into `shards` disjoint strided slices that cover its space.
/// More shards than candidates is allowed; the surplus shards are empty.
inline std::vector<SearchSpec> partition(const SearchSpec& spec, std::uint64_t shards) {
  if (shards == 0) throw SearchError("shard count must be >= 1");
  std::vector<SearchSpec> out;
  out.reserve(shards);
  for (std::uint64_t i = 0; i < shards; ++i) {
    SearchSpec s = spec;
    s.shard_offset = spec.shard_offset + i * spec.shard_stride;
    s.shard_stride = spec.shard_stride * shards;
    out.push_back(std::move(s));
  }
  return out;
}

/// Merges shard results into visit order. In RandomUntilN mode this keeps the
/// first `want` matches, which equals the unsharded answer as long as each
/// shard ran until it had `want` matches or was exhausted.
inline SearchResult merge(std::vector<SearchResult> parts, const SearchSpec& spec) {
  SearchResult out;
  for (auto& p : parts) {
    out.candidates_tried += p.candidates_tried;
    out.elapsed_seconds = std::max(out.elapsed_seconds, p.elapsed_seconds);
    std::move(p.matches.begin(), p.matches.end(), std::back_inserter(out.matches));
  }
  std::sort(out.matches.begin(), out.matches.end(),
            [](const Match& a, const Match& b) { return a.position < b.position; });
  if (spec.mode == SearchMode::RandomUntilN && out.matches.size() > spec.want)
    out.matches.erase(out.matches.begin() + static_cast<std::ptrdiff_t>(spec.want), out.matches.end());
  return out;
}

/// Runs each shard on its own thread and merges. A stop request on `stop`
/// reaches every shard before its next candidate.
inline SearchResult find_tag_parallel(const SearchSpec& spec, std::uint64_t shards, std::stop_token stop = {}) {
  detail::validate(spec);
  if (spec.suffix_length == 0 || shards <= 1) return find_tag(spec, stop);
  const auto start = std::chrono::steady_clock::now();
  auto specs = partition(spec, shards);
  std::vector<SearchResult> parts(specs.size());
  std::vector<std::exception_ptr> errors(specs.size());
  std::stop_source local;
  std::stop_callback forward(stop, [&local] { local.request_stop(); });
  {
    std::vector<std::jthread> workers;
    workers.reserve(specs.size());
    for (std::size_t i = 0; i < specs.size(); ++i) {
      workers.emplace_back([&, i] {
        try {
          parts[i] = find_tag(specs[i], local.get_token());
        } catch (...) {
          errors[i] = std::current_exception();
          local.request_stop();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  auto merged = merge(std::move(parts), spec);
  merged.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return merged;
}

struct RuntimeEstimate {
  double exhaustive_seconds = 0.0;
  double first_match_seconds = 0.0;  // expected time to the first collision, 2^k guesses
};

inline RuntimeEstimate estimate_runtime(const SearchSpec& spec, double hash_rate, unsigned cores) {
  if (!(hash_rate > 0.0)) throw SearchError("hash rate must be positive");
  if (cores == 0) throw SearchError("core count must be >= 1");
  const double throughput = hash_rate * cores;
  const double space = std::pow(static_cast<double>(spec.alphabet.size()), spec.suffix_length);
  return RuntimeEstimate{space / throughput, std::ldexp(1.0, static_cast<int>(spec.k)) / throughput};
}

}  // namespace h00t
