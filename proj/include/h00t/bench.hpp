#pragma once

// Throughput measurement for sealing and opening. Tag material is derived
// once up front, as a client would cache it, so the figures measure the
// per-hoot protocol work: session keys, two AES-CTR passes, HMAC, framing.

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include "h00t/entropy.hpp"
#include "h00t/tagcrypt.hpp"
#include "h00t/wirecodec.hpp"

namespace h00t {

struct BenchConfig {
  WireParams params{};
  std::size_t message_bytes = 40;
  double seconds_per_phase = 0.5;
  std::size_t pool = 256;  // distinct wire lines cycled through by the open phases
  /// One hoot in `match_every` opens successfully in the mixed phase.
  std::size_t match_every = 10;
};

struct BenchReport {
  double seal_per_second = 0.0;
  double open_reject_per_second = 0.0;  // short tag matches, MAC does not
  double open_match_per_second = 0.0;
  double open_mix_per_second = 0.0;
  std::uint64_t seal_count = 0;
  std::uint64_t open_count = 0;

  double ratio() const { return seal_per_second > 0.0 ? open_reject_per_second / seal_per_second : 0.0; }

  std::string to_text() const {
    return "seal_per_second=" + std::to_string(seal_per_second) +
           "\nopen_reject_per_second=" + std::to_string(open_reject_per_second) +
           "\nopen_match_per_second=" + std::to_string(open_match_per_second) +
           "\nopen_mix_per_second=" + std::to_string(open_mix_per_second) +
           "\nopen_seal_ratio=" + std::to_string(ratio()) + "\n";
  }
};

namespace detail {

template <class F>
double rate_of(double seconds, std::uint64_t& count, F&& step) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  const auto until = start + std::chrono::duration<double>(seconds);
  std::uint64_t n = 0;
  auto now = start;
  do {
    for (int i = 0; i < 64; ++i) step(n++);
    now = clock::now();
  } while (now < until);
  count += n;
  return static_cast<double>(n) / std::chrono::duration<double>(now - start).count();
}

}  // namespace detail

/// `ours` and `foreign` must share a short tag (see the collider) so that the
/// reject phase exercises the MAC check rather than the short-tag filter.
inline BenchReport run_bench(const BenchConfig& cfg, const TagMaterial& ours, const TagMaterial& foreign,
                             EntropySource& rng) {
  if (ours.short_tag != foreign.short_tag) throw Error("bench needs two tags sharing a short tag");
  if (cfg.pool == 0 || cfg.match_every == 0) throw Error("bench pool and match interval must be >= 1");
  const std::size_t len = std::min(cfg.message_bytes, capacity(cfg.params, 1));
  const Bytes message(len, 'x');
  const std::array<TagMaterial, 1> mine{ours};
  const std::array<TagMaterial, 1> theirs{foreign};

  BenchReport r;
  volatile std::size_t sink = 0;
  r.seal_per_second = detail::rate_of(cfg.seconds_per_phase, r.seal_count, [&](std::uint64_t) {
    sink = sink + encode(seal(message, mine, rng), cfg.params).text.size();
  });

  std::vector<std::string> own_lines, foreign_lines;
  for (std::size_t i = 0; i < cfg.pool; ++i) {
    own_lines.push_back(encode(seal(message, mine, rng), cfg.params).text);
    foreign_lines.push_back(encode(seal(message, theirs, rng), cfg.params).text);
  }
  auto try_open = [&](const std::string& line) {
    const auto got = open(parse(line, cfg.params), ours);
    sink = sink + (got ? got->size() : 0);
  };
  r.open_reject_per_second = detail::rate_of(cfg.seconds_per_phase, r.open_count,
                                             [&](std::uint64_t i) { try_open(foreign_lines[i % cfg.pool]); });
  r.open_match_per_second = detail::rate_of(cfg.seconds_per_phase, r.open_count,
                                            [&](std::uint64_t i) { try_open(own_lines[i % cfg.pool]); });
  r.open_mix_per_second = detail::rate_of(cfg.seconds_per_phase, r.open_count, [&](std::uint64_t i) {
    try_open(i % cfg.match_every == 0 ? own_lines[i % cfg.pool] : foreign_lines[i % cfg.pool]);
  });
  return r;
}

}  // namespace h00t
