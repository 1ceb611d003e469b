#pragma once

// Back-of-envelope security and cost arithmetic, plus corpus-level
// anonymity-set statistics (which hashtags share a short tag, and how much
// traffic hides each of them).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "h00t/tagcrypt.hpp"
#include "h00t/wirecodec.hpp"

namespace h00t::analysis {

class AnalysisError : public Error {
public:
  explicit AnalysisError(const std::string& what) : Error("analysis: " + what) {}
};

// ---------------------------------------------------------------------------
// Namespace entropy and brute force

struct Dictionary {
  std::uint64_t size = 0;
};
struct Digits {
  unsigned count = 0;
};
struct Glyphs {
  std::uint64_t alphabet_size = 0;
  unsigned length = 0;
};

using NamespaceComponent = std::variant<Dictionary, Digits, Glyphs>;

struct NamespaceSpec {
  std::vector<NamespaceComponent> components;
};

inline double component_bits(const NamespaceComponent& c) {
  struct Visitor {
    double operator()(const Dictionary& d) const {
      if (d.size == 0) throw AnalysisError("dictionary size must be >= 1");
      return std::log2(static_cast<double>(d.size));
    }
    double operator()(const Digits& d) const { return d.count * std::log2(10.0); }
    double operator()(const Glyphs& g) const {
      if (g.alphabet_size == 0) throw AnalysisError("alphabet size must be >= 1");
      return g.length * std::log2(static_cast<double>(g.alphabet_size));
    }
  };
  return std::visit(Visitor{}, c);
}

/// log2 of the namespace cardinality (product of component sizes).
inline double entropy_bits(const NamespaceSpec& spec) {
  if (spec.components.empty()) throw AnalysisError("namespace has no components");
  double bits = 0.0;
  for (const auto& c : spec.components) bits += component_bits(c);
  if (!(bits > 0.0)) throw AnalysisError("namespace has no entropy");
  return bits;
}

struct BruteForceTime {
  double full_space_seconds = 0.0;
  double expected_seconds = 0.0;  // half the space on average
};

inline BruteForceTime brute_force_time(double entropy_bits, double rate_per_core, double cores) {
  if (!(entropy_bits > 0.0) || !(rate_per_core > 0.0) || !(cores > 0.0))
    throw AnalysisError("entropy, rate and cores must be positive");
  const double full = std::exp2(entropy_bits) / (rate_per_core * cores);
  return {full, full / 2.0};
}

// ---------------------------------------------------------------------------
// Collider odds

/// Probability that |A|^L independent guesses include at least one hit on a
/// fixed c-glyph short tag: 1 - (1 - |A|^-c)^(|A|^L), evaluated as
/// -expm1(|A|^L * log1p(-|A|^-c)) so tiny and huge exponents stay accurate.
inline double collision_probability(std::uint64_t alphabet_size, unsigned tag_glyphs, unsigned suffix_length) {
  if (alphabet_size == 0) throw AnalysisError("alphabet size must be >= 1");
  if (tag_glyphs == 0) throw AnalysisError("short tag length must be >= 1 glyph");
  const long double a = static_cast<long double>(alphabet_size);
  const long double q = std::pow(a, -static_cast<long double>(tag_glyphs));
  const long double trials = std::pow(a, static_cast<long double>(suffix_length));
  if (q >= 1.0L) return 1.0;
  return static_cast<double>(-std::expm1(trials * std::log1p(-q)));
}

// ---------------------------------------------------------------------------
// Bandwidth

struct BandwidthBudget {
  double per_tag_per_second = 0.0;
  double per_tag_per_minute = 0.0;
  double link_messages_per_second = 0.0;
  /// How many times over the link could carry one short tag's share.
  double headroom = 0.0;
};

inline BandwidthBudget bandwidth_budget(double total_rate, unsigned k, double link_bits_per_second,
                                        double message_bits) {
  if (total_rate < 0.0 || !(link_bits_per_second > 0.0) || !(message_bits > 0.0))
    throw AnalysisError("rates and sizes must be positive");
  validate_short_tag_bits(k);
  BandwidthBudget b;
  b.per_tag_per_second = total_rate / std::ldexp(1.0, static_cast<int>(k));
  b.per_tag_per_minute = b.per_tag_per_second * 60.0;
  b.link_messages_per_second = link_bits_per_second / message_bits;
  b.headroom = b.per_tag_per_second > 0.0 ? b.link_messages_per_second / b.per_tag_per_second
                                          : std::numeric_limits<double>::infinity();
  return b;
}

// ---------------------------------------------------------------------------
// Corpus

struct CorpusEntry {
  std::string hashtag;
  std::uint64_t count = 0;
  bool operator==(const CorpusEntry&) const = default;
};

struct Corpus {
  std::vector<CorpusEntry> entries;

  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (const auto& e : entries) t += e.count;
    return t;
  }

  void validate() const {
    std::set<std::string_view> seen;
    for (const auto& e : entries) {
      if (e.count == 0) throw AnalysisError("hashtag '" + e.hashtag + "' has zero count");
      if (!seen.insert(e.hashtag).second) throw AnalysisError("duplicate hashtag '" + e.hashtag + "'");
      (void)PlainTag::from_hashtag(e.hashtag);
    }
  }

  bool operator==(const Corpus&) const = default;
};

/// Reads `hashtag,count` lines. A first line of `hashtag,count` is skipped as
/// a header; blank lines are ignored.
inline Corpus load_corpus(std::istream& in) {
  Corpus c;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (lineno == 1 && line == "hashtag,count") continue;
    const auto comma = line.rfind(',');
    if (comma == std::string::npos || comma == 0)
      throw AnalysisError("line " + std::to_string(lineno) + ": expected 'hashtag,count'");
    const std::string num = line.substr(comma + 1);
    std::uint64_t count = 0;
    std::size_t used = 0;
    try {
      count = std::stoull(num, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != num.size() || num.front() == '-')
      throw AnalysisError("line " + std::to_string(lineno) + ": bad count '" + num + "'");
    c.entries.push_back({line.substr(0, comma), count});
  }
  c.validate();
  return c;
}

inline void save_corpus(std::ostream& out, const Corpus& c) {
  out << "hashtag,count\n";
  for (const auto& e : c.entries) out << e.hashtag << ',' << e.count << '\n';
}

/// Zipf-like corpus: rank r gets weight r^-exponent. Every hashtag gets one
/// tweet and the remaining total - n_tags are spread multinomially by weight.
inline Corpus generate_powerlaw_corpus(std::size_t n_tags, double exponent, std::uint64_t total, std::uint64_t seed) {
  if (n_tags == 0) throw AnalysisError("need at least one hashtag");
  if (!(exponent > 0.0)) throw AnalysisError("exponent must be positive");
  if (total < n_tags) throw AnalysisError("total must be at least one tweet per hashtag");

  std::mt19937_64 rng(seed);
  std::vector<double> weights(n_tags);
  double weight_sum = 0.0;
  for (std::size_t i = 0; i < n_tags; ++i) weight_sum += weights[i] = std::pow(static_cast<double>(i + 1), -exponent);

  Corpus c;
  c.entries.reserve(n_tags);
  static constexpr std::string_view alnum = "abcdefghijklmnopqrstuvwxyz0123456789";
  std::uint64_t remaining = total - n_tags;
  for (std::size_t i = 0; i < n_tags; ++i) {
    std::uint64_t extra = 0;
    if (remaining > 0) {
      const double p = std::clamp(weights[i] / weight_sum, 0.0, 1.0);
      extra = i + 1 == n_tags ? remaining : std::binomial_distribution<std::uint64_t>(remaining, p)(rng);
    }
    remaining -= extra;
    weight_sum -= weights[i];
    std::string name = "tag" + std::to_string(i) + "x";
    for (int j = 0; j < 4; ++j) name.push_back(alnum[rng() % alnum.size()]);
    c.entries.push_back({std::move(name), 1 + extra});
  }
  return c;
}

// ---------------------------------------------------------------------------
// Anonymity report

struct RankCount {
  std::uint64_t rank = 0;
  std::uint64_t count = 0;
};

struct BucketMember {
  std::string hashtag;
  std::uint64_t count = 0;
  /// Tweets from the other hashtags in the bucket per tweet of this one.
  double cover_ratio = 0.0;
};

struct Bucket {
  ShortTag short_tag;
  std::uint64_t volume = 0;
  std::vector<BucketMember> members;  // by count, descending
};

struct AnonymityReport {
  unsigned k = 0;
  std::uint64_t total_volume = 0;
  std::size_t hashtags = 0;
  std::vector<Bucket> buckets;  // by volume, descending
  std::vector<RankCount> rank_frequency;
  double powerlaw_slope = 0.0;

  std::size_t colliding_buckets() const {
    return static_cast<std::size_t>(
        std::count_if(buckets.begin(), buckets.end(), [](const Bucket& b) { return b.members.size() > 1; }));
  }
};

/// Least-squares slope of log(count) against log(rank) over ranks
/// 1..min(max_rank, n). An inspection aid, not a power-law estimator.
inline double loglog_slope(std::vector<std::uint64_t> counts, std::size_t max_rank = 1000) {
  std::sort(counts.rbegin(), counts.rend());
  const std::size_t n = std::min(max_rank, counts.size());
  if (n < 2) return 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(static_cast<double>(i + 1));
    const double y = std::log(static_cast<double>(counts[i]));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double dn = static_cast<double>(n);
  return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

inline AnonymityReport anonymity_report(const Corpus& corpus, unsigned k, const KdfConfig& kdf) {
  if (corpus.entries.empty()) throw AnalysisError("empty corpus");
  corpus.validate();
  validate_short_tag_bits(k);

  std::unordered_map<ShortTag, Bucket> by_tag;
  for (const auto& e : corpus.entries) {
    const ShortTag t = derive_tag(PlainTag::from_hashtag(e.hashtag), kdf, k).short_tag;
    auto& b = by_tag[t];
    b.short_tag = t;
    b.volume += e.count;
    b.members.push_back({e.hashtag, e.count, 0.0});
  }

  AnonymityReport r;
  r.k = k;
  r.hashtags = corpus.entries.size();
  r.total_volume = corpus.total();
  r.buckets.reserve(by_tag.size());
  for (auto& [tag, b] : by_tag) {
    for (auto& m : b.members)
      m.cover_ratio = static_cast<double>(b.volume - m.count) / static_cast<double>(m.count);
    std::sort(b.members.begin(), b.members.end(), [](const BucketMember& x, const BucketMember& y) {
      return x.count != y.count ? x.count > y.count : x.hashtag < y.hashtag;
    });
    r.buckets.push_back(std::move(b));
  }
  std::sort(r.buckets.begin(), r.buckets.end(), [](const Bucket& x, const Bucket& y) {
    return x.volume != y.volume ? x.volume > y.volume : x.short_tag < y.short_tag;
  });

  std::vector<std::uint64_t> counts;
  counts.reserve(corpus.entries.size());
  for (const auto& e : corpus.entries) counts.push_back(e.count);
  std::sort(counts.rbegin(), counts.rend());
  r.rank_frequency.reserve(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) r.rank_frequency.push_back({i + 1, counts[i]});
  r.powerlaw_slope = loglog_slope(counts);
  return r;
}

/// Key-value summary followed by one line per colliding bucket.
inline void write_report(std::ostream& out, const AnonymityReport& r, const WireParams& params,
                         std::size_t max_buckets = 20) {
  std::size_t largest = 0;
  for (const auto& b : r.buckets) largest = std::max(largest, b.members.size());
  out << "k=" << r.k << '\n'
      << "hashtags=" << r.hashtags << '\n'
      << "total_volume=" << r.total_volume << '\n'
      << "short_tags=" << r.buckets.size() << '\n'
      << "colliding_short_tags=" << r.colliding_buckets() << '\n'
      << "largest_bucket=" << largest << '\n'
      << "loglog_slope=" << r.powerlaw_slope << '\n';
  std::size_t shown = 0;
  for (const auto& b : r.buckets) {
    if (b.members.size() < 2) continue;
    if (shown++ == max_buckets) break;
    out << "bucket #" << encode_short_tag(b.short_tag, params) << " volume=" << b.volume;
    for (const auto& m : b.members) out << ' ' << m.hashtag << ':' << m.count << "(cover=" << m.cover_ratio << ')';
    out << '\n';
  }
}

inline void write_rank_frequency(std::ostream& out, const AnonymityReport& r) {
  out << "rank,count\n";
  for (const auto& rc : r.rank_frequency) out << rc.rank << ',' << rc.count << '\n';
}

}  // namespace h00t::analysis
