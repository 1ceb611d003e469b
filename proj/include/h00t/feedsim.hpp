#pragma once

// An in-memory microblogging service. Posts are wire messages; the service
// can parse them but cannot decrypt them. It rejects replays, applies a
// censor's policy at post time, and indexes accepted posts by short tag.

#include <algorithm>
#include <array>
#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include "h00t/crypto.hpp"
#include "h00t/tagcrypt.hpp"
#include "h00t/wirecodec.hpp"

namespace h00t::feed {

struct BlockShortTag {
  ShortTag tag;
};

struct BlockSender {
  std::string sender;
};

/// Blocks posts on `tag` that open under none of `known` (the censor's list
/// of innocuous plain tags); posts that do open are let through.
struct WhitelistShortTag {
  ShortTag tag;
  std::vector<PlainTag> known;
};

using Rule = std::variant<BlockShortTag, BlockSender, WhitelistShortTag>;

/// Rules are tried in order; the first rule that applies to a post decides.
struct CensorPolicy {
  std::vector<Rule> rules;
};

struct FeedPost {
  std::uint64_t id = 0;
  std::string sender;
  WireMessage wire;
  std::uint64_t arrival = 0;  // logical clock: number of post attempts so far
  std::vector<ShortTag> short_tags;
};

enum class RejectReason { Malformed, Replay, Censored };

inline std::string_view to_string(RejectReason r) {
  switch (r) {
    case RejectReason::Malformed: return "malformed";
    case RejectReason::Replay: return "replay";
    case RejectReason::Censored: return "censored";
  }
  return "unknown";
}

struct PostResult {
  bool accepted = false;
  std::uint64_t id = 0;
  RejectReason reason = RejectReason::Malformed;
  std::optional<std::size_t> rule_index;  // set when censored
  std::string detail;

  static PostResult ok(std::uint64_t id) { return {true, id, RejectReason::Malformed, std::nullopt, {}}; }
  static PostResult rejected(RejectReason r, std::string detail = {}, std::optional<std::size_t> rule = {}) {
    return {false, 0, r, rule, std::move(detail)};
  }
};

using DedupKey = crypto::Sha1Digest;

/// hash(key blocks || mac): the encrypted session keys act as the nonce.
inline DedupKey dedup_key(const Hoot& h) {
  Bytes b;
  b.reserve(h.key_blocks.size() * kKeyBlockBytes + kMacBytes);
  for (const auto& kb : h.key_blocks) b.insert(b.end(), kb.begin(), kb.end());
  b.insert(b.end(), h.mac.begin(), h.mac.end());
  return crypto::sha1(b);
}

/// Set of dedup keys seen. With a horizon, only the most recent `horizon`
/// keys are remembered.
class ReplayIndex {
public:
  explicit ReplayIndex(std::optional<std::size_t> horizon = std::nullopt) : horizon_(horizon) {}

  bool contains(const DedupKey& k) const { return keys_.contains(k); }

  void insert(const DedupKey& k) {
    if (!keys_.insert(k).second) return;
    if (!horizon_) return;
    order_.push_back(k);
    while (order_.size() > *horizon_) {
      keys_.erase(order_.front());
      order_.pop_front();
    }
  }

  std::size_t size() const { return keys_.size(); }

private:
  struct KeyHash {
    std::size_t operator()(const DedupKey& k) const noexcept {
      std::size_t h = 0;
      for (std::size_t i = 0; i < sizeof(h); ++i) h = (h << 8) | k[i];
      return h;
    }
  };
  std::optional<std::size_t> horizon_;
  std::unordered_set<DedupKey, KeyHash> keys_;
  std::deque<DedupKey> order_;
};

struct TagCounters {
  std::uint64_t total = 0;    // well-formed, non-replayed posts carrying the tag
  std::uint64_t blocked = 0;  // of those, censored
};

/// Single writer, many readers: post() is serialised, search() sees a
/// consistent prefix of accepted posts.
class Feed {
public:
  explicit Feed(WireParams params, KdfConfig kdf = KdfConfig::fast_hash(), CensorPolicy policy = {},
                std::optional<std::size_t> replay_horizon = std::nullopt)
      : params_(params), policy_(std::move(policy)), replays_(replay_horizon) {
    for (const auto& rule : policy_.rules) {
      std::vector<TagMaterial> m;
      if (const auto* w = std::get_if<WhitelistShortTag>(&rule))
        for (const auto& t : w->known) m.push_back(derive_tag(t, kdf, params_.k));
      known_.push_back(std::move(m));
    }
  }

  const WireParams& params() const { return params_; }

  PostResult post(std::string sender, std::string_view wire) {
    std::optional<Hoot> hoot;
    std::string error;
    try {
      hoot = parse(wire, params_);
    } catch (const WireError& e) {
      error = e.what();
    }

    std::unique_lock lock(mu_);
    ++clock_;
    if (!hoot) return PostResult::rejected(RejectReason::Malformed, error);
    const auto key = dedup_key(*hoot);
    if (replays_.contains(key)) return PostResult::rejected(RejectReason::Replay);

    std::vector<ShortTag> tags = hoot->short_tags;
    std::sort(tags.begin(), tags.end());
    tags.erase(std::unique(tags.begin(), tags.end()), tags.end());

    const auto verdict = evaluate(sender, *hoot);
    for (const auto& t : tags) {
      auto& c = counters_[t];
      ++c.total;
      if (verdict) ++c.blocked;
    }
    if (verdict) return PostResult::rejected(RejectReason::Censored, "blocked by rule " + std::to_string(*verdict), verdict);

    replays_.insert(key);
    const std::uint64_t id = ++last_id_;
    for (const auto& t : tags) index_[t].push_back(posts_.size());
    posts_.push_back(FeedPost{id, std::move(sender), WireMessage{std::string(wire)}, clock_, std::move(tags)});
    return PostResult::ok(id);
  }

  /// All accepted posts carrying `tag` with id > since, in id order.
  std::vector<FeedPost> search(const ShortTag& tag, std::uint64_t since = 0) const {
    std::shared_lock lock(mu_);
    std::vector<FeedPost> out;
    auto it = index_.find(tag);
    if (it == index_.end()) return out;
    const auto& slots = it->second;
    auto first = std::upper_bound(slots.begin(), slots.end(), since,
                                  [this](std::uint64_t s, std::size_t slot) { return s < posts_[slot].id; });
    for (; first != slots.end(); ++first) out.push_back(posts_[*first]);
    return out;
  }

  std::size_t size() const {
    std::shared_lock lock(mu_);
    return posts_.size();
  }

  std::uint64_t last_id() const {
    std::shared_lock lock(mu_);
    return last_id_;
  }

  std::map<ShortTag, TagCounters> tag_counters() const {
    std::shared_lock lock(mu_);
    return {counters_.begin(), counters_.end()};
  }

private:
  static bool carries(const Hoot& h, const ShortTag& t) {
    return std::find(h.short_tags.begin(), h.short_tags.end(), t) != h.short_tags.end();
  }

  // Index of the blocking rule, or nullopt if the post passes.
  std::optional<std::size_t> evaluate(const std::string& sender, const Hoot& h) const {
    for (std::size_t i = 0; i < policy_.rules.size(); ++i) {
      const auto& rule = policy_.rules[i];
      if (const auto* b = std::get_if<BlockShortTag>(&rule)) {
        if (carries(h, b->tag)) return i;
      } else if (const auto* s = std::get_if<BlockSender>(&rule)) {
        if (s->sender == sender) return i;
      } else if (const auto* w = std::get_if<WhitelistShortTag>(&rule)) {
        if (!carries(h, w->tag)) continue;
        for (const auto& m : known_[i])
          if (open(h, m)) return std::nullopt;
        return i;
      }
    }
    return std::nullopt;
  }

  WireParams params_;
  CensorPolicy policy_;
  std::vector<std::vector<TagMaterial>> known_;  // per rule, whitelist material

  mutable std::shared_mutex mu_;
  ReplayIndex replays_;
  std::vector<FeedPost> posts_;
  std::unordered_map<ShortTag, std::vector<std::size_t>> index_;
  std::unordered_map<ShortTag, TagCounters> counters_;
  std::uint64_t last_id_ = 0;
  std::uint64_t clock_ = 0;
};

}  // namespace h00t::feed
