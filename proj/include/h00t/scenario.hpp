#pragma once

// Scripted feed scenarios: groups post sealed hoots on a seeded schedule
// against a censor policy, and the run is summarised as FeedStats.
// The JSON schema is documented in docs/scenario-format.md.

#include <algorithm>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "h00t/collider.hpp"
#include "h00t/entropy.hpp"
#include "h00t/feedsim.hpp"
#include "h00t/tagcrypt.hpp"
#include "h00t/wirecodec.hpp"

namespace h00t::feed {

class ScenarioError : public Error {
public:
  explicit ScenarioError(const std::string& what) : Error("scenario: " + what) {}
};

struct GroupSpec {
  std::string name;
  std::string plain_tag;  // may be empty if collide_with is set
  std::uint64_t posts = 0;
  double rate = 1.0;  // posts per logical time unit
  bool target = false;
  unsigned senders = 1;
  std::string message = "hello";
  /// Derive plain_tag with the collider: `collide_prefix` plus a suffix whose
  /// short tag matches the named group's.
  std::string collide_with;
  std::string collide_prefix;
  unsigned collide_suffix_length = 3;
};

struct RuleSpec {
  enum class Kind { BlockShortTag, BlockSender, WhitelistShortTag } kind = Kind::BlockShortTag;
  std::string group;      // short tag taken from this group's plain tag
  std::string short_tag;  // or given directly as a wire token
  std::string sender;
  std::vector<std::string> known;        // plain tags the censor knows
  std::vector<std::string> known_groups;  // or groups whose plain tags it knows
};

struct ScenarioScript {
  std::uint64_t seed = 0;
  unsigned k = kDefaultShortTagBits;
  KdfConfig kdf = KdfConfig::fast_hash();
  std::vector<GroupSpec> groups;
  std::vector<RuleSpec> policy;
  std::uint64_t replays = 0;    // reposts of already-accepted wire lines
  std::uint64_t malformed = 0;  // junk lines posted
  std::optional<std::size_t> replay_horizon;
};

struct TagStats {
  ShortTag short_tag;
  std::uint64_t posts_total = 0;
  std::uint64_t posts_blocked = 0;
  std::size_t distinct_groups = 0;
  /// Share of the tag's posts that come from non-target groups.
  double cover_ratio = 0.0;
  bool operator==(const TagStats&) const = default;
};

struct FeedStats {
  std::vector<TagStats> per_tag;  // by short tag
  std::uint64_t stored = 0;
  std::uint64_t target_posts = 0;
  std::uint64_t target_blocked = 0;
  std::uint64_t collateral_posts = 0;  // posts from non-target groups
  std::uint64_t collateral_blocked = 0;
  double target_block_rate = 0.0;
  double collateral_block_rate = 0.0;
  std::uint64_t replays_attempted = 0;
  std::uint64_t replays_rejected = 0;
  std::uint64_t malformed_rejected = 0;

  bool operator==(const FeedStats&) const = default;

  std::string to_text(const WireParams& params) const {
    std::ostringstream out;
    out << std::fixed << std::setprecision(6);
    out << "stored=" << stored << '\n'
        << "target_posts=" << target_posts << '\n'
        << "target_blocked=" << target_blocked << '\n'
        << "target_block_rate=" << target_block_rate << '\n'
        << "collateral_posts=" << collateral_posts << '\n'
        << "collateral_blocked=" << collateral_blocked << '\n'
        << "collateral_block_rate=" << collateral_block_rate << '\n'
        << "replays_attempted=" << replays_attempted << '\n'
        << "replays_rejected=" << replays_rejected << '\n'
        << "malformed_rejected=" << malformed_rejected << '\n';
    for (const auto& t : per_tag) {
      WireParams p = params;
      p.k = t.short_tag.k;
      out << "tag #" << encode_short_tag(t.short_tag, p) << " total=" << t.posts_total
          << " blocked=" << t.posts_blocked << " groups=" << t.distinct_groups << " cover_ratio=" << t.cover_ratio
          << '\n';
    }
    return out.str();
  }
};

inline ScenarioScript load_scenario(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ScenarioError(std::string("invalid JSON: ") + e.what());
  }
  try {
    ScenarioScript s;
    s.seed = j.value("seed", std::uint64_t{0});
    s.k = j.value("k", kDefaultShortTagBits);
    const std::string kdf = j.value("kdf", std::string("fast-hash"));
    if (kdf == "memory-hard") {
      crypto::ScryptParams p;
      p.n = j.value("scrypt_n", p.n);
      p.r = j.value("scrypt_r", p.r);
      p.p = j.value("scrypt_p", p.p);
      s.kdf = KdfConfig::memory_hard(p);
    } else if (kdf != "fast-hash") {
      throw ScenarioError("unknown kdf '" + kdf + "'");
    }
    s.replays = j.value("replays", std::uint64_t{0});
    s.malformed = j.value("malformed", std::uint64_t{0});
    if (j.contains("replay_horizon")) s.replay_horizon = j.at("replay_horizon").get<std::size_t>();
    for (const auto& g : j.at("groups")) {
      GroupSpec gs;
      gs.name = g.at("name").get<std::string>();
      gs.plain_tag = g.value("plain_tag", std::string());
      gs.posts = g.at("posts").get<std::uint64_t>();
      gs.rate = g.value("rate", 1.0);
      gs.target = g.value("target", false);
      gs.senders = g.value("senders", 1u);
      gs.message = g.value("message", gs.message);
      if (g.contains("collide_with")) {
        const auto& c = g.at("collide_with");
        gs.collide_with = c.at("group").get<std::string>();
        gs.collide_prefix = c.at("prefix").get<std::string>();
        gs.collide_suffix_length = c.value("suffix_length", 3u);
      }
      s.groups.push_back(std::move(gs));
    }
    for (const auto& r : j.value("policy", nlohmann::json::array())) {
      RuleSpec rs;
      const std::string kind = r.at("rule").get<std::string>();
      if (kind == "block-short-tag")
        rs.kind = RuleSpec::Kind::BlockShortTag;
      else if (kind == "block-sender")
        rs.kind = RuleSpec::Kind::BlockSender;
      else if (kind == "whitelist-short-tag")
        rs.kind = RuleSpec::Kind::WhitelistShortTag;
      else
        throw ScenarioError("unknown rule '" + kind + "'");
      rs.group = r.value("group", std::string());
      rs.short_tag = r.value("short_tag", std::string());
      rs.sender = r.value("sender", std::string());
      rs.known = r.value("known", std::vector<std::string>{});
      rs.known_groups = r.value("known_groups", std::vector<std::string>{});
      s.policy.push_back(std::move(rs));
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ScenarioError(std::string("schema: ") + e.what());
  }
}

namespace detail {

inline std::string sender_name(const GroupSpec& g, std::uint64_t i) {
  return g.name + "-" + std::to_string(i % std::max(1u, g.senders));
}

// Resolves collide_with references into concrete plain tags.
inline std::map<std::string, PlainTag> resolve_groups(const ScenarioScript& s) {
  std::map<std::string, const GroupSpec*> by_name;
  for (const auto& g : s.groups) {
    if (g.name.empty()) throw ScenarioError("group without a name");
    if (!by_name.emplace(g.name, &g).second) throw ScenarioError("duplicate group '" + g.name + "'");
  }
  std::map<std::string, PlainTag> tags;
  for (const auto& g : s.groups)
    if (g.collide_with.empty()) {
      if (g.plain_tag.empty()) throw ScenarioError("group '" + g.name + "' has no plain tag");
      tags.emplace(g.name, PlainTag::from_hashtag(g.plain_tag));
    }
  for (const auto& g : s.groups) {
    if (g.collide_with.empty()) continue;
    auto base = tags.find(g.collide_with);
    if (base == tags.end()) throw ScenarioError("group '" + g.name + "' collides with undefined group '" + g.collide_with + "'");
    SearchSpec spec;
    spec.prefix = g.collide_prefix;
    spec.target = base->second;
    spec.suffix_length = g.collide_suffix_length;
    spec.mode = SearchMode::RandomUntilN;
    spec.want = 1;
    spec.k = s.k;
    spec.kdf = s.kdf;
    spec.seed = s.seed;
    auto r = find_tag(spec);
    if (r.matches.empty()) throw ScenarioError("no collision found for group '" + g.name + "'");
    tags.emplace(g.name, r.matches.front().plain_tag);
  }
  return tags;
}

}  // namespace detail

/// Resolved plain tag of every group (after any collider searches).
inline std::map<std::string, PlainTag> scenario_plain_tags(const ScenarioScript& s) {
  return detail::resolve_groups(s);
}

inline FeedStats run_scenario(const ScenarioScript& script) {
  validate_short_tag_bits(script.k);
  const auto tags = detail::resolve_groups(script);
  WireParams params;
  params.k = script.k;

  CensorPolicy policy;
  auto group_tag = [&](const std::string& name) {
    auto it = tags.find(name);
    if (it == tags.end()) throw ScenarioError("policy references undefined group '" + name + "'");
    return derive_tag(it->second, script.kdf, script.k).short_tag;
  };
  auto rule_tag = [&](const RuleSpec& r) {
    if (!r.group.empty()) return group_tag(r.group);
    if (r.short_tag.empty()) throw ScenarioError("rule needs a group or short_tag");
    std::string_view tok = r.short_tag;
    if (!tok.empty() && tok.front() == '#') tok.remove_prefix(1);
    return decode_short_tag(tok, params);
  };
  for (const auto& r : script.policy) {
    switch (r.kind) {
      case RuleSpec::Kind::BlockShortTag: policy.rules.push_back(BlockShortTag{rule_tag(r)}); break;
      case RuleSpec::Kind::BlockSender: policy.rules.push_back(BlockSender{r.sender}); break;
      case RuleSpec::Kind::WhitelistShortTag: {
        WhitelistShortTag w{rule_tag(r), {}};
        for (const auto& t : r.known) w.known.push_back(PlainTag::from_hashtag(t));
        for (const auto& name : r.known_groups) {
          auto it = tags.find(name);
          if (it == tags.end()) throw ScenarioError("policy references undefined group '" + name + "'");
          w.known.push_back(it->second);
        }
        policy.rules.push_back(std::move(w));
        break;
      }
    }
  }

  // Seeded schedule: exponential inter-arrival times per group, merged.
  struct Event {
    double time;
    std::size_t group;
    std::uint64_t seq;
  };
  std::mt19937_64 rng(script.seed);
  std::vector<Event> events;
  for (std::size_t g = 0; g < script.groups.size(); ++g) {
    const auto& gs = script.groups[g];
    if (!(gs.rate > 0.0)) throw ScenarioError("group '" + gs.name + "' needs a positive rate");
    std::exponential_distribution<double> gap(gs.rate);
    double t = 0.0;
    for (std::uint64_t i = 0; i < gs.posts; ++i) events.push_back({t += gap(rng), g, i});
  }
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    return a.time != b.time ? a.time < b.time : a.group < b.group;
  });

  std::vector<TagMaterial> material;
  for (const auto& g : script.groups) material.push_back(derive_tag(tags.at(g.name), script.kdf, script.k));

  Feed feed(params, script.kdf, policy, script.replay_horizon);
  SeededEntropy entropy(script.seed);
  FeedStats stats;
  struct PerTag {
    std::uint64_t total = 0, blocked = 0, cover = 0;
    std::set<std::size_t> groups;
  };
  std::map<ShortTag, PerTag> per_tag;
  std::vector<std::string> accepted_wires;

  const std::size_t cap = capacity(params, 1);
  for (const auto& ev : events) {
    const auto& g = script.groups[ev.group];
    std::string text = g.message + " " + std::to_string(ev.seq);
    if (text.size() > cap) text.resize(cap);
    const std::array<TagMaterial, 1> mine{material[ev.group]};
    const auto wire = encode(seal(to_bytes(text), mine, entropy), params);
    const auto res = feed.post(detail::sender_name(g, ev.seq), wire.text);

    auto& pt = per_tag[material[ev.group].short_tag];
    ++pt.total;
    pt.groups.insert(ev.group);
    const bool blocked = !res.accepted && res.reason == RejectReason::Censored;
    if (blocked) ++pt.blocked;
    if (g.target) {
      ++stats.target_posts;
      if (blocked) ++stats.target_blocked;
    } else {
      ++pt.cover;
      ++stats.collateral_posts;
      if (blocked) ++stats.collateral_blocked;
    }
    if (res.accepted) accepted_wires.push_back(wire.text);
  }

  for (std::uint64_t i = 0; i < script.malformed; ++i) {
    const auto res = feed.post("junk", "not a hoot " + std::to_string(i));
    if (!res.accepted && res.reason == RejectReason::Malformed) ++stats.malformed_rejected;
  }

  if (!accepted_wires.empty()) {
    std::uniform_int_distribution<std::size_t> pick(0, accepted_wires.size() - 1);
    for (std::uint64_t i = 0; i < script.replays; ++i) {
      ++stats.replays_attempted;
      const auto res = feed.post("replayer", accepted_wires[pick(rng)]);
      if (!res.accepted && res.reason == RejectReason::Replay) ++stats.replays_rejected;
    }
  }

  stats.stored = feed.size();
  stats.target_block_rate =
      stats.target_posts ? static_cast<double>(stats.target_blocked) / static_cast<double>(stats.target_posts) : 0.0;
  stats.collateral_block_rate = stats.collateral_posts ? static_cast<double>(stats.collateral_blocked) /
                                                             static_cast<double>(stats.collateral_posts)
                                                       : 0.0;
  for (const auto& [tag, pt] : per_tag)
    stats.per_tag.push_back(TagStats{tag, pt.total, pt.blocked, pt.groups.size(),
                                     pt.total ? static_cast<double>(pt.cover) / static_cast<double>(pt.total) : 0.0});
  return stats;
}

}  // namespace h00t::feed
