// h00t: seal and open hoots, search for colliding plain tags, run feed
// scenarios, reproduce the analysis arithmetic, and benchmark.
//
// Exit status: 0 success, 1 usage error, 2 data error.

#include <unistd.h>

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "h00t/h00t.hpp"

namespace {

using namespace h00t;

class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Globals {
  unsigned k = kDefaultShortTagBits;
  std::string kdf = "auto";
  std::uint64_t scrypt_n = crypto::ScryptParams{}.n;
  std::uint64_t scrypt_r = crypto::ScryptParams{}.r;
  std::uint64_t scrypt_p = crypto::ScryptParams{}.p;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* k_opt = nullptr;

  bool seeded() const { return seed_opt && seed_opt->count() > 0; }

  // `fallback` is the per-command default when --kdf is left at "auto".
  KdfConfig kdf_config(KdfMode fallback) const {
    KdfMode mode = fallback;
    if (kdf == "fast-hash") mode = KdfMode::FastHash;
    if (kdf == "memory-hard") mode = KdfMode::MemoryHard;
    KdfConfig cfg = mode == KdfMode::FastHash ? KdfConfig::fast_hash()
                                              : KdfConfig::memory_hard({scrypt_n, scrypt_r, scrypt_p});
    cfg.validate();
    return cfg;
  }

  WireParams wire() const {
    validate_short_tag_bits(k);
    WireParams p;
    p.k = k;
    return p;
  }
};

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  return {std::istream_iterator<std::string>(in), std::istream_iterator<std::string>()};
}

// Plain tags are secrets: --tag works, but H00T_TAGS or the terminal prompt
// keep them out of shell history.
std::vector<PlainTag> read_plain_tags(const std::vector<std::string>& from_flags) {
  std::vector<std::string> raw = from_flags;
  if (raw.empty())
    if (const char* env = std::getenv("H00T_TAGS")) raw = split_ws(env);
  if (raw.empty() && ::isatty(STDERR_FILENO)) {
    std::ifstream tty_in("/dev/tty");
    std::ofstream tty_out("/dev/tty");
    if (tty_in && tty_out) {
      tty_out << "plain tag(s): " << std::flush;
      std::string line;
      std::getline(tty_in, line);
      raw = split_ws(line);
    }
  }
  if (raw.empty()) throw UsageError("no plain tag given: set H00T_TAGS, pass --tag, or run on a terminal");
  std::vector<PlainTag> tags;
  for (const auto& r : raw) tags.push_back(PlainTag::from_hashtag(r));
  return tags;
}

std::unique_ptr<EntropySource> entropy_for(const Globals& g) {
  if (!g.seeded()) return std::make_unique<SystemEntropy>();
  std::cerr << "h00t: warning: --seed makes session keys reproducible; use only for tests\n";
  return std::make_unique<SeededEntropy>(g.seed);
}

void log_config(const std::string& cmd, const Globals& g, const KdfConfig& kdf, const std::string& extra = {}) {
  std::cerr << "h00t " << cmd << ": k=" << g.k << " kdf=" << kdf.describe();
  if (g.seeded()) std::cerr << " seed=" << g.seed;
  if (!extra.empty()) std::cerr << ' ' << extra;
  std::cerr << '\n';
}

std::string read_all(std::istream& in) {
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  return in;
}

// ---------------------------------------------------------------------------

struct SealArgs {
  std::vector<std::string> tags;
  std::string message;
  CLI::Option* message_opt = nullptr;
};

int cmd_seal(const Globals& g, const SealArgs& a) {
  const auto kdf = g.kdf_config(KdfMode::MemoryHard);
  const auto params = g.wire();
  const auto tags = read_plain_tags(a.tags);
  log_config("seal", g, kdf, "tags=" + std::to_string(tags.size()) + " capacity=" +
                                 std::to_string(fits(params, tags.size(), 0) ? capacity(params, tags.size()) : 0));
  std::string message = a.message;
  if (a.message_opt->count() == 0) {
    message = read_all(std::cin);
    if (!message.empty() && message.back() == '\n') message.pop_back();
  }
  auto rng = entropy_for(g);
  const Hoot h = seal_checked(to_bytes(message), tags, kdf, params, *rng);
  std::cout << encode(h, params).text << '\n';
  return 0;
}

struct OpenArgs {
  std::vector<std::string> tags;
  std::string input;
  bool stats = false;
};

int cmd_open(const Globals& g, const OpenArgs& a) {
  const auto kdf = g.kdf_config(KdfMode::MemoryHard);
  const auto params = g.wire();
  const auto tags = read_plain_tags(a.tags);
  log_config("open", g, kdf, "tags=" + std::to_string(tags.size()));
  std::vector<TagMaterial> material;
  for (const auto& t : tags) material.push_back(derive_tag(t, kdf, params.k));

  std::ifstream file;
  if (!a.input.empty() && a.input != "-") file = open_input(a.input);
  std::istream& in = file.is_open() ? static_cast<std::istream&>(file) : std::cin;

  std::uint64_t lines = 0, opened = 0, foreign = 0, rejected = 0, malformed = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++lines;
    Hoot h;
    try {
      h = parse(line, params);
    } catch (const WireError&) {
      ++malformed;
      continue;
    }
    bool ours = false, done = false;
    for (const auto& m : material) {
      ours |= std::find(h.short_tags.begin(), h.short_tags.end(), m.short_tag) != h.short_tags.end();
      if (auto msg = open(h, m)) {
        std::cout.write(reinterpret_cast<const char*>(msg->data()), static_cast<std::streamsize>(msg->size()));
        std::cout << '\n';
        ++opened;
        done = true;
        break;
      }
    }
    if (!done) ++(ours ? rejected : foreign);
  }
  if (in.bad()) throw Error("read error on input");
  std::cout.flush();
  if (a.stats)
    std::cerr << "lines=" << lines << " opened=" << opened << " foreign=" << foreign << " rejected=" << rejected
              << " malformed=" << malformed << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

std::atomic<bool> g_interrupted{false};
extern "C" void on_interrupt(int) { g_interrupted = true; }

struct CollideArgs {
  std::string prefix;
  std::string target;
  std::string target_short;
  unsigned suffix_len = 3;
  std::string alphabet = std::string(kAlphanumeric62);
  std::string mode = "exhaustive";
  std::uint64_t count = 1;
  std::uint64_t shards = 1;
};

int cmd_collide(const Globals& g, const CollideArgs& a) {
  const auto kdf = g.kdf_config(KdfMode::FastHash);
  const auto params = g.wire();
  SearchSpec spec;
  spec.prefix = a.prefix;
  spec.alphabet = a.alphabet;
  spec.suffix_length = a.suffix_len;
  spec.mode = a.mode == "exhaustive" ? SearchMode::Exhaustive : SearchMode::RandomUntilN;
  spec.want = a.count;
  spec.k = params.k;
  spec.kdf = kdf;
  spec.seed = g.seed;
  if (a.target.empty() == a.target_short.empty()) throw UsageError("give exactly one of --target or --target-short");
  if (!a.target.empty()) {
    spec.target = PlainTag::from_hashtag(a.target);
  } else {
    std::string_view tok = a.target_short;
    if (!tok.empty() && tok.front() == '#') tok.remove_prefix(1);
    spec.target = decode_short_tag(tok, params);
  }
  const auto est = estimate_runtime(spec, 1.9e6, static_cast<unsigned>(a.shards));
  std::ostringstream extra;
  extra << "prefix=" << a.prefix << " suffix_len=" << a.suffix_len << " alphabet_size=" << a.alphabet.size()
        << " mode=" << a.mode << " count=" << a.count << " shards=" << a.shards << " space=" << spec.space_size();
  log_config("collide", g, kdf, extra.str());
  if (search_is_slow(spec))
    std::cerr << "h00t collide: warning: memory-hard KDF; every candidate costs a full scrypt evaluation\n";
  else
    std::cerr << "h00t collide: estimate at 1.9e6 hashes/s/shard: exhaustive " << est.exhaustive_seconds << " s\n";

  std::stop_source stop;
  std::signal(SIGINT, on_interrupt);
  std::jthread watcher([&stop](std::stop_token done) {
    while (!done.stop_requested()) {
      if (g_interrupted) {
        stop.request_stop();
        return;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
  });
  const auto result = find_tag_parallel(spec, a.shards, stop.get_token());
  watcher.request_stop();

  for (const auto& m : result.matches)
    std::cout << m.plain_tag.text() << " #" << encode_short_tag(m.short_tag, params) << '\n';
  std::cerr << "h00t collide: matches=" << result.matches.size() << " candidates_tried=" << result.candidates_tried
            << " elapsed_seconds=" << result.elapsed_seconds << (g_interrupted ? " (interrupted)" : "") << '\n';
  return g_interrupted ? 2 : 0;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string scenario;
};

int cmd_simulate(const Globals& g, const SimulateArgs& a) {
  auto in = open_input(a.scenario);
  auto script = feed::load_scenario(in);
  if (g.k_opt->count()) script.k = g.k;
  if (g.seeded()) script.seed = g.seed;
  if (g.kdf != "auto") script.kdf = g.kdf_config(KdfMode::FastHash);
  Globals shown = g;
  shown.k = script.k;
  std::cerr << "h00t simulate: scenario=" << a.scenario << " k=" << script.k << " kdf=" << script.kdf.describe()
            << " seed=" << script.seed << " groups=" << script.groups.size() << " rules=" << script.policy.size()
            << '\n';
  const auto stats = feed::run_scenario(script);
  std::cout << stats.to_text(shown.wire());
  return 0;
}

// ---------------------------------------------------------------------------

struct AnalyzeArgs {
  std::vector<std::uint64_t> dictionaries;
  unsigned digits = 0;
  std::vector<std::string> glyphs;  // "alphabet:length"
  double bits = 0, rate = 0, cores = 1;
  std::uint64_t alphabet_size = 0;
  unsigned tag_glyphs = 0, suffix_len = 0;
  double total_rate = 0, link_bps = 0, message_bytes = 140;
  std::string corpus, rank_out;
  std::size_t max_buckets = 20;
  std::size_t tags = 0;
  double exponent = 1.0;
  std::uint64_t total = 0;
};

std::string human_duration(double s) {
  std::ostringstream o;
  o << std::setprecision(4);
  if (s < 120)
    o << s << " s";
  else if (s < 7200)
    o << s / 60 << " min";
  else if (s < 2 * 86400)
    o << s / 3600 << " h";
  else if (s < 2 * 365.25 * 86400)
    o << s / 86400 << " days";
  else
    o << s / (365.25 * 86400) << " years";
  return o.str();
}

int cmd_entropy(const AnalyzeArgs& a) {
  analysis::NamespaceSpec spec;
  for (auto d : a.dictionaries) spec.components.push_back(analysis::Dictionary{d});
  if (a.digits) spec.components.push_back(analysis::Digits{a.digits});
  for (const auto& g : a.glyphs) {
    const auto colon = g.find(':');
    if (colon == std::string::npos) throw UsageError("--glyphs expects ALPHABET_SIZE:LENGTH");
    spec.components.push_back(
        analysis::Glyphs{std::stoull(g.substr(0, colon)), static_cast<unsigned>(std::stoul(g.substr(colon + 1)))});
  }
  std::cerr << "h00t analyze entropy: components=" << spec.components.size() << '\n';
  std::cout << std::fixed << std::setprecision(4) << "entropy_bits=" << analysis::entropy_bits(spec) << '\n';
  return 0;
}

int cmd_bruteforce(const AnalyzeArgs& a) {
  std::cerr << "h00t analyze bruteforce: bits=" << a.bits << " rate=" << a.rate << " cores=" << a.cores << '\n';
  const auto t = analysis::brute_force_time(a.bits, a.rate, a.cores);
  std::cout << std::setprecision(10) << "full_space_seconds=" << t.full_space_seconds << '\n'
            << "expected_seconds=" << t.expected_seconds << '\n'
            << "full_space_human=" << human_duration(t.full_space_seconds) << '\n';
  return 0;
}

int cmd_collision(const AnalyzeArgs& a) {
  std::cerr << "h00t analyze collision: alphabet_size=" << a.alphabet_size << " tag_glyphs=" << a.tag_glyphs
            << " suffix_len=" << a.suffix_len << '\n';
  std::cout << std::setprecision(17)
            << "probability=" << analysis::collision_probability(a.alphabet_size, a.tag_glyphs, a.suffix_len) << '\n';
  return 0;
}

int cmd_bandwidth(const Globals& g, const AnalyzeArgs& a) {
  std::cerr << "h00t analyze bandwidth: total_rate=" << a.total_rate << " k=" << g.k << " link_bps=" << a.link_bps
            << " message_bytes=" << a.message_bytes << '\n';
  const auto b = analysis::bandwidth_budget(a.total_rate, g.k, a.link_bps, a.message_bytes * 8);
  std::cout << std::setprecision(10) << "per_tag_per_second=" << b.per_tag_per_second << '\n'
            << "per_tag_per_minute=" << b.per_tag_per_minute << '\n'
            << "link_messages_per_second=" << b.link_messages_per_second << '\n'
            << "headroom=" << b.headroom << '\n';
  return 0;
}

int cmd_report(const Globals& g, const AnalyzeArgs& a) {
  const auto kdf = g.kdf_config(KdfMode::FastHash);
  log_config("analyze report", g, kdf, "corpus=" + a.corpus);
  auto in = open_input(a.corpus);
  const auto corpus = analysis::load_corpus(in);
  const auto report = analysis::anonymity_report(corpus, g.k, kdf);
  analysis::write_report(std::cout, report, g.wire(), a.max_buckets);
  if (!a.rank_out.empty()) {
    std::ofstream out(a.rank_out);
    if (!out) throw Error("cannot write '" + a.rank_out + "'");
    analysis::write_rank_frequency(out, report);
  }
  return 0;
}

int cmd_gen_corpus(const Globals& g, const AnalyzeArgs& a) {
  std::cerr << "h00t analyze gen-corpus: tags=" << a.tags << " exponent=" << a.exponent << " total=" << a.total
            << " seed=" << g.seed << '\n';
  analysis::save_corpus(std::cout, analysis::generate_powerlaw_corpus(a.tags, a.exponent, a.total, g.seed));
  return 0;
}

int cmd_collider_time(const Globals& g, const AnalyzeArgs& a) {
  SearchSpec spec;
  spec.alphabet = std::string(a.alphabet_size, 'x');
  spec.suffix_length = a.suffix_len;
  spec.k = g.k;
  std::cerr << "h00t analyze collider-time: alphabet_size=" << a.alphabet_size << " suffix_len=" << a.suffix_len
            << " k=" << g.k << " rate=" << a.rate << " cores=" << a.cores << '\n';
  const auto e = estimate_runtime(spec, a.rate, static_cast<unsigned>(a.cores));
  std::cout << std::setprecision(10) << "exhaustive_seconds=" << e.exhaustive_seconds << '\n'
            << "first_match_seconds=" << e.first_match_seconds << '\n'
            << "exhaustive_human=" << human_duration(e.exhaustive_seconds) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct BenchArgs {
  double seconds = 0.5;
  std::size_t message_bytes = 40;
};

int cmd_bench(const Globals& g, const BenchArgs& a) {
  const auto kdf = g.kdf_config(KdfMode::FastHash);
  BenchConfig cfg;
  cfg.params = g.wire();
  cfg.message_bytes = a.message_bytes;
  cfg.seconds_per_phase = a.seconds;
  log_config("bench", g, kdf,
             "seconds_per_phase=" + std::to_string(a.seconds) + " message_bytes=" + std::to_string(a.message_bytes));
  const auto ours = derive_tag(PlainTag("bench-group"), kdf, cfg.params.k);
  // A foreign group on the same short tag: same public tag, different key.
  const TagMaterial foreign{ours.short_tag, derive_tag(PlainTag("bench-foreign"), kdf, cfg.params.k).tag_key};
  SystemEntropy rng;
  std::cout << run_bench(cfg, ours, foreign, rng).to_text();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"h00t: censorship-resistant group messaging over short hashtags"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "read option defaults from a TOML/INI file");

  Globals g;
  g.k_opt = app.add_option("-k,--short-tag-bits", g.k, "short tag width in bits (6..64)")
                ->check(CLI::Range(kMinShortTagBits, kMaxShortTagBits))
                ->capture_default_str();
  app.add_option("--kdf", g.kdf, "long-tag KDF (auto: memory-hard for seal/open, fast-hash otherwise)")
      ->check(CLI::IsMember({"auto", "fast-hash", "memory-hard"}))
      ->capture_default_str();
  app.add_option("--scrypt-n", g.scrypt_n, "scrypt work factor N")->capture_default_str();
  app.add_option("--scrypt-r", g.scrypt_r, "scrypt block size r")->capture_default_str();
  app.add_option("--scrypt-p", g.scrypt_p, "scrypt parallelism p")->capture_default_str();
  g.seed_opt = app.add_option("--seed", g.seed, "seed for reproducible runs");

  SealArgs seal_args;
  auto* seal_cmd = app.add_subcommand("seal", "seal a message into one wire line");
  seal_cmd->add_option("-t,--tag", seal_args.tags, "plain tag (prefer H00T_TAGS)");
  seal_args.message_opt = seal_cmd->add_option("message", seal_args.message, "message text (default: stdin)");

  OpenArgs open_args;
  auto* open_cmd = app.add_subcommand("open", "print the messages in a wire stream that open under the tags");
  open_cmd->add_option("-t,--tag", open_args.tags, "plain tag (prefer H00T_TAGS)");
  open_cmd->add_option("-i,--input", open_args.input, "wire lines file (default: stdin)");
  open_cmd->add_flag("--stats", open_args.stats, "print line counts to stderr");

  CollideArgs collide_args;
  auto* collide_cmd = app.add_subcommand("collide", "search for plain tags that share a short tag");
  collide_cmd->add_option("--prefix", collide_args.prefix, "plain tag prefix")->required();
  collide_cmd->add_option("--target", collide_args.target, "plain tag whose short tag to match");
  collide_cmd->add_option("--target-short", collide_args.target_short, "wire short tag to match, e.g. #vgmt4");
  collide_cmd->add_option("-L,--suffix-len", collide_args.suffix_len, "suffix length")->capture_default_str();
  collide_cmd->add_option("--alphabet", collide_args.alphabet, "suffix alphabet")->capture_default_str();
  collide_cmd->add_option("--mode", collide_args.mode, "exhaustive or first-n")
      ->check(CLI::IsMember({"exhaustive", "first-n"}))
      ->capture_default_str();
  collide_cmd->add_option("-n,--count", collide_args.count, "matches wanted in first-n mode")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  collide_cmd->add_option("--shards", collide_args.shards, "parallel shards")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  SimulateArgs sim_args;
  auto* sim_cmd = app.add_subcommand("simulate", "run a feed/censor scenario and print its statistics");
  sim_cmd->add_option("scenario", sim_args.scenario, "scenario JSON file")->required();

  AnalyzeArgs an;
  auto* analyze_cmd = app.add_subcommand("analyze", "security, cost and corpus arithmetic");
  analyze_cmd->require_subcommand(1);
  auto* entropy_cmd = analyze_cmd->add_subcommand("entropy", "bits of entropy in a plain-tag namespace");
  entropy_cmd->add_option("--dictionary", an.dictionaries, "dictionary word (size), repeatable");
  entropy_cmd->add_option("--digits", an.digits, "decimal digits");
  entropy_cmd->add_option("--glyphs", an.glyphs, "ALPHABET_SIZE:LENGTH, repeatable");
  auto* brute_cmd = analyze_cmd->add_subcommand("bruteforce", "time to exhaust a namespace");
  brute_cmd->add_option("--bits", an.bits)->required();
  brute_cmd->add_option("--rate", an.rate, "guesses per second per core")->required();
  brute_cmd->add_option("--cores", an.cores)->capture_default_str();
  auto* coll_cmd = analyze_cmd->add_subcommand("collision", "chance a suffix search finds a short-tag collision");
  coll_cmd->add_option("--alphabet-size", an.alphabet_size)->required();
  coll_cmd->add_option("--tag-glyphs", an.tag_glyphs)->required();
  coll_cmd->add_option("--suffix-len", an.suffix_len)->required();
  auto* bw_cmd = analyze_cmd->add_subcommand("bandwidth", "per-short-tag load and link headroom");
  bw_cmd->add_option("--total-rate", an.total_rate, "messages per second across the service")->required();
  bw_cmd->add_option("--link-bps", an.link_bps, "reader link bits per second")->required();
  bw_cmd->add_option("--message-bytes", an.message_bytes)->capture_default_str();
  auto* report_cmd = analyze_cmd->add_subcommand("report", "anonymity sets of a hashtag corpus");
  report_cmd->add_option("--corpus", an.corpus, "hashtag,count CSV")->required();
  report_cmd->add_option("--rank-out", an.rank_out, "write rank,count CSV here");
  report_cmd->add_option("--max-buckets", an.max_buckets)->capture_default_str();
  auto* gen_cmd = analyze_cmd->add_subcommand("gen-corpus", "synthetic power-law corpus as CSV");
  gen_cmd->add_option("--tags", an.tags)->required();
  gen_cmd->add_option("--exponent", an.exponent)->capture_default_str();
  gen_cmd->add_option("--total", an.total)->required();
  auto* ctime_cmd = analyze_cmd->add_subcommand("collider-time", "collider runtime estimate");
  ctime_cmd->add_option("--alphabet-size", an.alphabet_size)->required();
  ctime_cmd->add_option("--suffix-len", an.suffix_len)->required();
  ctime_cmd->add_option("--rate", an.rate, "hashes per second per core")->required();
  ctime_cmd->add_option("--cores", an.cores)->capture_default_str();

  BenchArgs bench_args;
  auto* bench_cmd = app.add_subcommand("bench", "seal/open throughput");
  bench_cmd->add_option("--seconds", bench_args.seconds, "duration of each phase")->capture_default_str();
  bench_cmd->add_option("--message-bytes", bench_args.message_bytes)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*seal_cmd) return cmd_seal(g, seal_args);
    if (*open_cmd) return cmd_open(g, open_args);
    if (*collide_cmd) return cmd_collide(g, collide_args);
    if (*sim_cmd) return cmd_simulate(g, sim_args);
    if (*bench_cmd) return cmd_bench(g, bench_args);
    if (*entropy_cmd) return cmd_entropy(an);
    if (*brute_cmd) return cmd_bruteforce(an);
    if (*coll_cmd) return cmd_collision(an);
    if (*bw_cmd) return cmd_bandwidth(g, an);
    if (*report_cmd) return cmd_report(g, an);
    if (*gen_cmd) return cmd_gen_corpus(g, an);
    if (*ctime_cmd) return cmd_collider_time(g, an);
  } catch (const UsageError& e) {
    std::cerr << "h00t: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "h00t: error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
