#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "h00t/h00t.hpp"
#include "test_support.hpp"

namespace h00t {
namespace {

namespace fs = std::filesystem;

struct Run {
  int status = -1;
  std::string out;
  std::string err;
};

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("h00t-cli-test-" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Runs the CLI through /bin/sh. `tags` goes into H00T_TAGS; stdin comes from
// `input`.
Run run(const std::string& args, const std::string& tags = "", const std::string& input = "") {
  const auto in = scratch() / "stdin";
  const auto err = scratch() / "stderr";
  write_file(in, input);
  const std::string cmd = "H00T_TAGS='" + tags + "' '" + std::string(H00T_CLI_PATH) + "' " + args + " < '" +
                          in.string() + "' 2> '" + err.string() + "'";
  Run r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = ::pclose(pipe);
  r.status = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = read_file(err);
  return r;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) v.push_back(l);
  return v;
}

std::string data(const std::string& name) { return std::string(H00T_DATA_DIR) + "/" + name; }

TEST(Cli, SealEmitsOneWireLine) {
  const auto r = run("seal hello", "rice");
  ASSERT_EQ(r.status, 0) << r.err;
  const auto l = lines(r.out);
  ASSERT_EQ(l.size(), 1u);
  EXPECT_EQ(l[0].front(), '#');
  EXPECT_LE(WireMessage{l[0]}.glyphs(), 140u);
  EXPECT_NE(r.err.find("kdf=memory-hard"), std::string::npos) << r.err;
  EXPECT_NO_THROW(parse(l[0], WireParams{}));
}

TEST(Cli, SealTwoTags) {
  const auto r = run("--kdf fast-hash seal hi", "rice beans");
  ASSERT_EQ(r.status, 0) << r.err;
  const auto tokens = lines(r.out).at(0);
  EXPECT_EQ(tokens.find(" #"), 6u);
  EXPECT_EQ(parse(tokens, WireParams{}).short_tags.size(), 2u);
}

TEST(Cli, SealOverCapacityNamesCapacity) {
  const auto r = run("--kdf fast-hash seal " + std::string(48, 'x'), "rice");
  EXPECT_EQ(r.status, 2);
  EXPECT_TRUE(r.out.empty());
  EXPECT_NE(r.err.find("47"), std::string::npos) << r.err;
}

TEST(Cli, SealReadsStdinAndTagFlag) {
  const auto r = run("--kdf fast-hash seal --tag rice", "", "from stdin\n");
  ASSERT_EQ(r.status, 0) << r.err;
  const auto h = parse(lines(r.out).at(0), WireParams{});
  EXPECT_EQ(open(h, PlainTag("rice"), KdfConfig::fast_hash(), 24), to_bytes("from stdin"));
}

TEST(Cli, MissingTagIsUsageError) {
  EXPECT_EQ(run("seal hi", "").status, 1);
  EXPECT_EQ(run("seal hi", std::string(300, 'x')).status, 2);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run("").status, 1);
  EXPECT_EQ(run("frobnicate").status, 1);
  EXPECT_EQ(run("-k 3 seal hi", "rice").status, 1);
  EXPECT_EQ(run("collide --prefix x").status, 1);
  EXPECT_EQ(run("--help").status, 0);
}

TEST(Cli, SealOpenRoundTripWithDefaultKdf) {
  const auto sealed = run("seal 'meet at noon'", "#Tahrir");
  ASSERT_EQ(sealed.status, 0) << sealed.err;
  const auto opened = run("open --stats", "Tahrir", sealed.out);
  ASSERT_EQ(opened.status, 0) << opened.err;
  EXPECT_EQ(opened.out, "meet at noon\n");
  EXPECT_NE(opened.err.find("opened=1"), std::string::npos);
}

TEST(Cli, OpenFiltersMixedStream) {
  const KdfConfig kdf = KdfConfig::fast_hash();
  WireParams params;
  params.k = 12;
  const PlainTag ours("garden");
  const PlainTag twin = testing::colliding_tag(ours, "orchard-", 12);
  const auto m_ours = derive_tag(ours, kdf, 12);
  const auto m_twin = derive_tag(twin, kdf, 12);
  const auto m_other = derive_tag(PlainTag("elsewhere"), kdf, 12);
  SeededEntropy rng(4);

  std::string stream;
  std::vector<std::string> expected;
  for (int i = 0; i < 100; ++i) {
    const std::string msg = "m" + std::to_string(i);
    const TagMaterial& m = i % 10 == 3 ? m_ours : (i % 2 ? m_twin : m_other);
    if (&m == &m_ours) expected.push_back(msg);
    stream += encode(seal(to_bytes(msg), std::array{m}, rng), params).text + "\n";
  }
  // A tampered copy of one of ours, and a junk line.
  std::string tampered = encode(seal(to_bytes("tampered"), std::array{m_ours}, rng), params).text;
  char& victim = tampered[tampered.size() - 8];  // inside the ciphertext, clear of padding
  victim = victim == 'A' ? 'B' : 'A';
  stream += tampered + "\nnot a hoot\n";

  const auto r = run("-k 12 --kdf fast-hash open --stats", "garden", stream);
  ASSERT_EQ(r.status, 0) << r.err;
  std::string want;
  for (const auto& e : expected) want += e + "\n";
  EXPECT_EQ(r.out, want);
  EXPECT_EQ(expected.size(), 10u);
  EXPECT_NE(r.err.find("lines=102 opened=10 foreign=50 rejected=41 malformed=1"), std::string::npos) << r.err;
}

TEST(Cli, OpenEmptyStream) {
  const auto r = run("--kdf fast-hash open", "rice", "");
  EXPECT_EQ(r.status, 0);
  EXPECT_TRUE(r.out.empty());
  EXPECT_EQ(run("--kdf fast-hash open -i /nonexistent/file", "rice").status, 2);
}

TEST(Cli, SeededRunsAreDeterministic) {
  const auto a = run("--kdf fast-hash --seed 9 seal same", "rice");
  const auto b = run("--kdf fast-hash --seed 9 seal same", "rice");
  const auto c = run("--kdf fast-hash --seed 10 seal same", "rice");
  ASSERT_EQ(a.status, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out, c.out);
  EXPECT_NE(a.err.find("warning"), std::string::npos);
  const auto d = run("seal same", "rice");
  const auto e = run("seal same", "rice");
  EXPECT_NE(d.out, e.out);
}

TEST(Cli, CollideMatchesLibrary) {
  SearchSpec spec;
  spec.prefix = "grp-";
  spec.alphabet = "ab";
  spec.suffix_length = 8;
  spec.k = 6;
  spec.target = PlainTag("target");
  std::string want;
  for (const auto& m : find_tag(spec).matches)
    want += m.plain_tag.text() + " #" + encode_short_tag(m.short_tag, WireParams{6}) + "\n";
  ASSERT_FALSE(want.empty());
  for (const char* shards : {"1", "4"}) {
    const auto r = run(std::string("-k 6 collide --prefix grp- --target target --alphabet ab -L 8 --shards ") + shards);
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_EQ(r.out, want);
  }
  const auto by_short =
      run("-k 6 collide --prefix grp- --target-short '" + lines(want)[0].substr(lines(want)[0].find('#')) +
          "' --alphabet ab -L 8");
  EXPECT_EQ(by_short.out, want);
}

TEST(Cli, CollideFirstNIsSeededAndVerified) {
  const std::string args = "-k 12 --seed 3 collide --prefix free-egypt- --target bieber --mode first-n -n 2";
  const auto a = run(args);
  ASSERT_EQ(a.status, 0) << a.err;
  EXPECT_EQ(a.out, run(args).out);
  const auto target = derive_tag(PlainTag("bieber"), KdfConfig::fast_hash(), 12).short_tag;
  const auto l = lines(a.out);
  ASSERT_EQ(l.size(), 2u);
  for (const auto& line : l)
    EXPECT_EQ(derive_tag(PlainTag(line.substr(0, line.find(' '))), KdfConfig::fast_hash(), 12).short_tag, target);
}

TEST(Cli, CollideMemoryHardWarns) {
  const auto r = run("-k 6 --kdf memory-hard --scrypt-n 256 --scrypt-r 1 collide --prefix a --target b --alphabet xy -L 2");
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.err.find("memory-hard"), std::string::npos);
}

TEST(Cli, SimulateSampleScenarios) {
  const auto block = run("simulate " + data("censor_block.json"));
  ASSERT_EQ(block.status, 0) << block.err;
  EXPECT_NE(block.out.find("target_block_rate=1.000000\n"), std::string::npos) << block.out;
  EXPECT_NE(block.out.find("collateral_blocked=100\n"), std::string::npos);
  EXPECT_EQ(block.out, run("simulate " + data("censor_block.json")).out);

  const auto white = run("simulate " + data("whitelist.json"));
  ASSERT_EQ(white.status, 0) << white.err;
  EXPECT_NE(white.out.find("target_block_rate=1.000000\n"), std::string::npos);
  EXPECT_NE(white.out.find("collateral_blocked=0\n"), std::string::npos);
  EXPECT_NE(white.out.find("replays_rejected=5\n"), std::string::npos);

  EXPECT_EQ(run("simulate /nonexistent.json").status, 2);
}

TEST(Cli, AnalyzeArithmetic) {
  EXPECT_EQ(run("analyze entropy --dictionary 40000 --digits 7").out, "entropy_bits=38.5412\n");
  const auto bf = run("analyze bruteforce --bits 47 --rate 262144 --cores 1024");
  EXPECT_NE(bf.out.find("full_space_seconds=524288\n"), std::string::npos) << bf.out;
  const auto bw = run("-k 18 analyze bandwidth --total-rate 7000 --link-bps 128000");
  EXPECT_NE(bw.out.find("per_tag_per_minute=1.602172852\n"), std::string::npos) << bw.out;
  EXPECT_NE(bw.out.find("link_messages_per_second=114.2857143\n"), std::string::npos) << bw.out;
  const auto p = run("analyze collision --alphabet-size 2 --tag-glyphs 1 --suffix-len 1");
  EXPECT_EQ(p.out, "probability=0.75\n");
  const auto t = run("-k 12 analyze collider-time --alphabet-size 64 --suffix-len 6 --rate 1900000 --cores 8");
  EXPECT_NE(t.out.find("exhaustive_seconds=4521.018206\n"), std::string::npos) << t.out;
  EXPECT_EQ(run("analyze entropy").status, 2);
}

TEST(Cli, CorpusGenerationAndReport) {
  const auto gen = run("--seed 4 analyze gen-corpus --tags 200 --total 5000");
  ASSERT_EQ(gen.status, 0) << gen.err;
  EXPECT_EQ(gen.out, run("--seed 4 analyze gen-corpus --tags 200 --total 5000").out);
  const auto csv = scratch() / "corpus.csv";
  const auto ranks = scratch() / "ranks.csv";
  write_file(csv, gen.out);
  const auto rep = run("-k 6 analyze report --corpus " + csv.string() + " --rank-out " + ranks.string());
  ASSERT_EQ(rep.status, 0) << rep.err;
  EXPECT_NE(rep.out.find("total_volume=5000\n"), std::string::npos);
  EXPECT_EQ(lines(read_file(ranks)).size(), 201u);
  EXPECT_EQ(run("analyze report --corpus " + data("sample_corpus.csv")).status, 0);
}

TEST(Cli, BenchReport) {
  const auto r = run("bench --seconds 0.05");
  ASSERT_EQ(r.status, 0) << r.err;
  for (const char* key : {"seal_per_second=", "open_reject_per_second=", "open_mix_per_second=", "open_seal_ratio="})
    EXPECT_NE(r.out.find(key), std::string::npos) << key;
}

TEST(Cli, ConfigFileSetsDefaults) {
  const auto cfg = scratch() / "h00t.toml";
  write_file(cfg, "short-tag-bits = 12\nkdf = \"fast-hash\"\n");
  const auto r = run("--config " + cfg.string() + " seal hi", "rice");
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(lines(r.out).at(0).find(' '), 4u);  // "#" + 3 glyphs
  EXPECT_NE(r.err.find("k=12 kdf=fast-hash"), std::string::npos) << r.err;
  EXPECT_EQ(run("--config " + data("h00t.toml") + " --kdf fast-hash seal hi", "rice").status, 0);
}

}  // namespace
}  // namespace h00t
