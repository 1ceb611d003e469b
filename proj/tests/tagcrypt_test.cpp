#include <gtest/gtest.h>

#include <random>
#include <set>

#include "h00t/tagcrypt.hpp"
#include "test_support.hpp"

namespace h00t {
namespace {

using testing::reference_sha1;

std::string hex(ByteView b) { return to_hex(b); }

TEST(Sha1, PublishedVectors) {
  const std::pair<std::string, std::string> vectors[] = {
      {"abc", "a9993e364706816aba3e25717850c26c9cd0d89d"},
      {"", "da39a3ee5e6b4b0d3255bfef95601890afd80709"},
      {"abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq", "84983e441c3bd26ebaae4aa1f95129e5e54670f1"},
      {std::string(1000000, 'a'), "34aa973cd4c4daa4f61eeb2bdbad27316534016f"},
  };
  for (const auto& [msg, expect] : vectors) {
    EXPECT_EQ(hex(crypto::sha1(to_bytes(msg))), expect);
    EXPECT_EQ(hex(reference_sha1(msg)), expect);
  }
}

TEST(Sha1, AgreesWithReferenceOnRandomInputs) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 500; ++i) {
    std::string s(rng() % 200, '\0');
    for (auto& c : s) c = static_cast<char>(rng());
    ASSERT_EQ(hex(crypto::sha1(to_bytes(s))), hex(reference_sha1(s))) << "length " << s.size();
  }
}

TEST(HmacSha1, Rfc2202Case1) {
  Bytes key(20, 0x0b);
  EXPECT_EQ(hex(crypto::hmac_sha1(key, to_bytes("Hi There"))), "b617318655057264e28bc0b6fb378c8ef146be00");
}

TEST(Aes128Ctr, Sp800_38aF51) {
  crypto::AesKey key{};
  crypto::AesIv iv{};
  auto k = from_hex("2b7e151628aed2a6abf7158809cf4f3c");
  auto c = from_hex("f0f1f2f3f4f5f6f7f8f9fafbfcfdfeff");
  std::copy(k.begin(), k.end(), key.begin());
  std::copy(c.begin(), c.end(), iv.begin());
  auto out = crypto::aes128_ctr(key, iv, from_hex("6bc1bee22e409f96e93d7e117393172aae2d8a571e03ac9c9eb76fac45af8e51"));
  EXPECT_EQ(hex(out), "874d6191b620e3261bef6864990db6ce9806f66b7970fdff8617187bb9fffdff");
}

TEST(Scrypt, Rfc7914Vector) {
  auto out = crypto::scrypt(to_bytes("password"), to_bytes("NaCl"), {1024, 8, 16}, 64);
  EXPECT_EQ(hex(out),
            "fdbabe1c9d3472007856e7190d01e9fe7c6ad7cbc8237830e77376634b3731622eaf30d92e22a3886ff109279d9830dac727afb9"
            "4a83ee6d8360cbdfa2cc0640");
}

TEST(PlainTag, Invariants) {
  EXPECT_NO_THROW(PlainTag("free-egypt-9rqt"));
  EXPECT_THROW(PlainTag(""), Error);
  EXPECT_THROW(PlainTag("two words"), Error);
  EXPECT_THROW(PlainTag("tab\there"), Error);
  EXPECT_THROW(PlainTag("#hashed"), Error);
  EXPECT_THROW(PlainTag(std::string(257, 'a')), Error);
  EXPECT_NO_THROW(PlainTag(std::string(256, 'a')));
  EXPECT_EQ(PlainTag::from_hashtag("#bieber").text(), "bieber");
}

TEST(DeriveLongTag, FastHashIsSha1) {
  auto lt = derive_long_tag(PlainTag("abc"), KdfConfig::fast_hash());
  EXPECT_EQ(lt.bits(), 160u);
  EXPECT_EQ(hex(lt.bytes), "a9993e364706816aba3e25717850c26c9cd0d89d");
  EXPECT_EQ(lt, derive_long_tag(PlainTag("abc"), KdfConfig::fast_hash()));
}

TEST(DeriveLongTag, MemoryHardMatchesScryptOracle) {
  // Expected value computed with Python's hashlib.scrypt(b"abc",
  // salt=b"#h00t/long-tag/v1", n=2**14, r=8, p=1, dklen=20).
  auto cfg = KdfConfig::memory_hard({1u << 14, 8, 1});
  auto a = derive_long_tag(PlainTag("abc"), cfg);
  EXPECT_EQ(hex(a.bytes), "3200a523cb26ddd22bb138f53e5ddbb4a63e759d");
  EXPECT_EQ(a, derive_long_tag(PlainTag("abc"), cfg));
  EXPECT_NE(a, derive_long_tag(PlainTag("abc"), KdfConfig::fast_hash()));
}

TEST(DeriveLongTag, ExpansionKeepsDigestPrefix) {
  KdfConfig cfg;
  cfg.output_bits = 320;
  auto lt = derive_long_tag(PlainTag("abc"), cfg);
  EXPECT_EQ(lt.bits(), 320u);
  EXPECT_EQ(hex(ByteView(lt.bytes).first(20)), "a9993e364706816aba3e25717850c26c9cd0d89d");
  cfg.expand = false;
  EXPECT_THROW(derive_long_tag(PlainTag("abc"), cfg), ConfigError);
}

TEST(DeriveTag, WideShortTagsNeedExpansion) {
  auto m = derive_tag(PlainTag("abc"), KdfConfig::fast_hash(), 40);
  EXPECT_EQ(m.short_tag.value, 0xa9993e3647ull);
  KdfConfig no_expand;
  no_expand.expand = false;
  EXPECT_THROW(derive_tag(PlainTag("abc"), no_expand, 40), ConfigError);
  EXPECT_NO_THROW(derive_tag(PlainTag("abc"), no_expand, 32));
}

TEST(SplitTag, PrototypeLayoutUsesAll160Bits) {
  auto lt = derive_long_tag(PlainTag("abc"), KdfConfig::fast_hash());
  auto m = split_tag(lt, 32);
  EXPECT_EQ(m.short_tag.value, 0xa9993e36u);
  EXPECT_EQ(hex(m.tag_key), "4706816aba3e25717850c26c9cd0d89d");
}

TEST(SplitTag, DefinitionalSliceAtK24) {
  auto lt = derive_long_tag(PlainTag("abc"), KdfConfig::fast_hash());
  auto m = split_tag(lt, 24);
  EXPECT_EQ(m.short_tag.value, 0xa9993eu);
  EXPECT_EQ(m.short_tag.k, 24u);
  EXPECT_EQ(hex(m.tag_key), "364706816aba3e25717850c26c9cd0d8");
}

TEST(SplitTag, InsufficientBits) {
  LongTag lt{Bytes(15, 0xaa)};
  EXPECT_THROW(split_tag(lt, 24), Error);
  EXPECT_THROW(split_tag(LongTag{Bytes(20, 0)}, 5), ConfigError);
  EXPECT_THROW(split_tag(LongTag{Bytes(40, 0)}, 65), ConfigError);
}

TEST(SplitTag, ShortTagAndKeyBitsAreDisjoint) {
  std::mt19937_64 rng(11);
  for (unsigned k : {6u, 12u, 13u, 24u, 32u}) {
    LongTag base{Bytes(20)};
    for (auto& b : base.bytes) b = static_cast<std::uint8_t>(rng());
    const auto m0 = split_tag(base, k);
    for (std::size_t i = 0; i < k + kTagKeyBits; ++i) {
      LongTag flipped = base;
      set_bit(flipped.bytes, i, !get_bit(flipped.bytes, i));
      const auto m1 = split_tag(flipped, k);
      if (i < k) {
        EXPECT_NE(m1.short_tag, m0.short_tag) << "k=" << k << " bit " << i;
        EXPECT_EQ(m1.tag_key, m0.tag_key) << "k=" << k << " bit " << i;
      } else {
        EXPECT_EQ(m1.short_tag, m0.short_tag) << "k=" << k << " bit " << i;
        EXPECT_NE(m1.tag_key, m0.tag_key) << "k=" << k << " bit " << i;
      }
    }
  }
}

class SealOpen : public ::testing::Test {
protected:
  SeededEntropy rng{42};
  KdfConfig kdf = KdfConfig::fast_hash();
};

TEST_F(SealOpen, RoundTrip) {
  const std::array tags{PlainTag("free-egypt-9rqt")};
  auto h = seal(to_bytes("meet at 11pm"), tags, kdf, 24, rng);
  auto m = open(h, tags[0], kdf, 24);
  ASSERT_TRUE(m);
  EXPECT_EQ(to_string(*m), "meet at 11pm");
}

TEST_F(SealOpen, EmptyMessageAndEmptyTagList) {
  const std::array tags{PlainTag("t")};
  auto h = seal(ByteView{}, tags, kdf, 24, rng);
  EXPECT_TRUE(h.ciphertext.empty());
  auto m = open(h, tags[0], kdf, 24);
  ASSERT_TRUE(m);
  EXPECT_TRUE(m->empty());
  EXPECT_THROW(seal(to_bytes("x"), std::span<const PlainTag>{}, kdf, 24, rng), Error);
}

TEST_F(SealOpen, FreshSessionKeysEveryTime) {
  const std::array tags{derive_tag(PlainTag("group"), kdf, 24)};
  std::set<Bytes> ciphertexts;
  std::set<KeyBlock> blocks;
  std::set<Mac> macs;
  const auto msg = to_bytes("the same message");
  for (int i = 0; i < 10000; ++i) {
    auto h = seal(msg, tags, rng);
    EXPECT_TRUE(ciphertexts.insert(h.ciphertext).second);
    EXPECT_TRUE(blocks.insert(h.key_blocks[0]).second);
    EXPECT_TRUE(macs.insert(h.mac).second);
  }
}

TEST_F(SealOpen, TwoTagsShareOneCiphertext) {
  const std::array tags{PlainTag("alpha"), PlainTag("beta")};
  auto h = seal(to_bytes("both of you"), tags, kdf, 24, rng);
  EXPECT_EQ(h.short_tags.size(), 2u);
  EXPECT_EQ(h.key_blocks.size(), 2u);
  EXPECT_NE(h.key_blocks[0], h.key_blocks[1]);
  for (const auto& t : tags) {
    auto m = open(h, t, kdf, 24);
    ASSERT_TRUE(m) << t.text();
    EXPECT_EQ(to_string(*m), "both of you");
  }
  EXPECT_FALSE(open(h, PlainTag("gamma"), kdf, 24));
}

TEST_F(SealOpen, EveryKeyBlockCarriesTheSameSessionKeys) {
  const std::array tags{derive_tag(PlainTag("a"), kdf, 16), derive_tag(PlainTag("b"), kdf, 16),
                        derive_tag(PlainTag("c"), kdf, 16)};
  auto keys = fresh_session_keys(rng);
  auto h = seal_with_keys(to_bytes("x"), tags, keys);
  for (std::size_t i = 0; i < tags.size(); ++i) {
    auto got = unlock_keys(h, i, tags[i]);
    ASSERT_TRUE(got);
    EXPECT_EQ(*got, keys);
  }
}

TEST_F(SealOpen, AnySingleBitFlipIsRejected) {
  const auto tag = derive_tag(PlainTag("integrity"), kdf, 24);
  const std::array tags{tag};
  const auto h = seal(to_bytes("do not touch"), tags, rng);
  for (std::size_t i = 0; i < h.ciphertext.size() * 8; ++i) {
    Hoot t = h;
    set_bit(t.ciphertext, i, !get_bit(t.ciphertext, i));
    EXPECT_FALSE(open(t, tag)) << "ciphertext bit " << i;
  }
  // The MAC covers the ciphertext only, so it authenticates k_mac but not
  // k_enc. A flipped k_enc bit decrypts to a different message instead.
  for (std::size_t i = 0; i < kKeyBlockBytes * 8; ++i) {
    Hoot t = h;
    set_bit(t.key_blocks[0], i, !get_bit(t.key_blocks[0], i));
    const auto got = open(t, tag);
    if (i >= 128)
      EXPECT_FALSE(got) << "key block bit " << i;
    else
      EXPECT_NE(got, std::optional<Bytes>(to_bytes("do not touch"))) << "key block bit " << i;
  }
  for (std::size_t i = 0; i < kMacBytes * 8; ++i) {
    Hoot t = h;
    set_bit(t.mac, i, !get_bit(t.mac, i));
    EXPECT_FALSE(open(t, tag)) << "mac bit " << i;
  }
}

TEST_F(SealOpen, CollidingForeignTagIsNoMatch) {
  const PlainTag mine("rice");
  const PlainTag other = testing::colliding_tag(mine, "cover-", 12);
  const auto m1 = derive_tag(mine, kdf, 12);
  const auto m2 = derive_tag(other, kdf, 12);
  ASSERT_EQ(m1.short_tag, m2.short_tag);
  ASSERT_NE(m1.tag_key, m2.tag_key);
  const std::array tags{m1};
  for (int i = 0; i < 10000; ++i) {
    auto h = seal(to_bytes("private"), tags, rng);
    ASSERT_FALSE(open(h, m2));
  }
}

TEST_F(SealOpen, MemoryHardRoundTrip) {
  auto cfg = KdfConfig::memory_hard({1u << 10, 8, 1});
  const std::array tags{PlainTag("slow-and-steady")};
  auto h = seal(to_bytes("scrypt"), tags, cfg, 24, rng);
  EXPECT_EQ(to_string(*open(h, tags[0], cfg, 24)), "scrypt");
  EXPECT_FALSE(open(h, tags[0], kdf, 24));
}

}  // namespace
}  // namespace h00t
