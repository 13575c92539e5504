// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "drng/crypto.hpp"
#include "test_support.hpp"

namespace drng {
namespace {

const GroupParams kTiny(23, 5);

TEST(GroupParams, ValidatesSafePrimeAndGenerator) {
  EXPECT_NO_THROW(GroupParams());
  EXPECT_NO_THROW(GroupParams(23, 5));
  EXPECT_THROW(GroupParams(29, 2), Error);  // 14 not prime
  EXPECT_THROW(GroupParams(23, 2), Error);  // 2 is a quadratic residue mod 23
  EXPECT_THROW(GroupParams(23, 1), Error);
  EXPECT_THROW(GroupParams(23, 22), Error);  // order 2
  // The default modulus really is a safe prime.
  EXPECT_TRUE(modarith::is_prime(GroupParams::kDefaultModulus));
  EXPECT_TRUE(modarith::is_prime((GroupParams::kDefaultModulus - 1) / 2));
}

TEST(Sha256, KnownVector) {
  const std::string abc = "abc";
  const auto d = sha256(std::span(reinterpret_cast<const std::uint8_t*>(abc.data()), abc.size()));
  EXPECT_EQ(to_hex(d.bytes), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Keygen, ForcedSecretGivesExpectedPublicKey) {
  // 5^3 = 125 = 10 mod 23
  ASSERT_EQ(testing::naive_pow(5, 3, 23), 10u);
  EXPECT_EQ(KeyPair::from_secret(kTiny, 3).pk, 10u);
}

TEST(Keygen, OutputsVerifyAndAreDeterministic) {
  Rng a(5), b(5);
  for (int i = 0; i < 200; ++i) {
    const auto k = keygen(GroupParams(), a);
    EXPECT_EQ(k, keygen(GroupParams(), b));
    EXPECT_GE(k.sk, 1u);
    EXPECT_LE(k.sk, GroupParams::kDefaultModulus - 2);
    EXPECT_TRUE(verify_keypair(GroupParams(), k.pk, k.sk));
  }
}

TEST(VerifyKeypair, Examples) {
  ASSERT_EQ(testing::naive_pow(5, 4, 23), 4u);
  EXPECT_TRUE(verify_keypair(kTiny, 10, 3));
  EXPECT_FALSE(verify_keypair(kTiny, 10, 4));
  EXPECT_FALSE(verify_keypair(kTiny, 1, 0));
  EXPECT_FALSE(verify_keypair(kTiny, 1, 22));  // 5^22 = 1 but 22 > q-2
}

TEST(VerifyKeypair, RejectsEveryOtherSecretInTinyGroup) {
  for (std::uint64_t sk = 1; sk <= 21; ++sk) {
    const auto pk = KeyPair::from_secret(kTiny, sk).pk;
    for (std::uint64_t other = 0; other <= 22; ++other) {
      EXPECT_EQ(verify_keypair(kTiny, pk, other), other == sk) << sk << " vs " << other;
    }
  }
}

TEST(VerifyKeypair, RandomWrongSecretsFail) {
  Rng rng(8);
  const GroupParams g;
  for (int i = 0; i < 500; ++i) {
    const auto k = keygen(g, rng);
    auto other = rng.uniform(1, g.q() - 2);
    if (other == k.sk) continue;
    EXPECT_FALSE(verify_keypair(g, k.pk, other));
  }
}

Bytes ctx_of(std::string_view s) { return Bytes(s.begin(), s.end()); }

TEST(Encryption, RoundTripRandomValues) {
  Rng rng(13);
  const GroupParams g;
  const FieldParams f;
  const auto ctx = ctx_of("round-1");
  for (int i = 0; i < 1000; ++i) {
    const auto k = keygen(g, rng);
    const FieldElement y(f, rng.uniform(0, f.p() - 1));
    const auto ct = encrypt(g, k.pk, y, ctx, rng);
    EXPECT_EQ(decrypt(g, k.sk, ct, ctx), y);
  }
}

TEST(Encryption, RoundTripExhaustiveSmallField) {
  Rng rng(14);
  const GroupParams g;
  const FieldParams f(97);
  const auto k = keygen(g, rng);
  const auto ctx = ctx_of("exhaustive");
  for (std::uint64_t v = 0; v < 97; ++v) {
    const FieldElement y(f, v);
    EXPECT_EQ(decrypt(g, k.sk, encrypt(g, k.pk, y, ctx, rng), ctx), y);
  }
}

TEST(Encryption, DeterministicGivenSeed) {
  const GroupParams g;
  const FieldParams f;
  Rng a(1), b(1);
  const auto k = KeyPair::from_secret(g, 123456789);
  const auto ctx = ctx_of("c");
  const auto ca = encrypt(g, k.pk, FieldElement(f, 42), ctx, a);
  const auto cb = encrypt(g, k.pk, FieldElement(f, 42), ctx, b);
  EXPECT_EQ(ca, cb);
}

TEST(Encryption, FreshRandomnessGivesDistinctCiphertexts) {
  Rng rng(2);
  const GroupParams g;
  const FieldParams f;
  const auto k = keygen(g, rng);
  std::set<std::uint64_t> c1s;
  for (int i = 0; i < 1000; ++i) c1s.insert(encrypt(g, k.pk, FieldElement(f, 7), ctx_of("x"), rng).c1);
  EXPECT_EQ(c1s.size(), 1000u);
}

TEST(Encryption, WrongContextOrKeyGarblesPlaintext) {
  Rng rng(4);
  const GroupParams g;
  const FieldParams f;
  int wrong_ctx_hits = 0;
  int wrong_key_hits = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto k = keygen(g, rng);
    const FieldElement y(f, rng.uniform(0, f.p() - 1));
    const auto ct = encrypt(g, k.pk, y, ctx_of("right"), rng);
    wrong_ctx_hits += decrypt(g, k.sk, ct, ctx_of("wrong")) == y;
    const auto other = keygen(g, rng);
    wrong_key_hits += decrypt(g, other.sk, ct, ctx_of("right")) == y;
  }
  EXPECT_EQ(wrong_ctx_hits, 0);
  EXPECT_EQ(wrong_key_hits, 0);
}

TEST(Encryption, PadMatchesDocumentedDerivation) {
  // c2 - y must equal digest_to_field(tag || ctx || c1 || pk^r).
  const GroupParams g;
  const FieldParams f;
  const auto k = KeyPair::from_secret(g, 987654321);
  const std::uint64_t r = 55555;
  const auto ctx = ctx_of("ctx");
  const FieldElement y(f, 1000);
  const auto ct = encrypt_with(g, k.pk, y, ctx, r);
  EXPECT_EQ(ct.c1, g.exp(r));
  Bytes buf;
  append_tag(buf, "DRNG-KDF-V1");
  append_bytes(buf, ctx);
  append_u64_be(buf, ct.c1);
  append_u64_be(buf, g.pow(k.pk, r));
  EXPECT_EQ(ct.c2 - y, digest_to_field(f, buf));
}

TEST(CommitShare, DeterministicAndSensitiveToEveryInput) {
  const FieldParams f;
  const auto a = testing::address_of(1), b = testing::address_of(2), c = testing::address_of(3);
  const FieldElement y(f, 77);
  EXPECT_EQ(commit_share(1, a, b, y), commit_share(1, a, b, y));
  EXPECT_NE(commit_share(1, a, b, y), commit_share(1, a, b, y + FieldElement(f, 1)));
  EXPECT_NE(commit_share(1, a, b, y), commit_share(1, a, c, y));
  EXPECT_NE(commit_share(1, a, b, y), commit_share(1, c, b, y));
  EXPECT_NE(commit_share(1, a, b, y), commit_share(2, a, b, y));
}

TEST(CommitShare, MatchesDocumentedLayout) {
  const FieldParams f;
  const auto a = testing::address_of(0xaa), b = testing::address_of(0xbb);
  Bytes buf;
  append_tag(buf, "DRNG-COMMIT-V1");
  append_u64_be(buf, 9);
  append_bytes(buf, a);
  append_bytes(buf, b);
  append_u64_be(buf, 31337);
  EXPECT_EQ(commit_share(9, a, b, FieldElement(f, 31337)), sha256(buf));
}

TEST(CommitShare, NoCollisionsOverManyDistinctTriples) {
  Rng rng(21);
  const FieldParams f;
  std::set<Digest> seen;
  std::set<std::tuple<Address, Address, std::uint64_t>> inputs;
  for (int i = 0; i < 200000; ++i) {
    const auto d = rng.bytes<20>();
    const auto r = rng.bytes<20>();
    const auto y = rng.uniform(0, f.p() - 1);
    if (!inputs.emplace(d, r, y).second) continue;
    EXPECT_TRUE(seen.insert(commit_share(0, d, r, FieldElement(f, y))).second);
  }
}

TEST(DigestToField, RangeDeterminismAndUniformity) {
  const FieldParams f(97);
  Rng rng(31);
  std::array<int, 97> counts{};
  constexpr int kDraws = 100000;
  for (int i = 0; i < kDraws; ++i) {
    const auto in = rng.bytes<16>();
    const auto v = digest_to_field(f, in);
    ASSERT_LT(v.value(), 97u);
    ++counts[v.value()];
  }
  const double expected = kDraws / 97.0;
  const double sigma = std::sqrt(kDraws * (1.0 / 97) * (96.0 / 97));
  for (auto c : counts) EXPECT_LT(std::abs(c - expected), 5 * sigma);

  const Bytes fixed{1, 2, 3};
  EXPECT_EQ(digest_to_field(FieldParams(), fixed), digest_to_field(FieldParams(), fixed));
}

TEST(DigestToField, ReducesFullDigestAsBigEndianInteger) {
  // Independent reduction: Horner over bytes with p small enough for 64-bit math.
  const FieldParams f(1000003);
  const Bytes in{9, 8, 7};
  const auto d = sha256(in);
  std::uint64_t acc = 0;
  for (auto b : d.bytes) acc = (acc * 256 + b) % 1000003;
  EXPECT_EQ(digest_to_field(f, in).value(), acc);
}

}  // namespace
}  // namespace drng
