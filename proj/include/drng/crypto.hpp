// SPDX-License-Identifier: Apache-2.0
//
// Commitment digests and a hashed-ElGamal style share encryption over a
// safe-prime group. The group is sized for simulation (64-bit by default)
// and is NOT suitable for protecting real secrets. Its one property the
// protocol depends on is that a revealed private key can be checked against
// the registered public key with a single exponentiation.
#pragma once

#include <openssl/sha.h>

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

#include "drng/bytes.hpp"
#include "drng/error.hpp"
#include "drng/field.hpp"
#include "drng/modarith.hpp"
#include "drng/rng.hpp"

namespace drng {

inline constexpr std::string_view kCommitTag = "DRNG-COMMIT-V1";
inline constexpr std::string_view kKdfTag = "DRNG-KDF-V1";

struct Digest {
  std::array<std::uint8_t, 32> bytes{};

  friend bool operator==(const Digest&, const Digest&) = default;
  friend auto operator<=>(const Digest&, const Digest&) = default;
};

inline Digest sha256(std::span<const std::uint8_t> data) {
  Digest d;
  SHA256(data.data(), data.size(), d.bytes.data());
  return d;
}

/// Safe-prime group: q prime, (q-1)/2 prime, g a generator of Z_q^*.
class GroupParams {
 public:
  static constexpr std::uint64_t kDefaultModulus = 18446744073709550147ull;  // largest 64-bit safe prime
  static constexpr std::uint64_t kDefaultGenerator = 2;

  GroupParams() : q_(kDefaultModulus), g_(kDefaultGenerator) {}

  GroupParams(std::uint64_t q, std::uint64_t g) : q_(q), g_(g) {
    if (q < 7 || !modarith::is_prime(q) || !modarith::is_prime((q - 1) / 2)) {
      throw Error(ErrorCode::InvalidGroup, "modulus " + std::to_string(q) + " is not a safe prime");
    }
    if (g <= 1 || g >= q || modarith::pow(g, (q - 1) / 2, q) == 1 || modarith::pow(g, 2, q) == 1) {
      throw Error(ErrorCode::InvalidGroup, "g = " + std::to_string(g) + " does not generate Z_q^*");
    }
  }

  std::uint64_t q() const noexcept { return q_; }
  std::uint64_t g() const noexcept { return g_; }
  std::uint64_t exp(std::uint64_t e) const { return modarith::pow(g_, e, q_); }
  std::uint64_t pow(std::uint64_t base, std::uint64_t e) const { return modarith::pow(base, e, q_); }

  friend bool operator==(const GroupParams&, const GroupParams&) = default;

 private:
  std::uint64_t q_;
  std::uint64_t g_;
};

struct KeyPair {
  std::uint64_t sk = 0;
  std::uint64_t pk = 0;

  /// Derives the public half from a chosen secret.
  static KeyPair from_secret(const GroupParams& group, std::uint64_t sk) { return {sk, group.exp(sk)}; }

  friend bool operator==(const KeyPair&, const KeyPair&) = default;
};

struct Ciphertext {
  std::uint64_t c1 = 0;  // g^r mod q
  FieldElement c2;       // share + pad mod p

  friend bool operator==(const Ciphertext&, const Ciphertext&) = default;
};

inline KeyPair keygen(const GroupParams& group, Rng& rng) {
  return KeyPair::from_secret(group, rng.uniform(1, group.q() - 2));
}

inline bool verify_keypair(const GroupParams& group, std::uint64_t pk, std::uint64_t sk) {
  if (sk < 1 || sk > group.q() - 2) return false;
  return group.exp(sk) == pk;
}

/// H(bytes) read as a 256-bit big-endian integer, reduced mod p.
inline FieldElement digest_to_field(const FieldParams& field, std::span<const std::uint8_t> data) {
  const Digest d = sha256(data);
  return reduce_bytes(field, d.bytes);
}

namespace detail {

inline FieldElement kdf_pad(const FieldParams& field, std::span<const std::uint8_t> context, std::uint64_t c1,
                            std::uint64_t shared) {
  Bytes buf;
  buf.reserve(kKdfTag.size() + context.size() + 16);
  append_tag(buf, kKdfTag);
  append_bytes(buf, context);
  append_u64_be(buf, c1);
  append_u64_be(buf, shared);
  return digest_to_field(field, buf);
}

}  // namespace detail

/// Encrypts with a caller-chosen ephemeral exponent r in [1, q-2].
inline Ciphertext encrypt_with(const GroupParams& group, std::uint64_t pk, const FieldElement& y,
                               std::span<const std::uint8_t> context, std::uint64_t r) {
  const std::uint64_t c1 = group.exp(r);
  const std::uint64_t shared = group.pow(pk, r);
  return {c1, y + detail::kdf_pad(y.field(), context, c1, shared)};
}

inline Ciphertext encrypt(const GroupParams& group, std::uint64_t pk, const FieldElement& y,
                          std::span<const std::uint8_t> context, Rng& rng) {
  return encrypt_with(group, pk, y, context, rng.uniform(1, group.q() - 2));
}

/// A wrong key or context silently yields a wrong plaintext; the commitment
/// check is what catches it.
inline FieldElement decrypt(const GroupParams& group, std::uint64_t sk, const Ciphertext& ct,
                            std::span<const std::uint8_t> context) {
  const std::uint64_t shared = group.pow(ct.c1, sk);
  return ct.c2 - detail::kdf_pad(ct.c2.field(), context, ct.c1, shared);
}

inline Digest commit_share(std::uint64_t round_id, const Address& dealer, const Address& recipient,
                           const FieldElement& y) {
  Bytes buf;
  buf.reserve(kCommitTag.size() + 8 + 40 + 8);
  append_tag(buf, kCommitTag);
  append_u64_be(buf, round_id);
  append_bytes(buf, dealer);
  append_bytes(buf, recipient);
  y.encode_to(buf);
  return sha256(buf);
}

/// Encryption context binding a ciphertext to its round and matrix cell.
inline Bytes share_context(std::uint64_t round_id, const Address& dealer, const Address& recipient) {
  Bytes ctx;
  ctx.reserve(48);
  append_u64_be(ctx, round_id);
  append_bytes(ctx, dealer);
  append_bytes(ctx, recipient);
  return ctx;
}

}  // namespace drng
