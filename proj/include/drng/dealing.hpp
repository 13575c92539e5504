// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <set>
#include <span>
#include <vector>

#include "drng/crypto.hpp"
#include "drng/error.hpp"
#include "drng/field.hpp"
#include "drng/rng.hpp"

namespace drng {

struct RecipientInfo {
  Address address{};
  FieldElement x;
  std::uint64_t pk = 0;
};

/// One dealer's output for a round. The polynomial stays with the dealer;
/// only commitments and ciphertexts (and in lazy mode, plaintexts) leave it.
struct Deal {
  Polynomial polynomial;
  std::map<Address, FieldElement> shares;
  std::map<Address, Digest> commitments;
  std::map<Address, Ciphertext> ciphertexts;
};

/// m coefficients a_0..a_{m-1}, each uniform in [1, p-1], so the degree is
/// exactly m-1.
inline Polynomial generate_polynomial(std::size_t m, const FieldParams& field, Rng& rng) {
  if (m < 1 || m >= field.p()) {
    throw Error(ErrorCode::InvalidThreshold, "threshold " + std::to_string(m) + " outside [1, p)");
  }
  std::vector<FieldElement> coeffs;
  coeffs.reserve(m);
  for (std::size_t i = 0; i < m; ++i) coeffs.push_back(sample_nonzero(field, rng));
  return Polynomial(field, std::move(coeffs));
}

inline Deal build_deal(const Polynomial& poly, std::uint64_t round_id, const Address& dealer,
                       std::span<const RecipientInfo> recipients, const GroupParams& group, Rng& rng) {
  std::set<std::uint64_t> seen;
  for (const auto& r : recipients) {
    if (r.x.is_zero()) throw Error(ErrorCode::ZeroRecipientX, "recipient x must be nonzero");
    if (!seen.insert(r.x.value()).second) throw Error(ErrorCode::DuplicateRecipientX, "recipient x values collide");
  }
  Deal deal{poly, {}, {}, {}};
  for (const auto& r : recipients) {
    const FieldElement y = poly_eval(poly, r.x);
    deal.shares.emplace(r.address, y);
    deal.commitments.emplace(r.address, commit_share(round_id, dealer, r.address, y));
    deal.ciphertexts.emplace(r.address, encrypt(group, r.pk, y, share_context(round_id, dealer, r.address), rng));
  }
  return deal;
}

/// Recipient-side check that a dealer's ciphertext opens to its commitment.
inline bool verify_own_share(const GroupParams& group, const Ciphertext& ct, const KeyPair& own,
                             const Digest& expected, std::uint64_t round_id, const Address& dealer,
                             const Address& self) {
  const FieldElement y = decrypt(group, own.sk, ct, share_context(round_id, dealer, self));
  return commit_share(round_id, dealer, self, y) == expected;
}

}  // namespace drng
