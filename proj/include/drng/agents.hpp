// SPDX-License-Identifier: Apache-2.0
//
// Participant behaviours. Honest agents follow the protocol; the rest
// model the attacks the scheme has to survive: dropping out, withholding a
// key to halt the round, and a colluding coalition that decrypts every
// share early and picks which of its members withhold to steer the output.
// Faulty-dealer variants exist to exercise the contract's verification.
#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "drng/contract.hpp"
#include "drng/crypto.hpp"
#include "drng/dealing.hpp"
#include "drng/field.hpp"
#include "drng/rng.hpp"

namespace drng {

/// Boolean objective over a candidate beacon output.
enum class Predicate { Lsb1, Lsb0, Always, Never };

constexpr bool evaluate(Predicate p, const FieldElement& v) {
  switch (p) {
    case Predicate::Lsb1: return (v.value() & 1) == 1;
    case Predicate::Lsb0: return (v.value() & 1) == 0;
    case Predicate::Always: return true;
    case Predicate::Never: return false;
  }
  return false;
}

constexpr std::string_view to_string(Predicate p) {
  switch (p) {
    case Predicate::Lsb1: return "lsb1";
    case Predicate::Lsb0: return "lsb0";
    case Predicate::Always: return "always";
    case Predicate::Never: return "never";
  }
  return "?";
}

struct CoalitionMember {
  Address address{};
  FieldElement x;
  KeyPair keys;
};

/// Secrets the colluders pool among themselves.
struct Coalition {
  std::vector<CoalitionMember> members;  // sorted by address
  std::size_t max_withhold = 0;
  Predicate predicate = Predicate::Lsb1;
};

struct HonestStrategy {};
struct DropoutStrategy {
  Phase phase = Phase::Commitment;
};
struct WithholdKeyStrategy {};
struct GrinderStrategy {
  std::shared_ptr<const Coalition> coalition;
};
/// Deals a polynomial of the given degree instead of m-1.
struct WrongDegreeStrategy {
  std::size_t degree = 0;
};
/// Commits to y+1 for one recipient while encrypting the true y.
struct BadCommitmentStrategy {
  std::size_t recipient = 0;  // registry index
};
/// Lazy mode: posts and commits to y+1 as plaintext for one recipient while
/// the ciphertext still opens to y.
struct LyingPlaintextStrategy {
  std::size_t recipient = 0;
};

using Strategy = std::variant<HonestStrategy, DropoutStrategy, WithholdKeyStrategy, GrinderStrategy,
                              WrongDegreeStrategy, BadCommitmentStrategy, LyingPlaintextStrategy>;

inline std::string strategy_name(const Strategy& s) {
  static constexpr const char* kNames[] = {"honest",       "dropout",        "withhold",       "grinder",
                                           "wrong_degree", "bad_commitment", "lying_plaintext"};
  return kNames[s.index()];
}

struct ReconstructedDealer {
  Polynomial polynomial;
  FieldElement a0;
};

/// Decrypts every share addressed to the coalition and interpolates each
/// dealer's curve. Rows that lack a cell for some member are skipped.
inline std::map<Address, ReconstructedDealer> coalition_reconstruct(std::span<const CoalitionMember> members,
                                                                    const Matrix<Ciphertext>& ciphertexts,
                                                                    std::size_t m, std::uint64_t round_id,
                                                                    const GroupParams& group) {
  if (members.size() < m) {
    throw Error(ErrorCode::InsufficientCoalition,
                "coalition of " + std::to_string(members.size()) + " cannot open a threshold of " + std::to_string(m));
  }
  std::map<Address, ReconstructedDealer> out;
  for (const auto& [dealer, row] : ciphertexts) {
    std::vector<SharePoint> points;
    for (const auto& member : members) {
      auto cell = row.find(member.address);
      if (cell == row.end()) break;
      points.push_back({member.x, decrypt(group, member.keys.sk, cell->second,
                                          share_context(round_id, dealer, member.address))});
    }
    if (points.size() != members.size()) continue;
    Polynomial poly = interpolate_coefficients(points);
    FieldElement a0 = poly.constant_term();
    out.emplace(dealer, ReconstructedDealer{std::move(poly), a0});
  }
  return out;
}

struct GrindCandidate {
  std::vector<Address> withhold;
  FieldElement value;
};

struct GrindChoice {
  std::vector<Address> withhold;
  FieldElement predicted;
  bool satisfied = false;
  std::vector<GrindCandidate> candidates;  // in enumeration order
};

/// Enumerates withhold sets W of the coalition with |W| <= max_withhold, by
/// size then lexicographically by address. A set's candidate is the sum of
/// a_0 over dealers outside W, which is what the contract outputs once W's
/// contributions are excluded. Picks the first candidate satisfying the
/// predicate, falling back to the empty set.
inline GrindChoice grind_select(const std::map<Address, ReconstructedDealer>& dealers,
                                std::vector<Address> coalition, std::size_t max_withhold, Predicate predicate,
                                const FieldParams& field) {
  std::sort(coalition.begin(), coalition.end());
  const std::size_t k = coalition.size();
  max_withhold = std::min(max_withhold, k);

  FieldElement total(field, 0);
  for (const auto& [addr, d] : dealers) total += d.a0;

  std::vector<GrindCandidate> candidates;
  for (std::size_t size = 0; size <= max_withhold; ++size) {
    // Lexicographic combinations of `size` indices out of k.
    std::vector<std::size_t> idx(size);
    for (std::size_t i = 0; i < size; ++i) idx[i] = i;
    while (true) {
      GrindCandidate c{{}, total};
      for (auto i : idx) {
        c.withhold.push_back(coalition[i]);
        if (auto it = dealers.find(coalition[i]); it != dealers.end()) c.value -= it->second.a0;
      }
      candidates.push_back(std::move(c));
      std::size_t pos = size;
      while (pos > 0 && idx[pos - 1] == k - size + pos - 1) --pos;
      if (pos == 0) break;
      ++idx[pos - 1];
      for (std::size_t i = pos; i < size; ++i) idx[i] = idx[i - 1] + 1;
    }
  }

  GrindChoice choice{{}, candidates.front().value, false, {}};
  for (const auto& c : candidates) {
    if (evaluate(predicate, c.value)) {
      choice.withhold = c.withhold;
      choice.predicted = c.value;
      choice.satisfied = true;
      break;
    }
  }
  choice.candidates = std::move(candidates);
  return choice;
}

/// Everything one participant knows privately, plus its behaviour.
class Agent {
 public:
  Agent(Address address, KeyPair keys, Strategy strategy, std::uint64_t seed)
      : address_(address), keys_(keys), strategy_(std::move(strategy)), rng_(seed) {}

  const Address& address() const noexcept { return address_; }
  const KeyPair& keys() const noexcept { return keys_; }
  const Strategy& strategy() const noexcept { return strategy_; }
  const std::optional<Deal>& deal() const noexcept { return deal_; }
  const std::optional<GrindChoice>& grind_choice() const noexcept { return grind_; }

  /// Transactions this agent sends in the contract's current phase.
  std::vector<Transaction> act(const BeaconContract& contract) {
    const auto& state = contract.state();
    const Phase phase = state.phase;
    if (drops_at(phase)) return {};
    if (phase == Phase::Registration) {
      if (contract.find(address_)) return {};
      return {{address_, RegisterTx{keys_.pk, contract.config().deposit}}};
    }
    const auto* self = contract.find(address_);
    if (!self) return {};
    if (phase == Phase::Dispute) return disputes(contract);
    if (self->status != ParticipantStatus::Active) return {};

    switch (phase) {
      case Phase::Commitment:
        if (state.commitments.contains(address_)) return {};
        prepare_deal(contract);
        return {{address_, PostCommitmentsTx{posted_commitments_}}};
      case Phase::EncryptedShares: {
        if (state.ciphertexts.contains(address_) || !deal_) return {};
        PostSharesTx tx{deal_->ciphertexts, std::nullopt};
        if (contract.config().mode == VerificationMode::Lazy) tx.plaintexts = posted_plaintexts_;
        return {{address_, std::move(tx)}};
      }
      case Phase::KeyReveal:
        if (state.revealed_keys.contains(address_)) return {};
        if (std::holds_alternative<WithholdKeyStrategy>(strategy_)) return {};
        if (auto* g = std::get_if<GrinderStrategy>(&strategy_)) {
          if (!grind_) grind(contract, *g->coalition);
          if (std::find(grind_->withhold.begin(), grind_->withhold.end(), address_) != grind_->withhold.end()) return {};
        }
        return {{address_, RevealTx{keys_.sk}}};
      default:
        return {};
    }
  }

 private:
  bool drops_at(Phase phase) const {
    auto* d = std::get_if<DropoutStrategy>(&strategy_);
    return d && d->phase == phase;
  }

  bool faulty_dealer() const {
    return std::holds_alternative<WrongDegreeStrategy>(strategy_) ||
           std::holds_alternative<BadCommitmentStrategy>(strategy_) ||
           std::holds_alternative<LyingPlaintextStrategy>(strategy_);
  }

  void prepare_deal(const BeaconContract& contract) {
    if (deal_) return;
    const auto& cfg = contract.config();
    const auto& registry = contract.state().registry;
    std::vector<RecipientInfo> recipients;
    recipients.reserve(registry.size());
    for (const auto& r : registry) recipients.push_back({r.address, r.x, r.pk});

    std::size_t coefficients = cfg.m;
    if (auto* w = std::get_if<WrongDegreeStrategy>(&strategy_)) coefficients = w->degree + 1;
    Polynomial poly = generate_polynomial(coefficients, cfg.field, rng_);
    deal_ = build_deal(poly, cfg.round_id, address_, recipients, cfg.group, rng_);
    posted_commitments_ = deal_->commitments;
    posted_plaintexts_ = deal_->shares;

    auto tamper = [&](std::size_t index, bool plaintext_too) {
      if (index >= registry.size()) return;
      const Address& target = registry[index].address;
      const FieldElement forged = deal_->shares.at(target) + FieldElement(cfg.field, 1);
      posted_commitments_.at(target) = commit_share(cfg.round_id, address_, target, forged);
      if (plaintext_too) posted_plaintexts_.at(target) = forged;
    };
    if (auto* b = std::get_if<BadCommitmentStrategy>(&strategy_)) tamper(b->recipient, false);
    if (auto* l = std::get_if<LyingPlaintextStrategy>(&strategy_)) tamper(l->recipient, true);
  }

  void grind(const BeaconContract& contract, const Coalition& coalition) {
    const auto& cfg = contract.config();
    const auto dealers =
        coalition_reconstruct(coalition.members, contract.state().ciphertexts, cfg.m, cfg.round_id, cfg.group);
    std::vector<Address> members;
    for (const auto& mbr : coalition.members) members.push_back(mbr.address);
    grind_ = grind_select(dealers, members, coalition.max_withhold, coalition.predicate, cfg.field);
  }

  // Off-chain check of every posted plaintext against the ciphertext and
  // commitment it claims to open; mismatches are raised as disputes.
  std::vector<Transaction> disputes(const BeaconContract& contract) const {
    if (faulty_dealer()) return {};
    const auto& cfg = contract.config();
    const auto& state = contract.state();
    std::set<std::pair<Address, Address>> adjudicated;
    for (const auto& d : state.disputes) adjudicated.emplace(d.dealer, d.recipient);
    for (const auto& [dealer, row] : state.plaintexts) {
      const auto* rec = contract.find(dealer);
      if (rec == nullptr || rec->excluded || !state.ciphertexts.contains(dealer)) continue;
      for (const auto& [recipient, posted] : row) {
        auto key = state.revealed_keys.find(recipient);
        if (key == state.revealed_keys.end() || adjudicated.contains({dealer, recipient})) continue;
        const FieldElement opened = decrypt(cfg.group, key->second, state.ciphertexts.at(dealer).at(recipient),
                                            share_context(cfg.round_id, dealer, recipient));
        if (opened != posted ||
            commit_share(cfg.round_id, dealer, recipient, posted) != state.commitments.at(dealer).at(recipient)) {
          // One upheld dispute excludes the dealer; the view refreshes before the next agent acts.
          return {{address_, DisputeTx{dealer, recipient}}};
        }
      }
    }
    return {};
  }

  Address address_;
  KeyPair keys_;
  Strategy strategy_;
  Rng rng_;
  std::optional<Deal> deal_;
  std::map<Address, Digest> posted_commitments_;
  std::map<Address, FieldElement> posted_plaintexts_;
  std::optional<GrindChoice> grind_;
};

}  // namespace drng
