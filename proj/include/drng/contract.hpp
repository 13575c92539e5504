// SPDX-License-Identifier: Apache-2.0
//
// The beacon contract as a deterministic single-writer state machine.
//
// Phases run REGISTRATION -> COMMITMENT -> ENCRYPTED_SHARES -> KEY_REVEAL
// [-> DISPUTE in lazy mode] -> FINALIZED | ABORTED. Time is a logical block
// height moved only by advance_blocks(); each phase ends when the height
// reaches its deadline, at which point missing submissions are penalised.
// Every mutating call validates fully before touching state, so a call that
// throws leaves the contract unchanged.
#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "drng/crypto.hpp"
#include "drng/error.hpp"
#include "drng/field.hpp"

namespace drng {

enum class Phase { Registration, Commitment, EncryptedShares, KeyReveal, Dispute, Finalized, Aborted };
enum class VerificationMode { Eager, Lazy };
enum class ParticipantStatus { Active, Dropped, Withheld };

constexpr std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::Registration: return "REGISTRATION";
    case Phase::Commitment: return "COMMITMENT";
    case Phase::EncryptedShares: return "ENCRYPTED_SHARES";
    case Phase::KeyReveal: return "KEY_REVEAL";
    case Phase::Dispute: return "DISPUTE";
    case Phase::Finalized: return "FINALIZED";
    case Phase::Aborted: return "ABORTED";
  }
  return "?";
}

constexpr std::string_view to_string(VerificationMode m) { return m == VerificationMode::Eager ? "eager" : "lazy"; }

constexpr std::string_view to_string(ParticipantStatus s) {
  switch (s) {
    case ParticipantStatus::Active: return "ACTIVE";
    case ParticipantStatus::Dropped: return "DROPPED";
    case ParticipantStatus::Withheld: return "WITHHELD";
  }
  return "?";
}

struct PhaseLengths {
  std::uint64_t registration = 10;
  std::uint64_t commitment = 10;
  std::uint64_t shares = 10;
  std::uint64_t reveal = 10;
  std::uint64_t dispute = 10;

  friend bool operator==(const PhaseLengths&, const PhaseLengths&) = default;
};

struct ContractConfig {
  std::size_t m = 1;
  FieldParams field;
  GroupParams group;
  std::uint64_t deposit = 100;
  std::uint64_t fine = 10;
  PhaseLengths phase_lengths;
  VerificationMode mode = VerificationMode::Eager;
  std::uint64_t round_id = 0;
};

struct ParticipantRecord {
  Address address{};
  FieldElement x;
  std::uint64_t pk = 0;
  ParticipantStatus status = ParticipantStatus::Active;
  std::uint64_t deposit_held = 0;
  std::uint64_t fines_paid = 0;
  std::uint64_t refunded = 0;
  // Dealer contribution dropped from the output after a failed check.
  bool excluded = false;
};

struct Event {
  std::uint64_t block = 0;
  std::string kind;
  std::optional<Address> subject;
  std::string detail;
  std::uint64_t amount = 0;
};

struct DisputeResult {
  Address challenger{};
  Address dealer{};
  Address recipient{};
  bool upheld = false;
};

template <typename V>
using Matrix = std::map<Address, std::map<Address, V>>;

struct RoundState {
  Phase phase = Phase::Registration;
  std::uint64_t block_height = 0;
  std::uint64_t phase_deadline = 0;
  // Set once the reveal (eager) or dispute (lazy) deadline has passed.
  bool ready_to_finalize = false;
  std::vector<ParticipantRecord> registry;
  Matrix<Digest> commitments;
  Matrix<Ciphertext> ciphertexts;
  Matrix<FieldElement> plaintexts;
  std::map<Address, std::uint64_t> revealed_keys;
  std::vector<DisputeResult> disputes;
  std::optional<FieldElement> output;
  std::uint64_t deposits_in = 0;
  std::uint64_t refunds_out = 0;
  std::uint64_t treasury = 0;
  std::vector<Event> events;

  bool terminal() const { return phase == Phase::Finalized || phase == Phase::Aborted; }
};

/// Result of get_output(): a value only once FINALIZED.
struct BeaconOutput {
  enum class Kind { Pending, Aborted, Value } kind = Kind::Pending;
  std::optional<FieldElement> value;
};

// Transactions. ADVANCE and FINALIZE are clock/housekeeping calls that
// anyone may send; everything else requires a registered sender.
struct RegisterTx {
  std::uint64_t pk = 0;
  std::uint64_t deposit = 0;
};
struct PostCommitmentsTx {
  std::map<Address, Digest> digests;
};
struct PostSharesTx {
  std::map<Address, Ciphertext> ciphertexts;
  std::optional<std::map<Address, FieldElement>> plaintexts;
};
struct RevealTx {
  std::uint64_t sk = 0;
};
struct DisputeTx {
  Address dealer{};
  Address recipient{};
};
struct AdvanceTx {
  std::uint64_t blocks = 1;
};
struct FinalizeTx {};

using TxPayload = std::variant<RegisterTx, PostCommitmentsTx, PostSharesTx, RevealTx, DisputeTx, AdvanceTx, FinalizeTx>;

struct Transaction {
  Address sender{};
  TxPayload payload;
};

inline std::string_view tx_kind(const Transaction& tx) {
  static constexpr std::string_view kNames[] = {"REGISTER", "POST_COMMITMENTS", "POST_SHARES", "REVEAL",
                                                "DISPUTE",  "ADVANCE",          "FINALIZE"};
  return kNames[tx.payload.index()];
}

inline void validate_config(const ContractConfig& config) {
  if (config.m < 1) throw Error(ErrorCode::InvalidConfig, "threshold m must be >= 1");
  if (config.m >= config.field.p()) throw Error(ErrorCode::InvalidConfig, "threshold m must be < p");
  if (config.fine > config.deposit) throw Error(ErrorCode::InvalidConfig, "fine exceeds deposit");
  const auto& pl = config.phase_lengths;
  if (pl.registration < 1 || pl.commitment < 1 || pl.shares < 1 || pl.reveal < 1 || pl.dispute < 1) {
    throw Error(ErrorCode::InvalidConfig, "every phase length must be >= 1 block");
  }
}

class BeaconContract {
 public:
  /// deploy(): validates the configuration and opens registration.
  explicit BeaconContract(ContractConfig config) : config_(std::move(config)) {
    validate_config(config_);
    state_.phase_deadline = config_.phase_lengths.registration;
  }

  const ContractConfig& config() const noexcept { return config_; }
  const RoundState& state() const noexcept { return state_; }

  const ParticipantRecord* find(const Address& a) const {
    auto it = index_.find(a);
    return it == index_.end() ? nullptr : &state_.registry[it->second];
  }

  void register_participant(const Address& address, std::uint64_t pk, std::uint64_t deposit) {
    require_open(Phase::Registration);
    if (deposit != config_.deposit) throw Error(ErrorCode::WrongDeposit, "deposit must equal the configured amount");
    if (index_.contains(address)) throw Error(ErrorCode::DuplicateAddress, "address already registered");
    const FieldElement x = reduce_bytes(config_.field, address);
    if (x.is_zero()) throw Error(ErrorCode::XCollision, "address maps to x = 0");
    for (const auto& r : state_.registry) {
      if (r.x == x) throw Error(ErrorCode::XCollision, "address collides with an existing x value");
    }
    if (pk == 0 || pk >= config_.group.q()) throw Error(ErrorCode::MalformedPayload, "public key outside the group");

    index_.emplace(address, state_.registry.size());
    state_.registry.push_back(ParticipantRecord{address, x, pk, ParticipantStatus::Active, deposit, 0, 0, false});
    state_.deposits_in += deposit;
    emit("registered", address, std::to_string(x.value()), deposit);
  }

  void advance_blocks(std::uint64_t k) {
    if (k < 1) throw Error(ErrorCode::MalformedPayload, "advance needs k >= 1");
    state_.block_height += k;
    while (!state_.terminal() && !state_.ready_to_finalize && state_.block_height >= state_.phase_deadline) {
      close_phase();
    }
  }

  void post_commitments(const Address& sender, const std::map<Address, Digest>& digests) {
    auto& rec = active_sender(sender, Phase::Commitment);
    if (state_.commitments.contains(sender)) throw Error(ErrorCode::AlreadyPosted, "commitments already posted");
    require_full_row(digests);
    state_.commitments.emplace(sender, digests);
    emit("commitments_posted", rec.address);
  }

  void post_encrypted_shares(const Address& sender, const std::map<Address, Ciphertext>& cts,
                             const std::optional<std::map<Address, FieldElement>>& plaintexts) {
    auto& rec = active_sender(sender, Phase::EncryptedShares);
    if (!state_.commitments.contains(sender)) throw Error(ErrorCode::MissingCommitment, "no commitments on record");
    if (state_.ciphertexts.contains(sender)) throw Error(ErrorCode::AlreadyPosted, "shares already posted");
    if (plaintexts.has_value() != (config_.mode == VerificationMode::Lazy)) {
      throw Error(ErrorCode::PlaintextModeMismatch, "plaintexts must accompany shares exactly in lazy mode");
    }
    require_full_row(cts);
    for (const auto& [to, ct] : cts) {
      if (ct.c1 == 0 || ct.c1 >= config_.group.q() || ct.c2.modulus() != config_.field.p()) {
        throw Error(ErrorCode::MalformedPayload, "ciphertext component out of range");
      }
    }
    if (plaintexts) {
      require_full_row(*plaintexts);
      for (const auto& [to, y] : *plaintexts) {
        if (y.modulus() != config_.field.p()) throw Error(ErrorCode::FieldMismatch, "plaintext from wrong field");
      }
      state_.plaintexts.emplace(sender, *plaintexts);
    }
    state_.ciphertexts.emplace(sender, cts);
    emit("shares_posted", rec.address);
  }

  /// A key that fails verification is rejected and counts as no reveal.
  void reveal_key(const Address& sender, std::uint64_t sk) {
    auto& rec = active_sender(sender, Phase::KeyReveal);
    if (state_.revealed_keys.contains(sender)) throw Error(ErrorCode::AlreadyPosted, "key already revealed");
    if (!verify_keypair(config_.group, rec.pk, sk)) throw Error(ErrorCode::KeyMismatch, "key does not match pk");
    state_.revealed_keys.emplace(sender, sk);
    emit("key_revealed", rec.address);
  }

  void dispute(const Address& challenger, const Address& dealer, const Address& recipient) {
    if (config_.mode != VerificationMode::Lazy) throw Error(ErrorCode::WrongPhase, "disputes exist only in lazy mode");
    require_open(Phase::Dispute);
    auto& challenger_rec = registered(challenger);
    auto& dealer_rec = registered(dealer);
    registered(recipient);
    if (!state_.ciphertexts.contains(dealer)) throw Error(ErrorCode::MissingShares, "dealer posted no shares");
    auto key = state_.revealed_keys.find(recipient);
    if (key == state_.revealed_keys.end()) throw Error(ErrorCode::KeyNotRevealed, "recipient key not revealed");
    for (const auto& d : state_.disputes) {
      if (d.dealer == dealer && d.recipient == recipient) {
        throw Error(ErrorCode::AlreadyAdjudicated, "cell already adjudicated");
      }
    }

    const FieldElement decrypted = decrypt(config_.group, key->second, state_.ciphertexts.at(dealer).at(recipient),
                                           share_context(config_.round_id, dealer, recipient));
    const FieldElement& posted = state_.plaintexts.at(dealer).at(recipient);
    const bool upheld = posted != decrypted ||
                        commit_share(config_.round_id, dealer, recipient, posted) !=
                            state_.commitments.at(dealer).at(recipient);
    state_.disputes.push_back({challenger, dealer, recipient, upheld});
    if (upheld) {
      emit("dispute_upheld", dealer, "challenger " + to_hex(challenger));
      exclude(dealer_rec, "dispute upheld");
    } else {
      emit("dispute_rejected", challenger, "dealer " + to_hex(dealer));
      fine(challenger_rec, "false dispute");
    }
  }

  void finalize() {
    if (state_.terminal() || !state_.ready_to_finalize) {
      throw Error(ErrorCode::WrongPhase, "finalize needs the last deadline to have passed");
    }
    std::vector<std::size_t> revealers;
    for (std::size_t i = 0; i < state_.registry.size(); ++i) {
      const auto& r = state_.registry[i];
      if (r.status == ParticipantStatus::Active && state_.revealed_keys.contains(r.address)) revealers.push_back(i);
    }
    if (revealers.size() < config_.m) {
      abort_round("fewer than m revealed keys");
      return;
    }

    FieldElement sum(config_.field, 0);
    std::size_t survivors = 0;
    for (auto d : revealers) {
      auto& dealer = state_.registry[d];
      if (dealer.excluded) continue;
      auto a0 = verified_contribution(dealer.address, revealers);
      if (!a0) continue;
      sum += *a0;
      ++survivors;
    }
    if (survivors == 0) {
      abort_round("no dealer passed verification");
      return;
    }
    state_.output = sum;
    state_.phase = Phase::Finalized;
    emit("finalized", std::nullopt, std::to_string(sum.value()));
    settle();
  }

  BeaconOutput get_output() const {
    if (state_.phase == Phase::Aborted) return {BeaconOutput::Kind::Aborted, std::nullopt};
    if (state_.phase == Phase::Finalized) return {BeaconOutput::Kind::Value, state_.output};
    return {};
  }

  /// Applies one transaction. Returns the error code on rejection; the state
  /// is then unchanged.
  std::optional<ErrorCode> apply(const Transaction& tx) {
    try {
      std::visit(
          [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, RegisterTx>) {
              register_participant(tx.sender, p.pk, p.deposit);
            } else if constexpr (std::is_same_v<T, PostCommitmentsTx>) {
              post_commitments(tx.sender, p.digests);
            } else if constexpr (std::is_same_v<T, PostSharesTx>) {
              post_encrypted_shares(tx.sender, p.ciphertexts, p.plaintexts);
            } else if constexpr (std::is_same_v<T, RevealTx>) {
              reveal_key(tx.sender, p.sk);
            } else if constexpr (std::is_same_v<T, DisputeTx>) {
              dispute(tx.sender, p.dealer, p.recipient);
            } else if constexpr (std::is_same_v<T, AdvanceTx>) {
              advance_blocks(p.blocks);
            } else {
              finalize();
            }
          },
          tx.payload);
    } catch (const Error& e) {
      return e.code();
    }
    return std::nullopt;
  }

  /// Balance change per address: refunds minus deposits paid in.
  std::map<Address, std::int64_t> ledger() const {
    std::map<Address, std::int64_t> out;
    for (const auto& r : state_.registry) {
      out[r.address] = static_cast<std::int64_t>(r.refunded) - static_cast<std::int64_t>(config_.deposit);
    }
    return out;
  }

  bool funds_conserved() const { return state_.deposits_in == state_.refunds_out + state_.treasury; }

 private:
  void emit(std::string kind, std::optional<Address> subject = std::nullopt, std::string detail = {},
            std::uint64_t amount = 0) {
    state_.events.push_back({state_.block_height, std::move(kind), subject, std::move(detail), amount});
  }

  bool phase_open(Phase phase) const {
    return state_.phase == phase && !state_.ready_to_finalize && state_.block_height < state_.phase_deadline;
  }

  void require_open(Phase phase) const {
    if (!phase_open(phase)) {
      throw Error(ErrorCode::WrongPhase, std::string("expected open ") + std::string(to_string(phase)) +
                                             " phase, contract is in " + std::string(to_string(state_.phase)));
    }
  }

  ParticipantRecord& registered(const Address& a) {
    auto it = index_.find(a);
    if (it == index_.end()) throw Error(ErrorCode::NotRegistered, "unknown address " + to_hex(a));
    return state_.registry[it->second];
  }

  ParticipantRecord& active_sender(const Address& sender, Phase phase) {
    require_open(phase);
    auto& rec = registered(sender);
    if (rec.status != ParticipantStatus::Active) throw Error(ErrorCode::NotActive, "sender is not ACTIVE");
    return rec;
  }

  // One entry per registered participant, no more, no less.
  template <typename V>
  void require_full_row(const std::map<Address, V>& row) const {
    if (row.size() != state_.registry.size()) {
      throw Error(ErrorCode::WrongCardinality, "expected " + std::to_string(state_.registry.size()) + " entries, got " +
                                                   std::to_string(row.size()));
    }
    for (const auto& [to, v] : row) {
      if (!index_.contains(to)) throw Error(ErrorCode::WrongCardinality, "entry for unregistered recipient");
    }
  }

  void fine(ParticipantRecord& rec, const std::string& reason) {
    const std::uint64_t amount = std::min(config_.fine, rec.deposit_held);
    rec.deposit_held -= amount;
    rec.fines_paid += amount;
    state_.treasury += amount;
    emit("fined", rec.address, reason, amount);
  }

  void exclude(ParticipantRecord& dealer, const std::string& reason) {
    if (dealer.excluded) return;
    dealer.excluded = true;
    emit("excluded", dealer.address, reason);
    fine(dealer, reason);
  }

  std::size_t active_count() const {
    return static_cast<std::size_t>(std::count_if(state_.registry.begin(), state_.registry.end(), [](const auto& r) {
      return r.status == ParticipantStatus::Active;
    }));
  }

  void enter(Phase next, std::uint64_t length) {
    state_.phase = next;
    state_.phase_deadline = state_.block_height + length;
    emit("phase", std::nullopt, std::string(to_string(next)));
  }

  // Fires when the current phase's deadline has passed.
  void close_phase() {
    const auto& pl = config_.phase_lengths;
    switch (state_.phase) {
      case Phase::Registration:
        if (state_.registry.size() < config_.m) return abort_round("fewer than m registrations");
        return enter(Phase::Commitment, pl.commitment);
      case Phase::Commitment:
        penalise_missing(state_.commitments, ParticipantStatus::Dropped, "no commitments");
        if (active_count() < config_.m) return abort_round("fewer than m active after commitment");
        return enter(Phase::EncryptedShares, pl.shares);
      case Phase::EncryptedShares:
        penalise_missing(state_.ciphertexts, ParticipantStatus::Dropped, "no encrypted shares");
        if (active_count() < config_.m) return abort_round("fewer than m active after shares");
        return enter(Phase::KeyReveal, pl.reveal);
      case Phase::KeyReveal:
        penalise_missing(state_.revealed_keys, ParticipantStatus::Withheld, "key withheld");
        if (config_.mode == VerificationMode::Lazy) return enter(Phase::Dispute, pl.dispute);
        state_.ready_to_finalize = true;
        return;
      case Phase::Dispute:
        state_.ready_to_finalize = true;
        return;
      case Phase::Finalized:
      case Phase::Aborted:
        return;
    }
  }

  template <typename Posted>
  void penalise_missing(const Posted& posted, ParticipantStatus new_status, const std::string& reason) {
    for (auto& r : state_.registry) {
      if (r.status != ParticipantStatus::Active || posted.contains(r.address)) continue;
      r.status = new_status;
      emit(new_status == ParticipantStatus::Dropped ? "dropped" : "withheld", r.address, reason);
      fine(r, reason);
    }
  }

  // Recovers a dealer's a_0 from the revealers' shares, or fines and
  // excludes the dealer when a share breaks its commitment or the shares do
  // not lie on a curve of degree exactly m-1.
  std::optional<FieldElement> verified_contribution(const Address& dealer, std::span<const std::size_t> revealers) {
    auto& dealer_rec = registered(dealer);
    const auto& commitments = state_.commitments.at(dealer);
    std::vector<SharePoint> points;
    points.reserve(revealers.size());
    for (auto j : revealers) {
      const auto& recipient = state_.registry[j];
      FieldElement y = config_.mode == VerificationMode::Eager
                           ? decrypt(config_.group, state_.revealed_keys.at(recipient.address),
                                     state_.ciphertexts.at(dealer).at(recipient.address),
                                     share_context(config_.round_id, dealer, recipient.address))
                           : state_.plaintexts.at(dealer).at(recipient.address);
      if (commit_share(config_.round_id, dealer, recipient.address, y) != commitments.at(recipient.address)) {
        exclude(dealer_rec, "commitment mismatch at " + to_hex(recipient.address));
        return std::nullopt;
      }
      points.push_back({recipient.x, y});
    }
    const Polynomial curve = interpolate_coefficients(points);
    if (curve.degree() != config_.m - 1) {
      exclude(dealer_rec, "curve degree " + std::to_string(curve.degree()) + " != " + std::to_string(config_.m - 1));
      return std::nullopt;
    }
    return curve.constant_term();
  }

  void abort_round(const std::string& reason) {
    state_.phase = Phase::Aborted;
    emit("aborted", std::nullopt, reason);
    settle();
  }

  // Returns whatever each participant still has escrowed.
  void settle() {
    for (auto& r : state_.registry) {
      r.refunded = r.deposit_held;
      state_.refunds_out += r.deposit_held;
      r.deposit_held = 0;
      if (r.refunded > 0) emit("refund", r.address, {}, r.refunded);
    }
  }

  ContractConfig config_;
  RoundState state_;
  std::map<Address, std::size_t> index_;
};

}  // namespace drng
