// SPDX-License-Identifier: Apache-2.0
//
// Drives whole rounds: deploys a contract, creates synthetic participants,
// lets every agent act once per phase, advances the clock to each deadline,
// and finalizes. Everything random in a round derives from one round seed,
// which itself derives from the master seed and the round index:
//
//   round_seed = first 8 bytes (big-endian) of
//                SHA-256("DRNG-ROUND-V1" || master_seed || round_index)
//
// so rounds are independent, reproducible, and can run in any order.
#pragma once

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "drng/agents.hpp"
#include "drng/contract.hpp"
#include "drng/crypto.hpp"
#include "drng/scenario.hpp"
#include "drng/transcript.hpp"

namespace drng {

inline std::uint64_t derive_seed(std::string_view tag, std::uint64_t a, std::uint64_t b) {
  Bytes buf;
  append_tag(buf, tag);
  append_u64_be(buf, a);
  append_u64_be(buf, b);
  return read_u64_be(sha256(buf).bytes);
}

inline std::uint64_t round_seed(std::uint64_t master_seed, std::uint64_t round_index) {
  return derive_seed("DRNG-ROUND-V1", master_seed, round_index);
}

/// n addresses with distinct nonzero x = address mod p; colliding draws are
/// rejected and redrawn.
inline std::vector<Address> synthetic_addresses(std::size_t n, const FieldParams& field, std::uint64_t seed) {
  Rng rng(derive_seed("DRNG-ADDR-V1", seed, 0));
  std::vector<Address> out;
  std::set<std::uint64_t> xs;
  while (out.size() < n) {
    Address a = rng.bytes<20>();
    const auto x = reduce_bytes(field, a).value();
    if (x == 0 || !xs.insert(x).second) continue;
    out.push_back(a);
  }
  return out;
}

struct ParticipantSummary {
  Address address{};
  std::uint64_t x = 0;
  std::string strategy;
  ParticipantStatus status = ParticipantStatus::Active;
  bool excluded = false;
  std::uint64_t fines = 0;
  std::uint64_t refund = 0;
};

struct GrinderSummary {
  std::vector<Address> coalition;
  std::vector<Address> withhold;
  std::uint64_t predicted = 0;
  Predicate predicate = Predicate::Lsb1;
  std::size_t candidates = 0;
  // Filled from the contract's result: did the output hit the objective,
  // and did it equal the coalition's prediction?
  bool satisfied = false;
  bool prediction_matched = false;
};

struct RoundRecord {
  std::uint64_t round_index = 0;
  std::uint64_t round_seed = 0;
  Phase terminal = Phase::Aborted;
  std::optional<std::uint64_t> output;
  std::vector<ParticipantSummary> participants;
  std::vector<Address> withheld;
  std::optional<GrinderSummary> grinder;
  std::vector<DisputeResult> disputes;
  std::uint64_t deposits_in = 0;
  std::uint64_t refunds_out = 0;
  std::uint64_t treasury = 0;
  std::vector<Event> events;

  bool conserved() const { return deposits_in == refunds_out + treasury; }
};

struct Metrics {
  std::uint64_t rounds = 0;
  std::uint64_t finalized = 0;
  std::uint64_t aborted = 0;
  double finalize_rate = 0;
  double abort_rate = 0;
  double lsb1_frequency = 0;  // over finalized rounds
  std::uint64_t grinder_rounds = 0;
  double grinder_success_rate = 0;
  std::uint64_t grinder_prediction_mismatches = 0;
  std::uint64_t total_fines = 0;
  std::uint64_t dispute_fines = 0;
  bool conservation_ok = true;

  friend bool operator==(const Metrics&, const Metrics&) = default;
};

/// A round's record plus the private material behind it, for oracles.
struct RoundOutcome {
  RoundRecord record;
  std::vector<Agent> agents;
  std::vector<std::string> transcript;
  ContractConfig contract_config;
  RoundState final_state;
};

inline Strategy resolve_strategy(const StrategySpec& spec, const std::vector<Address>& addresses,
                                 const std::vector<KeyPair>& keys, const FieldParams& field,
                                 std::map<std::vector<std::size_t>, std::shared_ptr<const Coalition>>& coalitions) {
  using K = StrategySpec::Kind;
  switch (spec.kind) {
    case K::Honest: return HonestStrategy{};
    case K::Dropout: return DropoutStrategy{spec.dropout_phase};
    case K::Withhold: return WithholdKeyStrategy{};
    case K::WrongDegree: return WrongDegreeStrategy{spec.degree};
    case K::BadCommitment: return BadCommitmentStrategy{spec.recipient};
    case K::LyingPlaintext: return LyingPlaintextStrategy{spec.recipient};
    case K::Grinder: {
      auto& shared = coalitions[spec.coalition];
      if (!shared) {
        auto c = std::make_shared<Coalition>();
        for (auto i : spec.coalition) c->members.push_back({addresses[i], reduce_bytes(field, addresses[i]), keys[i]});
        std::sort(c->members.begin(), c->members.end(),
                  [](const auto& a, const auto& b) { return a.address < b.address; });
        c->max_withhold = spec.max_withhold;
        c->predicate = spec.predicate;
        shared = std::move(c);
      }
      return GrinderStrategy{shared};
    }
  }
  return HonestStrategy{};
}

/// Runs one round to a terminal state. Throws ConfigError on an invalid
/// scenario and InvariantViolation if the contract breaks fund conservation.
inline RoundOutcome run_round_detailed(const ScenarioConfig& config, std::uint64_t round_index) {
  validate(config);
  const std::uint64_t seed = round_seed(config.master_seed, round_index);
  const ContractConfig cc = config.contract_config(round_index);
  BeaconContract contract(cc);
  TranscriptRecorder recorder(contract);

  const auto addresses = synthetic_addresses(config.n, config.field, seed);
  std::vector<KeyPair> keys;
  for (std::size_t i = 0; i < config.n; ++i) {
    Rng key_rng(derive_seed("DRNG-KEY-V1", seed, i));
    keys.push_back(keygen(config.group, key_rng));
  }
  std::map<std::vector<std::size_t>, std::shared_ptr<const Coalition>> coalitions;
  std::vector<Agent> agents;
  agents.reserve(config.n);
  for (std::size_t i = 0; i < config.n; ++i) {
    agents.emplace_back(addresses[i], keys[i],
                        resolve_strategy(config.strategy_of(i), addresses, keys, config.field, coalitions),
                        derive_seed("DRNG-AGENT-V1", seed, i));
  }

  const Address clock{};
  while (!contract.state().terminal()) {
    if (contract.state().ready_to_finalize) {
      recorder.apply({clock, FinalizeTx{}});
      break;
    }
    for (auto& agent : agents) {
      for (const auto& tx : agent.act(contract)) recorder.apply(tx);
    }
    const auto& s = contract.state();
    recorder.apply({clock, AdvanceTx{std::max<std::uint64_t>(1, s.phase_deadline - s.block_height)}});
  }

  const RoundState& state = contract.state();
  if (!contract.funds_conserved()) {
    throw Error(ErrorCode::InvariantViolation, "fund conservation broken in round " + std::to_string(round_index));
  }

  RoundRecord rec;
  rec.round_index = round_index;
  rec.round_seed = seed;
  rec.terminal = state.phase;
  if (state.output) rec.output = state.output->value();
  for (std::size_t i = 0; i < state.registry.size(); ++i) {
    const auto& r = state.registry[i];
    std::string strategy = "honest";
    for (const auto& a : agents) {
      if (a.address() == r.address) strategy = strategy_name(a.strategy());
    }
    rec.participants.push_back({r.address, r.x.value(), strategy, r.status, r.excluded, r.fines_paid, r.refunded});
    if (r.status == ParticipantStatus::Withheld) rec.withheld.push_back(r.address);
  }
  for (const auto& a : agents) {
    const auto& choice = a.grind_choice();
    if (!choice || rec.grinder) continue;
    const auto& coalition = *std::get<GrinderStrategy>(a.strategy()).coalition;
    GrinderSummary g;
    for (const auto& mbr : coalition.members) g.coalition.push_back(mbr.address);
    g.withhold = choice->withhold;
    g.predicted = choice->predicted.value();
    g.predicate = coalition.predicate;
    g.candidates = choice->candidates.size();
    if (state.output) {
      g.satisfied = evaluate(coalition.predicate, *state.output);
      g.prediction_matched = state.output->value() == g.predicted;
    }
    rec.grinder = std::move(g);
  }
  rec.disputes = state.disputes;
  rec.deposits_in = state.deposits_in;
  rec.refunds_out = state.refunds_out;
  rec.treasury = state.treasury;
  rec.events = state.events;

  return {std::move(rec), std::move(agents), recorder.lines(), cc, state};
}

inline RoundRecord run_round(const ScenarioConfig& config, std::uint64_t round_index) {
  return run_round_detailed(config, round_index).record;
}

inline Metrics summarize(const std::vector<RoundRecord>& records) {
  Metrics m;
  std::uint64_t lsb1 = 0;
  std::uint64_t grinder_hits = 0;
  for (const auto& r : records) {
    ++m.rounds;
    if (r.terminal == Phase::Finalized) {
      ++m.finalized;
      if (r.output && (*r.output & 1)) ++lsb1;
    } else {
      ++m.aborted;
    }
    if (r.grinder) {
      ++m.grinder_rounds;
      if (r.grinder->satisfied) ++grinder_hits;
      if (r.terminal == Phase::Finalized && !r.grinder->prediction_matched) ++m.grinder_prediction_mismatches;
    }
    for (const auto& p : r.participants) m.total_fines += p.fines;
    for (const auto& e : r.events) {
      if (e.kind == "fined" && (e.detail == "false dispute" || e.detail == "dispute upheld")) m.dispute_fines += e.amount;
    }
    m.conservation_ok = m.conservation_ok && r.conserved();
  }
  if (m.rounds > 0) {
    m.finalize_rate = static_cast<double>(m.finalized) / static_cast<double>(m.rounds);
    m.abort_rate = static_cast<double>(m.aborted) / static_cast<double>(m.rounds);
  }
  if (m.finalized > 0) m.lsb1_frequency = static_cast<double>(lsb1) / static_cast<double>(m.finalized);
  if (m.grinder_rounds > 0) {
    m.grinder_success_rate = static_cast<double>(grinder_hits) / static_cast<double>(m.grinder_rounds);
  }
  return m;
}

struct BatchResult {
  Metrics metrics;
  std::vector<RoundRecord> records;  // in round-index order
};

/// Runs config.rounds rounds on up to `threads` workers. Output is identical
/// to a sequential run regardless of thread count.
inline BatchResult run_batch(const ScenarioConfig& config, unsigned threads = 1) {
  validate(config);
  std::vector<std::optional<RoundRecord>> slots(config.rounds);
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (auto i = next++; i < config.rounds; i = next++) {
      try {
        slots[i] = run_round(config, i);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = config.rounds;
      }
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::min<std::uint64_t>(config.rounds, 1024))));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  BatchResult result;
  result.records.reserve(slots.size());
  for (auto& s : slots) result.records.push_back(std::move(*s));
  result.metrics = summarize(result.records);
  return result;
}

// JSON encoding of records and metrics. Field elements are decimal strings;
// addresses and seeds are hex.

inline nlohmann::json to_json(const RoundRecord& r) {
  using nlohmann::json;
  json participants = json::array();
  for (const auto& p : r.participants) {
    participants.push_back({{"address", to_hex(p.address)},
                            {"x", std::to_string(p.x)},
                            {"strategy", p.strategy},
                            {"status", to_string(p.status)},
                            {"excluded", p.excluded},
                            {"fines", p.fines},
                            {"refund", p.refund}});
  }
  json withheld = json::array();
  for (const auto& a : r.withheld) withheld.push_back(to_hex(a));
  json grinder = nullptr;
  if (r.grinder) {
    json coalition = json::array();
    for (const auto& a : r.grinder->coalition) coalition.push_back(to_hex(a));
    json withhold = json::array();
    for (const auto& a : r.grinder->withhold) withhold.push_back(to_hex(a));
    grinder = {{"coalition", coalition},
               {"withhold", withhold},
               {"predicted", std::to_string(r.grinder->predicted)},
               {"predicate", to_string(r.grinder->predicate)},
               {"candidates", r.grinder->candidates},
               {"satisfied", r.grinder->satisfied},
               {"prediction_matched", r.grinder->prediction_matched}};
  }
  json disputes = json::array();
  for (const auto& d : r.disputes) disputes.push_back(to_json(d));
  json events = json::array();
  for (const auto& e : r.events) events.push_back(to_json(e));
  return {{"round", r.round_index},
          {"round_seed", u64_hex(r.round_seed)},
          {"phase", to_string(r.terminal)},
          {"output", r.output ? json(std::to_string(*r.output)) : json(nullptr)},
          {"participants", participants},
          {"withheld", withheld},
          {"grinder", grinder},
          {"disputes", disputes},
          {"deposits_in", r.deposits_in},
          {"refunds_out", r.refunds_out},
          {"treasury", r.treasury},
          {"events", events}};
}

inline RoundRecord record_from_json(const nlohmann::json& j) {
  auto addr = [](const nlohmann::json& v) { return detail::address_from_hex(v); };
  auto status_from = [](const std::string& s) {
    if (s == "DROPPED") return ParticipantStatus::Dropped;
    if (s == "WITHHELD") return ParticipantStatus::Withheld;
    return ParticipantStatus::Active;
  };
  RoundRecord r;
  r.round_index = j.at("round").get<std::uint64_t>();
  r.round_seed = detail::u64_from_hex(j.at("round_seed"));
  r.terminal = j.at("phase").get<std::string>() == "FINALIZED" ? Phase::Finalized : Phase::Aborted;
  if (!j.at("output").is_null()) r.output = std::stoull(j.at("output").get<std::string>());
  for (const auto& p : j.at("participants")) {
    r.participants.push_back({addr(p.at("address")), std::stoull(p.at("x").get<std::string>()),
                              p.at("strategy").get<std::string>(), status_from(p.at("status").get<std::string>()),
                              p.at("excluded").get<bool>(), p.at("fines").get<std::uint64_t>(),
                              p.at("refund").get<std::uint64_t>()});
  }
  for (const auto& a : j.at("withheld")) r.withheld.push_back(addr(a));
  if (!j.at("grinder").is_null()) {
    const auto& g = j.at("grinder");
    GrinderSummary s;
    for (const auto& a : g.at("coalition")) s.coalition.push_back(addr(a));
    for (const auto& a : g.at("withhold")) s.withhold.push_back(addr(a));
    s.predicted = std::stoull(g.at("predicted").get<std::string>());
    s.predicate = detail::predicate_from_name(g.at("predicate").get<std::string>());
    s.candidates = g.at("candidates").get<std::size_t>();
    s.satisfied = g.at("satisfied").get<bool>();
    s.prediction_matched = g.at("prediction_matched").get<bool>();
    r.grinder = std::move(s);
  }
  for (const auto& d : j.at("disputes")) r.disputes.push_back(dispute_from_json(d));
  r.deposits_in = j.at("deposits_in").get<std::uint64_t>();
  r.refunds_out = j.at("refunds_out").get<std::uint64_t>();
  r.treasury = j.at("treasury").get<std::uint64_t>();
  for (const auto& e : j.at("events")) r.events.push_back(event_from_json(e));
  return r;
}

inline nlohmann::json to_json(const Metrics& m) {
  return {{"rounds", m.rounds},
          {"finalized", m.finalized},
          {"aborted", m.aborted},
          {"finalize_rate", m.finalize_rate},
          {"abort_rate", m.abort_rate},
          {"lsb1_frequency", m.lsb1_frequency},
          {"grinder_rounds", m.grinder_rounds},
          {"grinder_success_rate", m.grinder_success_rate},
          {"grinder_prediction_mismatches", m.grinder_prediction_mismatches},
          {"total_fines", m.total_fines},
          {"dispute_fines", m.dispute_fines},
          {"conservation_ok", m.conservation_ok}};
}

}  // namespace drng
