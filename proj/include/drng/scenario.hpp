// SPDX-License-Identifier: Apache-2.0
//
// Scenario description: protocol parameters plus one strategy per
// participant, loaded from JSON.
#pragma once

#include <json.hpp>

#include <cstdint>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "drng/agents.hpp"
#include "drng/contract.hpp"
#include "drng/error.hpp"

namespace drng {

/// Strategy as written in a scenario file. Participants are referred to by
/// index; the simulator resolves indices to addresses per round.
struct StrategySpec {
  enum class Kind { Honest, Dropout, Withhold, Grinder, WrongDegree, BadCommitment, LyingPlaintext };
  Kind kind = Kind::Honest;
  Phase dropout_phase = Phase::Commitment;
  std::vector<std::size_t> coalition;  // grinder
  std::size_t max_withhold = 0;        // grinder
  Predicate predicate = Predicate::Lsb1;
  std::size_t degree = 0;     // wrong_degree
  std::size_t recipient = 0;  // bad_commitment, lying_plaintext

  static StrategySpec honest() { return {}; }
  static StrategySpec withhold() { return of(Kind::Withhold); }
  static StrategySpec dropout(Phase p) {
    auto s = of(Kind::Dropout);
    s.dropout_phase = p;
    return s;
  }
  static StrategySpec grinder(std::vector<std::size_t> coalition, std::size_t max_withhold, Predicate p) {
    auto s = of(Kind::Grinder);
    s.coalition = std::move(coalition);
    s.max_withhold = max_withhold;
    s.predicate = p;
    return s;
  }
  static StrategySpec wrong_degree(std::size_t d) {
    auto s = of(Kind::WrongDegree);
    s.degree = d;
    return s;
  }
  static StrategySpec bad_commitment(std::size_t r) {
    auto s = of(Kind::BadCommitment);
    s.recipient = r;
    return s;
  }
  static StrategySpec lying_plaintext(std::size_t r) {
    auto s = of(Kind::LyingPlaintext);
    s.recipient = r;
    return s;
  }

  friend bool operator==(const StrategySpec&, const StrategySpec&) = default;

 private:
  static StrategySpec of(Kind k) {
    StrategySpec s;
    s.kind = k;
    return s;
  }
};

struct ScenarioConfig {
  std::size_t n = 5;
  std::size_t m = 3;
  FieldParams field;
  GroupParams group;
  std::uint64_t deposit = 100;
  std::uint64_t fine = 10;
  PhaseLengths phase_lengths;
  VerificationMode mode = VerificationMode::Eager;
  // Participants beyond the end of this list are honest.
  std::vector<StrategySpec> strategies;
  std::uint64_t rounds = 1;
  std::uint64_t master_seed = 0;

  const StrategySpec& strategy_of(std::size_t i) const {
    static const StrategySpec kHonest;
    return i < strategies.size() ? strategies[i] : kHonest;
  }

  ContractConfig contract_config(std::uint64_t round_id) const {
    return {m, field, group, deposit, fine, phase_lengths, mode, round_id};
  }
};

inline void validate(const ScenarioConfig& c) {
  auto fail = [](const std::string& why) { throw Error(ErrorCode::ConfigError, why); };
  if (c.m < 1 || c.m > c.n) fail("need 1 <= m <= n");
  if (c.n > c.field.p() - 1) fail("p too small for n distinct nonzero x values");
  if (c.rounds < 1) fail("rounds must be >= 1");
  if (c.strategies.size() > c.n) fail("more strategies than participants");
  try {
    validate_config(c.contract_config(0));
  } catch (const Error& e) {
    fail(e.what());
  }
  for (std::size_t i = 0; i < c.strategies.size(); ++i) {
    const auto& s = c.strategies[i];
    using K = StrategySpec::Kind;
    if (s.kind == K::Dropout && (s.dropout_phase == Phase::Dispute || s.dropout_phase == Phase::Finalized ||
                                 s.dropout_phase == Phase::Aborted)) {
      fail("dropout phase must be registration, commitment, shares or reveal");
    }
    if ((s.kind == K::BadCommitment || s.kind == K::LyingPlaintext) && s.recipient >= c.n) {
      fail("tamper target index out of range");
    }
    if (s.kind == K::WrongDegree && s.degree + 1 >= c.field.p()) fail("degree too large for the field");
    if (s.kind != K::Grinder) continue;
    std::set<std::size_t> members(s.coalition.begin(), s.coalition.end());
    if (members.size() != s.coalition.size()) fail("duplicate coalition member");
    if (!members.contains(i)) fail("grinder " + std::to_string(i) + " is not in its own coalition");
    if (members.size() < c.m) fail("coalition smaller than m cannot decrypt early");
    if (s.max_withhold > c.n - c.m) fail("max_withhold above n - m can only halt the round");
    for (auto j : members) {
      if (j >= c.n) fail("coalition index out of range");
      const auto& other = c.strategy_of(j);
      if (other.kind != K::Grinder || other.coalition != s.coalition || other.max_withhold != s.max_withhold ||
          other.predicate != s.predicate) {
        fail("coalition members must share one grinder entry");
      }
    }
  }
}

namespace detail {

inline Phase phase_from_name(const std::string& s) {
  if (s == "registration") return Phase::Registration;
  if (s == "commitment") return Phase::Commitment;
  if (s == "shares") return Phase::EncryptedShares;
  if (s == "reveal") return Phase::KeyReveal;
  throw Error(ErrorCode::ConfigError, "unknown phase '" + s + "'");
}

inline std::string phase_name(Phase p) {
  switch (p) {
    case Phase::Registration: return "registration";
    case Phase::Commitment: return "commitment";
    case Phase::EncryptedShares: return "shares";
    case Phase::KeyReveal: return "reveal";
    default: return std::string(to_string(p));
  }
}

inline Predicate predicate_from_name(const std::string& s) {
  for (auto p : {Predicate::Lsb1, Predicate::Lsb0, Predicate::Always, Predicate::Never}) {
    if (s == to_string(p)) return p;
  }
  throw Error(ErrorCode::ConfigError, "unknown predicate '" + s + "'");
}

// Accepts a JSON number or a decimal string (large primes do not survive
// every JSON toolchain as numbers).
inline std::uint64_t read_u64(const nlohmann::json& j) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(j.get<std::int64_t>());
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    std::size_t used = 0;
    try {
      const auto v = std::stoull(s, &used, 10);
      if (used == s.size() && !s.empty() && s[0] != '-') return v;
    } catch (const std::exception&) {
    }
  }
  throw Error(ErrorCode::ConfigError, "expected a non-negative integer, got " + j.dump());
}

}  // namespace detail

inline StrategySpec strategy_from_json(const nlohmann::json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "honest") return StrategySpec::honest();
  if (type == "withhold") return StrategySpec::withhold();
  if (type == "dropout") return StrategySpec::dropout(detail::phase_from_name(j.at("phase").get<std::string>()));
  if (type == "grinder") {
    std::vector<std::size_t> coalition;
    for (const auto& v : j.at("coalition")) coalition.push_back(detail::read_u64(v));
    return StrategySpec::grinder(std::move(coalition), detail::read_u64(j.at("max_withhold")),
                                 detail::predicate_from_name(j.value("predicate", std::string("lsb1"))));
  }
  if (type == "wrong_degree") return StrategySpec::wrong_degree(detail::read_u64(j.at("degree")));
  if (type == "bad_commitment") return StrategySpec::bad_commitment(detail::read_u64(j.at("recipient")));
  if (type == "lying_plaintext") return StrategySpec::lying_plaintext(detail::read_u64(j.at("recipient")));
  throw Error(ErrorCode::ConfigError, "unknown strategy type '" + type + "'");
}

inline nlohmann::json to_json(const StrategySpec& s) {
  using K = StrategySpec::Kind;
  switch (s.kind) {
    case K::Honest: return {{"type", "honest"}};
    case K::Withhold: return {{"type", "withhold"}};
    case K::Dropout: return {{"type", "dropout"}, {"phase", detail::phase_name(s.dropout_phase)}};
    case K::Grinder:
      return {{"type", "grinder"},
              {"coalition", s.coalition},
              {"max_withhold", s.max_withhold},
              {"predicate", to_string(s.predicate)}};
    case K::WrongDegree: return {{"type", "wrong_degree"}, {"degree", s.degree}};
    case K::BadCommitment: return {{"type", "bad_commitment"}, {"recipient", s.recipient}};
    case K::LyingPlaintext: return {{"type", "lying_plaintext"}, {"recipient", s.recipient}};
  }
  return {};
}

/// Parses and validates a scenario. Missing optional keys keep defaults.
inline ScenarioConfig scenario_from_json(const nlohmann::json& j) {
  using detail::read_u64;
  ScenarioConfig c;
  try {
    if (!j.is_object()) throw Error(ErrorCode::ConfigError, "scenario must be a JSON object");
    c.n = read_u64(j.at("n"));
    c.m = read_u64(j.at("m"));
    if (j.contains("p")) c.field = FieldParams(read_u64(j.at("p")));
    if (j.contains("q") || j.contains("g")) {
      c.group = GroupParams(read_u64(j.value("q", nlohmann::json(GroupParams::kDefaultModulus))),
                            read_u64(j.value("g", nlohmann::json(GroupParams::kDefaultGenerator))));
    }
    if (j.contains("deposit")) c.deposit = read_u64(j.at("deposit"));
    if (j.contains("fine")) c.fine = read_u64(j.at("fine"));
    if (j.contains("phase_lengths")) {
      const auto& pl = j.at("phase_lengths");
      auto get = [&](const char* key, std::uint64_t& dst) {
        if (pl.contains(key)) dst = read_u64(pl.at(key));
      };
      get("registration", c.phase_lengths.registration);
      get("commitment", c.phase_lengths.commitment);
      get("shares", c.phase_lengths.shares);
      get("reveal", c.phase_lengths.reveal);
      get("dispute", c.phase_lengths.dispute);
    }
    if (j.contains("verification_mode")) {
      const auto mode = j.at("verification_mode").get<std::string>();
      if (mode == "eager") {
        c.mode = VerificationMode::Eager;
      } else if (mode == "lazy") {
        c.mode = VerificationMode::Lazy;
      } else {
        throw Error(ErrorCode::ConfigError, "verification_mode must be eager or lazy");
      }
    }
    if (j.contains("strategies")) {
      for (const auto& s : j.at("strategies")) c.strategies.push_back(strategy_from_json(s));
    }
    if (j.contains("rounds")) c.rounds = read_u64(j.at("rounds"));
    if (j.contains("master_seed")) c.master_seed = read_u64(j.at("master_seed"));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    throw Error(ErrorCode::ConfigError, e.what());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
  validate(c);
  return c;
}

inline nlohmann::json to_json(const ScenarioConfig& c) {
  nlohmann::json strategies = nlohmann::json::array();
  for (const auto& s : c.strategies) strategies.push_back(to_json(s));
  return {{"n", c.n},
          {"m", c.m},
          {"p", std::to_string(c.field.p())},
          {"q", std::to_string(c.group.q())},
          {"g", std::to_string(c.group.g())},
          {"deposit", c.deposit},
          {"fine", c.fine},
          {"phase_lengths",
           {{"registration", c.phase_lengths.registration},
            {"commitment", c.phase_lengths.commitment},
            {"shares", c.phase_lengths.shares},
            {"reveal", c.phase_lengths.reveal},
            {"dispute", c.phase_lengths.dispute}}},
          {"verification_mode", to_string(c.mode)},
          {"strategies", strategies},
          {"rounds", c.rounds},
          {"master_seed", c.master_seed}};
}

}  // namespace drng
