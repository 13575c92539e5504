// SPDX-License-Identifier: Apache-2.0
//
// Line-delimited JSON transcripts of contract transactions and the events
// they produced. Group and field elements are 8-byte big-endian hex,
// addresses 20-byte hex, digests 32-byte hex, all lowercase.
#pragma once

#include <json.hpp>

#include <string>
#include <vector>

#include "drng/bytes.hpp"
#include "drng/contract.hpp"
#include "drng/error.hpp"

namespace drng {

using json = nlohmann::json;

inline std::string u64_hex(std::uint64_t v) {
  Bytes b;
  append_u64_be(b, v);
  return to_hex(b);
}

namespace detail {

inline std::uint64_t u64_from_hex(const json& j) {
  auto b = fixed_from_hex<8>(j.get<std::string>());
  if (!b) throw Error(ErrorCode::MalformedPayload, "expected 16 hex digits");
  return read_u64_be(*b);
}

inline Address address_from_hex(const json& j) {
  auto a = fixed_from_hex<20>(j.get<std::string>());
  if (!a) throw Error(ErrorCode::MalformedPayload, "expected a 20-byte hex address");
  return *a;
}

inline Digest digest_from_hex(const json& j) {
  auto d = fixed_from_hex<32>(j.get<std::string>());
  if (!d) throw Error(ErrorCode::MalformedPayload, "expected a 32-byte hex digest");
  return Digest{*d};
}

}  // namespace detail

inline json to_json(const Ciphertext& ct) { return {{"c1", u64_hex(ct.c1)}, {"c2", u64_hex(ct.c2.value())}}; }

inline json to_json(const Transaction& tx) {
  json j = {{"sender", to_hex(tx.sender)}, {"kind", tx_kind(tx)}};
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, RegisterTx>) {
          j["pk"] = u64_hex(p.pk);
          j["deposit"] = p.deposit;
        } else if constexpr (std::is_same_v<T, PostCommitmentsTx>) {
          json d = json::object();
          for (const auto& [to, digest] : p.digests) d[to_hex(to)] = to_hex(digest.bytes);
          j["digests"] = d;
        } else if constexpr (std::is_same_v<T, PostSharesTx>) {
          json c = json::object();
          for (const auto& [to, ct] : p.ciphertexts) c[to_hex(to)] = to_json(ct);
          j["ciphertexts"] = c;
          if (p.plaintexts) {
            json pt = json::object();
            for (const auto& [to, y] : *p.plaintexts) pt[to_hex(to)] = u64_hex(y.value());
            j["plaintexts"] = pt;
          }
        } else if constexpr (std::is_same_v<T, RevealTx>) {
          j["sk"] = u64_hex(p.sk);
        } else if constexpr (std::is_same_v<T, DisputeTx>) {
          j["dealer"] = to_hex(p.dealer);
          j["recipient"] = to_hex(p.recipient);
        } else if constexpr (std::is_same_v<T, AdvanceTx>) {
          j["blocks"] = p.blocks;
        }
      },
      tx.payload);
  return j;
}

/// Field elements decode into `field`; the transcript does not carry p.
inline Transaction transaction_from_json(const json& j, const FieldParams& field) {
  using detail::address_from_hex;
  using detail::u64_from_hex;
  Transaction tx{address_from_hex(j.at("sender")), FinalizeTx{}};
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "REGISTER") {
    tx.payload = RegisterTx{u64_from_hex(j.at("pk")), j.at("deposit").get<std::uint64_t>()};
  } else if (kind == "POST_COMMITMENTS") {
    PostCommitmentsTx p;
    for (const auto& [k, v] : j.at("digests").items()) p.digests.emplace(address_from_hex(k), detail::digest_from_hex(v));
    tx.payload = std::move(p);
  } else if (kind == "POST_SHARES") {
    PostSharesTx p;
    for (const auto& [k, v] : j.at("ciphertexts").items()) {
      p.ciphertexts.emplace(address_from_hex(k),
                            Ciphertext{u64_from_hex(v.at("c1")), FieldElement(field, u64_from_hex(v.at("c2")))});
    }
    if (j.contains("plaintexts")) {
      std::map<Address, FieldElement> pts;
      for (const auto& [k, v] : j.at("plaintexts").items()) {
        pts.emplace(address_from_hex(k), FieldElement(field, u64_from_hex(v)));
      }
      p.plaintexts = std::move(pts);
    }
    tx.payload = std::move(p);
  } else if (kind == "REVEAL") {
    tx.payload = RevealTx{u64_from_hex(j.at("sk"))};
  } else if (kind == "DISPUTE") {
    tx.payload = DisputeTx{address_from_hex(j.at("dealer")), address_from_hex(j.at("recipient"))};
  } else if (kind == "ADVANCE") {
    tx.payload = AdvanceTx{j.at("blocks").get<std::uint64_t>()};
  } else if (kind != "FINALIZE") {
    throw Error(ErrorCode::MalformedPayload, "unknown transaction kind " + kind);
  }
  return tx;
}

inline json to_json(const Event& e) {
  json j = {{"block", e.block}, {"kind", e.kind}};
  if (e.subject) j["subject"] = to_hex(*e.subject);
  if (!e.detail.empty()) j["detail"] = e.detail;
  if (e.amount != 0) j["amount"] = e.amount;
  return j;
}

inline Event event_from_json(const json& j) {
  Event e;
  e.block = j.at("block").get<std::uint64_t>();
  e.kind = j.at("kind").get<std::string>();
  if (j.contains("subject")) e.subject = detail::address_from_hex(j.at("subject"));
  e.detail = j.value("detail", std::string{});
  e.amount = j.value("amount", std::uint64_t{0});
  return e;
}

inline json to_json(const DisputeResult& d) {
  return {{"challenger", to_hex(d.challenger)},
          {"dealer", to_hex(d.dealer)},
          {"recipient", to_hex(d.recipient)},
          {"upheld", d.upheld}};
}

inline DisputeResult dispute_from_json(const json& j) {
  return {detail::address_from_hex(j.at("challenger")), detail::address_from_hex(j.at("dealer")),
          detail::address_from_hex(j.at("recipient")), j.at("upheld").get<bool>()};
}

/// Full snapshot of a contract's state; equal snapshots mean equal states.
inline json state_to_json(const RoundState& s) {
  json j;
  j["phase"] = to_string(s.phase);
  j["block_height"] = s.block_height;
  j["phase_deadline"] = s.phase_deadline;
  j["ready_to_finalize"] = s.ready_to_finalize;
  json reg = json::array();
  for (const auto& r : s.registry) {
    reg.push_back({{"address", to_hex(r.address)},
                   {"x", std::to_string(r.x.value())},
                   {"pk", u64_hex(r.pk)},
                   {"status", to_string(r.status)},
                   {"excluded", r.excluded},
                   {"deposit_held", r.deposit_held},
                   {"fines_paid", r.fines_paid},
                   {"refunded", r.refunded}});
  }
  j["registry"] = reg;
  auto matrix = [](const auto& m, auto&& cell) {
    json out = json::object();
    for (const auto& [from, row] : m) {
      json r = json::object();
      for (const auto& [to, v] : row) r[to_hex(to)] = cell(v);
      out[to_hex(from)] = r;
    }
    return out;
  };
  j["commitments"] = matrix(s.commitments, [](const Digest& d) { return to_hex(d.bytes); });
  j["ciphertexts"] = matrix(s.ciphertexts, [](const Ciphertext& c) { return to_json(c); });
  j["plaintexts"] = matrix(s.plaintexts, [](const FieldElement& y) { return u64_hex(y.value()); });
  json keys = json::object();
  for (const auto& [a, sk] : s.revealed_keys) keys[to_hex(a)] = u64_hex(sk);
  j["revealed_keys"] = keys;
  json disputes = json::array();
  for (const auto& d : s.disputes) disputes.push_back(to_json(d));
  j["disputes"] = disputes;
  j["output"] = s.output ? json(std::to_string(s.output->value())) : json(nullptr);
  j["deposits_in"] = s.deposits_in;
  j["refunds_out"] = s.refunds_out;
  j["treasury"] = s.treasury;
  json events = json::array();
  for (const auto& e : s.events) events.push_back(to_json(e));
  j["events"] = events;
  return j;
}

/// Wraps a contract and logs every applied transaction as one JSON line:
/// {"seq", "tx", "result", "events"}.
class TranscriptRecorder {
 public:
  explicit TranscriptRecorder(BeaconContract& contract) : contract_(contract) {}

  std::optional<ErrorCode> apply(const Transaction& tx) {
    const auto before = contract_.state().events.size();
    const auto err = contract_.apply(tx);
    json line = {{"seq", lines_.size()}, {"tx", to_json(tx)}, {"result", err ? to_string(*err) : "ok"}};
    json events = json::array();
    const auto& all = contract_.state().events;
    for (auto i = before; i < all.size(); ++i) events.push_back(to_json(all[i]));
    line["events"] = events;
    lines_.push_back(line.dump());
    return err;
  }

  const std::vector<std::string>& lines() const noexcept { return lines_; }

 private:
  BeaconContract& contract_;
  std::vector<std::string> lines_;
};

/// Re-applies a transcript to a freshly deployed contract. Throws
/// InvariantViolation if any transaction's outcome differs from the record.
inline BeaconContract replay(const ContractConfig& config, const std::vector<std::string>& lines) {
  BeaconContract contract(config);
  for (const auto& text : lines) {
    const json line = json::parse(text);
    const auto err = contract.apply(transaction_from_json(line.at("tx"), config.field));
    const std::string got = err ? std::string(to_string(*err)) : "ok";
    if (got != line.at("result").get<std::string>()) {
      throw Error(ErrorCode::InvariantViolation, "replay diverged at seq " + line.at("seq").dump() + ": " + got);
    }
  }
  return contract;
}

}  // namespace drng
