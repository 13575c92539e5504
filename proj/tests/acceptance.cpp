// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.
#include <chrono>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <thread>

#include "drng/simulator.hpp"
#include "drng/transcript.hpp"
#include "test_support.hpp"

namespace {

using namespace drng;
using drng::testing::ManualRound;

struct Verdict {
  bool ok = true;
  std::string detail;

  void check(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

// Set by criteria 2-7 whenever a terminal state breaks conservation.
bool g_conserved = true;
std::uint64_t g_terminal_states = 0;

void note_conservation(bool conserved) {
  ++g_terminal_states;
  if (!conserved) g_conserved = false;
}

void note_conservation(const std::vector<RoundRecord>& records) {
  for (const auto& r : records) note_conservation(r.conserved());
}

unsigned worker_count() { return std::max(2u, std::thread::hardware_concurrency()); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ScenarioConfig scenario(std::size_t n, std::size_t m, std::uint64_t rounds, std::uint64_t seed) {
  ScenarioConfig c;
  c.n = n;
  c.m = m;
  c.rounds = rounds;
  c.master_seed = seed;
  return c;
}

ContractConfig manual_config(std::size_t m, std::uint64_t p, VerificationMode mode) {
  ContractConfig c;
  c.m = m;
  c.field = FieldParams(p);
  c.fine = 30;
  c.mode = mode;
  c.round_id = 1;
  return c;
}

// Schoolbook evaluation with 128-bit intermediates, independent of the library.
std::uint64_t oracle_eval(const std::vector<std::uint64_t>& coeffs, std::uint64_t x, std::uint64_t p) {
  unsigned __int128 acc = 0, power = 1;
  for (auto c : coeffs) {
    acc = (acc + c * power) % p;
    power = power * x % p;
  }
  return static_cast<std::uint64_t>(acc);
}

Verdict threshold_reconstruction() {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint64_t primes[] = {11, 97, FieldParams::kDefaultPrime};
  Rng rng(1001);
  std::uint64_t subsets = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::uint64_t p = primes[trial % 3];
    const FieldParams f(p);
    const std::size_t m = rng.uniform(1, 5);
    const std::size_t n = rng.uniform(m, 8);
    std::vector<std::uint64_t> coeffs(m);
    for (auto& c : coeffs) c = rng.uniform(0, p - 1);
    std::set<std::uint64_t> xs;
    while (xs.size() < n) xs.insert(rng.uniform(1, p - 1));
    std::vector<SharePoint> pts;
    for (auto x : xs) pts.push_back({FieldElement(f, x), FieldElement(f, oracle_eval(coeffs, x, p))});
    drng::testing::for_each_subset(n, m, [&](const std::vector<std::size_t>& idx) {
      std::vector<SharePoint> sub;
      for (auto i : idx) sub.push_back(pts[i]);
      ++subsets;
      v.check(interpolate_at_zero(sub).value() == coeffs[0], "wrong a0 at trial " + std::to_string(trial));
    });
  }
  const double secs = seconds_since(t0);
  v.check(secs < 10.0, "too slow");
  if (v.ok) v.detail = std::to_string(subsets) + " subsets, " + std::to_string(secs) + " s";
  return v;
}

Verdict honest_correctness() {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  const auto c = scenario(5, 3, 200, 2002);
  for (std::uint64_t i = 0; i < c.rounds; ++i) {
    const auto out = run_round_detailed(c, i);
    note_conservation(out.record.conserved());
    std::uint64_t oracle = 0;
    for (const auto& a : out.agents) {
      oracle = static_cast<std::uint64_t>((static_cast<unsigned __int128>(oracle) +
                                           a.deal()->polynomial.coeffs().front().value()) %
                                          c.field.p());
    }
    v.check(out.record.terminal == Phase::Finalized, "round " + std::to_string(i) + " not finalized");
    v.check(out.record.output == oracle, "round " + std::to_string(i) + " output differs from oracle");
    for (const auto& p : out.record.participants) v.check(p.fines == 0, "fine in honest round");
  }
  const double secs = seconds_since(t0);
  v.check(secs < 30.0, "too slow");
  if (v.ok) v.detail = "200 rounds, " + std::to_string(secs) + " s";
  return v;
}

Verdict halt_attack() {
  Verdict v;
  std::uint64_t cases = 0;
  for (std::size_t n = 1; n <= 6; ++n) {
    for (std::size_t m = 1; m <= n; ++m) {
      for (std::size_t k = 0; k <= n; ++k) {
        auto c = scenario(n, m, 1, 3000 + 100 * n + 10 * m + k);
        c.strategies.assign(k, StrategySpec::withhold());
        const auto r = run_round(c, 0);
        note_conservation(r.conserved());
        ++cases;
        const bool aborted = r.terminal == Phase::Aborted;
        v.check(aborted == (k >= n - m + 1), "n=" + std::to_string(n) + " m=" + std::to_string(m) +
                                                 " k=" + std::to_string(k));
      }
    }
  }
  if (v.ok) v.detail = std::to_string(cases) + " (n, m, k) cases";
  return v;
}

BatchResult g_grinder_batch;

Verdict grinding_attack() {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  auto c = scenario(5, 3, 2000, 4004);
  const auto g = StrategySpec::grinder({0, 1, 2}, 2, Predicate::Lsb1);
  c.strategies = {g, g, g};
  g_grinder_batch = run_batch(c, worker_count());
  note_conservation(g_grinder_batch.records);
  const auto control = run_batch(scenario(5, 3, 2000, 4005), worker_count());
  note_conservation(control.records);
  const double success = g_grinder_batch.metrics.grinder_success_rate;
  const double lsb = control.metrics.lsb1_frequency;
  const double secs = seconds_since(t0);
  v.check(g_grinder_batch.metrics.grinder_rounds == 2000, "grinder did not act every round");
  v.check(std::abs(success - 0.992) <= 0.03, "grinder success " + std::to_string(success));
  v.check(std::abs(lsb - 0.5) <= 0.05, "control lsb1 " + std::to_string(lsb));
  v.check(secs < 120.0, "too slow");
  if (v.ok) {
    v.detail = "success " + std::to_string(success) + ", control lsb1 " + std::to_string(lsb) + ", " +
               std::to_string(secs) + " s";
  }
  return v;
}

Verdict prediction_consistency() {
  Verdict v;
  std::uint64_t checked = 0;
  for (const auto& r : g_grinder_batch.records) {
    v.check(r.grinder.has_value(), "missing grinder summary");
    v.check(r.terminal == Phase::Finalized, "grinder round aborted");
    if (!r.grinder || !r.output) continue;
    v.check(*r.output == r.grinder->predicted, "round " + std::to_string(r.round_index) + " prediction mismatch");
    ++checked;
  }
  v.check(checked == 2000, "expected 2000 grinder rounds");
  if (v.ok) v.detail = std::to_string(checked) + " rounds matched";
  return v;
}

void expect_caught(Verdict& v, const ScenarioConfig& c, std::size_t dealer, const std::string& label) {
  const auto b = run_batch(c, worker_count());
  note_conservation(b.records);
  for (const auto& r : b.records) {
    const auto& p = r.participants[dealer];
    v.check(p.excluded && p.fines == std::min(c.fine, c.deposit), label + " missed in round " + std::to_string(r.round_index));
    v.check(r.terminal == Phase::Finalized, label + " round aborted");
  }
}

Verdict verification_rules() {
  Verdict v;
  for (auto mode : {VerificationMode::Eager, VerificationMode::Lazy}) {
    const std::string tag = mode == VerificationMode::Eager ? "eager " : "lazy ";
    for (std::size_t m = 2; m <= 4; ++m) {
      auto c = scenario(m + 2, m, 50, 6000 + m);
      c.mode = mode;
      c.strategies = {StrategySpec::wrong_degree(m - 2)};
      expect_caught(v, c, 0, tag + "degree m-2");
      c.strategies = {StrategySpec::honest(), StrategySpec::wrong_degree(m)};
      expect_caught(v, c, 1, tag + "degree m");
      c.strategies = {StrategySpec::honest(), StrategySpec::honest(), StrategySpec::bad_commitment(0)};
      expect_caught(v, c, 2, tag + "commitment mismatch");
    }
  }
  // Lazy mode with a lying dealer only gets caught by a dispute.
  auto c = scenario(5, 3, 50, 6100);
  c.mode = VerificationMode::Lazy;
  c.strategies = {StrategySpec::lying_plaintext(3)};
  const auto b = run_batch(c, worker_count());
  note_conservation(b.records);
  for (const auto& r : b.records) {
    v.check(r.disputes.size() == 1 && r.disputes[0].upheld, "no upheld dispute");
    v.check(r.participants[0].excluded, "lying dealer not excluded");
  }
  if (v.ok) v.detail = "m = 2..4, eager and lazy";
  return v;
}

Verdict dispute_path() {
  Verdict v;
  const auto lazy = manual_config(2, 97, VerificationMode::Lazy);
  const std::vector<std::vector<std::uint64_t>> coeffs{{4, 1}, {9, 2}, {20, 3}, {7, 5}};

  // Dealer 1 posts a forged plaintext and matching commitment for recipient 2.
  {
    ManualRound r(lazy, coeffs);
    r.register_all();
    r.build_deals();
    const auto& to = r.addresses[2];
    const auto forged = r.deals[1].shares.at(to) + FieldElement(lazy.field, 1);
    r.deals[1].shares.at(to) = forged;
    r.deals[1].commitments.at(to) = commit_share(lazy.round_id, r.addresses[1], to, forged);
    r.commit_all();
    r.share_all();
    r.reveal_all();
    r.contract.dispute(r.addresses[2], r.addresses[1], to);
    r.finish_phase();
    r.contract.finalize();
    const auto& s = r.contract.state();
    v.check(s.disputes.size() == 1 && s.disputes[0].upheld, "dispute against liar not upheld");
    v.check(r.contract.find(r.addresses[1])->fines_paid == lazy.fine, "liar not fined");
    v.check(r.contract.find(r.addresses[2])->fines_paid == 0, "honest challenger fined");
    v.check(s.output && s.output->value() == (4 + 20 + 7) % 97, "liar's share not excluded from output");
    note_conservation(r.conserved());
  }
  // A dispute against an honest dealer costs the challenger.
  {
    ManualRound r(lazy, coeffs);
    r.register_all();
    r.build_deals();
    r.commit_all();
    r.share_all();
    r.reveal_all();
    r.contract.dispute(r.addresses[3], r.addresses[0], r.addresses[1]);
    r.finish_phase();
    r.contract.finalize();
    const auto& s = r.contract.state();
    v.check(s.disputes.size() == 1 && !s.disputes[0].upheld, "false dispute upheld");
    v.check(r.contract.find(r.addresses[3])->fines_paid == lazy.fine, "false challenger not fined");
    v.check(!r.contract.find(r.addresses[0])->excluded, "honest dealer excluded");
    v.check(s.output && s.output->value() == (4 + 9 + 20 + 7) % 97, "honest output changed");
    note_conservation(r.conserved());
  }
  if (v.ok) v.detail = "liar fined, false challenger fined";
  return v;
}

Verdict fund_conservation() {
  Verdict v;
  v.check(g_terminal_states > 0, "no terminal states observed");
  v.check(g_conserved, "deposits != refunds + treasury");
  if (v.ok) v.detail = std::to_string(g_terminal_states) + " terminal states";
  return v;
}

Verdict crypto_round_trip() {
  Verdict v;
  const GroupParams group;
  const FieldParams field;
  Rng rng(9009);
  std::uint64_t caught_key = 0, caught_ctx = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto keys = keygen(group, rng);
    const FieldElement y(field, rng.uniform(0, field.p() - 1));
    const auto dealer = rng.bytes<20>();
    const auto recipient = rng.bytes<20>();
    const std::uint64_t round_id = rng.next_u64();
    const auto ctx = share_context(round_id, dealer, recipient);
    const auto commitment = commit_share(round_id, dealer, recipient, y);
    const auto ct = encrypt(group, keys.pk, y, ctx, rng);
    v.check(decrypt(group, keys.sk, ct, ctx) == y, "round trip failed at trial " + std::to_string(i));

    std::uint64_t wrong_sk = rng.uniform(1, group.q() - 2);
    if (wrong_sk == keys.sk) wrong_sk = wrong_sk == 1 ? 2 : wrong_sk - 1;
    if (commit_share(round_id, dealer, recipient, decrypt(group, wrong_sk, ct, ctx)) != commitment) ++caught_key;
    const auto other_ctx = share_context(round_id + 1, dealer, recipient);
    if (commit_share(round_id, dealer, recipient, decrypt(group, keys.sk, ct, other_ctx)) != commitment) ++caught_ctx;
  }
  v.check(caught_key >= 999, "wrong key caught only " + std::to_string(caught_key));
  v.check(caught_ctx >= 999, "wrong context caught only " + std::to_string(caught_ctx));
  if (v.ok) {
    v.detail = "1000 round trips; wrong key caught " + std::to_string(caught_key) + ", wrong context caught " +
               std::to_string(caught_ctx);
  }
  return v;
}

std::string jsonl(const BatchResult& b) {
  std::string out;
  for (const auto& r : b.records) out += to_json(r).dump() + "\n";
  return out;
}

Verdict replay_determinism() {
  Verdict v;
  std::vector<ScenarioConfig> scenarios;
  scenarios.push_back(scenario(5, 3, 40, 10));
  auto halt = scenario(5, 3, 40, 11);
  halt.strategies = {StrategySpec::withhold(), StrategySpec::withhold(), StrategySpec::withhold()};
  scenarios.push_back(halt);
  auto grind = scenario(5, 3, 40, 12);
  const auto g = StrategySpec::grinder({0, 1, 2}, 2, Predicate::Lsb1);
  grind.strategies = {g, g, g};
  scenarios.push_back(grind);
  auto lazy = scenario(6, 3, 40, 13);
  lazy.mode = VerificationMode::Lazy;
  lazy.strategies = {StrategySpec::lying_plaintext(2), StrategySpec::dropout(Phase::EncryptedShares),
                     StrategySpec::wrong_degree(3)};
  scenarios.push_back(lazy);

  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    const auto first = jsonl(run_batch(scenarios[s], 1));
    const auto second = jsonl(run_batch(scenarios[s], worker_count()));
    v.check(first == second, "scenario " + std::to_string(s) + " output differs between runs");
    const auto out = run_round_detailed(scenarios[s], 7);
    const auto replayed = replay(out.contract_config, out.transcript);
    v.check(state_to_json(replayed.state()).dump() == state_to_json(out.final_state).dump(),
            "scenario " + std::to_string(s) + " transcript replay diverged");
  }
  if (v.ok) v.detail = std::to_string(scenarios.size()) + " scenarios byte-identical";
  return v;
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Verdict()>> criteria[] = {
      {"threshold reconstruction", threshold_reconstruction},
      {"honest beacon correctness", honest_correctness},
      {"halt attack", halt_attack},
      {"grinding attack", grinding_attack},
      {"attacker prediction consistency", prediction_consistency},
      {"verification rules", verification_rules},
      {"dispute path", dispute_path},
      {"fund conservation", fund_conservation},
      {"crypto round trip", crypto_round_trip},
      {"replay determinism", replay_determinism},
  };
  int failures = 0;
  int index = 0;
  for (const auto& [name, run] : criteria) {
    ++index;
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v.ok = false;
      v.detail = std::string("exception: ") + e.what();
    }
    if (!v.ok) ++failures;
    std::printf("%s %2d %s: %s\n", v.ok ? "PASS" : "FAIL", index, name, v.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
