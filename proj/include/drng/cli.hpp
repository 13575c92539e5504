// SPDX-License-Identifier: Apache-2.0
//
// drng-sim command line: load a scenario, run the batch, write
// <out>/rounds.jsonl (one RoundRecord per line) and <out>/summary.json.
//
// Exit codes: 0 success, 1 configuration or usage error, 2 internal
// invariant violation.
#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "drng/error.hpp"
#include "drng/scenario.hpp"
#include "drng/simulator.hpp"

namespace drng {

inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Simulate rounds of the encrypted-share threshold randomness beacon"};
  std::string config_path;
  std::optional<std::uint64_t> rounds;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::string out_dir = ".";
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  bool quiet = false;
  app.add_option("--config", config_path, "scenario JSON file")->required();
  app.add_option("--rounds", rounds, "override the scenario's round count");
  app.add_option("--seed", seed, "override the scenario's master seed");
  app.add_option("--mode", mode, "override verification mode")->check(CLI::IsMember({"eager", "lazy"}));
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--quiet", quiet, "suppress the summary on stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 1;
  }

  ScenarioConfig config;
  try {
    std::ifstream in(config_path);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot open config file " + config_path);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ConfigError, std::string("invalid JSON: ") + e.what());
    }
    if (rounds) j["rounds"] = *rounds;
    if (seed) j["master_seed"] = *seed;
    if (mode) j["verification_mode"] = *mode;
    config = scenario_from_json(j);
  } catch (const Error& e) {
    err << "drng-sim: " << e.what() << "\n";
    return 1;
  }

  try {
    const BatchResult result = run_batch(config, threads);
    if (!result.metrics.conservation_ok) throw Error(ErrorCode::InvariantViolation, "fund conservation failed");

    std::filesystem::create_directories(out_dir);
    const auto dir = std::filesystem::path(out_dir);
    std::ofstream records(dir / "rounds.jsonl", std::ios::binary);
    for (const auto& r : result.records) records << to_json(r).dump() << "\n";
    std::ofstream summary(dir / "summary.json", std::ios::binary);
    nlohmann::json s = to_json(result.metrics);
    s["scenario"] = to_json(config);
    summary << s.dump(2) << "\n";
    if (!records || !summary) {
      err << "drng-sim: failed writing output to " << out_dir << "\n";
      return 1;
    }
    if (!quiet) out << to_json(result.metrics).dump(2) << "\n";
  } catch (const Error& e) {
    err << "drng-sim: " << e.what() << "\n";
    return e.code() == ErrorCode::ConfigError ? 1 : 2;
  } catch (const std::exception& e) {
    err << "drng-sim: internal error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace drng
