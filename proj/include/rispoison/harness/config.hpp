#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rispoison/adversary/adversary.hpp"
#include "rispoison/env/crn_ris.hpp"
#include "rispoison/sac/sac_agent.hpp"

namespace rispoison::harness {

struct RunConfig {
  env::EnvConfig env;
  sac::SacConfig sac;
  adversary::AttackConfig attack;
  std::int64_t total_steps = 5000;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::size_t ma_window = 200;
  std::size_t eval_tail = 500;  // trailing steps scored with the deterministic policy (capped at total_steps)
  std::string out_dir = "out";

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Parses `key = value` lines (`#` starts a comment). Omitted keys keep their
/// defaults. Unknown keys and bad values throw ConfigError naming the key.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

/// Applies a single `key = value` assignment (same keys as the file format).
void set_key(RunConfig& config, std::string_view key, std::string_view value);

/// Seed list syntax: comma-separated items, each an integer or an
/// inclusive range `a..b`. "0..9" -> 0,1,...,9.
std::vector<std::uint64_t> parse_seed_list(std::string_view text);

/// Every recognised key, for help text.
const std::vector<std::string>& known_keys();

}  // namespace rispoison::harness
