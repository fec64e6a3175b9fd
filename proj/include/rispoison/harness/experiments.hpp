#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "rispoison/harness/csv.hpp"
#include "rispoison/harness/run.hpp"

namespace rispoison::harness {

/// Runs every seed in cfg.seeds. Runs are independent, so up to `jobs`
/// execute concurrently (0 = hardware concurrency). Output order follows
/// cfg.seeds regardless of scheduling.
std::vector<RunLog> run_seeds(const RunConfig& cfg, std::size_t jobs = 0);

/// Cross-seed statistics of final_mean_rate over the non-failed logs.
SweepRow summarize(const std::string& label, const std::vector<RunLog>& logs);

inline const std::vector<std::string> kSweepAxes{"attack.delta", "attack.p", "env.R",
                                                 "attack.kind"};

/// One row per value; throws ConfigError for axes outside kSweepAxes.
std::vector<SweepRow> run_sweep(const RunConfig& base, const std::string& axis,
                                const std::vector<std::string>& values, std::size_t jobs = 0);

struct PairwiseDelta {
  std::string first;
  std::string second;
  double mean_diff = 0.0;        // mean over seeds of first - second
  std::size_t first_lower = 0;   // seeds with first < second
  std::size_t n = 0;             // seeds where both runs succeeded
};

struct CompareReport {
  std::vector<SweepRow> rows;  // one per kind, value = kind name
  std::vector<PairwiseDelta> pairs;
};

/// Runs each attack kind on the same seed list; requires >= 2 kinds.
CompareReport compare_attacks(const RunConfig& cfg, const std::vector<std::string>& kinds,
                              std::size_t jobs = 0);

/// Human-readable summary for summary.txt.
std::string format_runs_summary(const RunConfig& cfg, const std::vector<RunLog>& logs);
std::string format_compare(const CompareReport& report);

}  // namespace rispoison::harness
