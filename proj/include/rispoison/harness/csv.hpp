#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "rispoison/harness/aggregate.hpp"
#include "rispoison/harness/run.hpp"

namespace rispoison::harness {

inline constexpr const char* kTraceHeader =
    "seed,t,r_true,r_train,fired,eligible,signal,threshold,p_s,rate";
inline constexpr const char* kCurveHeader = "t,mean,std";
inline constexpr const char* kSweepHeader = "value,final_mean,final_std,n_seeds_ok";

struct SweepRow {
  std::string value;
  double final_mean = 0.0;
  double final_std = 0.0;
  std::size_t n_seeds_ok = 0;
  std::vector<double> per_seed;  // final mean rate per seed, NaN for failed runs
};

/// Shortest representation that parses back to the same double.
std::string format_double(double v);

void write_trace(std::ostream& out, const RunLog& log, bool header = true);
void write_curve(std::ostream& out, const AggregateCurve& curve);
void write_sweep(std::ostream& out, const std::vector<SweepRow>& rows);

// File variants throw IoError with the path on failure.
void write_trace_file(const std::filesystem::path& path, const RunLog& log);
void write_curve_file(const std::filesystem::path& path, const AggregateCurve& curve);
void write_sweep_file(const std::filesystem::path& path, const std::vector<SweepRow>& rows);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Parses a trace CSV back into one RunLog per seed (seed-major order).
/// Only the traced columns are recovered.
std::vector<RunLog> read_trace_file(const std::filesystem::path& path);

}  // namespace rispoison::harness
