// Command-line front end: run / sweep / compare / aggregate.
//
// Exit codes: 0 success, 1 config error, 2 every seed diverged, 3 I/O error.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "rispoison/errors.hpp"
#include "rispoison/harness/experiments.hpp"
#include "rispoison/kernels.hpp"

namespace fs = std::filesystem;
using namespace rispoison;
using namespace rispoison::harness;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitDiverged = 2;
constexpr int kExitIo = 3;

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  std::string seeds;
  std::vector<std::string> overrides;  // key=value
  std::size_t jobs = 0;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "Config file (key = value lines)");
  cmd->add_option("--out", opts.out_dir, "Output directory (overrides run.out_dir)");
  cmd->add_option("--seeds", opts.seeds, "Seed list, e.g. 0..9 or 1,4,7");
  cmd->add_option("--set", opts.overrides, "Extra key=value assignments")->take_all();
  cmd->add_option("--jobs", opts.jobs, "Concurrent runs (0 = all cores)");
}

RunConfig resolve(const CommonOptions& opts) {
  RunConfig cfg = opts.config_path.empty() ? RunConfig{} : load_config(opts.config_path);
  for (const std::string& kv : opts.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    set_key(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!opts.seeds.empty()) cfg.seeds = parse_seed_list(opts.seeds);
  if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
  cfg.validate();
  return cfg;
}

fs::path prepare_out(const RunConfig& cfg) {
  const fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    std::string item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

bool all_failed(const std::vector<RunLog>& logs) {
  for (const RunLog& l : logs) {
    if (!l.summary.failed) return false;
  }
  return !logs.empty();
}

int cmd_run(const CommonOptions& opts) {
  const RunConfig cfg = resolve(opts);
  const fs::path dir = prepare_out(cfg);
  const std::vector<RunLog> logs = run_seeds(cfg, opts.jobs);
  for (const RunLog& log : logs) {
    write_trace_file(dir / ("trace_seed" + std::to_string(log.seed) + ".csv"), log);
    if (log.summary.failed) {
      std::cerr << "warning: seed " << log.seed << " diverged (" << log.summary.failure
                << "); excluded from curve.csv\n";
    }
  }
  write_curve_file(dir / "curve.csv", aggregate(logs, cfg.ma_window));
  const std::string summary = format_runs_summary(cfg, logs);
  write_text_file(dir / "summary.txt", summary);
  std::cout << summary;
  return all_failed(logs) ? kExitDiverged : 0;
}

int cmd_sweep(const CommonOptions& opts, const std::string& axis, const std::string& values) {
  const RunConfig cfg = resolve(opts);
  const fs::path dir = prepare_out(cfg);
  const auto rows = run_sweep(cfg, axis, split_csv(values), opts.jobs);
  write_sweep_file(dir / "sweep.csv", rows);
  std::string text = "sweep over " + axis + "\n";
  bool any_ok = false;
  for (const SweepRow& r : rows) {
    text += r.value + ": final_mean=" + format_double(r.final_mean) +
            " std=" + format_double(r.final_std) + " seeds_ok=" + std::to_string(r.n_seeds_ok) + "\n";
    any_ok = any_ok || r.n_seeds_ok > 0;
  }
  write_text_file(dir / "summary.txt", text);
  std::cout << text;
  return any_ok ? 0 : kExitDiverged;
}

int cmd_compare(const CommonOptions& opts, const std::string& kinds) {
  const RunConfig cfg = resolve(opts);
  const fs::path dir = prepare_out(cfg);
  const CompareReport report = compare_attacks(cfg, split_csv(kinds), opts.jobs);
  write_sweep_file(dir / "sweep.csv", report.rows);
  const std::string text = format_compare(report);
  write_text_file(dir / "summary.txt", text);
  std::cout << text;
  for (const SweepRow& r : report.rows) {
    if (r.n_seeds_ok > 0) return 0;
  }
  return kExitDiverged;
}

int cmd_aggregate(const std::vector<std::string>& files, const std::string& out_dir,
                  std::size_t window) {
  std::vector<RunLog> logs;
  for (const std::string& f : files) {
    for (RunLog& l : read_trace_file(f)) logs.push_back(std::move(l));
  }
  const fs::path dir(out_dir.empty() ? "." : out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string());
  const AggregateCurve curve = aggregate(logs, window);
  write_curve_file(dir / "curve.csv", curve);
  std::cout << "aggregated " << curve.runs << " runs of " << curve.t.size() << " steps into "
            << (dir / "curve.csv").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RIS-aided cognitive radio SAC simulator with reward-poisoning adversaries"};
  app.require_subcommand(1);

  CommonOptions run_opts, sweep_opts, compare_opts;
  auto* run = app.add_subcommand("run", "Train every seed of one config");
  add_common(run, run_opts);

  auto* sweep = app.add_subcommand("sweep", "Repeat a config over one parameter axis");
  add_common(sweep, sweep_opts);
  std::string axis, values;
  sweep->add_option("--axis", axis, "attack.delta | attack.p | env.R | attack.kind")->required();
  sweep->add_option("--values", values, "Comma-separated values")->required();

  auto* compare = app.add_subcommand("compare", "Compare attack kinds on identical seeds");
  add_common(compare, compare_opts);
  std::string kinds;
  compare->add_option("--kinds", kinds, "Comma-separated attack kinds")->required();

  auto* agg = app.add_subcommand("aggregate", "Average trace CSVs into curve.csv");
  std::vector<std::string> files;
  std::string agg_out;
  std::size_t agg_window = 200;
  agg->add_option("traces", files, "trace_seed<k>.csv files")->required();
  agg->add_option("--out", agg_out, "Output directory");
  agg->add_option("--window", agg_window, "Moving-average window");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(run_opts);
    if (*sweep) return cmd_sweep(sweep_opts, axis, values);
    if (*compare) return cmd_compare(compare_opts, kinds);
    if (*agg) return cmd_aggregate(files, agg_out, agg_window);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  }
  return 0;
}
