#include "rispoison/harness/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>
#include <thread>

#include "rispoison/errors.hpp"

namespace rispoison::harness {

std::vector<RunLog> run_seeds(const RunConfig& cfg, std::size_t jobs) {
  cfg.validate();
  std::vector<RunLog> logs(cfg.seeds.size());
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min(jobs, cfg.seeds.size());
  if (jobs <= 1) {
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) logs[i] = run_training(cfg, cfg.seeds[i]);
    return logs;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(jobs);
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < cfg.seeds.size(); i = next++) {
          logs[i] = run_training(cfg, cfg.seeds[i]);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : workers) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return logs;
}

SweepRow summarize(const std::string& label, const std::vector<RunLog>& logs) {
  SweepRow row;
  row.value = label;
  std::vector<double> ok;
  for (const RunLog& log : logs) {
    const double v =
        log.summary.failed ? std::numeric_limits<double>::quiet_NaN() : log.summary.final_mean_rate;
    row.per_seed.push_back(v);
    if (!log.summary.failed) ok.push_back(v);
  }
  const MeanStd ms = mean_std(ok);
  row.final_mean = ok.empty() ? std::numeric_limits<double>::quiet_NaN() : ms.mean;
  row.final_std = ms.std;
  row.n_seeds_ok = ok.size();
  return row;
}

std::vector<SweepRow> run_sweep(const RunConfig& base, const std::string& axis,
                                const std::vector<std::string>& values, std::size_t jobs) {
  if (std::find(kSweepAxes.begin(), kSweepAxes.end(), axis) == kSweepAxes.end()) {
    throw ConfigError("sweep axis must be one of attack.delta, attack.p, env.R, attack.kind; got '" +
                      axis + "'");
  }
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  std::vector<SweepRow> rows;
  for (const std::string& v : values) {
    RunConfig cfg = base;
    set_key(cfg, axis, v);
    cfg.validate();
    rows.push_back(summarize(v, run_seeds(cfg, jobs)));
  }
  return rows;
}

CompareReport compare_attacks(const RunConfig& cfg, const std::vector<std::string>& kinds,
                              std::size_t jobs) {
  if (kinds.size() < 2) throw ConfigError("compare needs at least two attack kinds");
  CompareReport report;
  for (const std::string& k : kinds) {
    RunConfig c = cfg;
    c.attack.kind = adversary::parse_attack_kind(k);
    report.rows.push_back(summarize(k, run_seeds(c, jobs)));
  }
  for (std::size_t a = 0; a < report.rows.size(); ++a) {
    for (std::size_t b = a + 1; b < report.rows.size(); ++b) {
      PairwiseDelta d;
      d.first = report.rows[a].value;
      d.second = report.rows[b].value;
      double sum = 0.0;
      for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
        const double x = report.rows[a].per_seed[s];
        const double y = report.rows[b].per_seed[s];
        if (std::isnan(x) || std::isnan(y)) continue;
        sum += x - y;
        d.first_lower += x < y ? 1 : 0;
        ++d.n;
      }
      d.mean_diff = d.n > 0 ? sum / static_cast<double>(d.n) : std::numeric_limits<double>::quiet_NaN();
      report.pairs.push_back(d);
    }
  }
  return report;
}

std::string format_runs_summary(const RunConfig& cfg, const std::vector<RunLog>& logs) {
  std::ostringstream out;
  out << "attack=" << adversary::to_string(cfg.attack.kind) << " delta=" << cfg.attack.delta
      << " p=" << cfg.attack.p << " R=" << cfg.env.ris_elements << " steps=" << cfg.total_steps
      << "\n";
  for (const RunLog& log : logs) {
    out << "seed " << log.seed << ": ";
    if (log.summary.failed) {
      out << "FAILED (" << log.summary.failure << ")\n";
      continue;
    }
    out << "final_mean_rate=" << format_double(log.summary.final_mean_rate)
        << " eval_mean_rate=" << format_double(log.summary.eval_mean_rate)
        << " fires=" << log.summary.total_fires
        << " fire_rate=" << format_double(log.summary.fire_rate) << "\n";
  }
  const SweepRow row = summarize("all", logs);
  out << "cross-seed final mean " << format_double(row.final_mean) << " (std "
      << format_double(row.final_std) << ", " << row.n_seeds_ok << "/" << logs.size()
      << " seeds ok)\n";
  return out.str();
}

std::string format_compare(const CompareReport& report) {
  std::ostringstream out;
  for (const SweepRow& r : report.rows) {
    out << r.value << ": final_mean=" << format_double(r.final_mean)
        << " std=" << format_double(r.final_std) << " seeds_ok=" << r.n_seeds_ok << "\n";
  }
  for (const PairwiseDelta& d : report.pairs) {
    out << d.first << " - " << d.second << ": mean_diff=" << format_double(d.mean_diff) << " ("
        << d.first << " lower on " << d.first_lower << "/" << d.n << " seeds)\n";
  }
  return out.str();
}

}  // namespace rispoison::harness
