#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>

#include "rispoison/errors.hpp"
#include "rispoison/harness/aggregate.hpp"
#include "rispoison/harness/config.hpp"
#include "rispoison/harness/csv.hpp"
#include "rispoison/harness/experiments.hpp"
#include "rispoison/harness/run.hpp"

namespace fs = std::filesystem;
using namespace rispoison;
using namespace rispoison::harness;

namespace {

RunConfig tiny_config() {
  RunConfig c;
  c.env.ris_elements = 2;
  c.sac.hidden_width = 16;
  c.sac.warm_start = 40;
  c.attack.window = 30;
  c.attack.warmup = 20;
  c.total_steps = 240;
  c.seeds = {0, 1, 2};
  c.ma_window = 20;
  c.eval_tail = 50;
  return c;
}

std::string trace_text(const RunLog& log) {
  std::ostringstream out;
  write_trace(out, log);
  return out.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

RunLog constant_log(std::uint64_t seed, std::size_t n, double value) {
  RunLog log;
  log.seed = seed;
  for (std::size_t t = 0; t < n; ++t) {
    StepRecord r;
    r.t = static_cast<std::int64_t>(t);
    r.r_true = value;
    r.r_train = value - 100.0;  // must never show up in curves
    log.steps.push_back(r);
  }
  return log;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("rispoison_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("parse_config: empty text yields defaults") {
  const RunConfig c = parse_config("");
  CHECK(c.attack.window == 200);
  CHECK(c.attack.warmup == 50);
  CHECK(c.attack.quantile == 0.75);
  CHECK(c.sac.gamma == 1.0);
  CHECK(c.sac.learning_rate == 1e-3);
  CHECK(c.sac.entropy_coef == 0.2);
  CHECK(c.sac.buffer_capacity == 20000);
  CHECK(c.sac.batch_size == 16);
  CHECK(c.env.max_power_db == 1.0);
  CHECK(c.env.interference_db == 10.0);
  CHECK(c.env.noise == 1e-2);
  CHECK(c.env.ris_elements == 6);
  CHECK(c.total_steps == 5000);
  CHECK(c.seeds.size() == 10);
  CHECK(c.ma_window == 200);
}

TEST_CASE("parse_config: assignments, comments and seed lists") {
  const RunConfig c = parse_config(
      "# figure 2 setting\n"
      "attack.kind = dgrp\n"
      "attack.p = 0.5   # budget\n"
      "\n"
      "sac.buffer = 2e4\n"
      "seeds = 0..9\n");
  CHECK(c.attack.kind == adversary::AttackKind::dgrp);
  CHECK(c.attack.p == 0.5);
  CHECK(c.sac.buffer_capacity == 20000);
  CHECK(c.seeds.size() == 10);
  CHECK(c.seeds.back() == 9);
  CHECK(parse_seed_list("1,4,7") == std::vector<std::uint64_t>{1, 4, 7});
  CHECK(parse_seed_list("3..5, 9") == std::vector<std::uint64_t>{3, 4, 5, 9});
}

TEST_CASE("parse_config: errors name the key or field") {
  auto message = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("attack.bogus = 1").find("attack.bogus") != std::string::npos);
  CHECK(message("attack.p = lots").find("attack.p") != std::string::npos);
  CHECK(message("run.seeds = 1,1").find("run.seeds") != std::string::npos);
  CHECK(message("run.total_steps = 50").find("run.total_steps") != std::string::npos);
  CHECK(message("env.N0 = 0").find("env.N0") != std::string::npos);
  CHECK(message("just words").find("line 1") != std::string::npos);
  CHECK_THROWS_AS(load_config("/nonexistent/dir/cfg.txt"), IoError);
}

TEST_CASE("stream seeds are distinct and deterministic") {
  const StreamSeeds a = derive_streams(3), b = derive_streams(3), c = derive_streams(4);
  CHECK(a.env == b.env);
  CHECK(a.attack == b.attack);
  CHECK(a.env != a.agent_init);
  CHECK(a.agent_sampling != a.attack);
  CHECK(a.env != c.env);
}

TEST_CASE("run_training: clean runs train on the clean reward") {
  const RunConfig c = tiny_config();
  const RunLog log = run_training(c, 0);
  REQUIRE(log.steps.size() == static_cast<std::size_t>(c.total_steps));
  for (const StepRecord& r : log.steps) {
    REQUIRE(r.r_train == r.r_true);
    REQUIRE_FALSE(r.fired);
    REQUIRE(r.power <= r.cap);
    REQUIRE(r.rate == r.r_true);
  }
  CHECK_FALSE(log.summary.failed);
  CHECK(std::isfinite(log.summary.final_mean_rate));
  CHECK(std::isfinite(log.summary.eval_mean_rate));
  CHECK(std::isnan(log.steps.front().eval_rate));
  CHECK(std::isfinite(log.steps.back().eval_rate));
}

TEST_CASE("run_training: same config and seed give byte-identical traces") {
  RunConfig c = tiny_config();
  c.attack.kind = adversary::AttackKind::dgrp;
  CHECK(trace_text(run_training(c, 5)) == trace_text(run_training(c, 5)));
  CHECK(trace_text(run_training(c, 5)) != trace_text(run_training(c, 6)));
}

TEST_CASE("run_training: DGRP with p = 0 leaves the learner trajectory untouched") {
  RunConfig none = tiny_config();
  RunConfig muted = tiny_config();
  muted.attack.kind = adversary::AttackKind::dgrp;
  muted.attack.p = 0.0;
  std::optional<sac::SacAgent> a, b;
  const RunLog la = run_training(none, 1, [&](std::int64_t, const sac::SacAgent& ag) { a = ag; });
  const RunLog lb = run_training(muted, 1, [&](std::int64_t, const sac::SacAgent& ag) { b = ag; });
  REQUIRE(la.steps.size() == lb.steps.size());
  CHECK(*a == *b);
  std::size_t eligible = 0;
  for (std::size_t i = 0; i < la.steps.size(); ++i) {
    REQUIRE(la.steps[i].r_true == lb.steps[i].r_true);
    REQUIRE(la.steps[i].r_train == lb.steps[i].r_train);
    REQUIRE(la.steps[i].critic_loss1 == lb.steps[i].critic_loss1);
    REQUIRE(la.steps[i].actor_loss == lb.steps[i].actor_loss);
    REQUIRE_FALSE(lb.steps[i].fired);
    eligible += lb.steps[i].eligible;
  }
  CHECK(eligible > 0);  // the gate was live, only the coin never came up
  CHECK(lb.summary.total_fires == 0);
}

TEST_CASE("run_training: fire accounting and corruption bookkeeping") {
  RunConfig c = tiny_config();
  c.attack.kind = adversary::AttackKind::dgrp;
  c.attack.p = 1.0;
  const RunLog log = run_training(c, 2);
  std::size_t fires = 0;
  for (const StepRecord& r : log.steps) {
    if (r.fired) {
      ++fires;
      REQUIRE(r.eligible);
      REQUIRE(r.t >= c.attack.warmup);
      REQUIRE(r.r_train == r.r_true - c.attack.delta);
    } else {
      REQUIRE(r.r_train == r.r_true);
    }
    if (r.t < c.attack.window - 1) REQUIRE(std::isnan(r.threshold));
  }
  CHECK(fires > 0);
  CHECK(log.summary.total_fires == fires);
  CHECK(log.summary.fire_rate ==
        static_cast<double>(fires) / static_cast<double>(c.total_steps - c.attack.warmup));
}

TEST_CASE("run_training: divergence marks the run failed instead of throwing") {
  RunConfig c = tiny_config();
  c.sac.learning_rate = 1e300;
  const RunLog log = run_training(c, 0);
  CHECK(log.summary.failed);
  CHECK_FALSE(log.summary.failure.empty());
  CHECK(std::isnan(log.summary.final_mean_rate));
}

TEST_CASE("trailing moving average matches a windowed-sum oracle") {
  std::vector<double> x;
  for (int i = 0; i < 50; ++i) x.push_back(i < 20 ? 1.0 : 4.0);
  for (std::size_t w : {1u, 3u, 7u, 20u, 60u}) {
    const auto ma = trailing_moving_average(x, w);
    for (std::size_t t = 0; t < x.size(); ++t) {
      const std::size_t lo = t + 1 >= w ? t + 1 - w : 0;
      double s = 0.0;
      for (std::size_t k = lo; k <= t; ++k) s += x[k];
      REQUIRE(ma[t] == doctest::Approx(s / static_cast<double>(t - lo + 1)).epsilon(1e-12));
    }
  }
}

TEST_CASE("aggregate: constant rewards and cross-seed mean") {
  const AggregateCurve one = aggregate({constant_log(0, 30, 2.5), constant_log(1, 30, 2.5)}, 7);
  for (std::size_t t = 0; t < 30; ++t) {
    CHECK(one.mean[t] == 2.5);
    CHECK(one.std[t] == 0.0);
    CHECK(one.t[t] == static_cast<std::int64_t>(t));
  }
  const AggregateCurve two = aggregate({constant_log(0, 30, 1.0), constant_log(1, 30, 4.0)}, 5);
  for (std::size_t t = 0; t < 30; ++t) CHECK(two.mean[t] == 2.5);
  CHECK(two.std[0] == doctest::Approx(std::sqrt(4.5)));
  CHECK(two.runs == 2);

  CHECK_THROWS_AS(aggregate({constant_log(0, 30, 1.0), constant_log(1, 29, 1.0)}, 5), ConfigError);

  RunLog failed = constant_log(2, 10, 1e9);
  failed.summary.failed = true;
  const AggregateCurve skip = aggregate({constant_log(0, 30, 1.0), failed}, 5);
  CHECK(skip.runs == 1);
  CHECK(skip.mean[29] == 1.0);
}

TEST_CASE("mean_std") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const MeanStd m = mean_std(v);
  CHECK(m.mean == 2.5);
  CHECK(m.std == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(m.n == 4);
  CHECK(mean_std(std::vector<double>{7.0}).std == 0.0);
}

TEST_CASE("sweep: axis validation and p = 0 row equals the clean row") {
  RunConfig c = tiny_config();
  c.seeds = {0, 1};
  CHECK_THROWS_AS(run_sweep(c, "sac.lr", {"1e-3"}), ConfigError);
  CHECK_THROWS_AS(run_sweep(c, "attack.p", {"2.0"}), ConfigError);

  c.attack.kind = adversary::AttackKind::dgrp;
  const auto rows = run_sweep(c, "attack.p", {"0", "1"}, 2);
  REQUIRE(rows.size() == 2);
  c.attack.kind = adversary::AttackKind::none;
  const SweepRow clean = summarize("none", run_seeds(c, 2));
  CHECK(rows[0].value == "0");
  CHECK(rows[0].per_seed == clean.per_seed);
  CHECK(rows[0].final_mean == clean.final_mean);
  CHECK(rows[1].n_seeds_ok == 2);
}

TEST_CASE("compare: identical kinds and report schema") {
  RunConfig c = tiny_config();
  c.seeds = {0, 1};
  CHECK_THROWS_AS(compare_attacks(c, {"none"}), ConfigError);
  const CompareReport same = compare_attacks(c, {"none", "none"}, 2);
  REQUIRE(same.rows.size() == 2);
  CHECK(same.rows[0].per_seed == same.rows[1].per_seed);
  REQUIRE(same.pairs.size() == 1);
  CHECK(same.pairs[0].mean_diff == 0.0);
  CHECK(same.pairs[0].first_lower == 0);

  const CompareReport three = compare_attacks(c, {"none", "periodic", "dgrp"}, 2);
  CHECK(three.rows.size() == 3);
  CHECK(three.pairs.size() == 3);
  CHECK(three.rows[1].value == "periodic");
  CHECK(format_compare(three).find("dgrp") != std::string::npos);
}

TEST_CASE("csv: fixed headers and byte-identical re-emission") {
  const RunConfig c = tiny_config();
  const RunLog log = run_training(c, 3);
  const std::string text = trace_text(log);
  CHECK(text.substr(0, text.find('\n')) == "seed,t,r_true,r_train,fired,eligible,signal,threshold,p_s,rate");
  std::ostringstream curve;
  write_curve(curve, aggregate({log}, c.ma_window));
  CHECK(curve.str().rfind("t,mean,std\n", 0) == 0);
  std::ostringstream sweep;
  write_sweep(sweep, {summarize("x", {log})});
  CHECK(sweep.str().rfind("value,final_mean,final_std,n_seeds_ok\n", 0) == 0);

  const fs::path dir = scratch_dir("csv");
  write_trace_file(dir / "a.csv", log);
  write_trace_file(dir / "b.csv", log);
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  CHECK(slurp(dir / "a.csv") == text);

  // Reading a trace back and re-emitting it reproduces the file.
  const auto back = read_trace_file(dir / "a.csv");
  REQUIRE(back.size() == 1);
  for (std::size_t i = 0; i < log.steps.size(); ++i) {
    REQUIRE(back[0].steps[i].r_true == log.steps[i].r_true);
  }
  CHECK(trace_text(back[0]) == text);
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");

  CHECK_THROWS_AS(write_trace_file(dir / "missing" / "x.csv", log), IoError);
  fs::remove_all(dir);
}

#ifdef RISPOISON_CLI_PATH
namespace {
int run_cli(const std::string& args) {
  const std::string cmd = std::string(RISPOISON_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}
}  // namespace

TEST_CASE("cli: outputs and exit codes") {
  const fs::path dir = scratch_dir("cli");
  const std::string small =
      "--set env.R=2 sac.hidden=16 sac.warm_start=40 attack.w=30 attack.t_warm=20 "
      "run.total_steps=200 run.ma_window=20 --seeds 0,1 --jobs 2 ";
  CHECK(run_cli("run " + small + "--out " + (dir / "run").string()) == 0);
  CHECK(fs::exists(dir / "run" / "trace_seed0.csv"));
  CHECK(fs::exists(dir / "run" / "trace_seed1.csv"));
  CHECK(fs::exists(dir / "run" / "summary.txt"));
  const std::string curve = slurp(dir / "run" / "curve.csv");
  CHECK(curve.rfind("t,mean,std\n", 0) == 0);

  CHECK(run_cli("aggregate " + (dir / "run" / "trace_seed0.csv").string() + " " +
                (dir / "run" / "trace_seed1.csv").string() + " --window 20 --out " +
                (dir / "agg").string()) == 0);
  CHECK(slurp(dir / "agg" / "curve.csv") == curve);

  CHECK(run_cli("sweep " + small + "--axis attack.delta --values 0,3 --set attack.kind=dgrp --out " +
                (dir / "sweep").string()) == 0);
  CHECK(slurp(dir / "sweep" / "sweep.csv").rfind("value,final_mean,final_std,n_seeds_ok\n", 0) == 0);
  CHECK(run_cli("compare " + small + "--kinds none,dgrp --out " + (dir / "cmp").string()) == 0);
  CHECK(fs::exists(dir / "cmp" / "summary.txt"));

  CHECK(run_cli("run --set attack.bogus=1 --out " + (dir / "bad").string()) == 1);
  CHECK(run_cli("run --config /nonexistent/cfg.txt") == 3);
  CHECK(run_cli("sweep " + small + "--axis sac.lr --values 1 --out " + (dir / "bad").string()) == 1);
  CHECK(run_cli("run " + small + "--set sac.lr=1e300 --out " + (dir / "div").string()) == 2);
  CHECK(run_cli("frobnicate") == 1);
  fs::remove_all(dir);
}
#endif
