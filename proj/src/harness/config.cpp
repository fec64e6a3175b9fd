#include "rispoison/harness/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "rispoison/errors.hpp"

namespace rispoison::harness {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError(std::string(key) + ": expected a number, got '" + std::string(v) + "'");
  }
  return out;
}

template <typename Int>
Int to_int(std::string_view key, std::string_view v) {
  // Accept scientific notation for counts ("2e4") as long as it is integral.
  Int out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec == std::errc() && ptr == v.data() + v.size()) return out;
  const double d = to_double(key, v);
  if (d < 0.0 && std::is_unsigned_v<Int>) {
    throw ConfigError(std::string(key) + ": expected a non-negative integer");
  }
  if (d != static_cast<double>(static_cast<Int>(d))) {
    throw ConfigError(std::string(key) + ": expected an integer, got '" + std::string(v) + "'");
  }
  return static_cast<Int>(d);
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw ConfigError(std::string(key) + ": expected true|false, got '" + std::string(v) + "'");
}

using Setter = std::function<void(RunConfig&, std::string_view key, std::string_view value)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"env.R", [](RunConfig& c, auto k, auto v) { c.env.ris_elements = to_int<std::size_t>(k, v); }},
      {"env.P_m_db", [](RunConfig& c, auto k, auto v) { c.env.max_power_db = to_double(k, v); }},
      {"env.I_db", [](RunConfig& c, auto k, auto v) { c.env.interference_db = to_double(k, v); }},
      {"env.N0", [](RunConfig& c, auto k, auto v) { c.env.noise = to_double(k, v); }},
      {"sac.gamma", [](RunConfig& c, auto k, auto v) { c.sac.gamma = to_double(k, v); }},
      {"sac.lr", [](RunConfig& c, auto k, auto v) { c.sac.learning_rate = to_double(k, v); }},
      {"sac.entropy", [](RunConfig& c, auto k, auto v) { c.sac.entropy_coef = to_double(k, v); }},
      {"sac.batch", [](RunConfig& c, auto k, auto v) { c.sac.batch_size = to_int<std::size_t>(k, v); }},
      {"sac.buffer",
       [](RunConfig& c, auto k, auto v) { c.sac.buffer_capacity = to_int<std::size_t>(k, v); }},
      {"sac.polyak", [](RunConfig& c, auto k, auto v) { c.sac.polyak = to_double(k, v); }},
      {"sac.target_clip", [](RunConfig& c, auto k, auto v) { c.sac.target_clip = to_double(k, v); }},
      {"sac.warm_start",
       [](RunConfig& c, auto k, auto v) { c.sac.warm_start = to_int<std::size_t>(k, v); }},
      {"sac.updates_per_step",
       [](RunConfig& c, auto k, auto v) { c.sac.updates_per_step = to_int<std::size_t>(k, v); }},
      {"sac.hidden", [](RunConfig& c, auto k, auto v) { c.sac.hidden_width = to_int<std::size_t>(k, v); }},
      {"sac.hidden_layers",
       [](RunConfig& c, auto k, auto v) { c.sac.hidden_layers = to_int<std::size_t>(k, v); }},
      {"sac.auto_entropy", [](RunConfig& c, auto k, auto v) { c.sac.auto_entropy = to_bool(k, v); }},
      {"sac.target_entropy",
       [](RunConfig& c, auto k, auto v) { c.sac.target_entropy = to_double(k, v); }},
      {"sac.normalize_rewards",
       [](RunConfig& c, auto k, auto v) { c.sac.normalize_rewards = to_bool(k, v); }},
      {"sac.average_reward",
       [](RunConfig& c, auto k, auto v) { c.sac.average_reward = to_bool(k, v); }},
      {"sac.average_reward_rate",
       [](RunConfig& c, auto k, auto v) { c.sac.average_reward_rate = to_double(k, v); }},
      {"attack.kind",
       [](RunConfig& c, auto, auto v) { c.attack.kind = adversary::parse_attack_kind(v); }},
      {"attack.delta", [](RunConfig& c, auto k, auto v) { c.attack.delta = to_double(k, v); }},
      {"attack.p", [](RunConfig& c, auto k, auto v) { c.attack.p = to_double(k, v); }},
      {"attack.w", [](RunConfig& c, auto k, auto v) { c.attack.window = to_int<std::size_t>(k, v); }},
      {"attack.q", [](RunConfig& c, auto k, auto v) { c.attack.quantile = to_double(k, v); }},
      {"attack.t_warm", [](RunConfig& c, auto k, auto v) { c.attack.warmup = to_int<std::int64_t>(k, v); }},
      {"attack.period", [](RunConfig& c, auto k, auto v) { c.attack.period = to_int<std::int64_t>(k, v); }},
      {"run.total_steps",
       [](RunConfig& c, auto k, auto v) { c.total_steps = to_int<std::int64_t>(k, v); }},
      {"run.seeds", [](RunConfig& c, auto, auto v) { c.seeds = parse_seed_list(v); }},
      {"seeds", [](RunConfig& c, auto, auto v) { c.seeds = parse_seed_list(v); }},
      {"run.ma_window", [](RunConfig& c, auto k, auto v) { c.ma_window = to_int<std::size_t>(k, v); }},
      {"run.eval_tail", [](RunConfig& c, auto k, auto v) { c.eval_tail = to_int<std::size_t>(k, v); }},
      {"run.out_dir", [](RunConfig& c, auto, auto v) { c.out_dir = std::string(v); }},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, _] : setters()) k.push_back(name);
    return k;
  }();
  return keys;
}

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
  std::vector<std::uint64_t> seeds;
  std::string_view rest = text;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = trim(rest.substr(0, comma));
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    if (item.empty()) throw ConfigError("run.seeds: empty item in '" + std::string(text) + "'");
    const auto dots = item.find("..");
    if (dots == std::string_view::npos) {
      seeds.push_back(to_int<std::uint64_t>("run.seeds", item));
    } else {
      const auto lo = to_int<std::uint64_t>("run.seeds", trim(item.substr(0, dots)));
      const auto hi = to_int<std::uint64_t>("run.seeds", trim(item.substr(dots + 2)));
      if (hi < lo) throw ConfigError("run.seeds: descending range '" + std::string(item) + "'");
      for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    }
  }
  return seeds;
}

void set_key(RunConfig& config, std::string_view key, std::string_view value) {
  const auto it = setters().find(key);
  if (it == setters().end()) throw ConfigError("unknown config key '" + std::string(key) + "'");
  it->second(config, key, value);
}

void RunConfig::validate() const {
  env.validate();
  sac.validate();
  attack.validate();
  if (total_steps <= attack.warmup) {
    throw ConfigError("run.total_steps must exceed attack.t_warm");
  }
  if (seeds.empty()) throw ConfigError("run.seeds must not be empty");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw ConfigError("run.seeds must be distinct");
  }
  if (ma_window == 0) throw ConfigError("run.ma_window must be >= 1");
}

RunConfig parse_config(std::string_view text) {
  RunConfig config;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    set_key(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  config.validate();
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace rispoison::harness
