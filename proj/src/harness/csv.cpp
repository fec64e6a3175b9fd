#include "rispoison/harness/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "rispoison/errors.hpp"

namespace rispoison::harness {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void write_trace(std::ostream& out, const RunLog& log, bool header) {
  if (header) out << kTraceHeader << '\n';
  for (const StepRecord& s : log.steps) {
    out << log.seed << ',' << s.t << ',' << format_double(s.r_true) << ','
        << format_double(s.r_train) << ',' << (s.fired ? 1 : 0) << ',' << (s.eligible ? 1 : 0)
        << ',' << format_double(s.signal) << ',' << format_double(s.threshold) << ','
        << format_double(s.power) << ',' << format_double(s.rate) << '\n';
  }
}

void write_curve(std::ostream& out, const AggregateCurve& curve) {
  out << kCurveHeader << '\n';
  for (std::size_t i = 0; i < curve.t.size(); ++i) {
    out << curve.t[i] << ',' << format_double(curve.mean[i]) << ','
        << format_double(curve.std[i]) << '\n';
  }
}

void write_sweep(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << kSweepHeader << '\n';
  for (const SweepRow& r : rows) {
    out << r.value << ',' << format_double(r.final_mean) << ',' << format_double(r.final_std)
        << ',' << r.n_seeds_ok << '\n';
  }
}

namespace {

template <typename F>
void write_file(const std::filesystem::path& path, F&& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  body(out);
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

double parse_double(std::string_view field, const std::string& where) {
  if (field == "nan") return std::nan("");
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw IoError("malformed number '" + std::string(field) + "' in " + where);
  }
  return v;
}

}  // namespace

void write_trace_file(const std::filesystem::path& path, const RunLog& log) {
  write_file(path, [&](std::ostream& o) { write_trace(o, log); });
}

void write_curve_file(const std::filesystem::path& path, const AggregateCurve& curve) {
  write_file(path, [&](std::ostream& o) { write_curve(o, curve); });
}

void write_sweep_file(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
  write_file(path, [&](std::ostream& o) { write_sweep(o, rows); });
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  write_file(path, [&](std::ostream& o) { o << text; });
}

std::vector<RunLog> read_trace_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trace " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) {
    throw IoError("unexpected trace header in " + path.string());
  }
  std::vector<RunLog> logs;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::string_view rest = line;
    for (;;) {
      const auto c = rest.find(',');
      f.push_back(rest.substr(0, c));
      if (c == std::string_view::npos) break;
      rest = rest.substr(c + 1);
    }
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (f.size() != 10) throw IoError("expected 10 fields at " + where);
    const auto seed = static_cast<std::uint64_t>(parse_double(f[0], where));
    if (logs.empty() || logs.back().seed != seed) {
      logs.emplace_back();
      logs.back().seed = seed;
    }
    StepRecord s;
    s.t = static_cast<std::int64_t>(parse_double(f[1], where));
    s.r_true = parse_double(f[2], where);
    s.r_train = parse_double(f[3], where);
    s.fired = f[4] == "1";
    s.eligible = f[5] == "1";
    s.signal = parse_double(f[6], where);
    s.threshold = parse_double(f[7], where);
    s.power = parse_double(f[8], where);
    s.rate = parse_double(f[9], where);
    logs.back().steps.push_back(s);
  }
  return logs;
}

}  // namespace rispoison::harness
