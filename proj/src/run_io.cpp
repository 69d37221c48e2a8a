#include "driftsync/run_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string_view>

namespace driftsync {

namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

double parse_f64(std::string_view v, const char* what) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size())
    throw std::runtime_error(std::string("csv: bad ") + what + " field '" +
                             std::string(v) + "'");
  return out;
}

std::int64_t parse_i64(std::string_view v, const char* what) {
  std::int64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size())
    throw std::runtime_error(std::string("csv: bad ") + what + " field '" +
                             std::string(v) + "'");
  return out;
}

std::string_view chomp(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

const char* verdict(bool applicable, bool ok) {
  return !applicable ? (ok ? "PASS (not applicable)" : "FAIL") : (ok ? "PASS" : "FAIL");
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("format_double: to_chars failed");
  return std::string(buf, p);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t checksum_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checksum: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return fnv1a64(buf.view());
}

std::string hex16(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[i] = digits[v & 0xf];
  return s;
}

void write_run_log(std::ostream& out, const RunResult& res) {
  out << "t,theta,violations,bytes_up,bytes_down,cum_loss,cum_error,"
         "mean_sv_count,divergence_at_check\n";
  for (std::size_t k = 0; k < res.series_t.size(); ++k) {
    const std::int64_t t = res.series_t[k];
    const RoundRecord& rec = res.ledger.rounds()[static_cast<std::size_t>(t - 1)];
    out << t << ',' << (rec.synced ? 1 : 0) << ',' << rec.violations << ','
        << rec.bytes_up << ',' << rec.bytes_down << ','
        << format_double(res.cum_loss[static_cast<std::size_t>(t - 1)]) << ','
        << res.cum_errors[static_cast<std::size_t>(t - 1)] << ','
        << format_double(res.mean_sv[static_cast<std::size_t>(t - 1)]) << ',';
    if (!std::isnan(rec.divergence_at_check))
      out << format_double(rec.divergence_at_check);
    out << '\n';
  }
}

std::vector<RunLogRow> parse_run_log(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) ||
      chomp(line) !=
          "t,theta,violations,bytes_up,bytes_down,cum_loss,cum_error,"
          "mean_sv_count,divergence_at_check")
    throw std::runtime_error("run log: bad header");
  std::vector<RunLogRow> rows;
  while (std::getline(in, line)) {
    std::string_view sv = chomp(line);
    if (sv.empty()) continue;
    const auto f = split_csv(sv);
    if (f.size() != 9) throw std::runtime_error("run log: expected 9 fields");
    RunLogRow r;
    r.t = parse_i64(f[0], "t");
    r.theta = static_cast<int>(parse_i64(f[1], "theta"));
    r.violations = parse_i64(f[2], "violations");
    r.bytes_up = parse_i64(f[3], "bytes_up");
    r.bytes_down = parse_i64(f[4], "bytes_down");
    r.cum_loss = parse_f64(f[5], "cum_loss");
    r.cum_error = parse_i64(f[6], "cum_error");
    r.mean_sv_count = parse_f64(f[7], "mean_sv_count");
    if (!f[8].empty()) {
      r.divergence_at_check = parse_f64(f[8], "divergence_at_check");
      r.has_divergence = true;
    }
    rows.push_back(r);
  }
  return rows;
}

void write_sweep_table(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "value,cum_loss,cum_error,cum_bytes,violations,quiescence_round\n";
  for (const SweepRow& r : rows)
    out << format_double(r.value) << ',' << format_double(r.cum_loss) << ','
        << r.cum_error << ',' << r.cum_bytes << ',' << r.violations << ','
        << r.quiescence_round << '\n';
}

std::vector<SweepRow> parse_sweep_table(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) ||
      chomp(line) != "value,cum_loss,cum_error,cum_bytes,violations,quiescence_round")
    throw std::runtime_error("sweep table: bad header");
  std::vector<SweepRow> rows;
  while (std::getline(in, line)) {
    std::string_view sv = chomp(line);
    if (sv.empty()) continue;
    const auto f = split_csv(sv);
    if (f.size() != 6) throw std::runtime_error("sweep table: expected 6 fields");
    rows.push_back({parse_f64(f[0], "value"), parse_f64(f[1], "cum_loss"),
                    parse_i64(f[2], "cum_error"), parse_i64(f[3], "cum_bytes"),
                    parse_i64(f[4], "violations"),
                    parse_i64(f[5], "quiescence_round")});
  }
  return rows;
}

void write_summary(std::ostream& out, const ExperimentConfig& config,
                   const RunResult& res) {
  out << "strategy = " << config.strategy.name() << '\n';
  out << "model = " << (config.model_type == ModelType::kernel ? "kernel" : "linear")
      << '\n';
  out << "m = " << config.m << '\n';
  out << "rounds_requested = " << config.rounds << '\n';
  out << "rounds_completed = " << res.rounds_completed << '\n';
  out << "shortened = " << (res.shortened ? "true" : "false") << '\n';
  out << "examples_consumed = " << res.examples_consumed << '\n';
  out << "seed = " << config.seed << '\n';
  out << "total_loss = " << format_double(res.total_loss) << '\n';
  out << "total_errors = " << res.total_errors << '\n';
  out << "bytes_up = " << res.ledger.total_up() << '\n';
  out << "bytes_down = " << res.ledger.total_down() << '\n';
  out << "total_bytes = " << res.ledger.total_bytes() << '\n';
  out << "peak_round_bytes = " << res.ledger.peak_round_bytes() << '\n';
  out << "sync_rounds = " << res.ledger.sync_count() << '\n';
  out << "violation_rounds = " << res.ledger.violation_rounds() << '\n';
  out << "violations_total = " << res.ledger.violations_total() << '\n';
  out << "messages_up = " << res.ledger.messages_up() << '\n';
  out << "messages_down = " << res.ledger.messages_down() << '\n';
  out << "control_messages = " << res.ledger.control_messages() << '\n';
  out << "quiescence_round = " << res.ledger.quiescence_round() << '\n';
  out << "false_alarm_syncs = " << res.report.false_alarm_syncs << '\n';
  out << "total_drift = " << format_double(res.total_drift) << '\n';
  out << "max_compression_error = " << format_double(res.max_compression_error)
      << '\n';
  out << "total_compression_error = " << format_double(res.total_compression_error)
      << '\n';
  out << "final_divergence = " << format_double(res.final_divergence) << '\n';
  out << "final_union_size = " << res.final_union_size << '\n';
  out << "adaptivity_ratio = " << format_double(res.report.adaptivity_ratio) << '\n';
  out << "content_hash = " << hex16(res.content_hash()) << '\n';
  out << "check.ledger_replay = "
      << (res.ledger.replay_matches(res.costs) ? "PASS" : "FAIL") << '\n';
  out << "check.comm_bound = " << verdict(res.comm_bound.applicable, res.comm_bound.ok)
      << '\n';
  out << "check.comm_bound.lhs = " << format_double(res.comm_bound.lhs) << '\n';
  out << "check.comm_bound.rhs = " << format_double(res.comm_bound.rhs) << '\n';
  out << "check.sync_bound = "
      << verdict(res.report.sync_bound_applicable, res.report.sync_bound_ok) << '\n';
  out << "check.sync_bound.lhs = " << format_double(res.report.sync_bound_lhs)
      << '\n';
  out << "check.sync_bound.rhs = " << format_double(res.report.sync_bound_rhs)
      << '\n';
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("short write to " + path);
}

void write_manifest(const std::string& dir, std::vector<std::string> names) {
  std::sort(names.begin(), names.end());
  std::ostringstream out;
  for (const std::string& name : names)
    out << hex16(checksum_file(dir + "/" + name)) << "  " << name << '\n';
  write_text_file(dir + "/manifest.txt", out.str());
}

}  // namespace driftsync
