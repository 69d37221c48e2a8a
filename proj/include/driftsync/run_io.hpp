#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "driftsync/simulator.hpp"

namespace driftsync {

// shortest round-trip decimal form; the one double format every emitted
// file uses, so reruns are byte-identical
std::string format_double(double v);

std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t checksum_file(const std::string& path);
std::string hex16(std::uint64_t v);

// run log: one sampled row per metrics_every rounds
// t,theta,violations,bytes_up,bytes_down,cum_loss,cum_error,mean_sv_count,divergence_at_check
void write_run_log(std::ostream& out, const RunResult& res);

struct RunLogRow {
  std::int64_t t = 0;
  int theta = 0;
  std::int64_t violations = 0;
  std::int64_t bytes_up = 0;
  std::int64_t bytes_down = 0;
  double cum_loss = 0.0;
  std::int64_t cum_error = 0;
  double mean_sv_count = 0.0;
  double divergence_at_check = 0.0;
  bool has_divergence = false;  // the column is empty on non-check rounds
};
std::vector<RunLogRow> parse_run_log(std::istream& in);

// sweep table: value,cum_loss,cum_error,cum_bytes,violations,quiescence_round
struct SweepRow {
  double value = 0.0;
  double cum_loss = 0.0;
  std::int64_t cum_error = 0;
  std::int64_t cum_bytes = 0;
  std::int64_t violations = 0;
  std::int64_t quiescence_round = 0;
};
void write_sweep_table(std::ostream& out, const std::vector<SweepRow>& rows);
std::vector<SweepRow> parse_sweep_table(std::istream& in);

// key = value lines: final totals, protocol report, bound verdicts
void write_summary(std::ostream& out, const ExperimentConfig& config,
                   const RunResult& res);

void write_text_file(const std::string& path, const std::string& content);

// `<hex16 checksum>  <name>` per file, sorted by name; written to
// <dir>/manifest.txt (which lists every file but itself)
void write_manifest(const std::string& dir, std::vector<std::string> names);

}  // namespace driftsync
