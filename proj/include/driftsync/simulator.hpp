#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "driftsync/learner.hpp"
#include "driftsync/protocol.hpp"
#include "driftsync/stream.hpp"

namespace driftsync {

enum class ModelType { kernel, linear };

// a prediction or model went non-finite; the run cannot continue
struct NumericFailure : std::runtime_error {
  std::int64_t round;
  int learner;
  NumericFailure(std::int64_t t, int i);
};

struct ExperimentConfig {
  int m = 4;
  std::int64_t rounds = 1000;
  std::int64_t metrics_every = 1;
  std::uint64_t seed = 1;  // copied into the stream spec at run start

  StreamSpec stream;
  ModelType model_type = ModelType::kernel;
  KernelSpec kernel;
  LossSpec loss;
  LearnerParams learner;
  SyncStrategy strategy;
  // all-zero means "derive from the stream dimension at run start"
  ByteCostModel costs{0, 0, 0};

  void validate() const;
};

/**
 * Everything observable about one run. Per-round vectors are indexed by
 * t-1 and have length rounds_completed; series_* are sampled at the
 * rounds divisible by metrics_every, so their length is
 * rounds_completed / metrics_every. The ledger keeps the full
 * communication record, one row per round.
 */
struct RunResult {
  std::int64_t rounds_completed = 0;
  bool shortened = false;  // stream ran out before the requested rounds
  std::int64_t examples_consumed = 0;

  std::vector<double> round_loss;   // per round, summed over learners
  std::vector<double> round_drift;  // per round, summed over learners
  std::vector<double> cum_loss;
  std::vector<std::int64_t> cum_errors;
  std::vector<double> mean_sv;                        // post-sync
  std::vector<std::vector<double>> drift_by_learner;  // [m][rounds]

  std::vector<std::int64_t> series_t;
  std::vector<double> series_cum_loss;
  std::vector<std::int64_t> series_cum_errors;
  std::vector<std::int64_t> series_cum_bytes;
  std::vector<std::int64_t> series_sync_rounds;  // cumulative sync flag
  std::vector<double> series_mean_sv;

  CommLedger ledger;
  ByteCostModel costs;  // resolved values the ledger was priced with

  double total_loss = 0.0;
  std::int64_t total_errors = 0;
  double total_drift = 0.0;
  double max_compression_error = 0.0;
  double total_compression_error = 0.0;
  std::int64_t final_union_size = 0;
  double final_divergence = 0.0;

  ProtocolReport report;
  BoundCheck comm_bound;

  // fingerprint of the observable record; two runs of one config must
  // agree bit for bit, whatever the thread count
  std::uint64_t content_hash() const;
};

RunResult run(const ExperimentConfig& config);

struct CompareRow {
  std::string strategy;
  double loss = 0.0;
  std::int64_t errors = 0;
  std::int64_t bytes = 0;
  std::int64_t sync_rounds = 0;
  std::int64_t quiescence_round = 0;
};

// adaptive-vs-every-round cumulative loss ceiling:
// L_adaptive <= L_base + (T / rate^2) * (delta + 2 * eps_max^2)
struct LossBoundCheck {
  std::string adaptive_name;
  std::string baseline_name;
  double lhs = 0.0;
  double rhs = 0.0;
  double eps_max = 0.0;
  bool ok = true;
};

struct CompareReport {
  std::vector<CompareRow> rows;
  std::vector<LossBoundCheck> loss_bounds;
};

// Runs the base config once per strategy on identical streams. Every
// dynamic entry is checked against the first every-round baseline
// (continuous or periodic with period 1) when the list has one and the
// learn rate is positive.
CompareReport compare(const ExperimentConfig& base,
                      const std::vector<SyncStrategy>& strategies);

}  // namespace driftsync
