#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "driftsync/linear.hpp"
#include "driftsync/model.hpp"
#include "driftsync/rkhs.hpp"

namespace driftsync {

struct SyncStrategy {
  enum class Kind { none, continuous, periodic, dynamic };
  Kind kind = Kind::continuous;
  std::int64_t period = 1;        // periodic: sync when period | t
  double delta = 0.0;             // dynamic: local condition ||f - r||^2 <= delta
  std::int64_t check_period = 1;  // dynamic: evaluate conditions when this | t

  static SyncStrategy none();
  static SyncStrategy continuous();
  static SyncStrategy periodic(std::int64_t period);
  static SyncStrategy dynamic(double delta, std::int64_t check_period = 1);

  void validate() const;
  std::string name() const;
};

// Logical message sizes; nothing is actually serialised.
struct ByteCostModel {
  std::int64_t bytes_per_sv = 0;            // default 8*d
  std::int64_t bytes_per_coeff = 8;
  std::int64_t bytes_per_linear_model = 0;  // default 8*d

  static ByteCostModel defaults_for(std::size_t dim);
  void validate() const;
};

// upload: every coefficient, plus the points the receiver lacks
std::int64_t message_size_up(std::int64_t coeff_count, std::int64_t new_sv_count,
                             const ByteCostModel& costs);
std::int64_t message_size_up(const KernelModel& learner, const SupportSet& known,
                             const ByteCostModel& costs);

// download: the averaged coefficients, plus union points this learner lacks
std::int64_t message_size_down(std::int64_t union_count, std::int64_t missing_count,
                               const ByteCostModel& costs);
std::int64_t message_size_down(const KernelModel& mean, const KernelModel& learner,
                               const ByteCostModel& costs);

// ||f - r||^2 <= delta, evaluated via the merged-difference norm
bool local_condition(const KernelModel& f, const KernelModel& r, double delta);

/**
 * One round of the communication ledger. Sync rounds also log the
 * per-learner set sizes that went into the byte formulas, so the totals
 * can be replayed exactly from the record alone.
 */
struct RoundRecord {
  std::int64_t t = 0;
  bool synced = false;
  int violations = 0;
  bool linear_path = false;
  std::int64_t bytes_up = 0;
  std::int64_t bytes_down = 0;
  int messages_up = 0;
  int messages_down = 0;
  int control_messages = 0;
  // NaN when no condition check happened this round
  double divergence_at_check = std::numeric_limits<double>::quiet_NaN();
  std::int64_t union_size = 0;  // |union| at sync, 0 otherwise
  std::vector<std::int64_t> learner_sv_counts;       // end of round
  std::vector<std::int64_t> upload_coeff_counts;     // sync rounds only
  std::vector<std::int64_t> upload_new_sv_counts;
  std::vector<std::int64_t> download_missing_counts;
};

class CommLedger {
 public:
  void add(RoundRecord rec);

  const std::vector<RoundRecord>& rounds() const { return rounds_; }
  std::int64_t total_up() const { return total_up_; }
  std::int64_t total_down() const { return total_down_; }
  std::int64_t total_bytes() const { return total_up_ + total_down_; }
  std::int64_t peak_round_bytes() const { return peak_; }
  std::int64_t sync_count() const { return sync_count_; }
  std::int64_t violation_rounds() const { return violation_rounds_; }
  std::int64_t violations_total() const { return violations_total_; }
  std::int64_t messages_up() const { return messages_up_; }
  std::int64_t messages_down() const { return messages_down_; }
  std::int64_t control_messages() const { return control_messages_; }

  // last round that moved model bytes; 0 when none did
  std::int64_t quiescence_round() const;

  // recompute every sync round from its logged set sizes and compare
  // against the logged byte totals; false on any mismatch
  bool replay_matches(const ByteCostModel& costs) const;

 private:
  std::vector<RoundRecord> rounds_;
  std::int64_t total_up_ = 0, total_down_ = 0, peak_ = 0;
  std::int64_t sync_count_ = 0, violation_rounds_ = 0, violations_total_ = 0;
  std::int64_t messages_up_ = 0, messages_down_ = 0, control_messages_ = 0;
};

/**
 * Coordinator bookkeeping for the kernel path. known/learner_synced are
 * the two sides of the delta-transmission contract: the coordinator's
 * cache per learner and each learner's record of its last synced set.
 * They are maintained independently; sync aborts if a learner references
 * a support the coordinator cannot resolve.
 */
struct KernelCoordinator {
  KernelModel reference;  // last synchronised mean
  SupportSet cached_union;
  std::vector<SupportSet> known;
  std::vector<SupportSet> learner_synced;

  KernelCoordinator(KernelSpec spec, std::size_t m);
};

struct LinearCoordinator {
  LinearModel reference;
  explicit LinearCoordinator(std::size_t dim) : reference(LinearModel::zeros(dim)) {}
};

struct SyncDecision {
  bool synced = false;
  int violations = 0;
  double divergence_at_check = std::numeric_limits<double>::quiet_NaN();
};

// Applies the strategy at round t (t >= 1; nothing syncs at t = 0),
// records one ledger row, and on sync replaces every model with the mean.
SyncDecision sync_step(const SyncStrategy& strategy, std::int64_t t,
                       ModelConfiguration& config, KernelCoordinator& coord,
                       CommLedger& ledger, const ByteCostModel& costs);

SyncDecision sync_step(const SyncStrategy& strategy, std::int64_t t,
                       std::vector<LinearModel>& models, LinearCoordinator& coord,
                       CommLedger& ledger, const ByteCostModel& costs);

struct ProtocolReport {
  std::int64_t sync_count = 0;
  std::int64_t violation_rounds = 0;
  std::int64_t violations_total = 0;
  std::int64_t quiescence_round = 0;
  std::int64_t false_alarm_syncs = 0;  // synced although divergence <= delta
  bool sync_bound_applicable = false;  // dynamic only
  double sync_bound_lhs = 0.0;         // syncs * sqrt(delta)
  double sync_bound_rhs = 0.0;         // total observed drift
  bool sync_bound_ok = true;
  double adaptivity_ratio = 0.0;  // bytes / (m * cumulative loss), 0 if loss 0
};

ProtocolReport violation_and_quiescence_report(const CommLedger& ledger,
                                               const SyncStrategy& strategy,
                                               double total_loss, int m,
                                               double total_drift);

struct BoundCheck {
  std::string name;
  bool applicable = false;
  double lhs = 0.0;
  double rhs = 0.0;
  bool ok = true;
};

// Closed-form ceiling on ledger bytes for the configured strategy.
// final_union_size is |union of learner supports| at the end of the run.
BoundCheck communication_bound_check(const CommLedger& ledger,
                                     const SyncStrategy& strategy,
                                     std::int64_t final_union_size, std::int64_t rounds,
                                     int m, const ByteCostModel& costs,
                                     double total_drift);

// Test hooks. The first desynchronises the coordinator cache so the next
// sync trips the consistency abort; the second bends the ledger totals so
// replay verification fails.
void corrupt_coordinator_cache_for_testing(KernelCoordinator& coord);
void corrupt_ledger_for_testing(CommLedger& ledger);

}  // namespace driftsync
