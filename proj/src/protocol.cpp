#include "driftsync/protocol.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace driftsync {

SyncStrategy SyncStrategy::none() { return {Kind::none}; }
SyncStrategy SyncStrategy::continuous() { return {Kind::continuous}; }
SyncStrategy SyncStrategy::periodic(std::int64_t period) {
  SyncStrategy s{Kind::periodic};
  s.period = period;
  s.validate();
  return s;
}
SyncStrategy SyncStrategy::dynamic(double delta, std::int64_t check_period) {
  SyncStrategy s{Kind::dynamic};
  s.delta = delta;
  s.check_period = check_period;
  s.validate();
  return s;
}

void SyncStrategy::validate() const {
  switch (kind) {
    case Kind::none:
    case Kind::continuous:
      break;
    case Kind::periodic:
      if (period < 1) throw std::invalid_argument("strategy: period must be >= 1");
      break;
    case Kind::dynamic:
      if (!(delta > 0.0) || !std::isfinite(delta))
        throw std::invalid_argument("strategy: delta must be positive and finite");
      if (check_period < 1)
        throw std::invalid_argument("strategy: check_period must be >= 1");
      break;
  }
}

std::string SyncStrategy::name() const {
  char buf[64];
  switch (kind) {
    case Kind::none:
      return "none";
    case Kind::continuous:
      return "continuous";
    case Kind::periodic:
      std::snprintf(buf, sizeof buf, "periodic(%lld)", static_cast<long long>(period));
      return buf;
    case Kind::dynamic:
      std::snprintf(buf, sizeof buf, "dynamic(%g)", delta);
      return buf;
  }
  return "?";
}

ByteCostModel ByteCostModel::defaults_for(std::size_t dim) {
  ByteCostModel c;
  c.bytes_per_sv = static_cast<std::int64_t>(8 * dim);
  c.bytes_per_coeff = 8;
  c.bytes_per_linear_model = static_cast<std::int64_t>(8 * dim);
  return c;
}

void ByteCostModel::validate() const {
  if (bytes_per_sv < 0 || bytes_per_coeff < 0 || bytes_per_linear_model < 0)
    throw std::invalid_argument("costs: byte sizes must be >= 0");
}

std::int64_t message_size_up(std::int64_t coeff_count, std::int64_t new_sv_count,
                             const ByteCostModel& costs) {
  return coeff_count * costs.bytes_per_coeff + new_sv_count * costs.bytes_per_sv;
}

std::int64_t message_size_up(const KernelModel& learner, const SupportSet& known,
                             const ByteCostModel& costs) {
  std::int64_t fresh = 0;
  for (std::size_t i = 0; i < learner.size(); ++i)
    if (!known.contains(PointKey(learner.point(i)))) ++fresh;
  return message_size_up(static_cast<std::int64_t>(learner.size()), fresh, costs);
}

std::int64_t message_size_down(std::int64_t union_count, std::int64_t missing_count,
                               const ByteCostModel& costs) {
  return union_count * costs.bytes_per_coeff + missing_count * costs.bytes_per_sv;
}

std::int64_t message_size_down(const KernelModel& mean, const KernelModel& learner,
                               const ByteCostModel& costs) {
  std::int64_t missing = 0;
  for (std::size_t i = 0; i < mean.size(); ++i)
    if (!learner.find(mean.point(i)).has_value()) ++missing;
  return message_size_down(static_cast<std::int64_t>(mean.size()), missing, costs);
}

bool local_condition(const KernelModel& f, const KernelModel& r, double delta) {
  return diff_norm_sq(f, r) <= delta;
}

void CommLedger::add(RoundRecord rec) {
  total_up_ += rec.bytes_up;
  total_down_ += rec.bytes_down;
  std::int64_t round_bytes = rec.bytes_up + rec.bytes_down;
  if (round_bytes > peak_) peak_ = round_bytes;
  if (rec.synced) ++sync_count_;
  if (rec.violations > 0) ++violation_rounds_;
  violations_total_ += rec.violations;
  messages_up_ += rec.messages_up;
  messages_down_ += rec.messages_down;
  control_messages_ += rec.control_messages;
  rounds_.push_back(std::move(rec));
}

std::int64_t CommLedger::quiescence_round() const {
  std::int64_t last = 0;
  for (const RoundRecord& r : rounds_)
    if (r.bytes_up + r.bytes_down > 0) last = r.t;
  return last;
}

bool CommLedger::replay_matches(const ByteCostModel& costs) const {
  std::int64_t up = 0, down = 0, peak = 0;
  for (const RoundRecord& r : rounds_) {
    std::int64_t eu = 0, ed = 0;
    if (r.synced) {
      if (r.linear_path) {
        eu = static_cast<std::int64_t>(r.messages_up) * costs.bytes_per_linear_model;
        ed = static_cast<std::int64_t>(r.messages_down) * costs.bytes_per_linear_model;
      } else {
        if (r.upload_coeff_counts.size() != r.upload_new_sv_counts.size() ||
            r.upload_coeff_counts.size() != r.download_missing_counts.size())
          return false;
        for (std::size_t i = 0; i < r.upload_coeff_counts.size(); ++i) {
          eu += message_size_up(r.upload_coeff_counts[i], r.upload_new_sv_counts[i], costs);
          ed += message_size_down(r.union_size, r.download_missing_counts[i], costs);
        }
      }
    }
    if (eu != r.bytes_up || ed != r.bytes_down) return false;
    up += eu;
    down += ed;
    if (eu + ed > peak) peak = eu + ed;
  }
  return up == total_up_ && down == total_down_ && peak == peak_;
}

KernelCoordinator::KernelCoordinator(KernelSpec spec, std::size_t m)
    : reference(spec), known(m), learner_synced(m) {}

namespace {

bool scheduled_sync(const SyncStrategy& s, std::int64_t t) {
  switch (s.kind) {
    case SyncStrategy::Kind::none:
      return false;
    case SyncStrategy::Kind::continuous:
      return true;
    case SyncStrategy::Kind::periodic:
      return t % s.period == 0;
    case SyncStrategy::Kind::dynamic:
      return false;  // decided by the local conditions
  }
  return false;
}

// divergence of the configuration, computed on the models translated by
// the reference: the value is translation invariant and the differences
// stay small between syncs, which keeps this O(changes^2)
double divergence_via_reference(const ModelConfiguration& config,
                                const KernelModel& reference) {
  ModelConfiguration deltas;
  deltas.models.reserve(config.models.size());
  for (const KernelModel& f : config.models)
    deltas.models.push_back(difference(f, reference));
  return divergence(deltas);
}

}  // namespace

SyncDecision sync_step(const SyncStrategy& strategy, std::int64_t t,
                       ModelConfiguration& config, KernelCoordinator& coord,
                       CommLedger& ledger, const ByteCostModel& costs) {
  strategy.validate();
  costs.validate();
  config.validate();
  if (t < 1) throw std::invalid_argument("sync_step: rounds start at 1");
  const std::size_t m = config.learners();
  if (coord.known.size() != m || coord.learner_synced.size() != m)
    throw std::invalid_argument("sync_step: coordinator sized for a different m");

  RoundRecord rec;
  rec.t = t;

  bool do_sync = scheduled_sync(strategy, t);
  if (strategy.kind == SyncStrategy::Kind::dynamic && t % strategy.check_period == 0) {
    for (std::size_t i = 0; i < m; ++i)
      if (!local_condition(config.models[i], coord.reference, strategy.delta))
        ++rec.violations;
    rec.divergence_at_check = divergence_via_reference(config, coord.reference);
    rec.control_messages += rec.violations;  // violation notifications
    if (rec.violations > 0) {
      do_sync = true;
      rec.control_messages += static_cast<int>(m);  // coordinator fan-out
    }
  }

  if (do_sync) {
    KernelModel mean = average(config);
    SupportSet union_set = mean.support_set();

    for (std::size_t i = 0; i < m; ++i) {
      const KernelModel& f = config.models[i];
      std::int64_t fresh = 0;
      for (std::size_t k = 0; k < f.size(); ++k) {
        PointKey key(f.point(k));
        if (coord.learner_synced[i].contains(key)) {
          // learner refers to this point as already delivered; the
          // coordinator must be able to resolve it from its cache
          if (!coord.known[i].contains(key))
            throw std::logic_error("sync_step: coordinator cache inconsistent");
        } else {
          ++fresh;
        }
      }
      std::int64_t missing = 0;
      for (std::size_t k = 0; k < mean.size(); ++k)
        if (!f.find(mean.point(k)).has_value()) ++missing;

      rec.upload_coeff_counts.push_back(static_cast<std::int64_t>(f.size()));
      rec.upload_new_sv_counts.push_back(fresh);
      rec.download_missing_counts.push_back(missing);
      rec.bytes_up += message_size_up(static_cast<std::int64_t>(f.size()), fresh, costs);
      rec.bytes_down +=
          message_size_down(static_cast<std::int64_t>(mean.size()), missing, costs);
    }

    rec.synced = true;
    rec.union_size = static_cast<std::int64_t>(mean.size());
    rec.messages_up = static_cast<int>(m);
    rec.messages_down = static_cast<int>(m);

    for (std::size_t i = 0; i < m; ++i) {
      config.models[i] = mean;
      coord.known[i] = union_set;
      coord.learner_synced[i] = union_set;
    }
    coord.reference = std::move(mean);
    coord.cached_union = std::move(union_set);
  }

  rec.learner_sv_counts.reserve(m);
  for (const KernelModel& f : config.models)
    rec.learner_sv_counts.push_back(static_cast<std::int64_t>(f.size()));

  SyncDecision out{rec.synced, rec.violations, rec.divergence_at_check};
  ledger.add(std::move(rec));
  return out;
}

SyncDecision sync_step(const SyncStrategy& strategy, std::int64_t t,
                       std::vector<LinearModel>& models, LinearCoordinator& coord,
                       CommLedger& ledger, const ByteCostModel& costs) {
  strategy.validate();
  costs.validate();
  if (models.empty()) throw std::invalid_argument("sync_step: no models");
  if (t < 1) throw std::invalid_argument("sync_step: rounds start at 1");
  const std::size_t m = models.size();
  const std::size_t dim = models.front().dim();

  RoundRecord rec;
  rec.t = t;
  rec.linear_path = true;

  auto dist_sq = [&](const LinearModel& a, const LinearModel& b) {
    double acc = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      double d = a.weights[k] - b.weights[k];
      acc += d * d;
    }
    return acc;
  };

  bool do_sync = scheduled_sync(strategy, t);
  if (strategy.kind == SyncStrategy::Kind::dynamic && t % strategy.check_period == 0) {
    for (const LinearModel& w : models)
      if (!(dist_sq(w, coord.reference) <= strategy.delta)) ++rec.violations;
    LinearModel mean = LinearModel::zeros(dim);
    for (const LinearModel& w : models)
      for (std::size_t k = 0; k < dim; ++k) mean.weights[k] += w.weights[k];
    for (std::size_t k = 0; k < dim; ++k)
      mean.weights[k] /= static_cast<double>(m);
    double acc = 0.0;
    for (const LinearModel& w : models) acc += dist_sq(w, mean);
    rec.divergence_at_check = acc / static_cast<double>(m);
    rec.control_messages += rec.violations;
    if (rec.violations > 0) {
      do_sync = true;
      rec.control_messages += static_cast<int>(m);
    }
  }

  if (do_sync) {
    LinearModel mean = LinearModel::zeros(dim);
    for (const LinearModel& w : models)
      for (std::size_t k = 0; k < dim; ++k) mean.weights[k] += w.weights[k];
    for (std::size_t k = 0; k < dim; ++k) mean.weights[k] /= static_cast<double>(m);

    rec.synced = true;
    rec.bytes_up = static_cast<std::int64_t>(m) * costs.bytes_per_linear_model;
    rec.bytes_down = static_cast<std::int64_t>(m) * costs.bytes_per_linear_model;
    rec.messages_up = static_cast<int>(m);
    rec.messages_down = static_cast<int>(m);

    for (LinearModel& w : models) w = mean;
    coord.reference = std::move(mean);
  }

  rec.learner_sv_counts.assign(m, 0);
  SyncDecision out{rec.synced, rec.violations, rec.divergence_at_check};
  ledger.add(std::move(rec));
  return out;
}

ProtocolReport violation_and_quiescence_report(const CommLedger& ledger,
                                               const SyncStrategy& strategy,
                                               double total_loss, int m,
                                               double total_drift) {
  ProtocolReport rep;
  rep.sync_count = ledger.sync_count();
  rep.violation_rounds = ledger.violation_rounds();
  rep.violations_total = ledger.violations_total();
  rep.quiescence_round = ledger.quiescence_round();
  for (const RoundRecord& r : ledger.rounds())
    if (r.synced && !std::isnan(r.divergence_at_check) &&
        r.divergence_at_check <= strategy.delta)
      ++rep.false_alarm_syncs;
  if (strategy.kind == SyncStrategy::Kind::dynamic) {
    rep.sync_bound_applicable = true;
    rep.sync_bound_lhs = static_cast<double>(rep.sync_count) * std::sqrt(strategy.delta);
    rep.sync_bound_rhs = total_drift;
    rep.sync_bound_ok = rep.sync_bound_lhs <= rep.sync_bound_rhs;
  }
  double bytes = static_cast<double>(ledger.total_bytes());
  rep.adaptivity_ratio = total_loss > 0.0 ? bytes / (m * total_loss) : 0.0;
  return rep;
}

BoundCheck communication_bound_check(const CommLedger& ledger,
                                     const SyncStrategy& strategy,
                                     std::int64_t final_union_size, std::int64_t rounds,
                                     int m, const ByteCostModel& costs,
                                     double total_drift) {
  BoundCheck check;
  check.lhs = static_cast<double>(ledger.total_bytes());

  bool linear = !ledger.rounds().empty() && ledger.rounds().front().linear_path;
  const double md = static_cast<double>(m);
  const double u = static_cast<double>(final_union_size);
  const double coeff_per_sync = linear
      ? 2.0 * md * static_cast<double>(costs.bytes_per_linear_model)
      : 2.0 * md * u * static_cast<double>(costs.bytes_per_coeff);
  const double sv_total =
      linear ? 0.0 : md * u * static_cast<double>(costs.bytes_per_sv);

  switch (strategy.kind) {
    case SyncStrategy::Kind::none:
      check.name = "comm_bound_none";
      check.applicable = false;
      check.ok = ledger.total_bytes() == 0;
      return check;
    case SyncStrategy::Kind::continuous:
      check.name = "comm_bound_continuous";
      check.rhs = static_cast<double>(rounds) * coeff_per_sync + sv_total;
      break;
    case SyncStrategy::Kind::periodic:
      check.name = "comm_bound_periodic";
      check.rhs = (static_cast<double>(rounds) / static_cast<double>(strategy.period)) *
                      coeff_per_sync +
                  sv_total;
      break;
    case SyncStrategy::Kind::dynamic:
      check.name = "comm_bound_dynamic";
      check.rhs = (total_drift / std::sqrt(strategy.delta)) * coeff_per_sync + sv_total;
      break;
  }
  check.applicable = true;
  check.ok = check.lhs <= check.rhs;
  return check;
}

void corrupt_coordinator_cache_for_testing(KernelCoordinator& coord) {
  if (coord.known.empty()) return;
  SupportSet& cache = coord.known.front();
  if (cache.empty()) return;
  cache.erase(cache.begin());
}

void corrupt_ledger_for_testing(CommLedger& ledger) {
  RoundRecord rec;
  rec.t = ledger.rounds().empty() ? 1 : ledger.rounds().back().t;
  rec.synced = true;
  rec.bytes_up = 1;  // no logged sizes back this byte, so replay must fail
  ledger.add(std::move(rec));
}

}  // namespace driftsync
