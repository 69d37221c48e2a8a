#include "driftsync/simulator.hpp"

#include <bit>
#include <cmath>
#include <exception>
#include <utility>

#include "driftsync/rkhs.hpp"

namespace driftsync {

namespace {

struct Fnv64 {
  std::uint64_t h = 1469598103934665603ull;
  void bytes(const void* p, std::size_t n) {
    auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  }
  void u64(std::uint64_t v) { bytes(&v, sizeof v); }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
};

double sign_of(double p) { return p > 0.0 ? 1.0 : (p < 0.0 ? -1.0 : 0.0); }

}  // namespace

NumericFailure::NumericFailure(std::int64_t t, int i)
    : std::runtime_error("numeric failure: non-finite value at round " +
                         std::to_string(t) + ", learner " + std::to_string(i)),
      round(t),
      learner(i) {}

void ExperimentConfig::validate() const {
  if (m < 1) throw std::invalid_argument("config: m must be >= 1");
  if (rounds < 1) throw std::invalid_argument("config: rounds must be >= 1");
  if (metrics_every < 1)
    throw std::invalid_argument("config: metrics_every must be >= 1");
  stream.validate();
  if (model_type == ModelType::kernel) kernel.validate();
  learner.validate();
  strategy.validate();
  if (model_type == ModelType::linear &&
      learner.compression.kind != CompressionKind::none)
    throw std::invalid_argument("config: linear models do not compress");
}

RunResult run(const ExperimentConfig& config) {
  config.validate();

  StreamSpec sspec = config.stream;
  sspec.seed = config.seed;
  const Stream stream(sspec, config.m);
  const int m = config.m;
  const std::size_t dim = static_cast<std::size_t>(stream.dim());

  ByteCostModel costs = config.costs;
  if (costs.bytes_per_sv == 0 && costs.bytes_per_coeff == 0 &&
      costs.bytes_per_linear_model == 0)
    costs = ByteCostModel::defaults_for(dim);
  costs.validate();

  RunResult res;
  res.costs = costs;

  std::int64_t rounds = config.rounds;
  if (stream.max_rounds() < rounds) {
    rounds = stream.max_rounds();
    res.shortened = true;
  }
  if (rounds < 1)
    throw std::invalid_argument("run: stream holds no complete round");

  // labels from files are the one source the generators cannot vouch for
  if (config.stream.kind == StreamSpec::Kind::csv &&
      config.loss.kind == LossKind::hinge)
    for (std::int64_t t = 1; t <= rounds; ++t)
      for (int i = 0; i < m; ++i) validate_label(config.loss.kind, stream.generate(i, t).y);

  res.round_loss.reserve(rounds);
  res.round_drift.reserve(rounds);
  res.cum_loss.reserve(rounds);
  res.cum_errors.reserve(rounds);
  res.mean_sv.reserve(rounds);
  res.drift_by_learner.assign(m, {});

  const bool kernel_path = config.model_type == ModelType::kernel;

  ModelConfiguration mc;
  std::vector<LinearModel> lmodels;
  if (kernel_path)
    mc.models.assign(m, KernelModel(config.kernel));
  else
    lmodels.assign(m, LinearModel::zeros(dim));
  KernelCoordinator kcoord(config.kernel, kernel_path ? m : 1);
  LinearCoordinator lcoord(dim);

  std::vector<UpdateOutcome> outs(m, UpdateOutcome{KernelModel(config.kernel)});
  std::vector<LinearUpdateOutcome> louts(m);
  std::vector<double> labels(m, 0.0);
  std::vector<signed char> nonfinite(m, 0);
  std::vector<std::exception_ptr> failures(m);

  for (std::int64_t t = 1; t <= rounds; ++t) {
    if (kernel_path) {
#pragma omp parallel for schedule(static) if (m > 1)
      for (int i = 0; i < m; ++i) {
        try {
          Example ex = stream.generate(i, t);
          labels[i] = ex.y;
          outs[i] = update_with_compression(mc.models[i], ex.x, ex.y,
                                            config.learner, config.loss,
                                            Birth{t, i});
          if (!std::isfinite(outs[i].prediction) || !std::isfinite(outs[i].loss) ||
              !std::isfinite(outs[i].drift))
            nonfinite[i] = 1;
        } catch (...) {
          failures[i] = std::current_exception();
        }
      }
    } else {
#pragma omp parallel for schedule(static) if (m > 1)
      for (int i = 0; i < m; ++i) {
        try {
          Example ex = stream.generate(i, t);
          labels[i] = ex.y;
          louts[i] =
              linear_sgd_update(lmodels[i], ex.x, ex.y, config.learner, config.loss);
          if (!std::isfinite(louts[i].prediction) || !std::isfinite(louts[i].loss) ||
              !std::isfinite(louts[i].drift))
            nonfinite[i] = 1;
        } catch (...) {
          failures[i] = std::current_exception();
        }
      }
    }
    for (int i = 0; i < m; ++i)
      if (failures[i]) std::rethrow_exception(failures[i]);
    for (int i = 0; i < m; ++i)
      if (nonfinite[i]) throw NumericFailure(t, i);

    // aggregation is serialized in learner order: the reduction order is
    // part of the observable record
    double rl = 0.0, rd = 0.0;
    for (int i = 0; i < m; ++i) {
      const double pred = kernel_path ? outs[i].prediction : louts[i].prediction;
      const double loss = kernel_path ? outs[i].loss : louts[i].loss;
      const double drift = kernel_path ? outs[i].drift : louts[i].drift;
      rl += loss;
      rd += drift;
      res.total_loss += loss;
      if (sign_of(pred) != labels[i]) ++res.total_errors;
      res.drift_by_learner[i].push_back(drift);
      if (kernel_path) {
        if (outs[i].compression_error > res.max_compression_error)
          res.max_compression_error = outs[i].compression_error;
        res.total_compression_error += outs[i].compression_error;
        mc.models[i] = std::move(outs[i].model);
        outs[i].model = KernelModel(config.kernel);
      } else {
        lmodels[i] = std::move(louts[i].model);
      }
    }
    res.total_drift += rd;
    res.round_loss.push_back(rl);
    res.round_drift.push_back(rd);
    res.cum_loss.push_back(res.total_loss);
    res.cum_errors.push_back(res.total_errors);

    if (kernel_path)
      sync_step(config.strategy, t, mc, kcoord, res.ledger, costs);
    else
      sync_step(config.strategy, t, lmodels, lcoord, res.ledger, costs);

    const RoundRecord& rec = res.ledger.rounds().back();
    double sv = 0.0;
    for (std::int64_t c : rec.learner_sv_counts) sv += static_cast<double>(c);
    res.mean_sv.push_back(sv / m);

    if (t % config.metrics_every == 0) {
      res.series_t.push_back(t);
      res.series_cum_loss.push_back(res.total_loss);
      res.series_cum_errors.push_back(res.total_errors);
      res.series_cum_bytes.push_back(res.ledger.total_bytes());
      res.series_sync_rounds.push_back(res.ledger.sync_count());
      res.series_mean_sv.push_back(res.mean_sv.back());
    }
  }

  res.rounds_completed = rounds;
  res.examples_consumed = static_cast<std::int64_t>(m) * rounds;

  if (kernel_path) {
    SupportSet all;
    for (const KernelModel& f : mc.models)
      for (const PointKey& k : f.support_set()) all.insert(k);
    res.final_union_size = static_cast<std::int64_t>(all.size());
    // translating every model by the shared reference leaves the spread
    // around the mean unchanged and keeps the evaluation sparse
    ModelConfiguration deltas;
    deltas.models.reserve(m);
    for (const KernelModel& f : mc.models)
      deltas.models.push_back(difference(f, kcoord.reference));
    res.final_divergence = divergence(deltas);
  } else {
    res.final_union_size = 0;
    double total = 0.0;
    std::vector<double> mean(dim, 0.0);
    for (const LinearModel& w : lmodels)
      for (std::size_t j = 0; j < dim; ++j) mean[j] += w.weights[j];
    for (std::size_t j = 0; j < dim; ++j) mean[j] /= m;
    for (const LinearModel& w : lmodels) {
      double d2 = 0.0;
      for (std::size_t j = 0; j < dim; ++j) {
        const double d = w.weights[j] - mean[j];
        d2 += d * d;
      }
      total += d2;
    }
    res.final_divergence = total / m;
  }

  res.report = violation_and_quiescence_report(res.ledger, config.strategy,
                                               res.total_loss, m, res.total_drift);
  res.comm_bound =
      communication_bound_check(res.ledger, config.strategy, res.final_union_size,
                                rounds, m, costs, res.total_drift);
  return res;
}

std::uint64_t RunResult::content_hash() const {
  Fnv64 fnv;
  fnv.i64(rounds_completed);
  fnv.u64(shortened ? 1 : 0);
  fnv.i64(examples_consumed);
  for (double v : round_loss) fnv.f64(v);
  for (double v : round_drift) fnv.f64(v);
  for (std::int64_t v : cum_errors) fnv.i64(v);
  for (double v : mean_sv) fnv.f64(v);
  for (const auto& per : drift_by_learner)
    for (double v : per) fnv.f64(v);
  for (const RoundRecord& r : ledger.rounds()) {
    fnv.i64(r.t);
    fnv.u64(r.synced ? 1 : 0);
    fnv.i64(r.violations);
    fnv.i64(r.bytes_up);
    fnv.i64(r.bytes_down);
    fnv.i64(r.messages_up);
    fnv.i64(r.messages_down);
    fnv.i64(r.control_messages);
    fnv.f64(r.divergence_at_check);
    fnv.i64(r.union_size);
    for (std::int64_t v : r.learner_sv_counts) fnv.i64(v);
    for (std::int64_t v : r.upload_coeff_counts) fnv.i64(v);
    for (std::int64_t v : r.upload_new_sv_counts) fnv.i64(v);
    for (std::int64_t v : r.download_missing_counts) fnv.i64(v);
  }
  fnv.f64(total_loss);
  fnv.i64(total_errors);
  fnv.f64(total_drift);
  fnv.f64(max_compression_error);
  fnv.f64(total_compression_error);
  fnv.i64(final_union_size);
  fnv.f64(final_divergence);
  return fnv.h;
}

CompareReport compare(const ExperimentConfig& base,
                      const std::vector<SyncStrategy>& strategies) {
  if (strategies.empty())
    throw std::invalid_argument("compare: needs at least one strategy");

  std::vector<RunResult> results;
  results.reserve(strategies.size());
  CompareReport rep;
  for (const SyncStrategy& s : strategies) {
    ExperimentConfig cfg = base;
    cfg.strategy = s;
    results.push_back(run(cfg));
    const RunResult& r = results.back();
    rep.rows.push_back({s.name(), r.total_loss, r.total_errors,
                        r.ledger.total_bytes(), r.ledger.sync_count(),
                        r.ledger.quiescence_round()});
  }

  int baseline = -1;
  for (std::size_t j = 0; j < strategies.size(); ++j) {
    const SyncStrategy& s = strategies[j];
    if (s.kind == SyncStrategy::Kind::continuous ||
        (s.kind == SyncStrategy::Kind::periodic && s.period == 1)) {
      baseline = static_cast<int>(j);
      break;
    }
  }
  if (baseline < 0 || base.learner.learn_rate <= 0.0) return rep;

  const double rate = base.learner.learn_rate;
  for (std::size_t j = 0; j < strategies.size(); ++j) {
    if (strategies[j].kind != SyncStrategy::Kind::dynamic) continue;
    const RunResult& dyn = results[j];
    const RunResult& ref = results[baseline];
    LossBoundCheck chk;
    chk.adaptive_name = strategies[j].name();
    chk.baseline_name = strategies[baseline].name();
    chk.eps_max = std::max(dyn.max_compression_error, ref.max_compression_error);
    const double T = static_cast<double>(dyn.rounds_completed);
    chk.lhs = dyn.total_loss;
    chk.rhs = ref.total_loss +
              (T / (rate * rate)) *
                  (strategies[j].delta + 2.0 * chk.eps_max * chk.eps_max);
    chk.ok = chk.lhs <= chk.rhs + 1e-9 * std::max(1.0, std::abs(chk.rhs));
    rep.loss_bounds.push_back(chk);
  }
  return rep;
}

}  // namespace driftsync
