#include "driftsync/learner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace driftsync {

namespace {

constexpr double kGramJitter = 1e-10;  // keeps near-singular solves defined

// Cholesky factor/solve of a symmetric positive definite system, row-major.
// Returns false when a pivot is not positive (matrix not numerically SPD).
bool spd_solve(std::vector<double>& a, std::vector<double>& b, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
    if (!(d > 0.0)) return false;
    d = std::sqrt(d);
    a[j * n + j] = d;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = s / d;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {  // L y = b
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= a[i * n + k] * b[k];
    b[i] = s / a[i * n + i];
  }
  for (std::size_t ii = n; ii > 0; --ii) {  // L' x = y
    std::size_t i = ii - 1;
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[k * n + i] * b[k];
    b[i] = s / a[i * n + i];
  }
  return true;
}

}  // namespace

void CompressionSpec::validate() const {
  switch (kind) {
    case CompressionKind::none:
      break;
    case CompressionKind::truncate:
      if (budget < 1) throw std::invalid_argument("compression: budget must be >= 1");
      break;
    case CompressionKind::project:
      if (!(tolerance > 0.0) || !std::isfinite(tolerance))
        throw std::invalid_argument("compression: tolerance must be > 0 and finite");
      break;
  }
}

void LearnerParams::validate() const {
  // learn_rate 0 is the degenerate no-op learner; negative rates are bugs
  if (!(learn_rate >= 0.0) || !std::isfinite(learn_rate))
    throw std::invalid_argument("learner: learn_rate must be >= 0 and finite");
  if (!(reg >= 0.0) || !std::isfinite(reg))
    throw std::invalid_argument("learner: reg must be >= 0 and finite");
  compression.validate();
}

UpdateOutcome kernel_sgd_update(const KernelModel& f, std::span<const double> x,
                                double y, const LearnerParams& params,
                                const LossSpec& loss, Birth birth) {
  params.validate();
  validate_label(loss.kind, y);

  double pred = predict(f, x);
  double loss_before = loss_value(loss.kind, pred, y);
  double g = loss_subgradient(loss.kind, pred, y);

  KernelModel next = f;
  if (params.reg > 0.0) next.scale(1.0 - params.learn_rate * params.reg);
  double coeff = -params.learn_rate * g;
  bool added = false;
  if (coeff != 0.0)
    added = next.add(SupportVector{{x.begin(), x.end()}, birth}, coeff);

  double drift = std::sqrt(diff_norm_sq(f, next));
  return {std::move(next), pred, loss_before, drift, added, 0.0};
}

std::pair<KernelModel, double> truncate(const KernelModel& f, int budget) {
  if (budget < 1) throw std::invalid_argument("truncate: budget must be >= 1");
  if (f.size() <= static_cast<std::size_t>(budget)) return {f, 0.0};

  // oldest first; stored position breaks ties so the cut is total
  std::vector<std::size_t> order(f.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (f.support(a).birth != f.support(b).birth)
      return f.support(a).birth < f.support(b).birth;
    return a < b;
  });

  std::size_t n_drop = f.size() - static_cast<std::size_t>(budget);
  std::vector<bool> drop(f.size(), false);
  KernelModel dropped(f.kernel());
  for (std::size_t r = 0; r < n_drop; ++r) {
    drop[order[r]] = true;
    dropped.add(f.support(order[r]), f.coeff(order[r]));
  }
  KernelModel kept(f.kernel());
  for (std::size_t i = 0; i < f.size(); ++i)
    if (!drop[i]) kept.add(f.support(i), f.coeff(i));

  double e2 = norm_sq(dropped);
  return {std::move(kept), std::sqrt(e2 < 0.0 ? 0.0 : e2)};
}

std::pair<KernelModel, double> project_newest(const KernelModel& f, double tolerance) {
  if (f.empty()) throw std::invalid_argument("project_newest: empty model");
  if (!(tolerance >= 0.0)) throw std::invalid_argument("project_newest: bad tolerance");
  if (f.size() == 1) return {f, 0.0};  // no span to fold onto

  std::size_t cand = 0;
  for (std::size_t i = 1; i < f.size(); ++i) {
    if (f.support(cand).birth < f.support(i).birth ||
        (f.support(cand).birth == f.support(i).birth && cand < i))
      cand = i;
  }
  const double alpha = f.coeff(cand);
  const std::size_t n = f.size() - 1;

  std::vector<std::size_t> basis;
  basis.reserve(n);
  for (std::size_t i = 0; i < f.size(); ++i)
    if (i != cand) basis.push_back(i);

  const KernelSpec& spec = f.kernel();
  double kss = kernel_eval(spec, f.point(cand), f.point(cand));

  std::vector<double> gram(n * n);
  std::vector<double> beta(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double v = kernel_eval(spec, f.point(basis[i]), f.point(basis[j]));
      gram[i * n + j] = v;
      gram[j * n + i] = v;
    }
    gram[i * n + i] += kGramJitter;
    beta[i] = kernel_eval(spec, f.point(basis[i]), f.point(cand));
  }
  std::vector<double> kcol = beta;
  if (n > 0 && !spd_solve(gram, beta, n)) return {f, 0.0};  // decline, keep f

  double r2 = kss;
  for (std::size_t i = 0; i < n; ++i) r2 -= kcol[i] * beta[i];
  if (r2 < 0.0) r2 = 0.0;
  double err = std::abs(alpha) * std::sqrt(r2);
  if (err > tolerance) return {f, 0.0};

  KernelModel out(spec);
  for (std::size_t i = 0; i < n; ++i)
    out.add(f.support(basis[i]), f.coeff(basis[i]) + alpha * beta[i]);
  return {std::move(out), err};
}

UpdateOutcome update_with_compression(const KernelModel& f, std::span<const double> x,
                                      double y, const LearnerParams& params,
                                      const LossSpec& loss, Birth birth) {
  UpdateOutcome step = kernel_sgd_update(f, x, y, params, loss, birth);
  double eps = 0.0;
  switch (params.compression.kind) {
    case CompressionKind::none:
      return step;
    case CompressionKind::truncate: {
      auto [trimmed, e] = truncate(step.model, params.compression.budget);
      step.model = std::move(trimmed);
      eps = e;
      break;
    }
    case CompressionKind::project: {
      // only a freshly appended support is a fold candidate
      if (step.added_sv) {
        auto [folded, e] = project_newest(step.model, params.compression.tolerance);
        step.model = std::move(folded);
        eps = e;
      }
      break;
    }
  }
  step.compression_error = eps;
  step.drift = std::sqrt(diff_norm_sq(f, step.model));
  return step;
}

LinearUpdateOutcome linear_sgd_update(const LinearModel& w, std::span<const double> x,
                                      double y, const LearnerParams& params,
                                      const LossSpec& loss) {
  params.validate();
  validate_label(loss.kind, y);
  if (x.size() != w.dim())
    throw std::invalid_argument("linear update: dimension mismatch");

  double pred = predict(w, x);
  double loss_before = loss_value(loss.kind, pred, y);
  double g = loss_subgradient(loss.kind, pred, y);

  LinearModel next = w;
  double scale = 1.0 - params.learn_rate * params.reg;
  double drift2 = 0.0;
  for (std::size_t i = 0; i < next.weights.size(); ++i) {
    double v = scale * next.weights[i] - params.learn_rate * g * x[i];
    double d = v - w.weights[i];
    drift2 += d * d;
    next.weights[i] = v;
  }
  return {std::move(next), pred, loss_before, std::sqrt(drift2)};
}

}  // namespace driftsync
