#include "driftsync/rkhs.hpp"

#include <cassert>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace driftsync {

namespace {

void require_compatible(const KernelModel& f, const KernelModel& g) {
  if (!(f.kernel() == g.kernel()))
    throw std::invalid_argument("rkhs: kernel specs differ");
  if (!f.empty() && !g.empty() && f.dim() != g.dim())
    throw std::invalid_argument("rkhs: dimension mismatch");
}

// work threshold below which the OpenMP fork costs more than it saves
constexpr std::size_t kParallelCutoff = 4096;

}  // namespace

double predict(const KernelModel& f, std::span<const double> x) {
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    acc += f.coeff(i) * kernel_eval(f.kernel(), f.point(i), x);
  return acc;
}

double inner_product(const KernelModel& f, const KernelModel& g) {
  require_compatible(f, g);
  const std::size_t n = f.size(), m = g.size();
  if (n == 0 || m == 0) return 0.0;
  const KernelSpec& spec = f.kernel();
  std::vector<double> row(n);
  const bool par = n * m >= kParallelCutoff;
#pragma omp parallel for schedule(static) if (par)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j)
      acc += g.coeff(j) * kernel_eval(spec, f.point(i), g.point(j));
    row[i] = acc;
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += f.coeff(i) * row[i];
  return total;
}

double norm_sq(const KernelModel& f) { return inner_product(f, f); }

double distance_sq(const KernelModel& f, const KernelModel& g) {
  double d = norm_sq(f) + norm_sq(g) - 2.0 * inner_product(f, g);
  return d < 0.0 ? 0.0 : d;
}

KernelModel difference(const KernelModel& f, const KernelModel& g) {
  require_compatible(f, g);
  KernelModel out(f.kernel());
  for (std::size_t i = 0; i < f.size(); ++i) out.add(f.support(i), f.coeff(i));
  for (std::size_t i = 0; i < g.size(); ++i) out.add(g.support(i), -g.coeff(i));
  return out.compact();
}

double diff_norm_sq(const KernelModel& f, const KernelModel& g) {
  double d = norm_sq(difference(f, g));
  return d < 0.0 ? 0.0 : d;
}

KernelModel average(const ModelConfiguration& config) {
  config.validate();
  const double m = static_cast<double>(config.learners());
  KernelModel out(config.models.front().kernel());
  for (const KernelModel& f : config.models)
    for (std::size_t i = 0; i < f.size(); ++i) out.add(f.support(i), f.coeff(i));
  for (std::size_t i = 0; i < out.size(); ++i) out.set_coeff(i, out.coeff(i) / m);
  return out;
}

double divergence(const ModelConfiguration& config) {
  KernelModel mean = average(config);
  double acc = 0.0;
  for (const KernelModel& f : config.models) acc += distance_sq(f, mean);
  return acc / static_cast<double>(config.learners());
}

}  // namespace driftsync
