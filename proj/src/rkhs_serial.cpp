#include "driftsync/rkhs.hpp"

#include <stdexcept>
#include <vector>

// Plain single-threaded reference path. Deliberately written as
// straightforward loops (no pragmas, no shared helpers) with the same
// row-factored grouping, so any divergence from the parallel kernels is
// a bug one of the two sides has to own.

namespace driftsync::serial {

double inner_product(const KernelModel& f, const KernelModel& g) {
  if (!(f.kernel() == g.kernel()))
    throw std::invalid_argument("rkhs: kernel specs differ");
  if (!f.empty() && !g.empty() && f.dim() != g.dim())
    throw std::invalid_argument("rkhs: dimension mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j)
      row += g.coeff(j) * kernel_eval(f.kernel(), f.point(i), g.point(j));
    total += f.coeff(i) * row;
  }
  return total;
}

double norm_sq(const KernelModel& f) { return serial::inner_product(f, f); }

double distance_sq(const KernelModel& f, const KernelModel& g) {
  double d = serial::norm_sq(f) + serial::norm_sq(g) - 2.0 * serial::inner_product(f, g);
  return d < 0.0 ? 0.0 : d;
}

double diff_norm_sq(const KernelModel& f, const KernelModel& g) {
  double d = serial::norm_sq(difference(f, g));
  return d < 0.0 ? 0.0 : d;
}

double divergence(const ModelConfiguration& config) {
  KernelModel mean = average(config);
  double acc = 0.0;
  for (const KernelModel& f : config.models) acc += serial::distance_sq(f, mean);
  return acc / static_cast<double>(config.learners());
}

}  // namespace driftsync::serial
