#pragma once

#include <span>

#include "driftsync/model.hpp"

namespace driftsync {

// f(x), summed in stored support order.
double predict(const KernelModel& f, std::span<const double> x);

/**
 * <f, g> in the RKHS of the shared kernel.
 *
 * Row-factored form: for each support i of f a row sum over g's supports
 * runs left to right in stored order, then the row results combine left
 * to right. That fixed grouping is the summation contract; the OpenMP
 * path parallelises over rows only, so it is bit-identical to the serial
 * reference for any thread count.
 */
double inner_product(const KernelModel& f, const KernelModel& g);

double norm_sq(const KernelModel& f);

// <f,f> + <g,g> - 2<f,g>, clamped to >= 0 (tiny negatives are fp noise)
double distance_sq(const KernelModel& f, const KernelModel& g);

// f - g as a model; coefficients of bitwise-shared points are subtracted
// and entries cancelling to exactly 0.0 are dropped
KernelModel difference(const KernelModel& f, const KernelModel& g);

// ||f - g||^2 via the merged difference. Same value as distance_sq up to
// rounding, numerically stabler when f and g share most of their mass,
// and O(k^2) in the number of non-cancelling entries.
double diff_norm_sq(const KernelModel& f, const KernelModel& g);

/**
 * Mean model over the configuration: union support set, coefficient of
 * each point the mean of per-model coefficients (absent entries count 0).
 * Merge order is learner order, then stored order. Exact-zero entries
 * are retained: they still occupy the union for byte accounting.
 */
KernelModel average(const ModelConfiguration& config);

// (1/m) sum_i ||f_i - mean||^2
double divergence(const ModelConfiguration& config);

// Straightforward single-threaded reference implementations with the same
// summation contract. Kept for tests and the benchmark; results must be
// bit-identical to the OpenMP path.
namespace serial {
double inner_product(const KernelModel& f, const KernelModel& g);
double norm_sq(const KernelModel& f);
double distance_sq(const KernelModel& f, const KernelModel& g);
double diff_norm_sq(const KernelModel& f, const KernelModel& g);
double divergence(const ModelConfiguration& config);
}  // namespace serial

}  // namespace driftsync
