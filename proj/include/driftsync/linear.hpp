#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace driftsync {

// Dense linear model; the message size of one of these is a constant of
// the dimension, which is what makes the linear communication path flat.
struct LinearModel {
  std::vector<double> weights;

  static LinearModel zeros(std::size_t dim) { return {std::vector<double>(dim, 0.0)}; }
  std::size_t dim() const { return weights.size(); }
};

inline double predict(const LinearModel& w, std::span<const double> x) {
  double acc = 0.0;
  for (std::size_t i = 0; i < w.weights.size(); ++i) acc += w.weights[i] * x[i];
  return acc;
}

}  // namespace driftsync
