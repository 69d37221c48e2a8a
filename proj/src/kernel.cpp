#include "driftsync/kernel.hpp"

#include <cmath>
#include <stdexcept>

namespace driftsync {

KernelSpec KernelSpec::gaussian(double bandwidth) {
  KernelSpec s;
  s.kind = KernelKind::gaussian;
  s.bandwidth = bandwidth;
  s.validate();
  return s;
}

KernelSpec KernelSpec::linear() {
  KernelSpec s;
  s.kind = KernelKind::linear;
  return s;
}

KernelSpec KernelSpec::polynomial(int degree, double offset) {
  KernelSpec s;
  s.kind = KernelKind::polynomial;
  s.degree = degree;
  s.offset = offset;
  s.validate();
  return s;
}

void KernelSpec::validate() const {
  switch (kind) {
    case KernelKind::gaussian:
      if (!(bandwidth > 0.0) || !std::isfinite(bandwidth))
        throw std::invalid_argument("kernel: bandwidth must be positive and finite");
      break;
    case KernelKind::linear:
      break;
    case KernelKind::polynomial:
      if (degree < 1) throw std::invalid_argument("kernel: degree must be >= 1");
      if (!(offset >= 0.0) || !std::isfinite(offset))
        throw std::invalid_argument("kernel: offset must be >= 0 and finite");
      break;
  }
}

std::string to_string(const KernelSpec& spec) {
  switch (spec.kind) {
    case KernelKind::gaussian:
      return "gaussian(" + std::to_string(spec.bandwidth) + ")";
    case KernelKind::linear:
      return "linear";
    case KernelKind::polynomial:
      return "polynomial(" + std::to_string(spec.degree) + "," +
             std::to_string(spec.offset) + ")";
  }
  return "?";
}

namespace {

double dot(std::span<const double> x, std::span<const double> y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  return acc;
}

}  // namespace

double kernel_eval(const KernelSpec& spec, std::span<const double> x,
                   std::span<const double> y) {
  if (x.size() != y.size())
    throw std::invalid_argument("kernel_eval: dimension mismatch");
  switch (spec.kind) {
    case KernelKind::gaussian: {
      double sq = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        double d = x[i] - y[i];
        sq += d * d;
      }
      return std::exp(-sq / (2.0 * spec.bandwidth * spec.bandwidth));
    }
    case KernelKind::linear:
      return dot(x, y);
    case KernelKind::polynomial: {
      double base = dot(x, y) + spec.offset;
      double acc = 1.0;
      for (int i = 0; i < spec.degree; ++i) acc *= base;
      return acc;
    }
  }
  throw std::logic_error("kernel_eval: unknown kind");
}

}  // namespace driftsync
