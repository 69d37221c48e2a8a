#pragma once

#include <span>
#include <string>

namespace driftsync {

enum class KernelKind { gaussian, linear, polynomial };

/**
 * Positive semi-definite kernel description. Two models can interact
 * (inner products, averaging) only when their specs compare equal.
 */
struct KernelSpec {
  KernelKind kind = KernelKind::gaussian;
  double bandwidth = 1.0;  // gaussian only, > 0
  int degree = 2;          // polynomial only, >= 1
  double offset = 0.0;     // polynomial only, >= 0 keeps the kernel PSD

  static KernelSpec gaussian(double bandwidth);
  static KernelSpec linear();
  static KernelSpec polynomial(int degree, double offset);

  void validate() const;  // throws std::invalid_argument
  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

std::string to_string(const KernelSpec& spec);

// k(x, y); throws on dimension mismatch or invalid spec
double kernel_eval(const KernelSpec& spec, std::span<const double> x,
                   std::span<const double> y);

}  // namespace driftsync
