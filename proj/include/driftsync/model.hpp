#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "driftsync/kernel.hpp"

namespace driftsync {

// Identity tag of a support vector: (round, learner). Orders truncation,
// oldest first. When bitwise-equal points merge, the smaller tag survives.
struct Birth {
  std::int64_t round = 0;
  std::int32_t learner = 0;
  friend auto operator<=>(const Birth&, const Birth&) = default;
};

struct SupportVector {
  std::vector<double> point;
  Birth birth;
};

// Bitwise identity of a point. This is what "the same support vector"
// means everywhere: -0.0 and +0.0 are different points.
struct PointKey {
  std::vector<std::uint64_t> bits;
  PointKey() = default;
  explicit PointKey(std::span<const double> p);
  friend bool operator==(const PointKey&, const PointKey&) = default;
};

struct PointKeyHash {
  std::size_t operator()(const PointKey& k) const noexcept;
};

using SupportSet = std::unordered_set<PointKey, PointKeyHash>;

/**
 * Sparse kernel expansion f(.) = sum_s coeff_s k(point_s, .).
 *
 * Entries with bitwise-identical points are merged on insertion by summing
 * coefficients; exact-zero coefficients are kept (compact() drops them).
 * Stored order is the summation order of every reduction over the model,
 * so it is part of observable behaviour and is never silently permuted.
 */
class KernelModel {
 public:
  explicit KernelModel(KernelSpec spec);

  const KernelSpec& kernel() const { return spec_; }
  std::size_t size() const { return supports_.size(); }
  bool empty() const { return supports_.empty(); }
  std::size_t dim() const { return dim_; }  // 0 until the first insertion

  const SupportVector& support(std::size_t i) const { return supports_[i]; }
  std::span<const double> point(std::size_t i) const { return supports_[i].point; }
  double coeff(std::size_t i) const { return coeffs_[i]; }
  std::span<const double> coeffs() const { return coeffs_; }

  std::optional<std::size_t> find(std::span<const double> point) const;
  bool contains(const PointKey& key) const { return index_.contains(key); }

  // Merge-aware insertion; returns true when a new entry was created.
  // Point dimension must match existing entries; values must be finite.
  bool add(SupportVector sv, double coeff);

  void scale(double factor);
  void set_coeff(std::size_t i, double v) { coeffs_[i] = v; }

  // copy without exact-zero coefficients; never applied implicitly
  KernelModel compact() const;

  SupportSet support_set() const;

 private:
  KernelSpec spec_;
  std::size_t dim_ = 0;
  std::vector<SupportVector> supports_;
  std::vector<double> coeffs_;
  std::unordered_map<PointKey, std::size_t, PointKeyHash> index_;
};

/**
 * The m local models of one protocol run. All entries must share one
 * kernel spec; operations over the configuration iterate learners in
 * stored order, which fixes every floating-point reduction.
 */
struct ModelConfiguration {
  std::vector<KernelModel> models;

  std::size_t learners() const { return models.size(); }
  void validate() const;  // nonempty, identical kernel specs
};

}  // namespace driftsync
