// Independent dense reimplementations used as oracles. Everything here
// works on flat (point, coefficient) lists and Eigen dense algebra, with
// no support-set merging and none of the library's reduction orderings,
// so agreement with the sparse code is evidence, not tautology.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "driftsync/model.hpp"
#include "driftsync/rng.hpp"

namespace oracle {

struct Term {
  std::vector<double> x;
  double a = 0.0;
};
using Expansion = std::vector<Term>;

inline double kernel_scalar(const driftsync::KernelSpec& spec,
                            const std::vector<double>& x,
                            const std::vector<double>& y) {
  double dot = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    dot += x[i] * y[i];
    const double d = x[i] - y[i];
    sq += d * d;
  }
  switch (spec.kind) {
    case driftsync::KernelKind::gaussian:
      return std::exp(-sq / (2.0 * spec.bandwidth * spec.bandwidth));
    case driftsync::KernelKind::linear:
      return dot;
    case driftsync::KernelKind::polynomial:
      return std::pow(dot + spec.offset, spec.degree);
  }
  return 0.0;
}

inline Expansion flatten(const driftsync::KernelModel& f) {
  Expansion e;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto p = f.point(i);
    e.push_back({std::vector<double>(p.begin(), p.end()), f.coeff(i)});
  }
  return e;
}

inline Eigen::MatrixXd gram(const driftsync::KernelSpec& spec,
                            const Expansion& e) {
  const Eigen::Index n = static_cast<Eigen::Index>(e.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      k(i, j) = kernel_scalar(spec, e[i].x, e[j].x);
  return k;
}

inline double quadratic_norm_sq(const driftsync::KernelSpec& spec,
                                const Expansion& e) {
  const Eigen::Index n = static_cast<Eigen::Index>(e.size());
  Eigen::VectorXd c(n);
  for (Eigen::Index i = 0; i < n; ++i) c(i) = e[i].a;
  return n == 0 ? 0.0 : c.dot(gram(spec, e) * c);
}

inline double inner(const driftsync::KernelSpec& spec, const Expansion& f,
                    const Expansion& g) {
  double total = 0.0;
  for (const Term& a : f)
    for (const Term& b : g) total += a.a * b.a * kernel_scalar(spec, a.x, b.x);
  return total;
}

inline double predict(const driftsync::KernelSpec& spec, const Expansion& f,
                      const std::vector<double>& x) {
  double total = 0.0;
  for (const Term& t : f) total += t.a * kernel_scalar(spec, t.x, x);
  return total;
}

// ||f - g||^2 as one dense quadratic form over the concatenation
inline double dist_sq(const driftsync::KernelSpec& spec, Expansion f,
                      const Expansion& g) {
  for (Term t : g) {
    t.a = -t.a;
    f.push_back(std::move(t));
  }
  return quadratic_norm_sq(spec, f);
}

// mean squared distance to the flat per-term mean; no union-set logic
inline double divergence(const driftsync::KernelSpec& spec,
                         const std::vector<Expansion>& models) {
  const double m = static_cast<double>(models.size());
  Expansion mean;
  for (const Expansion& f : models)
    for (Term t : f) {
      t.a /= m;
      mean.push_back(std::move(t));
    }
  double total = 0.0;
  for (const Expansion& f : models) total += dist_sq(spec, f, mean);
  return total / m;
}

inline double min_eigenvalue(const Eigen::MatrixXd& k) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
  return es.eigenvalues().minCoeff();
}

// the projection system, solved densely: (K_B + jitter I) beta = k_B(s)
inline std::pair<Eigen::VectorXd, double> project_system(
    const driftsync::KernelSpec& spec, const Expansion& basis,
    const std::vector<double>& s, double jitter) {
  const Eigen::Index n = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXd k = gram(spec, basis);
  for (Eigen::Index i = 0; i < n; ++i) k(i, i) += jitter;
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) rhs(i) = kernel_scalar(spec, basis[i].x, s);
  Eigen::VectorXd beta = Eigen::LDLT<Eigen::MatrixXd>(k).solve(rhs);
  double r2 = kernel_scalar(spec, s, s) - rhs.dot(beta);
  if (r2 < 0.0) r2 = 0.0;
  return {beta, r2};
}

inline std::vector<double> random_point(driftsync::Rng& rng, int d,
                                        double lo = -1.0, double hi = 1.0) {
  std::vector<double> x(d);
  for (double& v : x) v = rng.uniform(lo, hi);
  return x;
}

inline driftsync::KernelModel random_model(driftsync::Rng& rng,
                                           const driftsync::KernelSpec& spec,
                                           int n, int d, int learner = 0) {
  driftsync::KernelModel f{spec};
  for (int i = 0; i < n; ++i)
    f.add({random_point(rng, d), driftsync::Birth{i + 1, learner}},
          rng.uniform(-1.0, 1.0));
  return f;
}

}  // namespace oracle
