#pragma once

#include <span>
#include <utility>

#include "driftsync/linear.hpp"
#include "driftsync/loss.hpp"
#include "driftsync/model.hpp"
#include "driftsync/rkhs.hpp"

namespace driftsync {

enum class CompressionKind { none, truncate, project };

struct CompressionSpec {
  CompressionKind kind = CompressionKind::none;
  int budget = 0;          // truncate: keep at most this many supports, >= 1
  double tolerance = 0.0;  // project: fold only when the error is <= this

  void validate() const;
};

struct LearnerParams {
  double learn_rate = 0.5;  // >= 0, finite
  double reg = 0.0;         // >= 0, finite
  CompressionSpec compression;

  void validate() const;
};

struct UpdateOutcome {
  KernelModel model;
  double prediction = 0.0;        // pre-update f(x)
  double loss = 0.0;              // pre-update (prequential) loss
  double drift = 0.0;             // ||f_before - f_after|| in the RKHS
  bool added_sv = false;          // support count grew before compression
  double compression_error = 0.0; // ||uncompressed - compressed||
};

struct LinearUpdateOutcome {
  LinearModel model;
  double prediction = 0.0;
  double loss = 0.0;
  double drift = 0.0;
};

/**
 * Regularised kernel subgradient step: scale all coefficients by
 * (1 - learn_rate*reg), then, when the subgradient g at the pre-update
 * prediction is nonzero, append x with coefficient -learn_rate*g.
 * A zero coefficient is never appended. No compression here.
 */
UpdateOutcome kernel_sgd_update(const KernelModel& f, std::span<const double> x,
                                double y, const LearnerParams& params,
                                const LossSpec& loss, Birth birth);

// Drop the oldest supports (by birth tag, stored position breaking ties)
// until at most budget remain; stored order of survivors is preserved.
// Returns the trimmed model and the exact norm of the dropped component.
std::pair<KernelModel, double> truncate(const KernelModel& f, int budget);

/**
 * Try to fold the newest support s onto the span of the others: solve
 * (K_B + 1e-10 I) beta = k_B(s), residual r2 = k(s,s) - k_B(s)'beta
 * (clamped >= 0). When |coeff(s)|*sqrt(r2) <= tolerance the fold is
 * applied and that value is returned as the error; otherwise f is
 * returned unchanged with error 0.
 */
std::pair<KernelModel, double> project_newest(const KernelModel& f, double tolerance);

// The subgradient step followed by the configured compression. Loss and
// added_sv come from the step; drift spans the whole transition.
UpdateOutcome update_with_compression(const KernelModel& f, std::span<const double> x,
                                      double y, const LearnerParams& params,
                                      const LossSpec& loss, Birth birth);

LinearUpdateOutcome linear_sgd_update(const LinearModel& w, std::span<const double> x,
                                      double y, const LearnerParams& params,
                                      const LossSpec& loss);

}  // namespace driftsync
