#pragma once

namespace driftsync {

enum class LossKind { hinge, squared };

struct LossSpec {
  LossKind kind = LossKind::hinge;
};

// hinge labels must be exactly -1 or +1; throws otherwise
void validate_label(LossKind kind, double y);

// hinge: max(0, 1 - y*p). squared: (p - y)^2.
double loss_value(LossKind kind, double prediction, double y);

// d loss / d prediction. Hinge at the kink (loss == 0 boundary) is 0,
// so a margin-meeting example leaves the model untouched.
double loss_subgradient(LossKind kind, double prediction, double y);

}  // namespace driftsync
