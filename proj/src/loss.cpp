#include "driftsync/loss.hpp"

#include <stdexcept>

namespace driftsync {

void validate_label(LossKind kind, double y) {
  if (kind == LossKind::hinge && y != 1.0 && y != -1.0)
    throw std::invalid_argument("loss: hinge labels must be -1 or +1");
}

double loss_value(LossKind kind, double prediction, double y) {
  switch (kind) {
    case LossKind::hinge: {
      double margin = 1.0 - y * prediction;
      return margin > 0.0 ? margin : 0.0;
    }
    case LossKind::squared: {
      double d = prediction - y;
      return d * d;
    }
  }
  throw std::logic_error("loss: unknown kind");
}

double loss_subgradient(LossKind kind, double prediction, double y) {
  switch (kind) {
    case LossKind::hinge:
      return (1.0 - y * prediction) > 0.0 ? -y : 0.0;
    case LossKind::squared:
      return 2.0 * (prediction - y);
  }
  throw std::logic_error("loss: unknown kind");
}

}  // namespace driftsync
