#include "mtrl/nn/loss.hpp"

#include <cmath>
#include <string>

#include "mtrl/error.hpp"

namespace mtrl::nn {

LossKind loss_kind_from_string(std::string_view name) {
  if (name == "mse") return LossKind::mse;
  if (name == "huber") return LossKind::huber;
  throw ConfigError("unknown loss '" + std::string(name) + "'");
}

std::string_view to_string(LossKind kind) {
  return kind == LossKind::huber ? "huber" : "mse";
}

LossValue loss_eval(const LossSpec& spec, double pred, double target) {
  if (!std::isfinite(pred) || !std::isfinite(target)) {
    throw NonFiniteError("loss evaluated on non-finite input");
  }
  const double e = pred - target;
  LossValue out;
  if (spec.kind == LossKind::mse) {
    out = {e * e, 2.0 * e};
  } else {
    const double d = spec.huber_delta;
    if (!(d > 0.0)) throw ConfigError("huber delta must be > 0");
    const double a = std::abs(e);
    if (a <= d) {
      out = {0.5 * e * e, e};
    } else {
      out = {d * (a - 0.5 * d), e > 0.0 ? d : -d};
    }
  }
  if (spec.max_value) {
    if (!(*spec.max_value > 0.0)) throw ConfigError("loss scale must be > 0");
    out.value /= *spec.max_value;
    out.derivative /= *spec.max_value;
  }
  return out;
}

}  // namespace mtrl::nn
