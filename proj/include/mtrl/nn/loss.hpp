#pragma once

#include <optional>
#include <string_view>

namespace mtrl::nn {

enum class LossKind { mse, huber };

LossKind loss_kind_from_string(std::string_view name);
std::string_view to_string(LossKind kind);

struct LossSpec {
  LossKind kind = LossKind::mse;
  double huber_delta = 1.0;
  // When set, value and derivative are divided by this bound so that the
  // loss maps into [0, 1] for errors within the implied range.
  std::optional<double> max_value;
};

struct LossValue {
  double value = 0.0;
  double derivative = 0.0;  // d value / d pred
};

// mse: e^2. huber: e^2/2 for |e| <= delta, delta(|e| - delta/2) beyond.
LossValue loss_eval(const LossSpec& spec, double pred, double target);

}  // namespace mtrl::nn
