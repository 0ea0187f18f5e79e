#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "mtrl/nn/dense_net.hpp"

namespace mtrl::nn {

// Flat text snapshot of a DenseNet:
//
//   dense_net 1
//   input <in> layers <L>
//   layer <out> <in> <activation>
//   <out lines of <in> weights, row-major>
//   <one line of <out> biases>
//   ...
//   end
//
// Numbers are printed in shortest round-trip form, so a write/read cycle is
// bit-exact.
void write_dense_net(std::ostream& os, const DenseNet& net);
DenseNet read_dense_net(std::istream& is);

void save_dense_net(const std::filesystem::path& path, const DenseNet& net);
DenseNet load_dense_net(const std::filesystem::path& path);

std::string format_double(double v);
double parse_double(std::string_view token);

// Reads the next whitespace token and throws std::runtime_error naming
// `what` if it is missing or differs from `expected` (when non-empty).
std::string expect_token(std::istream& is, std::string_view expected, std::string_view what);

}  // namespace mtrl::nn
