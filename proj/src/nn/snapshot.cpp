#include "mtrl/nn/snapshot.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <system_error>

namespace mtrl::nn {

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw std::runtime_error("cannot format number");
  return std::string(buf, end);
}

double parse_double(std::string_view token) {
  double v = 0.0;
  auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc{} || end != token.data() + token.size()) {
    throw std::runtime_error("malformed number '" + std::string(token) + "'");
  }
  return v;
}

std::string expect_token(std::istream& is, std::string_view expected, std::string_view what) {
  std::string tok;
  if (!(is >> tok)) throw std::runtime_error("snapshot truncated while reading " + std::string(what));
  if (!expected.empty() && tok != expected) {
    throw std::runtime_error("snapshot: expected '" + std::string(expected) + "' for " +
                             std::string(what) + ", found '" + tok + "'");
  }
  return tok;
}

namespace {

long parse_count(std::istream& is, std::string_view what) {
  const std::string tok = expect_token(is, {}, what);
  long v = 0;
  auto [end, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || end != tok.data() + tok.size() || v < 0) {
    throw std::runtime_error("snapshot: bad integer '" + tok + "' for " + std::string(what));
  }
  return v;
}

}  // namespace

void write_dense_net(std::ostream& os, const DenseNet& net) {
  os << "dense_net 1\n";
  os << "input " << net.input_dim() << " layers " << net.layer_count() << "\n";
  for (const auto& l : net.layers()) {
    os << "layer " << l.weight.rows() << ' ' << l.weight.cols() << ' ' << to_string(l.activation)
       << '\n';
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) {
        if (c) os << ' ';
        os << format_double(l.weight(r, c));
      }
      os << '\n';
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) {
      if (r) os << ' ';
      os << format_double(l.bias(r));
    }
    os << '\n';
  }
  os << "end\n";
}

DenseNet read_dense_net(std::istream& is) {
  expect_token(is, "dense_net", "header");
  expect_token(is, "1", "format version");
  expect_token(is, "input", "input keyword");
  const long input = parse_count(is, "input width");
  expect_token(is, "layers", "layers keyword");
  const long count = parse_count(is, "layer count");
  std::vector<Layer> layers;
  for (long i = 0; i < count; ++i) {
    expect_token(is, "layer", "layer keyword");
    const long rows = parse_count(is, "layer rows");
    const long cols = parse_count(is, "layer cols");
    Layer l;
    l.activation = activation_from_string(expect_token(is, {}, "activation"));
    l.weight.resize(rows, cols);
    l.bias.resize(rows);
    for (long r = 0; r < rows; ++r) {
      for (long c = 0; c < cols; ++c) l.weight(r, c) = parse_double(expect_token(is, {}, "weight"));
    }
    for (long r = 0; r < rows; ++r) l.bias(r) = parse_double(expect_token(is, {}, "bias"));
    layers.push_back(std::move(l));
  }
  expect_token(is, "end", "terminator");
  return DenseNet(input, std::move(layers));
}

void save_dense_net(const std::filesystem::path& path, const DenseNet& net) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  write_dense_net(os, net);
}

DenseNet load_dense_net(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  return read_dense_net(is);
}

}  // namespace mtrl::nn
