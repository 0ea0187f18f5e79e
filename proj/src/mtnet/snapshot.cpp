#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "mtrl/mtnet/multitask_network.hpp"
#include "mtrl/nn/snapshot.hpp"

// Layout:
//   multitask_net 1
//   tasks <T> extra <E> frozen <0|1>
//   section input_block <t>   (T times, followed by a dense_net record)
//   section shared            (dense_net record)
//   section head <t>          (T times)
//   end

namespace mtrl::mtnet {

void write_multitask_network(std::ostream& os, const MultiTaskNetwork& net) {
  os << "multitask_net 1\n";
  os << "tasks " << net.task_count() << " extra " << net.extra_dim() << " frozen "
     << (net.shared_frozen() ? 1 : 0) << "\n";
  for (std::size_t t = 0; t < net.task_count(); ++t) {
    os << "section input_block " << t << "\n";
    nn::write_dense_net(os, net.input_block(t));
  }
  os << "section shared\n";
  nn::write_dense_net(os, net.shared());
  for (std::size_t t = 0; t < net.task_count(); ++t) {
    os << "section head " << t << "\n";
    nn::write_dense_net(os, net.head(t));
  }
  os << "end\n";
}

MultiTaskNetwork read_multitask_network(std::istream& is) {
  nn::expect_token(is, "multitask_net", "header");
  nn::expect_token(is, "1", "format version");
  nn::expect_token(is, "tasks", "tasks keyword");
  const std::size_t tasks = std::stoul(nn::expect_token(is, {}, "task count"));
  nn::expect_token(is, "extra", "extra keyword");
  const long extra = std::stol(nn::expect_token(is, {}, "extra width"));
  nn::expect_token(is, "frozen", "frozen keyword");
  const bool frozen = nn::expect_token(is, {}, "frozen flag") == "1";
  std::vector<nn::DenseNet> inputs;
  std::vector<nn::DenseNet> heads;
  for (std::size_t t = 0; t < tasks; ++t) {
    nn::expect_token(is, "section", "section keyword");
    nn::expect_token(is, "input_block", "section tag");
    nn::expect_token(is, std::to_string(t), "section index");
    inputs.push_back(nn::read_dense_net(is));
  }
  nn::expect_token(is, "section", "section keyword");
  nn::expect_token(is, "shared", "section tag");
  nn::DenseNet shared = nn::read_dense_net(is);
  for (std::size_t t = 0; t < tasks; ++t) {
    nn::expect_token(is, "section", "section keyword");
    nn::expect_token(is, "head", "section tag");
    nn::expect_token(is, std::to_string(t), "section index");
    heads.push_back(nn::read_dense_net(is));
  }
  nn::expect_token(is, "end", "terminator");
  MultiTaskNetwork net(std::move(inputs), std::move(shared), std::move(heads), extra);
  net.set_shared_frozen(frozen);
  return net;
}

void save_multitask_network(const std::filesystem::path& path, const MultiTaskNetwork& net) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  write_multitask_network(os, net);
}

MultiTaskNetwork load_multitask_network(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  return read_multitask_network(is);
}

nn::DenseNet load_shared_section(const std::filesystem::path& path) {
  return load_multitask_network(path).shared();
}

}  // namespace mtrl::mtnet
