#include "mtrl/replay/replay_memory.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "mtrl/error.hpp"
#include "mtrl/nn/snapshot.hpp"

namespace mtrl::replay {

ReplayMemory::ReplayMemory(std::size_t task, std::size_t capacity, std::size_t warmup)
    : task_(task), warmup_(warmup), buffer_(capacity) {
  if (capacity == 0) throw ConfigError("replay capacity must be positive");
  if (warmup > capacity) throw ConfigError("replay warm-up exceeds capacity");
}

void ReplayMemory::push(Transition t) {
  if (t.task != task_) {
    throw std::invalid_argument("transition of task " + std::to_string(t.task) +
                                " pushed to the memory of task " + std::to_string(task_));
  }
  if (size_ < buffer_.size()) {
    buffer_[(head_ + size_) % buffer_.size()] = std::move(t);
    ++size_;
  } else {
    buffer_[head_] = std::move(t);
    head_ = (head_ + 1) % buffer_.size();
  }
}

const Transition& ReplayMemory::at(std::size_t i) const {
  if (i >= size_) throw std::out_of_range("replay index out of range");
  return buffer_[(head_ + i) % buffer_.size()];
}

std::vector<std::vector<const Transition*>> sample_multitask(std::span<const ReplayMemory> mems,
                                                             std::size_t per_task,
                                                             std::mt19937_64& rng) {
  for (const auto& m : mems) {
    if (!m.ready()) {
      throw NotReady("memory of task " + std::to_string(m.task()) + " holds " +
                     std::to_string(m.size()) + " transitions, warm-up is " +
                     std::to_string(m.warmup()));
    }
  }
  std::vector<std::vector<const Transition*>> batch(mems.size());
  for (std::size_t t = 0; t < mems.size(); ++t) {
    std::uniform_int_distribution<std::size_t> pick(0, mems[t].size() - 1);
    batch[t].reserve(per_task);
    for (std::size_t i = 0; i < per_task; ++i) batch[t].push_back(&mems[t].at(pick(rng)));
  }
  return batch;
}

namespace {

void write_vector(std::ostream& os, const envs::Vector& v) {
  os << ' ' << v.size();
  for (Eigen::Index i = 0; i < v.size(); ++i) os << ' ' << nn::format_double(v(i));
}

envs::Vector read_vector(std::istream& is) {
  const long n = std::stol(nn::expect_token(is, {}, "vector length"));
  envs::Vector v(n);
  for (long i = 0; i < n; ++i) v(i) = nn::parse_double(nn::expect_token(is, {}, "vector entry"));
  return v;
}

}  // namespace

void write_transition_log(std::ostream& os, std::span<const Transition> transitions) {
  for (const auto& t : transitions) {
    os << t.task << ' ' << t.action.index;
    write_vector(os, t.action.value);
    os << ' ' << nn::format_double(t.reward) << ' ' << (t.absorbing ? 1 : 0) << ' '
       << (t.truncated ? 1 : 0);
    write_vector(os, t.state);
    write_vector(os, t.next_state);
    os << '\n';
  }
}

std::vector<Transition> read_transition_log(std::istream& is) {
  std::vector<Transition> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    Transition t;
    t.task = std::stoul(nn::expect_token(ls, {}, "task"));
    t.action.index = std::stoi(nn::expect_token(ls, {}, "action index"));
    t.action.value = read_vector(ls);
    t.reward = nn::parse_double(nn::expect_token(ls, {}, "reward"));
    t.absorbing = nn::expect_token(ls, {}, "absorbing") == "1";
    t.truncated = nn::expect_token(ls, {}, "truncated") == "1";
    t.state = read_vector(ls);
    t.next_state = read_vector(ls);
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace mtrl::replay
