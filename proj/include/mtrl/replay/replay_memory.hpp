#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "mtrl/envs/env.hpp"

namespace mtrl::replay {

using envs::Transition;

// Raised when a memory has not reached its warm-up size; callers skip the
// learning step.
class NotReady : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Fixed-capacity FIFO of one task's transitions.
class ReplayMemory {
 public:
  ReplayMemory(std::size_t task, std::size_t capacity, std::size_t warmup);

  void push(Transition t);

  std::size_t task() const { return task_; }
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return buffer_.size(); }
  std::size_t warmup() const { return warmup_; }
  bool ready() const { return size_ >= warmup_ && size_ > 0; }

  // i-th stored transition, oldest first.
  const Transition& at(std::size_t i) const;

 private:
  std::size_t task_;
  std::size_t warmup_;
  std::vector<Transition> buffer_;
  std::size_t head_ = 0;  // slot of the oldest element
  std::size_t size_ = 0;
};

// Exactly `per_task` transitions from every memory, drawn uniformly with
// replacement. result[i] belongs to mems[i]. Throws NotReady if any memory
// is below its warm-up size.
std::vector<std::vector<const Transition*>> sample_multitask(std::span<const ReplayMemory> mems,
                                                             std::size_t per_task,
                                                             std::mt19937_64& rng);

// One transition per line:
//   task a_index a_dim a... r absorbing truncated s_dim s... s'...
void write_transition_log(std::ostream& os, std::span<const Transition> transitions);
std::vector<Transition> read_transition_log(std::istream& is);

}  // namespace mtrl::replay
