#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "mtrl/replay/replay_memory.hpp"

using namespace mtrl;
using namespace mtrl::replay;

namespace {

Transition make(std::size_t task, double tag) {
  Transition t;
  t.task = task;
  t.state = envs::Vector::Constant(2, tag);
  t.action = envs::Action::discrete(1);
  t.reward = tag;
  t.next_state = envs::Vector::Constant(2, tag + 0.5);
  return t;
}

}  // namespace

TEST_CASE("push and FIFO eviction") {
  ReplayMemory mem(0, 5, 2);
  mem.push(make(0, 0));
  CHECK(mem.size() == 1);
  CHECK_FALSE(mem.ready());
  for (int i = 1; i <= 5; ++i) mem.push(make(0, i));
  CHECK(mem.size() == 5);
  CHECK(mem.at(0).reward == 1.0);  // item 0 evicted
  CHECK(mem.at(4).reward == 5.0);
  CHECK(mem.ready());
  CHECK_THROWS_AS(mem.push(make(1, 0)), std::invalid_argument);
  CHECK_THROWS(mem.at(5));
}

TEST_CASE("sampling refuses memories below warm-up") {
  std::vector<ReplayMemory> mems = {ReplayMemory(0, 5000, 100), ReplayMemory(1, 5000, 100)};
  for (int i = 0; i < 100; ++i) mems[0].push(make(0, i));
  for (int i = 0; i < 99; ++i) mems[1].push(make(1, i));
  std::mt19937_64 rng(1);
  CHECK_THROWS_AS(sample_multitask(mems, 100, rng), NotReady);
  mems[1].push(make(1, 99));
  CHECK(sample_multitask(mems, 100, rng).size() == 2);
}

TEST_CASE("equal share per task, deterministic under a fixed seed") {
  std::vector<ReplayMemory> mems;
  for (std::size_t t = 0; t < 5; ++t) {
    mems.emplace_back(t, 5000, 100);
    for (int i = 0; i < 150 + 10 * int(t); ++i) mems.back().push(make(t, i));
  }
  std::mt19937_64 a(3), b(3);
  const auto batch = sample_multitask(mems, 100, a);
  const auto again = sample_multitask(mems, 100, b);
  REQUIRE(batch.size() == 5);
  std::size_t total = 0;
  for (std::size_t t = 0; t < 5; ++t) {
    CHECK(batch[t].size() == 100);
    total += batch[t].size();
    for (std::size_t i = 0; i < 100; ++i) {
      CHECK(batch[t][i]->task == t);
      CHECK(batch[t][i] == again[t][i]);
    }
  }
  CHECK(total == 500);
}

TEST_CASE("single task degenerates to plain sampling") {
  std::vector<ReplayMemory> mems = {ReplayMemory(0, 10, 1)};
  mems[0].push(make(0, 4.0));
  std::mt19937_64 rng(2);
  const auto batch = sample_multitask(mems, 7, rng);
  REQUIRE(batch.size() == 1);
  CHECK(batch[0].size() == 7);
  for (auto* t : batch[0]) CHECK(t->reward == 4.0);
}

TEST_CASE("uniformity over 1e5 draws from 10 elements is within 3 sigma") {
  std::vector<ReplayMemory> mems = {ReplayMemory(0, 10, 10)};
  for (int i = 0; i < 10; ++i) mems[0].push(make(0, i));
  std::mt19937_64 rng(4);
  const int draws = 100000;
  std::vector<int> counts(10, 0);
  const auto batch = sample_multitask(mems, draws, rng);
  for (auto* t : batch[0]) ++counts[static_cast<std::size_t>(t->reward)];
  const double p = 0.1;
  const double sigma = std::sqrt(draws * p * (1.0 - p));
  for (int c : counts) CHECK(std::abs(c - draws * p) <= 3.0 * sigma);
}

TEST_CASE("transition log round trip is exact") {
  std::vector<Transition> ts = {make(0, 0.1), make(3, -2.0 / 3.0)};
  ts[1].absorbing = true;
  ts[0].truncated = true;
  ts[1].action = envs::Action::continuous(envs::Vector::Constant(1, 0.3));
  std::stringstream ss;
  write_transition_log(ss, ts);
  const auto back = read_transition_log(ss);
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back[i].task == ts[i].task);
    CHECK(back[i].state == ts[i].state);
    CHECK(back[i].next_state == ts[i].next_state);
    CHECK(back[i].reward == ts[i].reward);
    CHECK(back[i].absorbing == ts[i].absorbing);
    CHECK(back[i].truncated == ts[i].truncated);
    CHECK(back[i].action.index == ts[i].action.index);
    CHECK(back[i].action.value == ts[i].action.value);
  }
}
