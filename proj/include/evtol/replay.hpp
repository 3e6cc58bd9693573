#pragma once

#include <cstddef>
#include <random>
#include <vector>

namespace evtol::dqn {

struct Transition {
  std::vector<double> observation;
  int action = 0;
  double reward = 0.0;
  std::vector<double> next_observation;
  std::vector<bool> next_mask;  // feasible actions in the next state; empty = all
  bool done = false;
};

/// Fixed-capacity ring buffer; the oldest transition is evicted first.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  /// Entry i in insertion order, 0 = oldest retained.
  const Transition& at(std::size_t i) const;

  /// `count` distinct entries drawn uniformly; requires count <= size().
  std::vector<const Transition*> sample(std::size_t count, std::mt19937_64& rng) const;

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // slot the next push overwrites once full
  std::vector<Transition> entries_;
};

}  // namespace evtol::dqn
