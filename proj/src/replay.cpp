#include "evtol/replay.hpp"

#include <algorithm>
#include <stdexcept>

namespace evtol::dqn {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw std::invalid_argument("replay buffer capacity must be positive");
  entries_.reserve(std::min<std::size_t>(capacity_, 4096));
}

void ReplayBuffer::push(Transition t) {
  if (entries_.size() < capacity_) {
    entries_.push_back(std::move(t));
    return;
  }
  entries_[head_] = std::move(t);
  head_ = (head_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= entries_.size()) throw std::out_of_range("replay index");
  return entries_[(head_ + i) % entries_.size()];
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t count, std::mt19937_64& rng) const {
  if (count > entries_.size()) throw std::invalid_argument("minibatch larger than buffer");
  std::vector<std::size_t> picked;
  picked.reserve(count);
  while (picked.size() < count) {
    const std::size_t idx = rng() % entries_.size();
    if (std::find(picked.begin(), picked.end(), idx) == picked.end()) picked.push_back(idx);
  }
  std::vector<const Transition*> out;
  out.reserve(count);
  for (auto idx : picked) out.push_back(&entries_[idx]);
  return out;
}

}  // namespace evtol::dqn
