#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <random>
#include <stdexcept>
#include <vector>

#include "graspq/world/types.hpp"

namespace graspq::agent {

/// One experience tuple. Observations are shared between consecutive
/// transitions, so a step's next_obs is the following step's obs.
template <class Obs>
struct BasicTransition {
  std::shared_ptr<const Obs> obs;
  std::size_t action = 0;
  double reward = 0.0;
  std::shared_ptr<const Obs> next_obs;
  bool terminal = false;
};

using Transition = BasicTransition<world::Observation>;

/// Fixed-capacity FIFO; the oldest item is overwritten once full.
template <class T>
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("replay buffer capacity must be positive");
    items_.reserve(capacity);
  }

  void push(T item) {
    if (items_.size() < capacity_) {
      items_.push_back(std::move(item));
    } else {
      items_[next_] = std::move(item);
    }
    next_ = (next_ + 1) % capacity_;
    ++pushed_;
  }

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return items_.empty(); }
  std::uint64_t total_pushed() const { return pushed_; }

  /// i-th oldest held item.
  const T& operator[](std::size_t i) const {
    if (i >= items_.size()) throw std::out_of_range("replay index out of range");
    return items_.size() < capacity_ ? items_[i] : items_[(next_ + i) % capacity_];
  }

  /// Uniform with replacement.
  std::vector<T> sample(std::size_t n, std::mt19937_64& rng) const {
    if (items_.empty()) throw std::logic_error("cannot sample from an empty replay buffer");
    std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
    std::vector<T> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(items_[pick(rng)]);
    return out;
  }

 private:
  std::size_t capacity_;
  std::vector<T> items_;
  std::size_t next_ = 0;
  std::uint64_t pushed_ = 0;
};

}  // namespace graspq::agent
