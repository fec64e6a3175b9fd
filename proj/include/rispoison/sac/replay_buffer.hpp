#pragma once

#include <cstddef>
#include <random>
#include <span>

#include "rispoison/nn/array2.hpp"

namespace rispoison::sac {

/// Stacked mini-batch, one transition per row. `reward` is M x 1.
struct Batch {
  nn::Array2 obs;
  nn::Array2 action;
  nn::Array2 reward;
  nn::Array2 next_obs;
};

/// Fixed-capacity FIFO of (s, a, r, s') transitions. There is no done flag:
/// the task is continuing.
class ReplayBuffer {
 public:
  ReplayBuffer() = default;
  ReplayBuffer(std::size_t capacity, std::size_t obs_dim, std::size_t act_dim);

  /// Overwrites the oldest entry once full.
  void push(std::span<const double> obs, std::span<const double> action, double reward,
            std::span<const double> next_obs);

  /// Uniform with replacement over current contents. Throws UsageError when empty.
  Batch sample(std::mt19937_64& rng, std::size_t batch_size) const;

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  /// Reward stored at logical index i (0 = oldest).
  double reward_at(std::size_t i) const;

  friend bool operator==(const ReplayBuffer&, const ReplayBuffer&) = default;

 private:
  std::size_t capacity_ = 0;
  std::size_t obs_dim_ = 0;
  std::size_t act_dim_ = 0;
  std::size_t size_ = 0;
  std::size_t head_ = 0;  // next slot to write
  nn::Array2 obs_;
  nn::Array2 action_;
  nn::Array2 reward_;
  nn::Array2 next_obs_;
};

}  // namespace rispoison::sac
