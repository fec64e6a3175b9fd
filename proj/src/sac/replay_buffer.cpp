#include "rispoison/sac/replay_buffer.hpp"

#include <algorithm>

#include "rispoison/errors.hpp"

namespace rispoison::sac {

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::size_t obs_dim, std::size_t act_dim)
    : capacity_(capacity),
      obs_dim_(obs_dim),
      act_dim_(act_dim),
      obs_(capacity, obs_dim),
      action_(capacity, act_dim),
      reward_(capacity, 1),
      next_obs_(capacity, obs_dim) {
  if (capacity == 0) throw ConfigError("ReplayBuffer: capacity must be positive");
}

void ReplayBuffer::push(std::span<const double> obs, std::span<const double> action,
                        double reward, std::span<const double> next_obs) {
  if (obs.size() != obs_dim_ || next_obs.size() != obs_dim_ || action.size() != act_dim_) {
    throw ConfigError("ReplayBuffer::push: transition dimensions do not match buffer");
  }
  std::copy(obs.begin(), obs.end(), obs_.data().begin() + head_ * obs_dim_);
  std::copy(action.begin(), action.end(), action_.data().begin() + head_ * act_dim_);
  reward_[head_] = reward;
  std::copy(next_obs.begin(), next_obs.end(), next_obs_.data().begin() + head_ * obs_dim_);
  head_ = (head_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
}

Batch ReplayBuffer::sample(std::mt19937_64& rng, std::size_t batch_size) const {
  if (size_ == 0) throw UsageError("ReplayBuffer::sample: buffer is empty");
  Batch b{nn::Array2(batch_size, obs_dim_), nn::Array2(batch_size, act_dim_),
          nn::Array2(batch_size, 1), nn::Array2(batch_size, obs_dim_)};
  std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
  for (std::size_t i = 0; i < batch_size; ++i) {
    const std::size_t j = pick(rng);
    std::copy_n(obs_.data().begin() + j * obs_dim_, obs_dim_, b.obs.data().begin() + i * obs_dim_);
    std::copy_n(action_.data().begin() + j * act_dim_, act_dim_,
                b.action.data().begin() + i * act_dim_);
    b.reward[i] = reward_[j];
    std::copy_n(next_obs_.data().begin() + j * obs_dim_, obs_dim_,
                b.next_obs.data().begin() + i * obs_dim_);
  }
  return b;
}

double ReplayBuffer::reward_at(std::size_t i) const {
  if (i >= size_) throw UsageError("ReplayBuffer::reward_at: index out of range");
  const std::size_t oldest = size_ < capacity_ ? 0 : head_;
  return reward_[(oldest + i) % capacity_];
}

}  // namespace rispoison::sac
