#include "aoicache/replay_buffer.hpp"

#include "aoicache/errors.hpp"

namespace aoicache {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : storage_(capacity) {
  if (capacity == 0) throw ContractViolation("ReplayBuffer: capacity must be >= 1");
}

void ReplayBuffer::push(Transition transition) {
  storage_[cursor_] = std::move(transition);
  cursor_ = (cursor_ + 1) % storage_.size();
  if (size_ < storage_.size()) ++size_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= size_) throw ContractViolation("ReplayBuffer::at: index out of range");
  const std::size_t oldest = size_ < storage_.size() ? 0 : cursor_;
  return storage_[(oldest + i) % storage_.size()];
}

std::optional<std::vector<std::size_t>> ReplayBuffer::sample_indices(
    std::size_t batch_size, Rng& rng) const {
  if (batch_size == 0 || size_ < batch_size) return std::nullopt;
  std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
  std::vector<std::size_t> idx(batch_size);
  for (auto& i : idx) i = pick(rng);
  return idx;
}

std::optional<std::vector<Transition>> ReplayBuffer::sample_batch(
    std::size_t batch_size, Rng& rng) const {
  auto idx = sample_indices(batch_size, rng);
  if (!idx) return std::nullopt;
  std::vector<Transition> batch;
  batch.reserve(idx->size());
  for (std::size_t i : *idx) batch.push_back(at(i));
  return batch;
}

}  // namespace aoicache
