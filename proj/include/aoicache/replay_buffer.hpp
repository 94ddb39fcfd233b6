#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "aoicache/env.hpp"
#include "aoicache/rng.hpp"

namespace aoicache {

struct Transition {
  MdpState state;
  int action = 0;
  MdpState next_state;
  double reward = 0.0;
};

/// Fixed-capacity FIFO of experiences; once full, each push evicts the
/// oldest entry.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition transition);

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return storage_.size(); }
  bool empty() const { return size_ == 0; }

  // i = 0 is the oldest stored transition.
  const Transition& at(std::size_t i) const;

  // Uniform draws with replacement, as positions for at(). Returns nullopt
  // (warm-up, nothing consumed from rng) when fewer than batch_size
  // transitions are stored.
  std::optional<std::vector<std::size_t>> sample_indices(std::size_t batch_size,
                                                         Rng& rng) const;

  std::optional<std::vector<Transition>> sample_batch(std::size_t batch_size,
                                                      Rng& rng) const;

 private:
  std::vector<Transition> storage_;
  std::size_t cursor_ = 0;  // next slot to write
  std::size_t size_ = 0;
};

}  // namespace aoicache
