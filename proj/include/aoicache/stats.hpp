#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace aoicache {

/// Sample mean with a two-sided Student-t confidence half-width.
struct MeanInterval {
  double mean = 0.0;
  double half_width = 0.0;  // +inf when n < 2
  std::size_t n = 0;

  double lower() const { return mean - half_width; }
  double upper() const { return mean + half_width; }
};

double mean_of(std::span<const double> xs);
double sample_stddev(std::span<const double> xs);
MeanInterval mean_interval(std::span<const double> xs, double confidence = 0.95);

// Trailing moving average: out[k] = mean(xs[k .. k + window - 1]), so the
// series has xs.size() - window + 1 entries. Requires 1 <= window <= size.
std::vector<double> moving_average(std::span<const double> xs, std::size_t window);

// Runs fn(i) for i in [0, n) on up to `threads` workers (0 = hardware
// concurrency). Exceptions from workers are rethrown on the caller's thread.
void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace aoicache
