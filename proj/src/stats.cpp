#include "aoicache/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

#include "aoicache/errors.hpp"

namespace aoicache {

double mean_of(std::span<const double> xs) {
  if (xs.empty()) throw ContractViolation("mean_of: empty sample");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double sample_stddev(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

MeanInterval mean_interval(std::span<const double> xs, double confidence) {
  MeanInterval out;
  out.n = xs.size();
  out.mean = mean_of(xs);
  if (xs.size() < 2) {
    out.half_width = std::numeric_limits<double>::infinity();
    return out;
  }
  const boost::math::students_t dist(static_cast<double>(xs.size() - 1));
  const double t = boost::math::quantile(dist, 0.5 + confidence / 2.0);
  out.half_width = t * sample_stddev(xs) / std::sqrt(static_cast<double>(xs.size()));
  return out;
}

std::vector<double> moving_average(std::span<const double> xs, std::size_t window) {
  if (window == 0 || window > xs.size()) {
    throw ContractViolation("moving_average: window must lie in [1, size]");
  }
  std::vector<double> out;
  out.reserve(xs.size() - window + 1);
  // Compensated running sum keeps long series accurate.
  double sum = 0.0;
  double carry = 0.0;
  auto add = [&](double v) {
    const double y = v - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  };
  for (std::size_t i = 0; i < window; ++i) add(xs[i]);
  out.push_back(sum / static_cast<double>(window));
  for (std::size_t i = window; i < xs.size(); ++i) {
    add(xs[i]);
    add(-xs[i - window]);
    out.push_back(sum / static_cast<double>(window));
  }
  return out;
}

void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> workers;
  for (unsigned w = 0; w < threads; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  workers.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace aoicache
