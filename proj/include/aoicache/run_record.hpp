#pragma once

#include <cstdint>
#include <optional>

namespace aoicache {

/// One epoch of a run as written to the raw CSV.
struct RunRecord {
  std::int64_t epoch = 0;
  int rep = 0;
  double reward = 0.0;
  double cost = 0.0;
  double aoi = 0.0;
  double energy_j = 0.0;
  int action = 0;
  double epsilon = 0.0;
  std::optional<double> loss;  // empty for non-learning policies and warm-up
};

}  // namespace aoicache
