#pragma once

// Treecode versus direct summation on a random positive cloud.

#include "vwave/core.hpp"

#include <cstdint>

namespace vwave {

struct VelocityBenchOptions {
  Eigen::Index n = 100000;
  double theta = 0.5;
  int probes = 100;
  /// Targets actually summed directly; the full N-target time is
  /// extrapolated linearly from them. 0 means all N.
  Eigen::Index direct_targets = 5000;
  double sigma = 0.01;
  std::uint64_t seed = 0;
};

struct VelocityBenchResult {
  Eigen::Index n = 0;
  double theta = 0.0;
  double tree_build_seconds = 0.0;
  /// Build plus evaluation at all N particle positions.
  double tree_seconds = 0.0;
  /// Fastest of the compensated and plain direct sums, scaled to N targets.
  double direct_seconds = 0.0;
  Eigen::Index direct_targets = 0;
  /// max_probe |u_tree - u_direct| / max_probe |u_direct|
  double max_rel_error = 0.0;
  /// max_probe |u_tree - u_direct| / |u_direct|
  double max_pointwise_rel_error = 0.0;
  double time_ratio() const { return tree_seconds / direct_seconds; }
};

/// N particles uniform in the unit disc with weights uniform in (0, 1/N];
/// targets are the particles themselves.
VelocityBenchResult bench_velocity(const VelocityBenchOptions& opt);

}  // namespace vwave
