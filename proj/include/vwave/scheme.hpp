#pragma once

// Picard iteration for the coupled system.
//
// Iterate n transports the particles in the frozen field of iterate n-1
//   u_{n-1}(t, x) + sum_k gamma_k K(x - h_{k,n-1}(t))
// and solves the vortex equations with the frozen u_{n-1} but the current
// pair interactions. Iterate 0 is the initial data held constant in time.
// Configurations between stored slices are interpolated linearly in t.

#include "vwave/core.hpp"
#include "vwave/integrator.hpp"

#include <string>
#include <vector>

namespace vwave {

struct PicardIterate {
  int index = 0;
  /// Slice times: 0, stride*dt, 2*stride*dt, ..., horizon.
  std::vector<double> times;
  /// Weights, blob radius and initial positions shared by every slice.
  ParticleCloud base;
  std::vector<Eigen::Matrix2Xd> particle_slices;
  std::vector<std::vector<MassiveVortex>> vortex_slices;

  std::size_t slice_count() const { return times.size(); }
  /// Snapshot stored at slice s.
  SimState state_at(std::size_t s) const;
  /// Configuration at time t, linear between slices (clamped to the grid).
  SimState interpolate(double t) const;
  /// Index of the slice at time t; throws Error when t is not on the grid.
  std::size_t slice_of(double t) const;
};

/// Slice times for cfg (every diag_stride steps plus the horizon).
std::vector<double> picard_time_grid(const SimConfig& cfg);

/// Iterate 0: the initial data, constant in time.
PicardIterate picard_initial(const InitialData& init, const SimConfig& cfg);
PicardIterate picard_initial(const SimState& initial, const SimConfig& cfg);

/// Next iterate. Throws CollisionError ("collision in iterate n at t = ...")
/// and StiffnessError from the time stepping.
PicardIterate picard_step(const PicardIterate& prev, const SimConfig& cfg);

/// max over slices of max_k |dh| + max_k |dh'| + max_i |dx|. Throws Error on
/// different grids or shapes.
double picard_distance(const PicardIterate& a, const PicardIterate& b);

/// H of the vortex slice at time t (t must be a grid time).
double picard_hn(const PicardIterate& iter, double t);

/// Right side of the H rate identity at slice s of `iter`:
/// 2 sum_k gamma_k h_k' . u_{n-1}(t, h_k)^perp, with u_{n-1} the fluid field
/// of `prev` at the same slice.
double picard_hn_rate(const PicardIterate& iter, const PicardIterate& prev, std::size_t s, double theta);

struct PicardSummary {
  int index = 0;
  double distance_to_previous = 0.0;
  double max_hdot = 0.0;
};

struct PicardRun {
  PicardIterate previous;
  PicardIterate last;
  std::vector<PicardSummary> history;  ///< one entry per computed iterate n >= 1
  bool converged = false;
  Termination termination = Termination::completed;
  double failure_time = 0.0;
  int failed_iterate = -1;
  std::string message;
};

/// Iterates until the distance between consecutive iterates falls below
/// cfg.picard_tol or cfg.picard_iters iterates have been computed. Collision
/// and stiffness end the run and are reported in the result.
PicardRun run_picard(const InitialData& init, const SimConfig& cfg);
PicardRun run_picard(const SimState& initial, const SimConfig& cfg);

}  // namespace vwave
