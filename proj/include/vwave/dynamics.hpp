#pragma once

// Right-hand sides of the coupled system.
//
//   particles:          x_i'  = v(x_i)
//   massive vortex k:   m h'' = gamma (h' - w_k)^perp
//   massless vortex k:  h'    = w_k
//
// with w_k = u(h_k) + sum_{j != k} gamma_j K(h_k - h_j). Particle-particle
// interactions use the blob kernel; anything involving a vortex singularity
// uses the exact K.

#include "vwave/core.hpp"
#include "vwave/velocity.hpp"

#include <vector>

namespace vwave {

struct StateDerivative {
  Eigen::Matrix2Xd particle_velocities;
  /// h' for every vortex (the state velocity for massive ones, w_k for massless ones).
  std::vector<Vec2> vortex_hdots;
  /// h'' for massive vortices; zero and unused where `massless[k]`.
  std::vector<Vec2> vortex_hddots;
  std::vector<bool> massless;
  /// w_k, the field seen by each vortex.
  std::vector<Vec2> vortex_fields;
};

/// Coupled right-hand side; vortices with zero mass follow the massless law.
StateDerivative rhs_full(const SimState& state, const SimConfig& cfg);

/// Every vortex follows the massless law regardless of its mass.
StateDerivative rhs_vortex_wave(const SimState& state, const SimConfig& cfg);

/// Dispatches on cfg.mode (picard mode uses rhs_full).
StateDerivative rhs(const SimState& state, const SimConfig& cfg);

/// Assembles a derivative from a field for the particles and a field for u
/// at the vortices. Shared by the coupled and the frozen-field (Picard) paths.
///
/// `particle_field` supplies v at particles (u plus singular terms of its own
/// vortices); `fluid_field` supplies u at the vortex positions; point-vortex
/// interactions use `state.vortices`.
StateDerivative assemble_derivative(const SimState& state, const VelocityField& particle_field,
                                    const VelocityField& fluid_field, bool all_massless);

}  // namespace vwave
