#pragma once

// Classical RK4 in time with adaptive substepping near close approaches.
//
// A macro step of size dt is split into n = 1, 2, 4, ... substeps. Before each
// substep the distance criterion
//
//   dist(a, b) >= 4 * |velocity(a) - velocity(b)| * substep
//
// is checked for every particle/vortex pair and every vortex pair. If it fails
// the macro step restarts from its initial state with twice the substeps
// (at most 1024).

#include "vwave/core.hpp"
#include "vwave/dynamics.hpp"

#include <functional>
#include <string>

namespace vwave {

inline constexpr int kMaxSubsteps = 1024;

struct StepOutcome {
  SimState state;
  int substeps_taken = 1;
  double min_vortex_distance = 0.0;
  double min_particle_vortex_distance = 0.0;
};

/// Pluggable pieces of a macro step. The coupled solver and the Picard scheme
/// differ only in these.
struct StepModel {
  /// Derivative at a stage state (state.t is the stage time).
  std::function<StateDerivative(const SimState&)> derivative;
  /// Largest substep allowed by the distance criterion at this stage.
  std::function<double(const SimState&, const StateDerivative&)> max_substep;
  /// Called on the end state of a macro step (refreshes massless velocities).
  std::function<void(SimState&)> finish;
};

/// Largest substep the criterion allows for the coupled system at `state`.
double coupled_max_substep(const SimState& state, const StateDerivative& d);

/// One macro step of size `dt` with an arbitrary model. Throws CollisionError
/// when a vortex pair falls below cfg.collision_stop_rho and StiffnessError
/// when 1024 substeps do not satisfy the criterion.
StepOutcome advance(const SimState& state, double dt, const SimConfig& cfg, const StepModel& model);

/// Coupled model for cfg.mode (full or vortex_wave).
StepModel coupled_model(const SimConfig& cfg);

/// One RK4 macro step of size cfg.dt.
StepOutcome step(const SimState& state, const SimConfig& cfg);
/// One RK4 macro step of an explicit size.
StepOutcome step(const SimState& state, const SimConfig& cfg, double dt);

/// Sets h' = w_k for every massless vortex (every vortex in vortex_wave mode).
void refresh_massless_velocities(SimState& state, const SimConfig& cfg);

enum class Termination { completed, collision, stiffness };

std::string to_string(Termination t);

struct RunObserver {
  /// Every step, including the initial state.
  std::function<void(const SimState&)> on_step;
  /// Every cfg.diag_stride steps, starting with the initial state.
  std::function<void(const SimState&)> on_record;
};

struct RunResult {
  SimState final_state;
  std::size_t steps = 0;
  Termination termination = Termination::completed;
  double failure_time = 0.0;
  std::string message;
};

/// Steps from `initial` until t reaches cfg.horizon (the last step is
/// shortened to land on it) or a terminal error occurs, which is reported in
/// the result together with the last valid state. Throws ConfigError for
/// Mode::picard, which has its own driver (scheme.hpp).
RunResult run(const SimState& initial, const SimConfig& cfg, const RunObserver& observer = {});
RunResult run(const InitialData& init, const SimConfig& cfg, const RunObserver& observer = {});

/// Number of macro steps needed to reach the horizon.
std::size_t step_count(const SimConfig& cfg);

}  // namespace vwave
