#pragma once

// Functionals and monitors evaluated on snapshots and trajectories.

#include "vwave/core.hpp"
#include "vwave/dynamics.hpp"

#include <optional>
#include <span>
#include <vector>

namespace vwave {

// ---------------------------------------------------------------------------
// Conserved quantities

/// Discrete energy
///   (1/2pi) sum_{i != j} G_i G_j ln|x_i - x_j| + (1/pi) sum_k gamma_k sum_i G_i ln|x_i - h_k|
///   + sum_{j != k} (gamma_j gamma_k / 2pi) ln|h_j - h_k| - sum_k m_k |h_k'|^2.
/// Particle pairs closer than eps use mollified_log. Throws CollisionError on
/// coincident vortices.
double energy_H0(const SimState& state, double eps);

/// sum_i G_i |x_i|^2 + sum_k gamma_k |h_k|^2 - 2 sum_k m_k h_k^perp . h_k'.
double momentum_I0(const SimState& state);

/// H = sum_{j != k} (gamma_j gamma_k / 2pi) ln|h_j - h_k| - sum_k m_k |h_k'|^2
/// (ordered pairs). Throws CollisionError on coincident vortices.
double vortex_functional_H(std::span<const MassiveVortex> vortices);

/// 2 sum_k gamma_k h_k' . u_k^perp with u_k the fluid velocity at h_k
/// (point-vortex terms excluded). This is the rate of H along the scheme.
double vortex_functional_H_rate(std::span<const MassiveVortex> vortices, std::span<const Vec2> u_at_vortices);

/// Lower bound on |h_j - h_k| implied by |H| and the vortex positions:
///   exp((-2 pi |H| - sum_{p,l} gamma_p gamma_l (|h_p| + |h_l|)) / (gamma_j gamma_k)).
/// Only meaningful when gamma_j gamma_k > 0.
double pair_distance_lower_bound(std::span<const MassiveVortex> vortices, std::size_t j, std::size_t k);

// ---------------------------------------------------------------------------
// Local energy along a fluid trajectory

/// F_k(X) = sum_j (gamma_j / 2pi) ln|X - h_j| + phi_eps(X) + X . (h_k')^perp.
/// Throws SingularEvaluation when X sits on a vortex.
double local_energy_Fk(const SimState& state, const Vec2& X, std::size_t k, double eps);

/// Time derivative of phi_eps at a fixed point, from the particle velocities:
///   (1/2pi) sum_i G_i ln_eps'(r_i) (x_i - x) / r_i . x_i'.
double dphi_eps_dt(const ParticleCloud& cloud, const Eigen::Matrix2Xd& particle_velocities, const Vec2& x,
                   double eps);

/// Closed form of dF_k/dt along X' = v(X) once the singular terms cancel:
///   -u^perp . h_k' + d_t phi_eps(X) + X . (h_k'')^perp
///   + sum_{j != k} (gamma_j / 2pi) (X - h_j) . (h_k' - h_j') / |X - h_j|^2,
/// with u the fluid velocity at X. The last sum vanishes for a single vortex.
/// Requires vortex k to be massive.
double local_energy_rate(const SimState& state, const StateDerivative& d, const Vec2& X, const Vec2& u_at_X,
                         std::size_t k, double eps);

// ---------------------------------------------------------------------------
// Lp norms

struct LpValue {
  double p;  ///< +inf for the sup norm
  double value;
};

/// Regular grid used for histogram estimates of the vorticity.
struct HistogramGrid {
  Vec2 origin = Vec2::Zero();
  double cell = 1.0;
  Eigen::Index nx = 0;
  Eigen::Index ny = 0;

  /// Grid with the given cell size, anchored at the lower corner of
  /// `anchor` (minus one cell), extended to cover `anchor` and `cover`.
  static HistogramGrid aligned(const Eigen::Matrix2Xd& anchor, const Eigen::Matrix2Xd& cover, double cell);
};

/// Cloud-in-cell deposit of the weights, divided by the cell area.
Eigen::MatrixXd deposit_vorticity(const ParticleCloud& cloud, const HistogramGrid& grid);

struct LpReport {
  /// (sum_i A |omega_i|^p)^(1/p) from the carried values; constant in time.
  std::vector<LpValue> weight_based;
  /// Same norms of the deposited grid field.
  std::vector<LpValue> histogram;
};

/// Lp norms for each p in `ps` (p >= 1 or +inf). The histogram uses cells of
/// `cell` (default 4 lattice spacings) aligned to the initial positions.
LpReport lp_norms(const ParticleCloud& cloud, std::span<const double> ps, std::optional<double> cell = std::nullopt);

// ---------------------------------------------------------------------------
// Flow-map monitors

/// Cell-count defect of an advected uniform lattice. The window is the
/// bounding box of `initial` eroded on every side by the largest displacement,
/// split into grid_size^2 cells; the result is the largest
/// |count(t) / count(0) - 1| over cells with count(0) > 0 (NaN when the window
/// is empty).
double measure_preservation_defect(const Eigen::Matrix2Xd& initial, const Eigen::Matrix2Xd& current, int grid_size);

/// Same on every particle of the cloud.
double measure_preservation_defect(const ParticleCloud& cloud, int grid_size);

struct ConstancyReport {
  double max_abs_deviation = 0.0;  ///< NaN when there are no samples
  std::size_t samples = 0;
  /// Particles now in the ball that started outside B(h_k(0), delta0).
  std::size_t violations = 0;
  bool no_samples = true;
  double delta0 = 0.0;
  double alpha = 0.0;
};

/// Checks the vorticity carried into B(h_k(t), radius). Each particle
/// carries omega_0 at its initial position. Throws Error if no patch of
/// `init` is centered at h_k(0).
ConstancyReport constancy_check(const SimState& state, const InitialData& init, std::size_t k, double radius);

/// D = ||u_a - u_b||_{L2}^2 + sum_k |h_a - h_b|^2 + sum_k |h_a' - h_b'|^2.
/// The L2 term uses a grid_size^2 midpoint rule on the bounding box of both
/// supports (weighted particles and vortices) inflated by 20%. Throws Error
/// on differing vortex counts.
double solution_distance_D(const SimState& a, const SimState& b, int grid_size = 256, double theta = 0.0);

/// max |x_i| over weighted particles (0 for none).
double support_radius(const ParticleCloud& cloud);

struct ConfinementReport {
  double max_h = 0.0;
  double max_hdot = 0.0;
  double min_pair_dist = std::numeric_limits<double>::infinity();
};

/// Running extrema of |h_k|, |h_k'| and the smallest vortex pair distance.
class ConfinementTracker {
 public:
  void observe(std::span<const MassiveVortex> vortices);
  const ConfinementReport& report() const { return report_; }

 private:
  ConfinementReport report_;
};

ConfinementReport confinement_report(const std::vector<std::vector<MassiveVortex>>& series);

// ---------------------------------------------------------------------------
// Records

struct DiagnosticsRecord {
  double t = 0.0;
  double H0 = 0.0;
  double I0 = 0.0;
  double Hn = 0.0;
  /// Mean of F_k over the tagged particles, per vortex.
  std::vector<double> Fk;
  double min_vortex_dist = 0.0;
  double min_particle_vortex_dist = 0.0;
  double support_radius = 0.0;
  std::vector<LpValue> Lp;  ///< weight-based L1, L2, Linf
  std::optional<double> D;
};

/// Builds DiagnosticsRecord rows for a run. Up to `max_tags` particles,
/// evenly strided through the cloud, are tagged for the F_k means.
class DiagnosticsRecorder {
 public:
  explicit DiagnosticsRecorder(const SimConfig& cfg, std::size_t max_tags = 100);

  DiagnosticsRecord record(const SimState& state);
  void operator()(const SimState& state) { rows_.push_back(record(state)); }

  const std::vector<DiagnosticsRecord>& rows() const { return rows_; }

 private:
  SimConfig cfg_;
  std::size_t max_tags_;
  std::vector<DiagnosticsRecord> rows_;
};

}  // namespace vwave
