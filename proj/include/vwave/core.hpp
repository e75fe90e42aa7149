#pragma once

// Domain types for the coupled vorticity / massive point-vortex system.
//
// Everything here is a plain value type. Dynamics live in dynamics.hpp and
// integrator.hpp; this header only describes state, initial data and
// numerical configuration.

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vwave {

template <typename Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;

using Vec2 = Vector2<double>;

/// Rotation by +pi/2: (x, y) -> (-y, x).
template <typename Derived>
Vector2<typename Derived::Scalar> perp(const Eigen::MatrixBase<Derived>& x) {
  return Vector2<typename Derived::Scalar>(-x.y(), x.x());
}

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a singular kernel is evaluated at its pole.
class SingularEvaluation : public Error {
 public:
  using Error::Error;
};

/// Two vortices (or a target and a vortex) coincide, or a run fell below the
/// collision threshold. `time()` is NaN when no time is attached.
class CollisionError : public Error {
 public:
  explicit CollisionError(const std::string& what, double t = std::numeric_limits<double>::quiet_NaN())
      : Error(what), t_(t) {}
  double time() const { return t_; }

 private:
  double t_;
};

/// The adaptive substepping could not satisfy its distance criterion.
class StiffnessError : public Error {
 public:
  StiffnessError(const std::string& what, double t) : Error(what), t_(t) {}
  double time() const { return t_; }

 private:
  double t_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// State

/// Background vorticity discretized as weighted blobs.
///
/// Column i of `positions` is the current center of particle i, `weights(i)`
/// its circulation (vorticity times cell area, signed) and column i of
/// `initial_positions` the center at t = 0, kept for flow-map diagnostics.
/// Zero-weight particles are passive tracers: they move with the flow but
/// induce no velocity.
struct ParticleCloud {
  Eigen::Matrix2Xd positions;
  Eigen::VectorXd weights;
  Eigen::Matrix2Xd initial_positions;
  double blob_radius = 1.0;
  /// Area represented by one weighted particle (uniform lattice).
  double cell_area = 1.0;

  ParticleCloud() = default;
  /// Builds a cloud whose initial positions equal `positions`.
  ParticleCloud(Eigen::Matrix2Xd positions, Eigen::VectorXd weights, double blob_radius, double cell_area = 1.0);

  Eigen::Index size() const { return positions.cols(); }
  bool empty() const { return positions.cols() == 0; }

  /// Vorticity value carried by particle i.
  double vorticity(Eigen::Index i) const { return weights(i) / cell_area; }

  /// Appends zero-weight tracers (initial position = current position).
  void append_tracers(const Eigen::Matrix2Xd& tracers);

  /// Throws Error if sizes disagree, sigma <= 0 or a coordinate is not finite.
  void validate() const;
};

/// One point vortex. mass == 0 selects the first-order (massless) law.
struct MassiveVortex {
  Vec2 h = Vec2::Zero();
  Vec2 hdot = Vec2::Zero();
  double mass = 0.0;
  double gamma = 1.0;

  bool massless() const { return mass == 0.0; }
};

/// Immutable snapshot of the coupled system.
struct SimState {
  double t = 0.0;
  ParticleCloud cloud;
  std::vector<MassiveVortex> vortices;

  /// Throws CollisionError on coincident vortices and Error on non-finite
  /// data, negative masses or zero circulations.
  void validate() const;
};

/// Smallest pairwise vortex distance (+inf for fewer than two vortices).
double min_vortex_distance(const std::vector<MassiveVortex>& vortices);

/// Smallest distance between any particle and any vortex (+inf if either set
/// is empty).
double min_particle_vortex_distance(const Eigen::Matrix2Xd& positions, const std::vector<MassiveVortex>& vortices);

// ---------------------------------------------------------------------------
// Configuration

enum class Mode { full, vortex_wave, picard };

std::string to_string(Mode mode);
Mode mode_from_string(const std::string& name);

struct SimConfig {
  double dt = 1e-3;
  double horizon = 1.0;
  double blob_sigma = 0.05;
  double mollifier_eps = 1e-3;
  double kernel_delta = 0.05;
  double treecode_theta = 0.0;  ///< 0 selects direct summation
  double collision_stop_rho = 1e-4;
  Mode mode = Mode::full;
  int picard_iters = 5;
  double picard_tol = 1e-10;
  int diag_stride = 10;
  std::uint64_t seed = 0;
  double particle_density = 1e4;  ///< lattice points per unit area

  /// Throws ConfigError naming the first offending field.
  void validate() const;
};

// ---------------------------------------------------------------------------
// Initial data

/// Disc of constant vorticity `level`.
struct Patch {
  Vec2 center = Vec2::Zero();
  double radius = 1.0;
  double level = 1.0;
};

/// Vorticity samples on a regular grid: values(i, j) is the sample at
/// origin + (i, j) * spacing. Evaluated by bilinear interpolation and zero
/// outside the sampled rectangle.
struct SampledField {
  Vec2 origin = Vec2::Zero();
  double spacing = 1.0;
  Eigen::MatrixXd values;

  double operator()(const Vec2& x) const;
};

struct VortexInit {
  Vec2 h0 = Vec2::Zero();
  Vec2 l0 = Vec2::Zero();
  double mass = 0.0;
  double gamma = 1.0;
};

struct InitialData {
  std::vector<Patch> patches;
  std::optional<SampledField> background;
  double support_radius = 1.0;
  std::vector<VortexInit> vortices;

  /// Throws ConfigError if supports leave B(0, R0), radii are not positive or
  /// vortex positions repeat.
  void validate() const;

  /// Initial vorticity at x. Patches take precedence over the background;
  /// overlapping patches with different levels throw ConfigError.
  double vorticity(const Vec2& x) const;

  /// True when x lies in some patch or where the background is non-zero.
  bool in_support(const Vec2& x) const;
};

/// Lays particles on the uniform lattice tiling [-R0, R0]^2 with about
/// `particles_per_unit_area` points per unit area (the spacing is rounded so
/// an integer number of cells spans 2 R0). Particles are kept where the
/// initial vorticity is supported; each carries omega0(x_i) * cell_area.
ParticleCloud discretize(const InitialData& init, double particles_per_unit_area, double blob_sigma);

/// Vortices at t = 0 built from the initial data.
std::vector<MassiveVortex> initial_vortices(const InitialData& init);

/// Full initial state: discretized cloud plus vortices.
SimState initial_state(const InitialData& init, const SimConfig& cfg);

/// Zero-weight tracer lattice covering [lo, hi] with the given spacing
/// (cell-centered, like discretize).
Eigen::Matrix2Xd tracer_lattice(const Vec2& lo, const Vec2& hi, double spacing);

}  // namespace vwave
