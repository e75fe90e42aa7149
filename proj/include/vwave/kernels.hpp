#pragma once

// Pointwise kernels and stream functions.
//
// All kernels use the rotation x^perp = (-x2, x1), so a positive circulation
// turns counter-clockwise.

#include "vwave/core.hpp"

#include <cmath>
#include <numbers>
#include <span>

namespace vwave {

/// Singular Biot-Savart kernel K(x) = x^perp / (2 pi |x|^2).
/// Throws SingularEvaluation at x = 0.
template <typename Scalar>
Vector2<Scalar> biot_savart_K(const Vector2<Scalar>& x) {
  const Scalar r2 = x.squaredNorm();
  if (r2 == Scalar(0)) throw SingularEvaluation("singular evaluation of the Biot-Savart kernel at 0");
  return perp(x) / (Scalar(2) * std::numbers::pi_v<Scalar> * r2);
}

/// ln with a quadratic cap below eps: ln eps - 1/2 + r^2 / (2 eps^2).
/// C^1 at r = eps, finite at 0.
template <typename Scalar>
Scalar mollified_log(Scalar r, Scalar eps) {
  if (r >= eps) return std::log(r);
  return std::log(eps) - Scalar(0.5) + r * r / (Scalar(2) * eps * eps);
}

/// Derivative of mollified_log; bounded by 1 / eps.
template <typename Scalar>
Scalar mollified_log_deriv(Scalar r, Scalar eps) {
  if (r >= eps) return Scalar(1) / r;
  return r / (eps * eps);
}

/// K_delta = (1/2pi) grad^perp ln_delta(|x|). Equals K outside B(0, delta),
/// bounded by 1 / (2 pi delta), zero at the origin.
template <typename Scalar>
Vector2<Scalar> regularized_K_delta(const Vector2<Scalar>& x, Scalar delta) {
  const Scalar r = x.norm();
  const Scalar c = Scalar(1) / (Scalar(2) * std::numbers::pi_v<Scalar>);
  if (r >= delta) return perp(x) * (c / (r * r));
  return perp(x) * (c / (delta * delta));
}

/// Radial factor of the Gaussian blob kernel: (1 - exp(-r^2/sigma^2)) / (2 pi r^2).
/// Returns 0 at r = 0 (the kernel value there).
template <typename Scalar>
Scalar blob_factor(Scalar r2, Scalar sigma) {
  if (r2 == Scalar(0)) return Scalar(0);
  const Scalar s = r2 / (sigma * sigma);
  // exp(-40) is below double epsilon
  const Scalar shield = s > Scalar(40) ? Scalar(1) : -std::expm1(-s);
  return shield / (Scalar(2) * std::numbers::pi_v<Scalar> * r2);
}

/// Gaussian vortex blob: K(x) (1 - exp(-|x|^2 / sigma^2)), smooth with value 0 at 0.
template <typename Scalar>
Vector2<Scalar> blob_kernel(const Vector2<Scalar>& x, Scalar sigma) {
  return perp(x) * blob_factor(x.squaredNorm(), sigma);
}

/// phi_eps(x) = (1/2pi) sum_i Gamma_i ln_eps |x - x_i| over the cloud.
double stream_phi_eps(const ParticleCloud& cloud, const Vec2& x, double eps);

/// grad^perp phi_eps(x), analytic.
Vec2 stream_phi_eps_perp_grad(const ParticleCloud& cloud, const Vec2& x, double eps);

/// psi_delta(x) = sum_{j != exclude} (gamma_j / 2pi) ln_delta |x - h_j|.
/// Pass exclude >= vortices.size() to keep every term.
double stream_psi_delta(std::span<const MassiveVortex> vortices, const Vec2& x, double delta, std::size_t exclude);

}  // namespace vwave
