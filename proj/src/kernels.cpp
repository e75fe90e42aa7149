#include "vwave/kernels.hpp"

#include "vwave/summation.hpp"

namespace vwave {

double stream_phi_eps(const ParticleCloud& cloud, const Vec2& x, double eps) {
  CompensatedSum<double> acc;
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    const double w = cloud.weights(i);
    if (w == 0.0) continue;
    acc += w * mollified_log((x - cloud.positions.col(i)).norm(), eps);
  }
  return acc.value() / (2.0 * std::numbers::pi);
}

Vec2 stream_phi_eps_perp_grad(const ParticleCloud& cloud, const Vec2& x, double eps) {
  CompensatedSum2<double> acc;
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    const double w = cloud.weights(i);
    if (w == 0.0) continue;
    const Vec2 d = x - cloud.positions.col(i);
    const double r = d.norm();
    if (r == 0.0) continue;
    acc.add(perp(d) * (w * mollified_log_deriv(r, eps) / r));
  }
  return acc.value() / (2.0 * std::numbers::pi);
}

double stream_psi_delta(std::span<const MassiveVortex> vortices, const Vec2& x, double delta, std::size_t exclude) {
  double acc = 0.0;
  for (std::size_t j = 0; j < vortices.size(); ++j) {
    if (j == exclude) continue;
    acc += vortices[j].gamma * mollified_log((x - vortices[j].h).norm(), delta);
  }
  return acc / (2.0 * std::numbers::pi);
}

}  // namespace vwave
