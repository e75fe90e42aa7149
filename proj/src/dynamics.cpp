#include "vwave/dynamics.hpp"

namespace vwave {

StateDerivative assemble_derivative(const SimState& state, const VelocityField& particle_field,
                                    const VelocityField& fluid_field, bool all_massless) {
  const auto& pos = state.cloud.positions;
  const std::size_t nv = state.vortices.size();
  StateDerivative d;
  d.particle_velocities.resize(2, pos.cols());
  for (Eigen::Index i = 0; i < pos.cols(); ++i) {
    const Vec2 x = pos.col(i);
    d.particle_velocities.col(i) = particle_field.eval_u(x) + particle_field.vortex_part(x);
  }
  d.vortex_hdots.resize(nv);
  d.vortex_hddots.assign(nv, Vec2::Zero());
  d.massless.resize(nv);
  d.vortex_fields.resize(nv);
  for (std::size_t k = 0; k < nv; ++k) {
    const auto& v = state.vortices[k];
    const Vec2 w = fluid_field.eval_u(v.h) + point_vortex_velocity(state.vortices, k);
    d.vortex_fields[k] = w;
    d.massless[k] = all_massless || v.massless();
    if (d.massless[k]) {
      d.vortex_hdots[k] = w;
    } else {
      d.vortex_hdots[k] = v.hdot;
      d.vortex_hddots[k] = (v.gamma / v.mass) * perp(Vec2(v.hdot - w));
    }
  }
  return d;
}

StateDerivative rhs_full(const SimState& state, const SimConfig& cfg) {
  const VelocityField field(state.cloud, state.vortices, cfg.treecode_theta);
  return assemble_derivative(state, field, field, false);
}

StateDerivative rhs_vortex_wave(const SimState& state, const SimConfig& cfg) {
  const VelocityField field(state.cloud, state.vortices, cfg.treecode_theta);
  return assemble_derivative(state, field, field, true);
}

StateDerivative rhs(const SimState& state, const SimConfig& cfg) {
  return cfg.mode == Mode::vortex_wave ? rhs_vortex_wave(state, cfg) : rhs_full(state, cfg);
}

}  // namespace vwave
