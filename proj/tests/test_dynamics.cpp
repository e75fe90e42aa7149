#include "oracles.hpp"
#include "vwave/dynamics.hpp"
#include "vwave/integrator.hpp"

#include <doctest.h>

#include <random>

using namespace vwave;

namespace {

SimState vortex_state(std::vector<MassiveVortex> vs) {
  SimState s;
  s.cloud.blob_radius = 0.1;
  s.vortices = std::move(vs);
  return s;
}

SimState mixed_state() {
  InitialData init;
  init.support_radius = 1.0;
  init.patches.push_back({Vec2(0.1, 0.0), 0.4, 1.0});
  init.vortices = {{Vec2(0.8, 0.1), Vec2(0.3, -0.2), 1.5, 0.7}, {Vec2(-0.6, -0.5), Vec2(-0.1, 0.4), 0.5, 1.1},
                   {Vec2(0.0, 0.8), Vec2(0.2, 0.2), 2.0, -0.4}};
  SimConfig cfg;
  cfg.particle_density = 900;
  cfg.blob_sigma = 0.08;
  return initial_state(init, cfg);
}

}  // namespace

TEST_CASE("rhs_full examples") {
  SimConfig cfg;
  SUBCASE("free vortex feels the gyroscopic force only") {
    const Vec2 l0(0.3, -1.1);
    const SimState s = vortex_state({{Vec2(0.5, 0.5), l0, 2.0, 3.0}});
    const StateDerivative d = rhs_full(s, cfg);
    CHECK((d.vortex_hdots[0] - l0).norm() == 0.0);
    CHECK((d.vortex_hddots[0] - (3.0 / 2.0) * oracle::rot90(l0)).norm() <= 1e-15);
  }
  SUBCASE("a vortex moving with the fluid feels no force") {
    SimState s = mixed_state();
    const VelocityField f(s.cloud, s.vortices, 0.0);
    for (std::size_t k = 0; k < s.vortices.size(); ++k) s.vortices[k].hdot = f.eval_rhs_vortex(k);
    const StateDerivative d = rhs_full(s, cfg);
    for (const auto& a : d.vortex_hddots) CHECK(a.norm() <= 1e-14);
  }
  SUBCASE("antisymmetric pair") {
    const SimState s = vortex_state({{Vec2(0.4, -0.2), Vec2(0.1, 0.3), 1.3, 0.9},
                                     {Vec2(-0.4, 0.2), Vec2(-0.1, -0.3), 1.3, 0.9}});
    const StateDerivative d = rhs_full(s, cfg);
    CHECK((d.vortex_hddots[0] + d.vortex_hddots[1]).norm() <= 1e-15);
  }
  SUBCASE("particles move with u plus the vortex terms") {
    const SimState s = mixed_state();
    const StateDerivative d = rhs_full(s, cfg);
    const VelocityField f(s.cloud, s.vortices, 0.0);
    CHECK(d.particle_velocities.cols() == s.cloud.size());
    for (Eigen::Index i = 0; i < s.cloud.size(); i += 37)
      CHECK((d.particle_velocities.col(i) - f.eval_v(Vec2(s.cloud.positions.col(i)))).norm() <= 1e-14);
  }
  SUBCASE("massless entries are routed to the first-order law") {
    SimState s = mixed_state();
    s.vortices[1].mass = 0.0;
    const StateDerivative d = rhs_full(s, cfg);
    CHECK(d.massless[1]);
    CHECK_FALSE(d.massless[0]);
    const VelocityField f(s.cloud, s.vortices, 0.0);
    CHECK((d.vortex_hdots[1] - f.eval_rhs_vortex(1)).norm() <= 1e-15);
    CHECK(d.vortex_hddots[1].norm() == 0.0);
  }
}

TEST_CASE("rhs_vortex_wave examples") {
  SimConfig cfg;
  cfg.mode = Mode::vortex_wave;
  {
    const SimState s = vortex_state({{Vec2(0, 0), Vec2::Zero(), 0, 2 * oracle::pi},
                                     {Vec2(1, 0), Vec2::Zero(), 0, 2 * oracle::pi}});
    const StateDerivative d = rhs_vortex_wave(s, cfg);
    CHECK((d.vortex_hdots[0] - Vec2(0, -1)).norm() <= 1e-15);
    CHECK((d.vortex_hdots[1] - Vec2(0, 1)).norm() <= 1e-15);
  }
  {
    const SimState s = vortex_state({{Vec2(0.2, 0.3), Vec2(5, 5), 3.0, 1.0}});
    const StateDerivative d = rhs_vortex_wave(s, cfg);
    CHECK(d.vortex_hdots[0].norm() == 0.0);
    CHECK(d.massless[0]);
  }
  {
    InitialData init;
    init.support_radius = 1.0;
    init.patches.push_back({Vec2::Zero(), 0.6, 1.0});
    init.vortices = {{Vec2::Zero(), Vec2::Zero(), 0.0, 1.0}};
    cfg.particle_density = 1e4;
    cfg.blob_sigma = 0.02;
    const StateDerivative d = rhs_vortex_wave(initial_state(init, cfg), cfg);
    CHECK(d.vortex_hdots[0].norm() <= 1e-3);
  }
  {
    const SimState s = vortex_state({{Vec2(0, 0), Vec2::Zero(), 0, 1}, {Vec2(0, 0), Vec2::Zero(), 0, 1}});
    CHECK_THROWS_AS(rhs_vortex_wave(s, cfg), CollisionError);
  }
}

TEST_CASE("property: the force is orthogonal to the slip velocity") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1, 1);
  SimConfig cfg;
  for (int trial = 0; trial < 20; ++trial) {
    SimState s = mixed_state();
    for (auto& v : s.vortices) v.hdot = Vec2(u(rng), u(rng));
    const StateDerivative d = rhs_full(s, cfg);
    for (std::size_t k = 0; k < s.vortices.size(); ++k) {
      const Vec2 slip = s.vortices[k].hdot - d.vortex_fields[k];
      CHECK(std::abs(d.vortex_hddots[k].dot(slip)) <= 1e-12 * (1 + d.vortex_hddots[k].norm() * slip.norm()));
    }
  }
}

TEST_CASE("property: kinetic energy exchange identity") {
  // d/dt sum m|h'|^2 = 2 sum gamma h' . (h' - w)^perp, checked algebraically
  // and against central differences along a trajectory.
  SimConfig cfg;
  cfg.dt = 1e-4;
  SimState s = mixed_state();
  auto kinetic = [](const SimState& st) {
    double e = 0;
    for (const auto& v : st.vortices) e += v.mass * v.hdot.squaredNorm();
    return e;
  };
  auto identity = [&](const SimState& st) {
    const StateDerivative d = rhs_full(st, cfg);
    double r = 0, direct = 0;
    for (std::size_t k = 0; k < st.vortices.size(); ++k) {
      const auto& v = st.vortices[k];
      r += 2 * v.gamma * v.hdot.dot(oracle::rot90(v.hdot - d.vortex_fields[k]));
      direct += 2 * v.mass * v.hdot.dot(d.vortex_hddots[k]);
    }
    CHECK(std::abs(r - direct) <= 1e-12 * (1 + std::abs(r)));
    return r;
  };
  SimState prev = s;
  SimState cur = step(prev, cfg).state;
  for (int i = 0; i < 20; ++i) {
    const SimState next = step(cur, cfg).state;
    const double fd = (kinetic(next) - kinetic(prev)) / (2 * cfg.dt);
    const double an = identity(cur);
    CHECK(std::abs(fd - an) <= 1e-6 * std::max(1.0, std::abs(an)));
    prev = cur;
    cur = next;
  }
}
