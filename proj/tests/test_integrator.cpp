#include "oracles.hpp"
#include "vwave/integrator.hpp"

#include <doctest.h>

#include <cmath>

using namespace vwave;

namespace {

SimState vortices_only(std::vector<MassiveVortex> vs) {
  SimState s;
  s.cloud = ParticleCloud(Eigen::Matrix2Xd(2, 0), Eigen::VectorXd(0), 0.05);
  s.vortices = std::move(vs);
  return s;
}

SimConfig config(double dt, double horizon) {
  SimConfig cfg;
  cfg.dt = dt;
  cfg.horizon = horizon;
  cfg.diag_stride = 1;
  return cfg;
}

double free_vortex_error(double dt, double horizon) {
  const Vec2 h0(0.2, -0.1), l0(0.7, 0.4);
  const double m = 0.5, g = 1.5;
  const RunResult r = run(vortices_only({{h0, l0, m, g}}), config(dt, horizon));
  REQUIRE(r.termination == Termination::completed);
  return (r.final_state.vortices[0].h - oracle::free_massive_vortex(h0, l0, m, g, horizon)).norm();
}

}  // namespace

TEST_CASE("step_count rounds near-integer ratios") {
  CHECK(step_count(config(0.1, 1.0)) == 10);
  CHECK(step_count(config(1e-3, 1.0)) == 1000);
  CHECK(step_count(config(0.3, 1.0)) == 4);
  CHECK(step_count(config(0.1, 0.0)) == 0);
}

TEST_CASE("free massive vortex") {
  SUBCASE("matches the closed form over one period") {
    const double period = 2 * oracle::pi * 0.5 / 1.5;
    CHECK(free_vortex_error(1e-3, period) <= 1e-8);
  }
  SUBCASE("speed is conserved") {
    const SimState s = vortices_only({{Vec2(0, 0), Vec2(1, 2), 2.0, 3.0}});
    const RunResult r = run(s, config(1e-2, 3.0));
    CHECK(std::abs(r.final_state.vortices[0].hdot.norm() - std::sqrt(5.0)) <= 1e-9);
  }
  SUBCASE("property: fourth-order convergence") {
    const double e1 = free_vortex_error(0.1, 2.0);
    const double e2 = free_vortex_error(0.05, 2.0);
    CHECK(e1 / e2 >= 14.0);
    CHECK(e1 / e2 <= 18.0);
  }
}

TEST_CASE("massless pair rotates rigidly") {
  const double g = 2 * oracle::pi;
  const Vec2 a(-0.5, 0), b(0.5, 0);
  const SimState s = vortices_only({{a, Vec2::Zero(), 0, g}, {b, Vec2::Zero(), 0, g}});
  const double period = oracle::pi;  // angular speed 2g / (2 pi d^2) = 2
  const RunResult r = run(s, config(1e-3, period));
  REQUIRE(r.termination == Termination::completed);
  CHECK((r.final_state.vortices[0].h - a).norm() <= 1e-6);
  CHECK((r.final_state.vortices[1].h - b).norm() <= 1e-6);
  const auto quarter = oracle::two_vortex(a, b, g, g, period / 4);
  const RunResult rq = run(s, config(1e-3, period / 4));
  CHECK((rq.final_state.vortices[0].h - quarter.first).norm() <= 1e-9);
  CHECK((rq.final_state.vortices[0].hdot - 2.0 * oracle::rot90(quarter.first)).norm() <= 1e-9);
}

TEST_CASE("vortex_wave mode ignores masses") {
  SimConfig cfg = config(1e-2, 0.5);
  cfg.mode = Mode::vortex_wave;
  const SimState s = vortices_only({{Vec2(-0.5, 0), Vec2(3, 3), 1.0, 1.0}, {Vec2(0.5, 0), Vec2::Zero(), 2.0, 1.0}});
  const RunResult r = run(s, cfg);
  const auto exact = oracle::two_vortex(Vec2(-0.5, 0), Vec2(0.5, 0), 1.0, 1.0, 0.5);
  CHECK((r.final_state.vortices[0].h - exact.first).norm() <= 1e-9);
  CHECK(r.final_state.vortices[0].mass == 0.0);
}

TEST_CASE("zero field leaves massless vortices at rest") {
  const SimState s = vortices_only({{Vec2(0.3, 0.4), Vec2::Zero(), 0, 1.0}});
  const RunResult r = run(s, config(1e-2, 1.0));
  CHECK(r.final_state.vortices[0].h == Vec2(0.3, 0.4));
  CHECK(r.final_state.vortices[0].hdot.norm() == 0.0);
}

TEST_CASE("observer cadence and horizon handling") {
  SimConfig cfg = config(0.01, 1.0);
  cfg.diag_stride = 10;
  std::size_t steps = 0, records = 0;
  double last_t = -1;
  RunObserver obs;
  obs.on_step = [&](const SimState& s) {
    CHECK(s.t > last_t);
    last_t = s.t;
    ++steps;
  };
  obs.on_record = [&](const SimState&) { ++records; };
  const RunResult r = run(vortices_only({{Vec2(0, 0), Vec2(1, 0), 1.0, 1.0}}), cfg, obs);
  CHECK(r.steps == 100);
  CHECK(steps == 101);
  CHECK(records == 11);
  CHECK(r.final_state.t == 1.0);

  SUBCASE("zero horizon records only the initial state") {
    cfg.horizon = 0.0;
    steps = records = 0;
    last_t = -1;
    const RunResult z = run(vortices_only({{Vec2(0, 0), Vec2(1, 0), 1.0, 1.0}}), cfg, obs);
    CHECK(z.steps == 0);
    CHECK(steps == 1);
    CHECK(records == 1);
  }
  SUBCASE("the last step is clipped to the horizon") {
    cfg.dt = 0.3;
    const RunResult c = run(vortices_only({{Vec2(0, 0), Vec2(1, 0), 1.0, 1.0}}), cfg);
    CHECK(c.steps == 4);
    CHECK(c.final_state.t == 1.0);
  }
}

TEST_CASE("property: runs are bit-for-bit deterministic") {
  InitialData init;
  init.patches.push_back({Vec2(0, 0), 0.5, 1.0});
  init.vortices = {{Vec2(0.7, 0), Vec2(0, 0.2), 0.5, 0.3}, {Vec2(-0.7, 0.1), Vec2::Zero(), 1.0, 0.4}};
  SimConfig cfg = config(1e-2, 0.2);
  cfg.particle_density = 2000;
  cfg.treecode_theta = 0.4;
  const RunResult a = run(init, cfg);
  const RunResult b = run(init, cfg);
  CHECK(a.final_state.cloud.positions == b.final_state.cloud.positions);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(a.final_state.vortices[k].h == b.final_state.vortices[k].h);
    CHECK(a.final_state.vortices[k].hdot == b.final_state.vortices[k].hdot);
  }
}

TEST_CASE("property: time reversal") {
  // Reversing h' and every circulation retraces the trajectory.
  const std::vector<MassiveVortex> v0 = {{Vec2(0.5, 0), Vec2(0.1, 0.3), 1.0, 1.0},
                                         {Vec2(-0.4, 0.2), Vec2(-0.2, 0), 0.7, 0.8},
                                         {Vec2(0, -0.6), Vec2(0, 0), 1.3, 1.2}};
  const SimConfig cfg = config(1e-3, 1.0);
  const RunResult fwd = run(vortices_only(v0), cfg);
  std::vector<MassiveVortex> back = fwd.final_state.vortices;
  for (auto& v : back) {
    v.hdot = -v.hdot;
    v.gamma = -v.gamma;
  }
  const RunResult rev = run(vortices_only(back), cfg);
  const SimConfig half = config(5e-4, 1.0);
  const double fwd_err = (run(vortices_only(v0), half).final_state.vortices[0].h - fwd.final_state.vortices[0].h).norm();
  for (std::size_t k = 0; k < v0.size(); ++k)
    CHECK((rev.final_state.vortices[k].h - v0[k].h).norm() <= std::max(10 * fwd_err, 1e-12));
}

TEST_CASE("long same-sign run completes") {
  const SimState s = vortices_only({{Vec2(0.5, 0), Vec2(0, 0.2), 1.0, 1.0},
                                    {Vec2(-0.5, 0), Vec2(0, -0.2), 1.0, 1.0},
                                    {Vec2(0, 0.8), Vec2(0.1, 0), 0.5, 1.0}});
  const RunResult r = run(s, config(1e-2, 10.0));
  CHECK(r.termination == Termination::completed);
  CHECK(r.steps == 1000);
}

TEST_CASE("collision ends the run") {
  // A heavy vortex with a tiny circulation moves almost in a straight line
  // into a second one.
  SimConfig cfg = config(1e-2, 3.0);
  cfg.collision_stop_rho = 0.05;
  const SimState s = vortices_only({{Vec2(-1, 0), Vec2(1, 0), 1.0, 1e-3}, {Vec2(1, 0), Vec2::Zero(), 1.0, 1e-3}});
  const RunResult r = run(s, cfg);
  CHECK(r.termination == Termination::collision);
  CHECK(r.failure_time > 1.8);
  CHECK(r.failure_time < 2.0);
  CHECK(min_vortex_distance(r.final_state.vortices) >= 0.05);
  CHECK(r.message.find("collision") != std::string::npos);
  CHECK_THROWS_AS(step(r.final_state, cfg, 0.5), CollisionError);
}

TEST_CASE("adaptive substeps") {
  const SimConfig cfg = config(0.1, 1.0);
  const SimState s = vortices_only({{Vec2(0, 0), Vec2(1, 0), 1.0, 1.0}});
  StepModel model = coupled_model(cfg);
  SUBCASE("substeps double until the bound holds") {
    model.max_substep = [](const SimState&, const StateDerivative&) { return 0.01; };
    const StepOutcome o = advance(s, 0.1, cfg, model);
    CHECK(o.substeps_taken == 16);
    CHECK(o.state.t == doctest::Approx(0.1));
  }
  SUBCASE("more than the limit raises a stiffness error") {
    model.max_substep = [](const SimState&, const StateDerivative&) { return 1e-6; };
    CHECK_THROWS_AS(advance(s, 0.1, cfg, model), StiffnessError);
    try {
      advance(s, 0.1, cfg, model);
    } catch (const StiffnessError& e) {
      CHECK(e.time() == 0.0);
    }
  }
  SUBCASE("close particles force substeps") {
    SimState p = s;
    Eigen::Matrix2Xd x(2, 1);
    x << 0.01, 0.0;
    p.cloud.append_tracers(x);
    p.vortices[0].hdot = Vec2::Zero();
    p.vortices[0].mass = 0.0;
    const StepOutcome o = step(p, cfg);
    CHECK(o.substeps_taken > 1);
    CHECK(o.min_particle_vortex_distance == doctest::Approx(0.01).epsilon(1e-3));
  }
}

TEST_CASE("picard mode is rejected by the coupled stepper") {
  SimConfig cfg = config(0.1, 1.0);
  cfg.mode = Mode::picard;
  CHECK_THROWS_AS(step(vortices_only({{Vec2(0, 0), Vec2(1, 0), 1.0, 1.0}}), cfg), ConfigError);
}

TEST_CASE("input snapshots are not modified") {
  const SimState s = vortices_only({{Vec2(0, 0), Vec2(1, 0), 1.0, 1.0}});
  const SimState copy = s;
  (void)step(s, config(0.1, 1.0));
  CHECK(s.vortices[0].h == copy.vortices[0].h);
  CHECK(s.t == 0.0);
}
