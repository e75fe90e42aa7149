#include "vwave/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace vwave {

namespace {

constexpr double kSafety = 4.0;

// stage = base + a * d, written into `out` (which already has base's shape).
void make_stage(const SimState& base, const StateDerivative& d, double a, double t, SimState& out) {
  out.t = t;
  out.cloud.positions = base.cloud.positions + a * d.particle_velocities;
  for (std::size_t k = 0; k < base.vortices.size(); ++k) {
    out.vortices[k].h = base.vortices[k].h + a * d.vortex_hdots[k];
    if (!d.massless[k]) out.vortices[k].hdot = base.vortices[k].hdot + a * d.vortex_hddots[k];
  }
}

std::string at_time(const std::string& what, double t) {
  std::ostringstream os;
  os.precision(17);
  os << what << " at t = " << t;
  return os.str();
}

}  // namespace

double coupled_max_substep(const SimState& state, const StateDerivative& d) {
  double h = std::numeric_limits<double>::infinity();
  const auto& vs = state.vortices;
  const auto& pos = state.cloud.positions;
  for (std::size_t k = 0; k < vs.size(); ++k) {
    for (Eigen::Index i = 0; i < pos.cols(); ++i) {
      const double dist = (pos.col(i) - vs[k].h).norm();
      const double speed = (d.particle_velocities.col(i) - d.vortex_hdots[k]).norm();
      if (speed > 0.0) h = std::min(h, dist / (kSafety * speed));
    }
    for (std::size_t j = k + 1; j < vs.size(); ++j) {
      const double dist = (vs[k].h - vs[j].h).norm();
      const double speed = (d.vortex_hdots[k] - d.vortex_hdots[j]).norm();
      if (speed > 0.0) h = std::min(h, dist / (kSafety * speed));
    }
  }
  return h;
}

StepOutcome advance(const SimState& state, double dt, const SimConfig& cfg, const StepModel& model) {
  int n = 1;
  while (true) {
    SimState cur = state;
    SimState stage = state;
    const double h = dt / n;
    bool restart = false;
    for (int s = 0; s < n; ++s) {
      const double t0 = state.t + dt * s / n;
      cur.t = t0;
      StateDerivative k1;
      try {
        k1 = model.derivative(cur);
      } catch (const SingularEvaluation&) {
        throw CollisionError(at_time("collision detected", t0), t0);
      }
      if (model.max_substep(cur, k1) < h) {
        restart = true;
        break;
      }
      try {
        make_stage(cur, k1, 0.5 * h, t0 + 0.5 * h, stage);
        const StateDerivative k2 = model.derivative(stage);
        make_stage(cur, k2, 0.5 * h, t0 + 0.5 * h, stage);
        const StateDerivative k3 = model.derivative(stage);
        make_stage(cur, k3, h, t0 + h, stage);
        const StateDerivative k4 = model.derivative(stage);

        cur.cloud.positions += (h / 6.0) * (k1.particle_velocities + 2.0 * k2.particle_velocities +
                                            2.0 * k3.particle_velocities + k4.particle_velocities);
        for (std::size_t k = 0; k < cur.vortices.size(); ++k) {
          auto& v = cur.vortices[k];
          v.h += (h / 6.0) * (k1.vortex_hdots[k] + 2.0 * k2.vortex_hdots[k] + 2.0 * k3.vortex_hdots[k] +
                              k4.vortex_hdots[k]);
          if (!k1.massless[k])
            v.hdot += (h / 6.0) * (k1.vortex_hddots[k] + 2.0 * k2.vortex_hddots[k] + 2.0 * k3.vortex_hddots[k] +
                                   k4.vortex_hddots[k]);
        }
      } catch (const SingularEvaluation&) {
        throw CollisionError(at_time("collision detected", t0), t0);
      } catch (const CollisionError&) {
        throw CollisionError(at_time("collision detected", t0), t0);
      }
      const double t1 = (s + 1 == n) ? state.t + dt : state.t + dt * (s + 1) / n;
      cur.t = t1;
      if (min_vortex_distance(cur.vortices) < cfg.collision_stop_rho)
        throw CollisionError(at_time("collision detected", t1), t1);
      for (const auto& v : cur.vortices) {
        if (!v.h.allFinite() || !v.hdot.allFinite()) throw StiffnessError(at_time("stiffness limit", t1), t1);
      }
    }
    if (restart) {
      n *= 2;
      if (n > kMaxSubsteps) throw StiffnessError(at_time("stiffness limit", state.t), state.t);
      continue;
    }
    if (model.finish) model.finish(cur);
    StepOutcome out;
    out.substeps_taken = n;
    out.min_vortex_distance = min_vortex_distance(cur.vortices);
    out.min_particle_vortex_distance = min_particle_vortex_distance(cur.cloud.positions, cur.vortices);
    out.state = std::move(cur);
    return out;
  }
}

void refresh_massless_velocities(SimState& state, const SimConfig& cfg) {
  const bool all = cfg.mode == Mode::vortex_wave;
  bool any = false;
  for (const auto& v : state.vortices) any = any || all || v.massless();
  if (!any) return;
  const VelocityField field(state.cloud, state.vortices, cfg.treecode_theta);
  std::vector<Vec2> w(state.vortices.size());
  for (std::size_t k = 0; k < state.vortices.size(); ++k) w[k] = field.eval_rhs_vortex(k);
  for (std::size_t k = 0; k < state.vortices.size(); ++k)
    if (all || state.vortices[k].massless()) state.vortices[k].hdot = w[k];
}

StepModel coupled_model(const SimConfig& cfg) {
  StepModel m;
  m.derivative = [cfg](const SimState& s) { return rhs(s, cfg); };
  m.max_substep = [](const SimState& s, const StateDerivative& d) { return coupled_max_substep(s, d); };
  m.finish = [cfg](SimState& s) { refresh_massless_velocities(s, cfg); };
  return m;
}

StepOutcome step(const SimState& state, const SimConfig& cfg) { return step(state, cfg, cfg.dt); }

StepOutcome step(const SimState& state, const SimConfig& cfg, double dt) {
  if (cfg.mode == Mode::picard) throw ConfigError("step: picard mode is driven by run_picard");
  return advance(state, dt, cfg, coupled_model(cfg));
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::completed: return "completed";
    case Termination::collision: return "collision";
    case Termination::stiffness: return "stiffness";
  }
  return "unknown";
}

std::size_t step_count(const SimConfig& cfg) {
  if (cfg.horizon <= 0.0) return 0;
  const double q = cfg.horizon / cfg.dt;
  const double r = std::round(q);
  // Treat ratios within rounding noise of an integer as exact.
  if (std::abs(q - r) <= 1e-9 * std::max(1.0, r)) return static_cast<std::size_t>(r);
  return static_cast<std::size_t>(std::ceil(q));
}

RunResult run(const SimState& initial, const SimConfig& cfg, const RunObserver& observer) {
  cfg.validate();
  if (cfg.mode == Mode::picard) throw ConfigError("run: picard mode is driven by run_picard");
  initial.validate();

  SimState cur = initial;
  if (cfg.mode == Mode::vortex_wave) {
    for (auto& v : cur.vortices) v.mass = 0.0;
  }
  refresh_massless_velocities(cur, cfg);

  const std::size_t nsteps = step_count(cfg);
  const StepModel model = coupled_model(cfg);
  const double t0 = cur.t;
  RunResult res;
  if (observer.on_step) observer.on_step(cur);
  if (observer.on_record) observer.on_record(cur);
  for (std::size_t i = 0; i < nsteps; ++i) {
    const double target = (i + 1 == nsteps) ? t0 + cfg.horizon : t0 + cfg.dt * static_cast<double>(i + 1);
    try {
      StepOutcome o = advance(cur, target - cur.t, cfg, model);
      o.state.t = target;
      cur = std::move(o.state);
    } catch (const CollisionError& e) {
      res.termination = Termination::collision;
      res.failure_time = std::isnan(e.time()) ? cur.t : e.time();
      res.message = e.what();
      break;
    } catch (const StiffnessError& e) {
      res.termination = Termination::stiffness;
      res.failure_time = e.time();
      res.message = e.what();
      break;
    }
    res.steps = i + 1;
    if (observer.on_step) observer.on_step(cur);
    if (observer.on_record && res.steps % static_cast<std::size_t>(cfg.diag_stride) == 0) observer.on_record(cur);
  }
  res.final_state = std::move(cur);
  return res;
}

RunResult run(const InitialData& init, const SimConfig& cfg, const RunObserver& observer) {
  return run(initial_state(init, cfg), cfg, observer);
}

}  // namespace vwave
