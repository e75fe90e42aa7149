#include "vwave/scheme.hpp"

#include "vwave/diagnostics.hpp"
#include "vwave/velocity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace vwave {

namespace {

double grid_tol(const std::vector<double>& times) {
  return 1e-12 * std::max(1.0, times.empty() ? 1.0 : std::abs(times.back()));
}

std::string iterate_message(const char* what, int n, double t) {
  std::ostringstream os;
  os.precision(17);
  os << what << " in iterate " << n << " at t = " << t;
  return os.str();
}

// Largest substep for the frozen-field model: particles against the previous
// vortices, current vortices against each other.
double frozen_max_substep(const SimState& s, const StateDerivative& d, const std::vector<MassiveVortex>& prev) {
  constexpr double kSafety = 4.0;
  double h = std::numeric_limits<double>::infinity();
  const auto& pos = s.cloud.positions;
  for (const auto& v : prev) {
    for (Eigen::Index i = 0; i < pos.cols(); ++i) {
      const double dist = (pos.col(i) - v.h).norm();
      const double speed = (d.particle_velocities.col(i) - v.hdot).norm();
      if (speed > 0.0) h = std::min(h, dist / (kSafety * speed));
    }
  }
  const auto& vs = s.vortices;
  for (std::size_t k = 0; k < vs.size(); ++k)
    for (std::size_t j = k + 1; j < vs.size(); ++j) {
      const double dist = (vs[k].h - vs[j].h).norm();
      const double speed = (d.vortex_hdots[k] - d.vortex_hdots[j]).norm();
      if (speed > 0.0) h = std::min(h, dist / (kSafety * speed));
    }
  return h;
}

}  // namespace

SimState PicardIterate::state_at(std::size_t s) const {
  if (s >= times.size()) throw Error("picard: slice index out of range");
  SimState st;
  st.t = times[s];
  st.cloud = base;
  st.cloud.positions = particle_slices[s];
  st.vortices = vortex_slices[s];
  return st;
}

SimState PicardIterate::interpolate(double t) const {
  if (times.empty()) throw Error("picard: empty iterate");
  if (times.size() == 1 || t <= times.front()) {
    SimState s = state_at(0);
    s.t = t;
    return s;
  }
  if (t >= times.back()) {
    SimState s = state_at(times.size() - 1);
    s.t = t;
    return s;
  }
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t b = static_cast<std::size_t>(it - times.begin());
  const std::size_t a = b - 1;
  const double lam = (t - times[a]) / (times[b] - times[a]);
  SimState s;
  s.t = t;
  s.cloud = base;
  s.cloud.positions = (1.0 - lam) * particle_slices[a] + lam * particle_slices[b];
  s.vortices = vortex_slices[a];
  for (std::size_t k = 0; k < s.vortices.size(); ++k) {
    s.vortices[k].h = (1.0 - lam) * vortex_slices[a][k].h + lam * vortex_slices[b][k].h;
    s.vortices[k].hdot = (1.0 - lam) * vortex_slices[a][k].hdot + lam * vortex_slices[b][k].hdot;
  }
  return s;
}

std::size_t PicardIterate::slice_of(double t) const {
  const double tol = grid_tol(times);
  for (std::size_t s = 0; s < times.size(); ++s)
    if (std::abs(times[s] - t) <= tol) return s;
  throw Error("picard: time is not on the slice grid");
}

std::vector<double> picard_time_grid(const SimConfig& cfg) {
  const std::size_t n = step_count(cfg);
  std::vector<double> t{0.0};
  for (std::size_t i = 1; i <= n; ++i) {
    if (i == n)
      t.push_back(cfg.horizon);
    else if (i % static_cast<std::size_t>(cfg.diag_stride) == 0)
      t.push_back(cfg.dt * static_cast<double>(i));
  }
  return t;
}

PicardIterate picard_initial(const SimState& initial, const SimConfig& cfg) {
  cfg.validate();
  initial.validate();
  PicardIterate it;
  it.index = 0;
  it.times = picard_time_grid(cfg);
  it.base = initial.cloud;
  it.particle_slices.assign(it.times.size(), initial.cloud.positions);
  it.vortex_slices.assign(it.times.size(), initial.vortices);
  return it;
}

PicardIterate picard_initial(const InitialData& init, const SimConfig& cfg) {
  return picard_initial(initial_state(init, cfg), cfg);
}

PicardIterate picard_step(const PicardIterate& prev, const SimConfig& cfg) {
  if (prev.times.empty()) throw Error("picard: empty iterate");
  const int n = prev.index + 1;
  const double theta = cfg.treecode_theta;

  // Frozen configuration of the previous iterate at a stage time. The two
  // most recent lookups are cached since RK4 stages repeat times.
  struct Frozen {
    double t;
    SimState s;
  };
  std::vector<Frozen> cache;
  auto frozen = [&](double t) -> const SimState& {
    for (auto& f : cache)
      if (f.t == t) return f.s;
    if (cache.size() >= 2) cache.erase(cache.begin());
    cache.push_back({t, prev.interpolate(t)});
    return cache.back().s;
  };

  StepModel model;
  model.derivative = [&](const SimState& s) {
    const SimState& fz = frozen(s.t);
    const VelocityField field(fz.cloud, fz.vortices, theta);
    return assemble_derivative(s, field, field, false);
  };
  model.max_substep = [&](const SimState& s, const StateDerivative& d) {
    return frozen_max_substep(s, d, frozen(s.t).vortices);
  };
  model.finish = [&](SimState& s) {
    bool any = false;
    for (const auto& v : s.vortices) any = any || v.massless();
    if (!any) return;
    const StateDerivative d = model.derivative(s);
    for (std::size_t k = 0; k < s.vortices.size(); ++k)
      if (s.vortices[k].massless()) s.vortices[k].hdot = d.vortex_fields[k];
  };

  PicardIterate out;
  out.index = n;
  out.times = prev.times;
  out.base = prev.base;

  SimState cur = prev.state_at(0);
  cur.cloud.positions = prev.base.initial_positions;
  cur.vortices = prev.vortex_slices.front();
  try {
    model.finish(cur);
  } catch (const SingularEvaluation&) {
    throw CollisionError(iterate_message("collision", n, 0.0), 0.0);
  }
  out.particle_slices.push_back(cur.cloud.positions);
  out.vortex_slices.push_back(cur.vortices);

  const std::size_t nsteps = step_count(cfg);
  std::size_t slice = 1;
  for (std::size_t i = 1; i <= nsteps; ++i) {
    const double target = (i == nsteps) ? cfg.horizon : cfg.dt * static_cast<double>(i);
    try {
      StepOutcome o = advance(cur, target - cur.t, cfg, model);
      cur = std::move(o.state);
      cur.t = target;
    } catch (const CollisionError& e) {
      throw CollisionError(iterate_message("collision", n, e.time()), e.time());
    } catch (const StiffnessError& e) {
      throw StiffnessError(iterate_message("stiffness limit", n, e.time()), e.time());
    }
    if (slice < out.times.size() && std::abs(out.times[slice] - cur.t) <= grid_tol(out.times)) {
      out.particle_slices.push_back(cur.cloud.positions);
      out.vortex_slices.push_back(cur.vortices);
      ++slice;
    }
  }
  if (out.particle_slices.size() != out.times.size()) throw Error("picard: slice grid mismatch");
  return out;
}

double picard_distance(const PicardIterate& a, const PicardIterate& b) {
  if (a.times.size() != b.times.size()) throw Error("picard distance: time grids differ");
  for (std::size_t s = 0; s < a.times.size(); ++s)
    if (std::abs(a.times[s] - b.times[s]) > grid_tol(a.times)) throw Error("picard distance: time grids differ");
  double d = 0.0;
  for (std::size_t s = 0; s < a.times.size(); ++s) {
    const auto& va = a.vortex_slices[s];
    const auto& vb = b.vortex_slices[s];
    const auto& pa = a.particle_slices[s];
    const auto& pb = b.particle_slices[s];
    if (va.size() != vb.size() || pa.cols() != pb.cols()) throw Error("picard distance: iterate shapes differ");
    double dh = 0.0;
    double dv = 0.0;
    for (std::size_t k = 0; k < va.size(); ++k) {
      dh = std::max(dh, (va[k].h - vb[k].h).norm());
      dv = std::max(dv, (va[k].hdot - vb[k].hdot).norm());
    }
    const double dx = pa.cols() > 0 ? (pa - pb).colwise().norm().maxCoeff() : 0.0;
    d = std::max(d, dh + dv + dx);
  }
  return d;
}

double picard_hn(const PicardIterate& iter, double t) {
  return vortex_functional_H(iter.vortex_slices[iter.slice_of(t)]);
}

double picard_hn_rate(const PicardIterate& iter, const PicardIterate& prev, std::size_t s, double theta) {
  if (s >= iter.times.size() || prev.times.size() != iter.times.size()) throw Error("picard rate: slice out of range");
  const SimState fz = prev.state_at(s);
  const VelocityField field(fz.cloud, fz.vortices, theta);
  const auto& vs = iter.vortex_slices[s];
  std::vector<Vec2> u(vs.size());
  for (std::size_t k = 0; k < vs.size(); ++k) u[k] = field.eval_u(vs[k].h);
  return vortex_functional_H_rate(vs, u);
}

namespace {

double max_hdot(const PicardIterate& it) {
  double m = 0.0;
  for (const auto& vs : it.vortex_slices)
    for (const auto& v : vs) m = std::max(m, v.hdot.norm());
  return m;
}

}  // namespace

PicardRun run_picard(const SimState& initial, const SimConfig& cfg) {
  PicardRun r;
  r.last = picard_initial(initial, cfg);
  for (int n = 1; n <= cfg.picard_iters; ++n) {
    PicardIterate next;
    try {
      next = picard_step(r.last, cfg);
    } catch (const CollisionError& e) {
      r.termination = Termination::collision;
      r.failure_time = e.time();
      r.failed_iterate = n;
      r.message = e.what();
      return r;
    } catch (const StiffnessError& e) {
      r.termination = Termination::stiffness;
      r.failure_time = e.time();
      r.failed_iterate = n;
      r.message = e.what();
      return r;
    }
    const double d = picard_distance(next, r.last);
    r.history.push_back({n, d, max_hdot(next)});
    r.previous = std::move(r.last);
    r.last = std::move(next);
    if (d < cfg.picard_tol) {
      r.converged = true;
      break;
    }
  }
  return r;
}

PicardRun run_picard(const InitialData& init, const SimConfig& cfg) {
  return run_picard(initial_state(init, cfg), cfg);
}

}  // namespace vwave
