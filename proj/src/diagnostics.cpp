#include "vwave/diagnostics.hpp"

#include "vwave/kernels.hpp"
#include "vwave/summation.hpp"
#include "vwave/velocity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace vwave {

namespace {

constexpr double kInv2Pi = 1.0 / (2.0 * std::numbers::pi);

std::vector<Eigen::Index> weighted_indices(const ParticleCloud& cloud) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < cloud.size(); ++i)
    if (cloud.weights(i) != 0.0) idx.push_back(i);
  return idx;
}

double checked_log_distance(const Vec2& a, const Vec2& b) {
  const double r = (a - b).norm();
  if (r == 0.0) throw CollisionError("vortex collision");
  return std::log(r);
}

}  // namespace

double energy_H0(const SimState& state, double eps) {
  const auto& c = state.cloud;
  const auto& vs = state.vortices;
  const auto idx = weighted_indices(c);

  CompensatedSum<double> ww;
  for (std::size_t a = 0; a < idx.size(); ++a) {
    const Vec2 xa = c.positions.col(idx[a]);
    const double ga = c.weights(idx[a]);
    CompensatedSum<double> row;
    for (std::size_t b = a + 1; b < idx.size(); ++b)
      row += c.weights(idx[b]) * mollified_log((xa - c.positions.col(idx[b])).norm(), eps);
    ww += ga * row.value();
  }
  // unordered pairs counted twice, times 1/2pi
  double energy = ww.value() / std::numbers::pi;

  CompensatedSum<double> wv;
  for (const auto& v : vs)
    for (const auto i : idx) wv += v.gamma * c.weights(i) * mollified_log((c.positions.col(i) - v.h).norm(), eps);
  energy += wv.value() / std::numbers::pi;

  return energy + vortex_functional_H(vs);
}

double momentum_I0(const SimState& state) {
  const auto& c = state.cloud;
  CompensatedSum<double> acc;
  for (Eigen::Index i = 0; i < c.size(); ++i) acc += c.weights(i) * c.positions.col(i).squaredNorm();
  for (const auto& v : state.vortices) {
    acc += v.gamma * v.h.squaredNorm();
    acc += -2.0 * v.mass * perp(v.h).dot(v.hdot);
  }
  return acc.value();
}

double vortex_functional_H(std::span<const MassiveVortex> vs) {
  double pairs = 0.0;
  for (std::size_t j = 0; j < vs.size(); ++j)
    for (std::size_t k = j + 1; k < vs.size(); ++k) pairs += vs[j].gamma * vs[k].gamma * checked_log_distance(vs[j].h, vs[k].h);
  double kinetic = 0.0;
  for (const auto& v : vs) kinetic += v.mass * v.hdot.squaredNorm();
  return pairs / std::numbers::pi - kinetic;
}

double vortex_functional_H_rate(std::span<const MassiveVortex> vs, std::span<const Vec2> u) {
  if (u.size() != vs.size()) throw Error("H rate: one fluid velocity per vortex is required");
  double acc = 0.0;
  for (std::size_t k = 0; k < vs.size(); ++k) acc += vs[k].gamma * vs[k].hdot.dot(perp(u[k]));
  return 2.0 * acc;
}

double pair_distance_lower_bound(std::span<const MassiveVortex> vs, std::size_t j, std::size_t k) {
  if (j >= vs.size() || k >= vs.size() || j == k) throw Error("pair bound: invalid vortex pair");
  const double H = vortex_functional_H(vs);
  double s = 0.0;
  for (const auto& p : vs)
    for (const auto& l : vs) s += p.gamma * l.gamma * (p.h.norm() + l.h.norm());
  return std::exp((-2.0 * std::numbers::pi * std::abs(H) - s) / (vs[j].gamma * vs[k].gamma));
}

double local_energy_Fk(const SimState& state, const Vec2& X, std::size_t k, double eps) {
  const auto& vs = state.vortices;
  if (k >= vs.size()) throw Error("local energy: vortex index out of range");
  double logs = 0.0;
  for (const auto& v : vs) {
    const double r = (X - v.h).norm();
    if (r == 0.0) throw SingularEvaluation("evaluation at vortex");
    logs += v.gamma * std::log(r);
  }
  return logs * kInv2Pi + stream_phi_eps(state.cloud, X, eps) + X.dot(perp(vs[k].hdot));
}

double dphi_eps_dt(const ParticleCloud& cloud, const Eigen::Matrix2Xd& vel, const Vec2& x, double eps) {
  if (vel.cols() != cloud.size()) throw Error("dphi/dt: one velocity per particle is required");
  CompensatedSum<double> acc;
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    const double w = cloud.weights(i);
    if (w == 0.0) continue;
    const Vec2 d = cloud.positions.col(i) - x;
    const double r = d.norm();
    if (r == 0.0) continue;
    acc += w * mollified_log_deriv(r, eps) / r * d.dot(vel.col(i));
  }
  return acc.value() * kInv2Pi;
}

double local_energy_rate(const SimState& state, const StateDerivative& d, const Vec2& X, const Vec2& u_at_X,
                         std::size_t k, double eps) {
  const auto& vs = state.vortices;
  if (k >= vs.size()) throw Error("local energy: vortex index out of range");
  if (d.massless[k]) throw Error("local energy rate: vortex must be massive");
  const Vec2 hk_dot = d.vortex_hdots[k];
  double rate = -perp(u_at_X).dot(hk_dot) + dphi_eps_dt(state.cloud, d.particle_velocities, X, eps) +
                X.dot(perp(d.vortex_hddots[k]));
  for (std::size_t j = 0; j < vs.size(); ++j) {
    if (j == k) continue;
    const Vec2 e = X - vs[j].h;
    const double r2 = e.squaredNorm();
    if (r2 == 0.0) throw SingularEvaluation("evaluation at vortex");
    rate += vs[j].gamma * kInv2Pi * e.dot(hk_dot - d.vortex_hdots[j]) / r2;
  }
  return rate;
}

HistogramGrid HistogramGrid::aligned(const Eigen::Matrix2Xd& anchor, const Eigen::Matrix2Xd& cover, double cell) {
  if (!(cell > 0.0)) throw Error("histogram cell size must be positive");
  HistogramGrid g;
  g.cell = cell;
  if (anchor.cols() == 0) return g;
  const Vec2 alo = anchor.rowwise().minCoeff();
  Vec2 lo = alo;
  Vec2 hi = anchor.rowwise().maxCoeff();
  if (cover.cols() > 0) {
    lo = lo.cwiseMin(Vec2(cover.rowwise().minCoeff()));
    hi = hi.cwiseMax(Vec2(cover.rowwise().maxCoeff()));
  }
  for (int a = 0; a < 2; ++a) g.origin(a) = alo(a) - cell * (std::ceil((alo(a) - lo(a)) / cell) + 2.0);
  g.nx = static_cast<Eigen::Index>(std::ceil((hi.x() - g.origin.x()) / cell)) + 2;
  g.ny = static_cast<Eigen::Index>(std::ceil((hi.y() - g.origin.y()) / cell)) + 2;
  return g;
}

Eigen::MatrixXd deposit_vorticity(const ParticleCloud& cloud, const HistogramGrid& g) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(g.nx, g.ny);
  for (Eigen::Index p = 0; p < cloud.size(); ++p) {
    const double w = cloud.weights(p);
    if (w == 0.0) continue;
    // nodes sit at cell centers
    const Vec2 s = (Vec2(cloud.positions.col(p)) - g.origin) / g.cell - Vec2::Constant(0.5);
    const double fi = std::floor(s.x());
    const double fj = std::floor(s.y());
    const auto i = static_cast<Eigen::Index>(fi);
    const auto j = static_cast<Eigen::Index>(fj);
    if (i < 0 || j < 0 || i + 1 >= g.nx || j + 1 >= g.ny) throw Error("deposit: particle outside histogram grid");
    const double ax = s.x() - fi;
    const double ay = s.y() - fj;
    m(i, j) += w * (1 - ax) * (1 - ay);
    m(i + 1, j) += w * ax * (1 - ay);
    m(i, j + 1) += w * (1 - ax) * ay;
    m(i + 1, j + 1) += w * ax * ay;
  }
  return m / (g.cell * g.cell);
}

namespace {

double lp_of(const Eigen::ArrayXd& values, double measure, double p) {
  if (values.size() == 0) return 0.0;
  if (std::isinf(p)) return values.abs().maxCoeff();
  CompensatedSum<double> acc;
  for (Eigen::Index i = 0; i < values.size(); ++i) acc += measure * std::pow(std::abs(values(i)), p);
  return std::pow(acc.value(), 1.0 / p);
}

}  // namespace

LpReport lp_norms(const ParticleCloud& cloud, std::span<const double> ps, std::optional<double> cell) {
  for (const double p : ps)
    if (!(p >= 1.0)) throw Error("Lp norms need p >= 1");
  const auto idx = weighted_indices(cloud);
  Eigen::ArrayXd omega(static_cast<Eigen::Index>(idx.size()));
  Eigen::Matrix2Xd anchor(2, omega.size());
  Eigen::Matrix2Xd cover(2, omega.size());
  for (std::size_t a = 0; a < idx.size(); ++a) {
    omega(static_cast<Eigen::Index>(a)) = cloud.vorticity(idx[a]);
    anchor.col(static_cast<Eigen::Index>(a)) = cloud.initial_positions.col(idx[a]);
    cover.col(static_cast<Eigen::Index>(a)) = cloud.positions.col(idx[a]);
  }
  LpReport r;
  for (const double p : ps) r.weight_based.push_back({p, lp_of(omega, cloud.cell_area, p)});

  const double h = cell.value_or(4.0 * std::sqrt(cloud.cell_area));
  Eigen::ArrayXd grid_values;
  if (!idx.empty()) {
    const HistogramGrid g = HistogramGrid::aligned(anchor, cover, h);
    const Eigen::MatrixXd dep = deposit_vorticity(cloud, g);
    grid_values = Eigen::Map<const Eigen::ArrayXd>(dep.data(), dep.size());
  }
  for (const double p : ps) r.histogram.push_back({p, lp_of(grid_values, h * h, p)});
  return r;
}

double measure_preservation_defect(const Eigen::Matrix2Xd& initial, const Eigen::Matrix2Xd& current, int grid_size) {
  if (initial.cols() != current.cols()) throw Error("measure defect: position sets differ in length");
  if (grid_size < 1) throw Error("measure defect: grid size must be positive");
  if (initial.cols() == 0) return std::numeric_limits<double>::quiet_NaN();
  const double disp = (current - initial).colwise().norm().maxCoeff();
  const Vec2 lo = Vec2(initial.rowwise().minCoeff()) + Vec2::Constant(disp);
  const Vec2 hi = Vec2(initial.rowwise().maxCoeff()) - Vec2::Constant(disp);
  if (!(hi.x() > lo.x() && hi.y() > lo.y())) return std::numeric_limits<double>::quiet_NaN();
  const Vec2 cell = (hi - lo) / grid_size;

  auto count = [&](const Eigen::Matrix2Xd& pts) {
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(grid_size, grid_size);
    for (Eigen::Index p = 0; p < pts.cols(); ++p) {
      const double sx = (pts(0, p) - lo.x()) / cell.x();
      const double sy = (pts(1, p) - lo.y()) / cell.y();
      if (sx < 0.0 || sy < 0.0 || sx >= grid_size || sy >= grid_size) continue;
      c(static_cast<Eigen::Index>(sx), static_cast<Eigen::Index>(sy)) += 1.0;
    }
    return c;
  };
  const Eigen::MatrixXd c0 = count(initial);
  const Eigen::MatrixXd ct = count(current);
  double defect = 0.0;
  for (Eigen::Index j = 0; j < grid_size; ++j)
    for (Eigen::Index i = 0; i < grid_size; ++i)
      if (c0(i, j) > 0.0) defect = std::max(defect, std::abs(ct(i, j) / c0(i, j) - 1.0));
  return defect;
}

double measure_preservation_defect(const ParticleCloud& cloud, int grid_size) {
  return measure_preservation_defect(cloud.initial_positions, cloud.positions, grid_size);
}

ConstancyReport constancy_check(const SimState& state, const InitialData& init, std::size_t k, double radius) {
  if (k >= state.vortices.size() || k >= init.vortices.size()) throw Error("constancy check: vortex index out of range");
  const Vec2 h0 = init.vortices[k].h0;
  const Patch* patch = nullptr;
  for (const auto& p : init.patches)
    if ((p.center - h0).norm() <= 1e-12 * std::max(1.0, h0.norm())) patch = &p;
  if (!patch) throw Error("constancy check: no patch is centered at the vortex initial position");

  ConstancyReport r;
  r.delta0 = patch->radius;
  r.alpha = patch->level;
  const Vec2 hk = state.vortices[k].h;
  const auto& c = state.cloud;
  double dev = 0.0;
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    if ((Vec2(c.positions.col(i)) - hk).norm() >= radius) continue;
    const Vec2 x0 = c.initial_positions.col(i);
    ++r.samples;
    dev = std::max(dev, std::abs(init.vorticity(x0) - patch->level));
    if ((x0 - h0).norm() >= patch->radius) ++r.violations;
  }
  r.no_samples = r.samples == 0;
  r.max_abs_deviation = r.no_samples ? std::numeric_limits<double>::quiet_NaN() : dev;
  return r;
}

double solution_distance_D(const SimState& a, const SimState& b, int grid_size, double theta) {
  if (a.vortices.size() != b.vortices.size()) throw Error("solution distance: vortex counts differ");
  if (grid_size < 1) throw Error("solution distance: grid size must be positive");
  double vortex_terms = 0.0;
  for (std::size_t k = 0; k < a.vortices.size(); ++k) {
    vortex_terms += (a.vortices[k].h - b.vortices[k].h).squaredNorm();
    vortex_terms += (a.vortices[k].hdot - b.vortices[k].hdot).squaredNorm();
  }

  Vec2 lo = Vec2::Constant(std::numeric_limits<double>::infinity());
  Vec2 hi = -lo;
  bool any_particles = false;
  for (const SimState* s : {&a, &b}) {
    for (Eigen::Index i = 0; i < s->cloud.size(); ++i) {
      if (s->cloud.weights(i) == 0.0) continue;
      any_particles = true;
      lo = lo.cwiseMin(Vec2(s->cloud.positions.col(i)));
      hi = hi.cwiseMax(Vec2(s->cloud.positions.col(i)));
    }
    for (const auto& v : s->vortices) {
      lo = lo.cwiseMin(v.h);
      hi = hi.cwiseMax(v.h);
    }
  }
  if (!any_particles) return vortex_terms;
  const Vec2 pad = 0.1 * (hi - lo).cwiseMax(Vec2::Constant(1e-12));
  lo -= pad;
  hi += pad;
  const Vec2 cell = (hi - lo) / grid_size;

  Eigen::Matrix2Xd targets(2, static_cast<Eigen::Index>(grid_size) * grid_size);
  for (int j = 0; j < grid_size; ++j)
    for (int i = 0; i < grid_size; ++i)
      targets.col(static_cast<Eigen::Index>(j) * grid_size + i) = lo + Vec2((i + 0.5) * cell.x(), (j + 0.5) * cell.y());
  const VelocityField fa(a.cloud, a.vortices, theta);
  const VelocityField fb(b.cloud, b.vortices, theta);
  const Eigen::Matrix2Xd diff = fa.eval_u(targets) - fb.eval_u(targets);
  CompensatedSum<double> l2;
  for (Eigen::Index i = 0; i < diff.cols(); ++i) l2 += diff.col(i).squaredNorm();
  return l2.value() * cell.x() * cell.y() + vortex_terms;
}

double support_radius(const ParticleCloud& cloud) {
  double r = 0.0;
  for (Eigen::Index i = 0; i < cloud.size(); ++i)
    if (cloud.weights(i) != 0.0) r = std::max(r, cloud.positions.col(i).norm());
  return r;
}

void ConfinementTracker::observe(std::span<const MassiveVortex> vs) {
  for (std::size_t k = 0; k < vs.size(); ++k) {
    report_.max_h = std::max(report_.max_h, vs[k].h.norm());
    report_.max_hdot = std::max(report_.max_hdot, vs[k].hdot.norm());
    for (std::size_t j = k + 1; j < vs.size(); ++j)
      report_.min_pair_dist = std::min(report_.min_pair_dist, (vs[k].h - vs[j].h).norm());
  }
}

ConfinementReport confinement_report(const std::vector<std::vector<MassiveVortex>>& series) {
  ConfinementTracker t;
  for (const auto& vs : series) t.observe(vs);
  return t.report();
}

DiagnosticsRecorder::DiagnosticsRecorder(const SimConfig& cfg, std::size_t max_tags) : cfg_(cfg), max_tags_(max_tags) {}

DiagnosticsRecord DiagnosticsRecorder::record(const SimState& s) {
  DiagnosticsRecord r;
  r.t = s.t;
  r.H0 = energy_H0(s, cfg_.mollifier_eps);
  r.I0 = momentum_I0(s);
  r.Hn = vortex_functional_H(s.vortices);
  r.min_vortex_dist = min_vortex_distance(s.vortices);
  r.min_particle_vortex_dist = min_particle_vortex_distance(s.cloud.positions, s.vortices);
  r.support_radius = support_radius(s.cloud);

  const double ps[] = {1.0, 2.0, std::numeric_limits<double>::infinity()};
  Eigen::ArrayXd omega(s.cloud.size());
  for (Eigen::Index i = 0; i < s.cloud.size(); ++i) omega(i) = s.cloud.vorticity(i);
  for (const double p : ps) r.Lp.push_back({p, lp_of(omega, s.cloud.cell_area, p)});

  const Eigen::Index n = s.cloud.size();
  const Eigen::Index tags = std::min<Eigen::Index>(n, static_cast<Eigen::Index>(max_tags_));
  r.Fk.assign(s.vortices.size(), std::numeric_limits<double>::quiet_NaN());
  if (tags > 0) {
    const Eigen::Index stride = n / tags;
    for (std::size_t k = 0; k < s.vortices.size(); ++k) {
      double sum = 0.0;
      std::size_t used = 0;
      for (Eigen::Index t = 0; t < tags; ++t) {
        try {
          sum += local_energy_Fk(s, s.cloud.positions.col(t * stride), k, cfg_.mollifier_eps);
          ++used;
        } catch (const SingularEvaluation&) {
        }
      }
      if (used > 0) r.Fk[k] = sum / static_cast<double>(used);
    }
  }
  return r;
}

}  // namespace vwave
