#include "vwave/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace vwave {

namespace {

bool finite(const Eigen::Matrix2Xd& m) { return m.allFinite(); }

std::string fmt_vec(const Vec2& v) {
  std::ostringstream os;
  os << '(' << v.x() << ", " << v.y() << ')';
  return os.str();
}

}  // namespace

ParticleCloud::ParticleCloud(Eigen::Matrix2Xd pos, Eigen::VectorXd w, double sigma, double area)
    : positions(std::move(pos)), weights(std::move(w)), blob_radius(sigma), cell_area(area) {
  initial_positions = positions;
}

void ParticleCloud::append_tracers(const Eigen::Matrix2Xd& tracers) {
  const Eigen::Index n = size();
  const Eigen::Index m = tracers.cols();
  positions.conservativeResize(Eigen::NoChange, n + m);
  initial_positions.conservativeResize(Eigen::NoChange, n + m);
  weights.conservativeResize(n + m);
  positions.rightCols(m) = tracers;
  initial_positions.rightCols(m) = tracers;
  weights.tail(m).setZero();
}

void ParticleCloud::validate() const {
  if (weights.size() != positions.cols() || initial_positions.cols() != positions.cols())
    throw Error("particle cloud: positions, weights and initial positions differ in length");
  if (!(blob_radius > 0.0)) throw Error("particle cloud: blob radius must be positive");
  if (!(cell_area > 0.0)) throw Error("particle cloud: cell area must be positive");
  if (!finite(positions) || !weights.allFinite()) throw Error("particle cloud: non-finite particle data");
}

void SimState::validate() const {
  cloud.validate();
  for (const auto& v : vortices) {
    if (!v.h.allFinite() || !v.hdot.allFinite()) throw Error("vortex state is not finite");
    if (v.mass < 0.0) throw Error("vortex mass must be non-negative");
    if (v.gamma == 0.0) throw Error("vortex circulation must be non-zero");
  }
  if (vortices.size() > 1 && !(min_vortex_distance(vortices) > 0.0)) throw CollisionError("vortex collision", t);
}

double min_vortex_distance(const std::vector<MassiveVortex>& vortices) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < vortices.size(); ++j)
    for (std::size_t k = j + 1; k < vortices.size(); ++k)
      best = std::min(best, (vortices[j].h - vortices[k].h).norm());
  return best;
}

double min_particle_vortex_distance(const Eigen::Matrix2Xd& positions, const std::vector<MassiveVortex>& vortices) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& v : vortices) {
    if (positions.cols() == 0) break;
    best = std::min(best, (positions.colwise() - v.h).colwise().norm().minCoeff());
  }
  return best;
}

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::full:
      return "full";
    case Mode::vortex_wave:
      return "vortex_wave";
    case Mode::picard:
      return "picard";
  }
  return "full";
}

Mode mode_from_string(const std::string& name) {
  if (name == "full") return Mode::full;
  if (name == "vortex_wave") return Mode::vortex_wave;
  if (name == "picard") return Mode::picard;
  throw ConfigError("unknown mode '" + name + "' (expected full, vortex_wave or picard)");
}

void SimConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be positive");
  };
  positive(dt, "dt");
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw ConfigError("horizon must be non-negative");
  positive(blob_sigma, "blob_sigma");
  positive(mollifier_eps, "mollifier_eps");
  positive(kernel_delta, "kernel_delta");
  positive(collision_stop_rho, "collision_stop_rho");
  positive(picard_tol, "picard_tol");
  positive(particle_density, "particle_density");
  if (!(treecode_theta >= 0.0 && treecode_theta < 1.0)) throw ConfigError("treecode_theta must lie in [0, 1)");
  if (picard_iters < 1) throw ConfigError("picard_iters must be at least 1");
  if (diag_stride < 1) throw ConfigError("diag_stride must be at least 1");
}

double SampledField::operator()(const Vec2& x) const {
  if (values.size() == 0) return 0.0;
  const Vec2 s = (x - origin) / spacing;
  const double nx = static_cast<double>(values.rows() - 1);
  const double ny = static_cast<double>(values.cols() - 1);
  if (s.x() < 0.0 || s.y() < 0.0 || s.x() > nx || s.y() > ny) return 0.0;
  const Eigen::Index i = std::min<Eigen::Index>(static_cast<Eigen::Index>(s.x()), values.rows() - 2 < 0 ? 0 : values.rows() - 2);
  const Eigen::Index j = std::min<Eigen::Index>(static_cast<Eigen::Index>(s.y()), values.cols() - 2 < 0 ? 0 : values.cols() - 2);
  if (values.rows() == 1 || values.cols() == 1) return values(i, j);
  const double fx = s.x() - static_cast<double>(i);
  const double fy = s.y() - static_cast<double>(j);
  return (1 - fx) * (1 - fy) * values(i, j) + fx * (1 - fy) * values(i + 1, j) + (1 - fx) * fy * values(i, j + 1) +
         fx * fy * values(i + 1, j + 1);
}

void InitialData::validate() const {
  if (!(support_radius > 0.0)) throw ConfigError("support_radius must be positive");
  for (const auto& p : patches) {
    if (!(p.radius > 0.0)) throw ConfigError("patch radius must be positive");
    if (p.center.norm() + p.radius > support_radius * (1 + 1e-12))
      throw ConfigError("patch centered at " + fmt_vec(p.center) + " leaves B(0, support_radius)");
  }
  for (std::size_t a = 0; a < patches.size(); ++a)
    for (std::size_t b = a + 1; b < patches.size(); ++b)
      if (patches[a].level != patches[b].level &&
          (patches[a].center - patches[b].center).norm() < patches[a].radius + patches[b].radius)
        throw ConfigError("ambiguous initial vorticity: overlapping patches at " + fmt_vec(patches[a].center) +
                          " and " + fmt_vec(patches[b].center) + " have different levels");
  if (background) {
    const auto& b = *background;
    if (!(b.spacing > 0.0)) throw ConfigError("background spacing must be positive");
    for (Eigen::Index i = 0; i < b.values.rows(); ++i)
      for (Eigen::Index j = 0; j < b.values.cols(); ++j) {
        if (b.values(i, j) == 0.0) continue;
        const Vec2 x = b.origin + b.spacing * Vec2(static_cast<double>(i), static_cast<double>(j));
        if (x.cwiseAbs().maxCoeff() > support_radius * (1 + 1e-12))
          throw ConfigError("background vorticity leaves the lattice box [-R0, R0]^2");
      }
  }
  for (std::size_t j = 0; j < vortices.size(); ++j) {
    if (vortices[j].mass < 0.0) throw ConfigError("vortex mass must be non-negative");
    if (vortices[j].gamma == 0.0) throw ConfigError("vortex circulation must be non-zero");
    for (std::size_t k = j + 1; k < vortices.size(); ++k)
      if (vortices[j].h0 == vortices[k].h0) throw ConfigError("vortex initial positions must be distinct");
  }
}

double InitialData::vorticity(const Vec2& x) const {
  bool hit = false;
  double level = 0.0;
  for (const auto& p : patches) {
    if ((x - p.center).squaredNorm() >= p.radius * p.radius) continue;
    if (hit && p.level != level) throw ConfigError("ambiguous initial vorticity at " + fmt_vec(x));
    hit = true;
    level = p.level;
  }
  if (hit) return level;
  return background ? (*background)(x) : 0.0;
}

bool InitialData::in_support(const Vec2& x) const {
  for (const auto& p : patches)
    if ((x - p.center).squaredNorm() < p.radius * p.radius) return true;
  return background && (*background)(x) != 0.0;
}

ParticleCloud discretize(const InitialData& init, double particles_per_unit_area, double blob_sigma) {
  if (!(particles_per_unit_area > 0.0)) throw ConfigError("particles_per_unit_area must be positive");
  init.validate();
  const double width = 2.0 * init.support_radius;
  const auto cells = static_cast<Eigen::Index>(std::ceil(width * std::sqrt(particles_per_unit_area) - 1e-9));
  const double h = width / static_cast<double>(cells);
  const double area = h * h;

  std::vector<Vec2> pos;
  std::vector<double> w;
  for (Eigen::Index j = 0; j < cells; ++j) {
    for (Eigen::Index i = 0; i < cells; ++i) {
      const Vec2 x(-init.support_radius + (static_cast<double>(i) + 0.5) * h,
                   -init.support_radius + (static_cast<double>(j) + 0.5) * h);
      if (!init.in_support(x)) continue;
      pos.push_back(x);
      w.push_back(init.vorticity(x) * area);
    }
  }
  Eigen::Matrix2Xd positions(2, static_cast<Eigen::Index>(pos.size()));
  for (std::size_t i = 0; i < pos.size(); ++i) positions.col(static_cast<Eigen::Index>(i)) = pos[i];
  Eigen::VectorXd weights = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
  return ParticleCloud(std::move(positions), std::move(weights), blob_sigma, area);
}

std::vector<MassiveVortex> initial_vortices(const InitialData& init) {
  std::vector<MassiveVortex> out;
  out.reserve(init.vortices.size());
  for (const auto& v : init.vortices) out.push_back({v.h0, v.l0, v.mass, v.gamma});
  return out;
}

SimState initial_state(const InitialData& init, const SimConfig& cfg) {
  cfg.validate();
  SimState s;
  s.t = 0.0;
  s.cloud = discretize(init, cfg.particle_density, cfg.blob_sigma);
  s.vortices = initial_vortices(init);
  s.validate();
  return s;
}

Eigen::Matrix2Xd tracer_lattice(const Vec2& lo, const Vec2& hi, double spacing) {
  if (!(spacing > 0.0)) throw Error("tracer spacing must be positive");
  const auto nx = static_cast<Eigen::Index>(std::floor((hi.x() - lo.x()) / spacing + 1e-9));
  const auto ny = static_cast<Eigen::Index>(std::floor((hi.y() - lo.y()) / spacing + 1e-9));
  Eigen::Matrix2Xd out(2, std::max<Eigen::Index>(nx, 0) * std::max<Eigen::Index>(ny, 0));
  Eigen::Index c = 0;
  for (Eigen::Index j = 0; j < ny; ++j)
    for (Eigen::Index i = 0; i < nx; ++i)
      out.col(c++) = lo + spacing * Vec2(static_cast<double>(i) + 0.5, static_cast<double>(j) + 0.5);
  return out;
}

}  // namespace vwave
