#include "vwave/bench.hpp"

#include "vwave/velocity.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>

namespace vwave {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Uncompensated reference loop, so the direct timing is not inflated by the
// compensated summation.
Vec2 plain_direct(const Eigen::Matrix2Xd& src, const Eigen::VectorXd& w, const Vec2& x, double sigma) {
  const double inv_s2 = 1.0 / (sigma * sigma);
  double ax = 0.0;
  double ay = 0.0;
  for (Eigen::Index i = 0; i < src.cols(); ++i) {
    const double ex = x.x() - src(0, i);
    const double ey = x.y() - src(1, i);
    const double r2 = ex * ex + ey * ey;
    if (r2 == 0.0) continue;
    const double s = r2 * inv_s2;
    const double f = w(i) * (s > 40.0 ? 1.0 : -std::expm1(-s)) / r2;
    ax -= f * ey;
    ay += f * ex;
  }
  return Vec2(ax, ay) / (2.0 * std::numbers::pi);
}

}  // namespace

VelocityBenchResult bench_velocity(const VelocityBenchOptions& opt) {
  if (opt.n < 1) throw Error("bench: n must be positive");
  if (!(opt.theta > 0.0 && opt.theta < 1.0)) throw Error("bench: theta must lie in (0, 1)");
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Eigen::Matrix2Xd pos(2, opt.n);
  Eigen::VectorXd w(opt.n);
  for (Eigen::Index i = 0; i < opt.n; ++i) {
    const double r = std::sqrt(uni(rng));
    const double a = 2.0 * std::numbers::pi * uni(rng);
    pos.col(i) = Vec2(r * std::cos(a), r * std::sin(a));
    w(i) = (1.0 - uni(rng)) / static_cast<double>(opt.n);
  }

  VelocityBenchResult res;
  res.n = opt.n;
  res.theta = opt.theta;

  auto t0 = Clock::now();
  const QuadTree tree(pos, w);
  res.tree_build_seconds = seconds_since(t0);
  Eigen::Matrix2Xd u_tree(2, opt.n);
  for (Eigen::Index i = 0; i < opt.n; ++i) u_tree.col(i) = tree.evaluate(pos.col(i), opt.theta, opt.sigma);
  res.tree_seconds = seconds_since(t0);

  const Eigen::Index m = opt.direct_targets <= 0 ? opt.n : std::min(opt.direct_targets, opt.n);
  res.direct_targets = m;
  const Eigen::Index stride = opt.n / m;
  Vec2 sink = Vec2::Zero();
  t0 = Clock::now();
  for (Eigen::Index j = 0; j < m; ++j) sink += direct_blob_sum(pos, w, pos.col(j * stride), opt.sigma);
  const double compensated = seconds_since(t0);
  t0 = Clock::now();
  for (Eigen::Index j = 0; j < m; ++j) sink += plain_direct(pos, w, pos.col(j * stride), opt.sigma);
  const double plain = seconds_since(t0);
  res.direct_seconds = std::min(compensated, plain) * static_cast<double>(opt.n) / static_cast<double>(m);
  if (!sink.allFinite()) throw Error("bench: non-finite direct sum");

  const int probes = static_cast<int>(std::min<Eigen::Index>(opt.probes, opt.n));
  std::uniform_int_distribution<Eigen::Index> pick(0, opt.n - 1);
  double max_err = 0.0;
  double max_u = 0.0;
  double max_point = 0.0;
  for (int p = 0; p < probes; ++p) {
    const Eigen::Index i = pick(rng);
    const Vec2 ud = direct_blob_sum(pos, w, pos.col(i), opt.sigma);
    const double err = (Vec2(u_tree.col(i)) - ud).norm();
    max_err = std::max(max_err, err);
    max_u = std::max(max_u, ud.norm());
    if (ud.norm() > 0.0) max_point = std::max(max_point, err / ud.norm());
  }
  res.max_rel_error = max_u > 0.0 ? max_err / max_u : max_err;
  res.max_pointwise_rel_error = max_point;
  return res;
}

}  // namespace vwave
