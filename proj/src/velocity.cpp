#include "vwave/velocity.hpp"

#include "vwave/kernels.hpp"
#include "vwave/summation.hpp"

#include <algorithm>
#include <array>
#include <numbers>

namespace vwave {

namespace {

constexpr double kInv2Pi = 1.0 / (2.0 * std::numbers::pi);
constexpr int kMaxDepth = 48;

// (1 - exp(-r2/sigma^2)) / r2 without the 1/2pi factor.
inline double shielded_inverse(double r2, double inv_sigma2) {
  if (r2 == 0.0) return 0.0;
  const double s = r2 * inv_sigma2;
  return (s > 40.0 ? 1.0 : -std::expm1(-s)) / r2;
}

}  // namespace

QuadTree::QuadTree(const Eigen::Matrix2Xd& positions, const Eigen::VectorXd& weights, int leaf_size)
    : leaf_size_(std::max(leaf_size, 1)) {
  const Eigen::Index n = positions.cols();
  if (weights.size() != n) throw Error("quadtree: positions and weights differ in length");
  if (n == 0) return;
  const Vec2 lo = positions.rowwise().minCoeff();
  const Vec2 hi = positions.rowwise().maxCoeff();
  const double side = std::max((hi - lo).maxCoeff(), 1e-300) * (1.0 + 1e-9);
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  nodes_.reserve(static_cast<std::size_t>(2 * n / leaf_size_ + 8));
  build(positions, weights, idx, 0, n, lo, side, 0);
  pos_.resize(2, n);
  w_.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    pos_.col(i) = positions.col(idx[static_cast<std::size_t>(i)]);
    w_(i) = weights(idx[static_cast<std::size_t>(i)]);
  }
}

int QuadTree::build(const Eigen::Matrix2Xd& p, const Eigen::VectorXd& w, std::vector<Eigen::Index>& idx,
                    Eigen::Index first, Eigen::Index count, const Vec2& lo, double side, int depth) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  double total = 0.0;
  double abs_total = 0.0;
  Vec2 moment = Vec2::Zero();
  for (Eigen::Index i = first; i < first + count; ++i) {
    const Eigen::Index j = idx[static_cast<std::size_t>(i)];
    total += w(j);
    abs_total += std::abs(w(j));
    moment += std::abs(w(j)) * p.col(j);
  }
  {
    Node& node = nodes_[static_cast<std::size_t>(id)];
    node.lo = lo;
    node.side = side;
    node.weight = total;
    node.centroid = abs_total > 0.0 ? Vec2(moment / abs_total) : Vec2(lo + Vec2::Constant(side / 2));
    node.first = first;
    node.count = count;
    node.leaf = count <= leaf_size_ || depth >= kMaxDepth;
  }
  if (count <= leaf_size_ || depth >= kMaxDepth) return id;

  const double half = side / 2;
  const Vec2 mid = lo + Vec2::Constant(half);
  auto begin = idx.begin() + first;
  auto end = begin + count;
  auto split_x = std::partition(begin, end, [&](Eigen::Index j) { return p(0, j) < mid.x(); });
  auto split_lo = std::partition(begin, split_x, [&](Eigen::Index j) { return p(1, j) < mid.y(); });
  auto split_hi = std::partition(split_x, end, [&](Eigen::Index j) { return p(1, j) < mid.y(); });

  const std::array<decltype(begin), 5> bounds = {begin, split_lo, split_x, split_hi, end};
  const std::array<Vec2, 4> corners = {lo, Vec2(lo.x(), mid.y()), Vec2(mid.x(), lo.y()), mid};
  for (int q = 0; q < 4; ++q) {
    const auto c = static_cast<Eigen::Index>(bounds[q + 1] - bounds[q]);
    if (c == 0) continue;
    const auto f = static_cast<Eigen::Index>(bounds[q] - idx.begin());
    const int child = build(p, w, idx, f, c, corners[static_cast<std::size_t>(q)], half, depth + 1);
    nodes_[static_cast<std::size_t>(id)].child[q] = child;
  }
  return id;
}

Vec2 QuadTree::evaluate(const Vec2& x, double theta, double sigma) const {
  if (nodes_.empty()) return Vec2::Zero();
  const double inv_sigma2 = 1.0 / (sigma * sigma);
  const double theta2 = theta * theta;
  double ax = 0.0;
  double ay = 0.0;
  std::array<int, 4 * kMaxDepth + 8> stack{};
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[static_cast<std::size_t>(stack[--top])];
    const double dx = x.x() - node.centroid.x();
    const double dy = x.y() - node.centroid.y();
    const double r2 = dx * dx + dy * dy;
    const bool inside = x.x() >= node.lo.x() && x.x() <= node.lo.x() + node.side && x.y() >= node.lo.y() &&
                        x.y() <= node.lo.y() + node.side;
    if (!inside && node.side * node.side < theta2 * r2) {
      const double f = node.weight * shielded_inverse(r2, inv_sigma2);
      ax -= f * dy;
      ay += f * dx;
    } else if (node.leaf) {
      for (Eigen::Index i = node.first; i < node.first + node.count; ++i) {
        const double ex = x.x() - pos_(0, i);
        const double ey = x.y() - pos_(1, i);
        const double f = w_(i) * shielded_inverse(ex * ex + ey * ey, inv_sigma2);
        ax -= f * ey;
        ay += f * ex;
      }
    } else {
      for (int c : node.child)
        if (c >= 0) stack[top++] = c;
    }
  }
  return Vec2(ax, ay) * kInv2Pi;
}

Vec2 direct_blob_sum(const Eigen::Matrix2Xd& sources, const Eigen::VectorXd& weights, const Vec2& x, double sigma) {
  const double inv_sigma2 = 1.0 / (sigma * sigma);
  CompensatedSum<double> ax;
  CompensatedSum<double> ay;
  for (Eigen::Index i = 0; i < sources.cols(); ++i) {
    const double ex = x.x() - sources(0, i);
    const double ey = x.y() - sources(1, i);
    const double f = weights(i) * shielded_inverse(ex * ex + ey * ey, inv_sigma2);
    ax += -f * ey;
    ay += f * ex;
  }
  return Vec2(ax.value(), ay.value()) * kInv2Pi;
}

Vec2 point_vortex_velocity(std::span<const MassiveVortex> vortices, std::size_t k) {
  Vec2 acc = Vec2::Zero();
  for (std::size_t j = 0; j < vortices.size(); ++j) {
    if (j == k) continue;
    const Vec2 d = vortices[k].h - vortices[j].h;
    if (d.squaredNorm() == 0.0) throw CollisionError("vortex collision");
    acc += vortices[j].gamma * biot_savart_K(d);
  }
  return acc;
}

VelocityField::VelocityField(const ParticleCloud& cloud, std::span<const MassiveVortex> vortices, double theta)
    : vortices_(vortices), theta_(theta), sigma_(cloud.blob_radius) {
  if (!(theta >= 0.0 && theta < 1.0)) throw Error("treecode opening angle must lie in [0, 1)");
  Eigen::Index n = 0;
  for (Eigen::Index i = 0; i < cloud.size(); ++i)
    if (cloud.weights(i) != 0.0) ++n;
  src_pos_.resize(2, n);
  src_w_.resize(n);
  Eigen::Index c = 0;
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    if (cloud.weights(i) == 0.0) continue;
    src_pos_.col(c) = cloud.positions.col(i);
    src_w_(c) = cloud.weights(i);
    ++c;
  }
  if (theta_ > 0.0 && n > 0) tree_.emplace(src_pos_, src_w_);
}

Vec2 VelocityField::eval_u(const Vec2& x) const {
  if (src_pos_.cols() == 0) return Vec2::Zero();
  if (tree_) return tree_->evaluate(x, theta_, sigma_);
  return direct_blob_sum(src_pos_, src_w_, x, sigma_);
}

Eigen::Matrix2Xd VelocityField::eval_u(const Eigen::Matrix2Xd& targets) const {
  Eigen::Matrix2Xd out(2, targets.cols());
  for (Eigen::Index i = 0; i < targets.cols(); ++i) out.col(i) = eval_u(Vec2(targets.col(i)));
  return out;
}

Vec2 VelocityField::vortex_part(const Vec2& x) const {
  Vec2 acc = Vec2::Zero();
  for (const auto& v : vortices_) {
    const Vec2 d = x - v.h;
    if (d.squaredNorm() == 0.0) throw SingularEvaluation("evaluation at vortex");
    acc += v.gamma * biot_savart_K(d);
  }
  return acc;
}

Vec2 VelocityField::eval_v(const Vec2& x) const { return eval_u(x) + vortex_part(x); }

Eigen::Matrix2Xd VelocityField::eval_v(const Eigen::Matrix2Xd& targets) const {
  Eigen::Matrix2Xd out(2, targets.cols());
  for (Eigen::Index i = 0; i < targets.cols(); ++i) out.col(i) = eval_v(Vec2(targets.col(i)));
  return out;
}

Vec2 VelocityField::eval_rhs_vortex(std::size_t k) const {
  if (k >= vortices_.size()) throw Error("vortex index out of range");
  return eval_u(vortices_[k].h) + point_vortex_velocity(vortices_, k);
}

}  // namespace vwave
