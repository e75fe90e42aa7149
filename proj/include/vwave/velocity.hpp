#pragma once

// Velocity assembly: v(x) = u(x) + sum_k gamma_k K(x - h_k), with u the
// blob-regularized field of the particle cloud. u is summed directly
// (compensated) or with a Barnes-Hut quadtree using monopole moments.

#include "vwave/core.hpp"

#include <optional>
#include <span>
#include <vector>

namespace vwave {

/// Barnes-Hut quadtree over weighted sources. A node is replaced by its
/// monopole (total weight at the |weight|-centroid) when
/// side / distance < theta and the target lies outside the node box.
class QuadTree {
 public:
  QuadTree(const Eigen::Matrix2Xd& positions, const Eigen::VectorXd& weights, int leaf_size = 8);

  /// sum_i w_i blob_kernel(x - x_i, sigma), approximated with opening angle theta.
  Vec2 evaluate(const Vec2& x, double theta, double sigma) const;

  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Vec2 lo;
    double side = 0.0;
    Vec2 centroid;
    double weight = 0.0;
    Eigen::Index first = 0;
    Eigen::Index count = 0;
    int child[4] = {-1, -1, -1, -1};
    bool leaf = true;
  };

  int build(const Eigen::Matrix2Xd& p, const Eigen::VectorXd& w, std::vector<Eigen::Index>& idx, Eigen::Index first,
            Eigen::Index count, const Vec2& lo, double side, int depth);

  std::vector<Node> nodes_;
  Eigen::Matrix2Xd pos_;  // sources in tree order
  Eigen::VectorXd w_;
  int leaf_size_;
};

/// Direct compensated sum of w_i blob_kernel(x - x_i, sigma).
Vec2 direct_blob_sum(const Eigen::Matrix2Xd& sources, const Eigen::VectorXd& weights, const Vec2& x, double sigma);

/// sum_{j != k} gamma_j K(h_k - h_j). Throws CollisionError on coincident vortices.
Vec2 point_vortex_velocity(std::span<const MassiveVortex> vortices, std::size_t k);

/// Total velocity field of a cloud plus point vortices. Holds references to
/// its inputs; they must outlive the field.
class VelocityField {
 public:
  VelocityField(const ParticleCloud& cloud, std::span<const MassiveVortex> vortices, double theta);

  double theta() const { return theta_; }
  double sigma() const { return sigma_; }
  Eigen::Index source_count() const { return src_pos_.cols(); }

  /// Blob-regularized u at one target.
  Vec2 eval_u(const Vec2& x) const;
  /// u at every column of `targets`; results in input order.
  Eigen::Matrix2Xd eval_u(const Eigen::Matrix2Xd& targets) const;

  /// sum_k gamma_k K(x - h_k). Throws SingularEvaluation ("evaluation at
  /// vortex") when x coincides with a vortex.
  Vec2 vortex_part(const Vec2& x) const;

  /// u plus the exact singular point-vortex terms.
  Eigen::Matrix2Xd eval_v(const Eigen::Matrix2Xd& targets) const;
  Vec2 eval_v(const Vec2& x) const;

  /// Field seen by vortex k: u(h_k) + sum_{j != k} gamma_j K(h_k - h_j).
  Vec2 eval_rhs_vortex(std::size_t k) const;

 private:
  std::span<const MassiveVortex> vortices_;
  double theta_;
  double sigma_;
  Eigen::Matrix2Xd src_pos_;
  Eigen::VectorXd src_w_;
  std::optional<QuadTree> tree_;
};

}  // namespace vwave
