#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "kinestat/so3.hpp"

// Product-manifold state machinery: an ordered list of Euclidean and SO(3)
// blocks, points on the product, and the boxplus/boxminus retractions the
// filter and the observability analyzer share.

namespace kinestat {

struct StateBlock {
  std::string name;
  int dim = 0;        // tangent dimension (3 for rotation blocks)
  bool rotation = false;

  static StateBlock euclidean(std::string name, int dim) { return {std::move(name), dim, false}; }
  static StateBlock so3(std::string name) { return {std::move(name), 3, true}; }
};

class StateLayout {
 public:
  StateLayout() = default;
  explicit StateLayout(std::vector<StateBlock> blocks);

  int size() const { return static_cast<int>(blocks_.size()); }
  int tangent_dim() const { return tangent_dim_; }
  const StateBlock& block(int i) const { return blocks_[i]; }
  int offset(int i) const { return offsets_[i]; }  // offset into the tangent/error vector
  int index_of(const std::string& name) const;     // throws for unknown names

 private:
  std::vector<StateBlock> blocks_;
  std::vector<int> offsets_;
  int tangent_dim_ = 0;
};

using LayoutPtr = std::shared_ptr<const StateLayout>;

LayoutPtr make_layout(std::vector<StateBlock> blocks);

// A point on the product manifold: Euclidean blocks in one flat vector,
// rotation blocks as matrices. Copyable value type.
class ManifoldPoint {
 public:
  ManifoldPoint() = default;
  explicit ManifoldPoint(LayoutPtr layout);  // zero vectors, identity rotations

  const StateLayout& layout() const { return *layout_; }
  const LayoutPtr& layout_ptr() const { return layout_; }

  Eigen::VectorBlock<Eigen::VectorXd> euclidean(int block);
  Eigen::VectorBlock<const Eigen::VectorXd> euclidean(int block) const;
  Eigen::VectorBlock<Eigen::VectorXd> euclidean(const std::string& name);
  Eigen::VectorBlock<const Eigen::VectorXd> euclidean(const std::string& name) const;
  Eigen::Matrix3d& rotation(int block);
  const Eigen::Matrix3d& rotation(int block) const;
  Eigen::Matrix3d& rotation(const std::string& name);
  const Eigen::Matrix3d& rotation(const std::string& name) const;

  // x <- x (+) delta, with R <- R * Exp(delta_block) on rotation blocks.
  void boxplus(const Eigen::Ref<const Eigen::VectorXd>& delta);

  // this (-) other, the delta with other (+) delta == this.
  Eigen::VectorXd boxminus(const ManifoldPoint& other) const;

  // Flattened snapshot in layout order, rotations as rotation vectors.
  Eigen::VectorXd flatten() const;
  static ManifoldPoint unflatten(const LayoutPtr& layout, const Eigen::VectorXd& v);

  void renormalize_rotations();
  bool all_finite() const;

 private:
  LayoutPtr layout_;
  Eigen::VectorXd euclid_;                // all Euclidean blocks, concatenated
  std::vector<Eigen::Matrix3d> rots_;
  std::vector<int> storage_;              // per block: offset into euclid_, or index into rots_
};

// Tangent-space velocity field: rotation components are body angular rates,
// i.e. Rdot = R * skew(omega).
using TangentField = std::function<Eigen::VectorXd(const ManifoldPoint&)>;

// One geometric RK4 step: stages are evaluated at x (+) dt_partial * k and the
// increment is applied through boxplus, so constant-rate rotations integrate
// exactly as R * Exp(omega * dt).
ManifoldPoint rk4_step(const ManifoldPoint& x, const TangentField& f, double dt);

// Integrates over [0, t] with |substep| <= max_dt (t may be negative).
ManifoldPoint integrate_flow(const ManifoldPoint& x, const TangentField& f, double t,
                             double max_dt);

}  // namespace kinestat
