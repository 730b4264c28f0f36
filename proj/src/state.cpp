#include "kinestat/state.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace kinestat {

StateLayout::StateLayout(std::vector<StateBlock> blocks) : blocks_(std::move(blocks)) {
  offsets_.reserve(blocks_.size());
  std::unordered_map<std::string, int> seen;
  for (const auto& b : blocks_) {
    if (b.dim <= 0) throw std::invalid_argument("StateLayout: block '" + b.name + "' has dim <= 0");
    if (b.rotation && b.dim != 3)
      throw std::invalid_argument("StateLayout: rotation block '" + b.name + "' must have dim 3");
    if (!seen.emplace(b.name, 1).second)
      throw std::invalid_argument("StateLayout: duplicate block name '" + b.name + "'");
    offsets_.push_back(tangent_dim_);
    tangent_dim_ += b.dim;
  }
}

int StateLayout::index_of(const std::string& name) const {
  for (int i = 0; i < size(); ++i)
    if (blocks_[i].name == name) return i;
  throw std::invalid_argument("StateLayout: no block named '" + name + "'");
}

LayoutPtr make_layout(std::vector<StateBlock> blocks) {
  return std::make_shared<const StateLayout>(std::move(blocks));
}

ManifoldPoint::ManifoldPoint(LayoutPtr layout) : layout_(std::move(layout)) {
  int euclid_dim = 0;
  storage_.reserve(layout_->size());
  for (int i = 0; i < layout_->size(); ++i) {
    const auto& b = layout_->block(i);
    if (b.rotation) {
      storage_.push_back(static_cast<int>(rots_.size()));
      rots_.push_back(Eigen::Matrix3d::Identity());
    } else {
      storage_.push_back(euclid_dim);
      euclid_dim += b.dim;
    }
  }
  euclid_ = Eigen::VectorXd::Zero(euclid_dim);
}

Eigen::VectorBlock<Eigen::VectorXd> ManifoldPoint::euclidean(int block) {
  return euclid_.segment(storage_[block], layout_->block(block).dim);
}

Eigen::VectorBlock<const Eigen::VectorXd> ManifoldPoint::euclidean(int block) const {
  return euclid_.segment(storage_[block], layout_->block(block).dim);
}

Eigen::VectorBlock<Eigen::VectorXd> ManifoldPoint::euclidean(const std::string& name) {
  return euclidean(layout_->index_of(name));
}

Eigen::VectorBlock<const Eigen::VectorXd> ManifoldPoint::euclidean(const std::string& name) const {
  return euclidean(layout_->index_of(name));
}

Eigen::Matrix3d& ManifoldPoint::rotation(int block) { return rots_[storage_[block]]; }
const Eigen::Matrix3d& ManifoldPoint::rotation(int block) const { return rots_[storage_[block]]; }
Eigen::Matrix3d& ManifoldPoint::rotation(const std::string& name) {
  return rotation(layout_->index_of(name));
}
const Eigen::Matrix3d& ManifoldPoint::rotation(const std::string& name) const {
  return rotation(layout_->index_of(name));
}

void ManifoldPoint::boxplus(const Eigen::Ref<const Eigen::VectorXd>& delta) {
  if (delta.size() != layout_->tangent_dim())
    throw std::invalid_argument("boxplus: delta size mismatch");
  for (int i = 0; i < layout_->size(); ++i) {
    const auto& b = layout_->block(i);
    const auto d = delta.segment(layout_->offset(i), b.dim);
    if (b.rotation) {
      Eigen::Matrix3d& r = rots_[storage_[i]];
      r = r * so3::exp<double>(d);
    } else {
      euclid_.segment(storage_[i], b.dim) += d;
    }
  }
}

Eigen::VectorXd ManifoldPoint::boxminus(const ManifoldPoint& other) const {
  Eigen::VectorXd delta(layout_->tangent_dim());
  for (int i = 0; i < layout_->size(); ++i) {
    const auto& b = layout_->block(i);
    if (b.rotation) {
      delta.segment<3>(layout_->offset(i)) =
          so3::log<double>(other.rots_[storage_[i]].transpose() * rots_[storage_[i]]);
    } else {
      delta.segment(layout_->offset(i), b.dim) =
          euclid_.segment(storage_[i], b.dim) - other.euclid_.segment(storage_[i], b.dim);
    }
  }
  return delta;
}

Eigen::VectorXd ManifoldPoint::flatten() const {
  Eigen::VectorXd v(layout_->tangent_dim());
  for (int i = 0; i < layout_->size(); ++i) {
    const auto& b = layout_->block(i);
    if (b.rotation) {
      v.segment<3>(layout_->offset(i)) = so3::log<double>(rots_[storage_[i]]);
    } else {
      v.segment(layout_->offset(i), b.dim) = euclid_.segment(storage_[i], b.dim);
    }
  }
  return v;
}

ManifoldPoint ManifoldPoint::unflatten(const LayoutPtr& layout, const Eigen::VectorXd& v) {
  ManifoldPoint x(layout);
  if (v.size() != layout->tangent_dim())
    throw std::invalid_argument("unflatten: vector size mismatch");
  for (int i = 0; i < layout->size(); ++i) {
    const auto& b = layout->block(i);
    if (b.rotation) {
      x.rotation(i) = so3::exp<double>(Eigen::Vector3d(v.segment<3>(layout->offset(i))));
    } else {
      x.euclidean(i) = v.segment(layout->offset(i), b.dim);
    }
  }
  return x;
}

void ManifoldPoint::renormalize_rotations() {
  for (auto& r : rots_) r = so3::orthonormalize(r);
}

bool ManifoldPoint::all_finite() const {
  if (!euclid_.allFinite()) return false;
  for (const auto& r : rots_)
    if (!r.allFinite()) return false;
  return true;
}

ManifoldPoint rk4_step(const ManifoldPoint& x, const TangentField& f, double dt) {
  const Eigen::VectorXd k1 = f(x);
  ManifoldPoint x2 = x;
  x2.boxplus(0.5 * dt * k1);
  const Eigen::VectorXd k2 = f(x2);
  ManifoldPoint x3 = x;
  x3.boxplus(0.5 * dt * k2);
  const Eigen::VectorXd k3 = f(x3);
  ManifoldPoint x4 = x;
  x4.boxplus(dt * k3);
  const Eigen::VectorXd k4 = f(x4);
  ManifoldPoint out = x;
  out.boxplus(dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
  return out;
}

ManifoldPoint integrate_flow(const ManifoldPoint& x, const TangentField& f, double t,
                             double max_dt) {
  ManifoldPoint cur = x;
  const int n = std::max(1, static_cast<int>(std::ceil(std::abs(t) / max_dt)));
  const double dt = t / n;
  for (int i = 0; i < n; ++i) cur = rk4_step(cur, f, dt);
  return cur;
}

}  // namespace kinestat
