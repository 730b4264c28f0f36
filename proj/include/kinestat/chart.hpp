#pragma once

#include <Eigen/Dense>
#include <functional>

#include "kinestat/state.hpp"

// Chart-based differentiation on the product manifold: gradients are taken in
// the local chart theta -> x (+) theta (Exp on rotation blocks), evaluated by
// central finite differences.

namespace kinestat {

using ManifoldFn = std::function<Eigen::VectorXd(const ManifoldPoint&)>;

// m x n Jacobian of g at x in the chart centered at x (theta = 0).
Eigen::MatrixXd chart_gradient(const ManifoldFn& g, const ManifoldPoint& x, double h = 1e-5);

// Same gradient but in a chart centered at `anchor`, evaluated at
// theta0 = x (-) anchor. Used to check chart-invariance of rank results.
Eigen::MatrixXd chart_gradient_anchored(const ManifoldFn& g, const ManifoldPoint& anchor,
                                        const ManifoldPoint& x, double h = 1e-5);

// Convenience overload for functions of a single rotation.
Eigen::MatrixXd chart_gradient_so3(const std::function<Eigen::VectorXd(const Eigen::Matrix3d&)>& g,
                                   const Eigen::Matrix3d& r, double h = 1e-5);

}  // namespace kinestat
