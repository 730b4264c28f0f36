#include "kinestat/chart.hpp"

#include <stdexcept>

namespace kinestat {

Eigen::MatrixXd chart_gradient(const ManifoldFn& g, const ManifoldPoint& x, double h) {
  if (h <= 0) throw std::invalid_argument("chart_gradient: step must be positive");
  const int n = x.layout().tangent_dim();
  Eigen::VectorXd delta = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd jac;
  for (int j = 0; j < n; ++j) {
    delta(j) = h;
    ManifoldPoint xp = x;
    xp.boxplus(delta);
    delta(j) = -h;
    ManifoldPoint xm = x;
    xm.boxplus(delta);
    delta(j) = 0.0;
    const Eigen::VectorXd col = (g(xp) - g(xm)) / (2.0 * h);
    if (jac.size() == 0) jac.resize(col.size(), n);
    jac.col(j) = col;
  }
  return jac;
}

Eigen::MatrixXd chart_gradient_anchored(const ManifoldFn& g, const ManifoldPoint& anchor,
                                        const ManifoldPoint& x, double h) {
  const Eigen::VectorXd theta0 = x.boxminus(anchor);
  const int n = anchor.layout().tangent_dim();
  Eigen::VectorXd theta = theta0;
  Eigen::MatrixXd jac;
  for (int j = 0; j < n; ++j) {
    theta(j) = theta0(j) + h;
    ManifoldPoint xp = anchor;
    xp.boxplus(theta);
    theta(j) = theta0(j) - h;
    ManifoldPoint xm = anchor;
    xm.boxplus(theta);
    theta(j) = theta0(j);
    const Eigen::VectorXd col = (g(xp) - g(xm)) / (2.0 * h);
    if (jac.size() == 0) jac.resize(col.size(), n);
    jac.col(j) = col;
  }
  return jac;
}

Eigen::MatrixXd chart_gradient_so3(const std::function<Eigen::VectorXd(const Eigen::Matrix3d&)>& g,
                                   const Eigen::Matrix3d& r, double h) {
  static const LayoutPtr layout = make_layout({StateBlock::so3("R")});
  ManifoldPoint x(layout);
  x.rotation(0) = r;
  return chart_gradient([&g](const ManifoldPoint& p) { return g(p.rotation(0)); }, x, h);
}

}  // namespace kinestat
