#include "kinestat/eskf.hpp"

#include <sstream>
#include <stdexcept>

namespace kinestat {

const MeasurementModel& SystemModelPlugin::output(const std::string& name) const {
  for (const auto& m : outputs)
    if (m.name == name) return m;
  throw std::invalid_argument("SystemModelPlugin: no output named '" + name + "'");
}

int SystemModelPlugin::output_dim() const {
  int d = 0;
  for (const auto& m : outputs) d += m.dim;
  return d;
}

Eigen::VectorXd SystemModelPlugin::h_all(const ManifoldPoint& x) const {
  Eigen::VectorXd z(output_dim());
  int at = 0;
  for (const auto& m : outputs) {
    z.segment(at, m.dim) = m.h(x);
    at += m.dim;
  }
  return z;
}

Eigen::MatrixXd SystemModelPlugin::H_all(const ManifoldPoint& x) const {
  Eigen::MatrixXd h(output_dim(), layout->tangent_dim());
  int at = 0;
  for (const auto& m : outputs) {
    h.middleRows(at, m.dim) = m.H(x);
    at += m.dim;
  }
  return h;
}

Eigen::MatrixXd SystemModelPlugin::R_all() const {
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(output_dim(), output_dim());
  int at = 0;
  for (const auto& m : outputs) {
    r.block(at, at, m.dim, m.dim) = m.R;
    at += m.dim;
  }
  return r;
}

TangentField SystemModelPlugin::drift() const {
  if (input_dim != 0)
    throw std::logic_error("SystemModelPlugin::drift: formulation expects inputs");
  auto fn = f;
  return [fn](const ManifoldPoint& x) { return fn(x, Eigen::VectorXd()); };
}

void propagate(ManifoldPoint& x, Eigen::MatrixXd& P, const SystemModelPlugin& plugin, double dt,
               const Eigen::VectorXd& u) {
  if (dt <= 0) throw std::invalid_argument("propagate: dt must be positive");
  if (!x.all_finite()) throw std::runtime_error("propagate: non-finite nominal state");
  if (u.size() != plugin.input_dim)
    throw std::invalid_argument("propagate: expected input of dim " +
                                std::to_string(plugin.input_dim));

  const int n = x.layout().tangent_dim();
  const Eigen::MatrixXd fx = plugin.F_x(x, u);
  const Eigen::MatrixXd fw = plugin.F_w(x, u);

  x = rk4_step(x, [&](const ManifoldPoint& p) { return plugin.f(p, u); }, dt);
  x.renormalize_rotations();

  const Eigen::MatrixXd phi = Eigen::MatrixXd::Identity(n, n) + fx * dt;
  P = phi * P * phi.transpose() + (dt * dt) * (fw * plugin.Q * fw.transpose());
  P = 0.5 * (P + P.transpose()).eval();
}

Eigen::VectorXd update(ManifoldPoint& x, Eigen::MatrixXd& P, const MeasurementModel& model,
                       const Eigen::VectorXd& z, const EskfOptions& opts) {
  if (z.size() != model.dim)
    throw std::invalid_argument("update: measurement dim mismatch for '" + model.name + "'");
  const Eigen::VectorXd zhat = model.h(x);
  const Eigen::MatrixXd H = model.H(x);
  const Eigen::MatrixXd S = H * P * H.transpose() + model.R;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(S);
  if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= 0.0)
    throw std::runtime_error("update: innovation covariance is not invertible ('" + model.name +
                             "'); check H and R");
  const Eigen::MatrixXd K = ldlt.solve(H * P).transpose();  // P H^T S^-1
  const Eigen::VectorXd r = model.residual ? model.residual(z, zhat) : (z - zhat).eval();
  if (opts.chi2_gate > 0.0 && r.dot(ldlt.solve(r)) > opts.chi2_gate)
    return Eigen::VectorXd::Zero(P.rows());  // gated outlier, state untouched
  const Eigen::VectorXd dx = K * r;

  x.boxplus(dx);
  x.renormalize_rotations();

  if (opts.joseph) {
    const Eigen::MatrixXd ikh =
        Eigen::MatrixXd::Identity(P.rows(), P.cols()) - K * H;
    P = ikh * P * ikh.transpose() + K * model.R * K.transpose();
  } else {
    P = P - K * S * K.transpose();
  }
  P = 0.5 * (P + P.transpose()).eval();
  return dx;
}

Eigen::VectorXd update_all(ManifoldPoint& x, Eigen::MatrixXd& P, const SystemModelPlugin& plugin,
                           const Eigen::VectorXd& z, const EskfOptions& opts) {
  MeasurementModel all;
  all.name = "all";
  all.dim = plugin.output_dim();
  all.h = [&plugin](const ManifoldPoint& p) { return plugin.h_all(p); };
  all.H = [&plugin](const ManifoldPoint& p) { return plugin.H_all(p); };
  all.R = plugin.R_all();
  return update(x, P, all, z, opts);
}

namespace {

// Exact tangent velocity of the error coordinates at perturbation delta:
// Euclidean blocks difference plainly; rotation blocks carry the transport
// term Jr(dtheta)^-1 (w(x (+) d) - Exp(dtheta)^T w(x)).
Eigen::VectorXd error_velocity(const SystemModelPlugin& plugin, const ManifoldPoint& x,
                               const Eigen::VectorXd& f0, const Eigen::VectorXd& u,
                               const Eigen::VectorXd& delta) {
  ManifoldPoint xp = x;
  xp.boxplus(delta);
  const Eigen::VectorXd fp = plugin.f(xp, u);
  const StateLayout& layout = x.layout();
  Eigen::VectorXd e(layout.tangent_dim());
  for (int i = 0; i < layout.size(); ++i) {
    const auto& b = layout.block(i);
    const int at = layout.offset(i);
    if (b.rotation) {
      const Eigen::Vector3d dtheta = delta.segment<3>(at);
      const Eigen::Vector3d w_nom = f0.segment<3>(at);
      const Eigen::Vector3d w_pert = fp.segment<3>(at);
      e.segment<3>(at) = so3::right_jacobian_inv<double>(dtheta) *
                         (w_pert - so3::exp<double>(dtheta).transpose() * w_nom);
    } else {
      e.segment(at, b.dim) = fp.segment(at, b.dim) - f0.segment(at, b.dim);
    }
  }
  return e;
}

double scaled_max_error(const Eigen::MatrixXd& numeric, const Eigen::MatrixXd& analytic) {
  const double scale = std::max(1.0, analytic.cwiseAbs().maxCoeff());
  return (numeric - analytic).cwiseAbs().maxCoeff() / scale;
}

}  // namespace

double JacobianReport::max_error() const {
  double m = f_error;
  for (const auto& [name, e] : h_errors) m = std::max(m, e);
  return m;
}

std::string JacobianReport::text() const {
  std::ostringstream os;
  os << "F_x error " << f_error;
  for (const auto& [name, e] : h_errors) os << ", H[" << name << "] error " << e;
  return os.str();
}

JacobianReport validate_jacobians(const SystemModelPlugin& plugin, const ManifoldPoint& x,
                                  const Eigen::VectorXd& u, double h) {
  const int n = x.layout().tangent_dim();
  const Eigen::VectorXd f0 = plugin.f(x, u);

  Eigen::MatrixXd f_num(n, n);
  Eigen::VectorXd delta = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < n; ++j) {
    delta(j) = h;
    const Eigen::VectorXd ep = error_velocity(plugin, x, f0, u, delta);
    delta(j) = -h;
    const Eigen::VectorXd em = error_velocity(plugin, x, f0, u, delta);
    delta(j) = 0.0;
    f_num.col(j) = (ep - em) / (2.0 * h);
  }

  JacobianReport report;
  report.f_error = scaled_max_error(f_num, plugin.F_x(x, u));
  for (const auto& m : plugin.outputs) {
    const Eigen::MatrixXd h_num = chart_gradient(m.h, x, h);
    report.h_errors.emplace_back(m.name, scaled_max_error(h_num, m.H(x)));
  }
  return report;
}

}  // namespace kinestat
