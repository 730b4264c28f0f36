#include "kinestat/motion_model.hpp"

#include <complex>
#include <stdexcept>

namespace kinestat {

namespace {

int svd_rank(const Eigen::MatrixXd& m, double tol = 1e-9) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > tol * sv(0)) ++r;
  return r;
}

Eigen::MatrixXd controllability_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const int n = static_cast<int>(a.rows());
  Eigen::MatrixXd ctrb(n, n * b.cols());
  Eigen::MatrixXd col = b;
  for (int k = 0; k < n; ++k) {
    ctrb.middleCols(k * b.cols(), b.cols()) = col;
    col = a * col;
  }
  return ctrb;
}

}  // namespace

Eigen::MatrixXd kron_identity(const Eigen::MatrixXd& a, int d) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(a.rows() * d, a.cols() * d);
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      if (a(i, j) != 0.0)
        out.block(i * d, j * d, d, d).diagonal().setConstant(a(i, j));
  return out;
}

StatModel make_integrator_model(int order, const Eigen::VectorXd& q) {
  if (order < 1) throw std::invalid_argument("make_integrator_model: order must be >= 1");
  if (q.size() != order)
    throw std::invalid_argument("make_integrator_model: q must have exactly N entries");
  if ((q.array() < 0).any())
    throw std::invalid_argument("make_integrator_model: q entries must be >= 0");
  if ((q.array() == 0).all())
    throw std::invalid_argument("make_integrator_model: all-zero q leaves the model undriven");

  StatModel m;
  m.order = order;
  m.A = Eigen::MatrixXd::Zero(order, order);
  m.A.diagonal(1).setOnes();
  m.B = Eigen::MatrixXd::Identity(order, order);
  m.C = Eigen::RowVectorXd::Zero(order);
  m.C(0) = 1.0;
  m.q = q;

  lti::LtiSystem sys{m.A, m.B, m.C, {}, {}};
  if (svd_rank(lti::observability_matrix(sys)) < order)
    throw std::runtime_error("make_integrator_model: (C, A) not observable");
  if (svd_rank(controllability_matrix(m.A, m.B)) < order)
    throw std::runtime_error("make_integrator_model: (A, B) not controllable");
  return m;
}

double psd(const StatModel& model, double omega) {
  if (omega <= 0.0) throw std::invalid_argument("psd: omega must be > 0 (pole at the origin)");
  const int n = model.order;
  const std::complex<double> jw(0.0, omega);
  Eigen::MatrixXcd m = jw * Eigen::MatrixXcd::Identity(n, n) - model.A;
  Eigen::RowVectorXcd g = model.C * m.partialPivLu().solve(Eigen::MatrixXcd(model.B));
  // G(jw) Q G(-jw)^T = sum_i q_i |G_i|^2
  return (g.array().abs2() * model.q.transpose().array()).sum();
}

lti::LtiSystem vectorize(const StatModel& model, int dims) {
  if (dims < 1) throw std::invalid_argument("vectorize: dims must be >= 1");
  lti::LtiSystem out;
  out.A = kron_identity(model.A, dims);
  out.B = kron_identity(model.B, dims);
  out.C = kron_identity(model.C, dims);
  out.Q = kron_identity(Eigen::MatrixXd(model.q.asDiagonal()), dims);
  return out;
}

}  // namespace kinestat
