#pragma once

#include <Eigen/Dense>

#include "kinestat/lti.hpp"

// Statistical motion models: a scalar colored process gamma_dot = A g + B w,
// u = C g per channel, replicated over the three spatial axes. The N-th order
// integrator instance has PSD sum_i q_i / w^(2i).

namespace kinestat {

struct StatModel {
  int order = 0;           // N
  Eigen::MatrixXd A;       // N x N
  Eigen::MatrixXd B;       // N x p
  Eigen::RowVectorXd C;    // 1 x N
  Eigen::VectorXd q;       // driver noise intensities, diag of Q

  int noise_dim() const { return static_cast<int>(B.cols()); }
};

// Upper-shift A, B = I, C = [1 0 ... 0]; checks the observability and
// controllability invariants. Throws if q has the wrong length, any q_i < 0,
// or all q_i == 0.
StatModel make_integrator_model(int order, const Eigen::VectorXd& q);

// Output PSD G(jw) Q G(-jw)^T; throws at w == 0 (integrator pole).
double psd(const StatModel& model, double omega);

// Per-axis replication with derivative-major ordering: state k*dims..k*dims+2
// is the k-th derivative 3-vector, A = kron(A_scalar, I), C = kron(C, I).
lti::LtiSystem vectorize(const StatModel& model, int dims = 3);

// kron(a, I_d) helper shared by the plugins.
Eigen::MatrixXd kron_identity(const Eigen::MatrixXd& a, int d);

}  // namespace kinestat
