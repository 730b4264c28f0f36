#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <vector>

// Linear-time-invariant utilities: observability matrices, series
// concatenation, stationary Kalman gains via the discrete Riccati recursion,
// transfer-function evaluation, H2 norms, and the Butterworth / zero-phase
// baselines used for the filtering comparison.

namespace kinestat::lti {

struct LtiSystem {
  Eigen::MatrixXd A;       // n x n, continuous time
  Eigen::MatrixXd B;       // n x p
  Eigen::MatrixXd C;       // m x n
  Eigen::MatrixXd Q;       // p x p process-noise PSD, may be empty
  Eigen::MatrixXd R_meas;  // m x m measurement-noise PSD, may be empty

  int states() const { return static_cast<int>(A.rows()); }
  int inputs() const { return static_cast<int>(B.cols()); }
  int outputs() const { return static_cast<int>(C.rows()); }
  void check_dimensions() const;  // throws on inconsistency
};

// Stacked [C; CA; ...; CA^(n-1)].
Eigen::MatrixXd observability_matrix(const LtiSystem& sys);

// Series concatenation with the driver feeding the plant input:
//   A = [A_s, B_s C_d; 0, A_d], B_w = [0; B_d],
//   C = [C_s, 0] or [[C_s, 0]; [0, C_d]] when the driver output is exposed.
LtiSystem series_concat(const LtiSystem& plant, const LtiSystem& driver,
                        bool expose_driver_output);

struct RiccatiOptions {
  double dt = 1e-3;
  double tol = 1e-12;           // relative Frobenius step criterion
  long max_iters = 1'000'000;
  bool warm_start = true;       // cascade from coarser dt when dt < 1e-3
};

// Stationary continuous-convention Kalman gain L = K_infty / dt obtained by
// Euler-discretizing (A_d = I + A dt, Q_d = B Q B^T dt, R_d = R / dt) and
// iterating the prediction-form Riccati recursion to convergence.
Eigen::MatrixXd stationary_kalman_gain(const LtiSystem& sys, const RiccatiOptions& opts = {});

struct TransferFunction {
  // jw -> m x p complex response.
  std::function<Eigen::MatrixXcd(double)> eval;
  bool has_realization = false;
  Eigen::MatrixXd A, B, C, D;

  static TransferFunction from_realization(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                           const Eigen::MatrixXd& c, const Eigen::MatrixXd& d);
  std::complex<double> scalar(double w) const;  // SISO convenience
};

// Row `pick_row` of (sI - A + LC)^{-1} L, split by output channel: element j is
// the transfer function from output channel j to state component pick_row of
// the stationary filter.
std::vector<TransferFunction> transfer_functions(const LtiSystem& sys, const Eigen::MatrixXd& L,
                                                 int pick_row);

struct H2Options {
  double w_min = 1e-3;
  double w_max = 1e5;
  int points = 4096;
  double realization_check_tol = 0.01;  // quadrature vs Lyapunov agreement
};

// ||G||_2 by log-grid quadrature, cross-checked against the Lyapunov closed
// form when a realization is attached.
double h2_norm(const TransferFunction& g, const H2Options& opts = {});

// Time constant k with ||1/(1 + k s)||_2 = target_sigma, i.e. k = 1/(2 sigma^2).
double match_butterworth(double target_sigma);

// Causal first-order Butterworth 1/(1+ks), bilinear (Tustin) discretization.
Eigen::VectorXd filter_butterworth1(const Eigen::VectorXd& x, double k, double dt);

// Forward pass then time-reversed pass of filter_butterworth1.
Eigen::VectorXd filter_zero_phase(const Eigen::VectorXd& x, double k, double dt);

// Observable subsystem via the SVD staircase of the observability matrix;
// input/output behavior is preserved.
LtiSystem kalman_observable_reduction(const LtiSystem& sys, double rank_tol = 1e-9);

}  // namespace kinestat::lti
