#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "kinestat/chart.hpp"
#include "kinestat/state.hpp"

// Error-state EKF over a mixed Euclidean x SO(3) state. The nominal state is a
// ManifoldPoint; the error state lives in its tangent space with the
// right-multiplicative attitude error dtheta = Log(Rhat^T R). Discretization
// follows Phi_x = I + F_x dt, Phi_w = F_w dt.

namespace kinestat {

struct MeasurementModel {
  std::string name;
  int dim = 0;
  std::function<Eigen::VectorXd(const ManifoldPoint&)> h;
  std::function<Eigen::MatrixXd(const ManifoldPoint&)> H;
  Eigen::MatrixXd R;
  // Defaults to z - zhat when not set.
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)> residual;
};

struct SystemModelPlugin {
  LayoutPtr layout;
  int input_dim = 0;  // 0 for autonomous formulations
  std::function<Eigen::VectorXd(const ManifoldPoint&, const Eigen::VectorXd&)> f;
  std::function<Eigen::MatrixXd(const ManifoldPoint&, const Eigen::VectorXd&)> F_x;
  std::function<Eigen::MatrixXd(const ManifoldPoint&, const Eigen::VectorXd&)> F_w;
  Eigen::MatrixXd Q;  // n_w x n_w process-noise PSD
  std::vector<MeasurementModel> outputs;

  const MeasurementModel& output(const std::string& name) const;
  int output_dim() const;
  Eigen::VectorXd h_all(const ManifoldPoint& x) const;
  Eigen::MatrixXd H_all(const ManifoldPoint& x) const;
  Eigen::MatrixXd R_all() const;
  TangentField drift() const;  // f with zero input
};

struct EskfOptions {
  bool joseph = false;      // plain downdate P - K S K^T unless set
  double chi2_gate = 0.0;   // skip updates with r' S^-1 r above this; 0 = off
};

// Nominal state by geometric RK4 (exact R * Exp(w dt) for constant rates),
// covariance by P <- Phi_x P Phi_x^T + Phi_w Q Phi_w^T, then symmetrization.
void propagate(ManifoldPoint& x, Eigen::MatrixXd& P, const SystemModelPlugin& plugin, double dt,
               const Eigen::VectorXd& u = Eigen::VectorXd());

// One Kalman update against a single measurement model; the injected error is
// returned and the internal error estimate is implicitly reset to zero.
Eigen::VectorXd update(ManifoldPoint& x, Eigen::MatrixXd& P, const MeasurementModel& model,
                       const Eigen::VectorXd& z, const EskfOptions& opts = {});

// Update against the concatenation of all plugin outputs.
Eigen::VectorXd update_all(ManifoldPoint& x, Eigen::MatrixXd& P, const SystemModelPlugin& plugin,
                           const Eigen::VectorXd& z, const EskfOptions& opts = {});

struct JacobianReport {
  double f_error = 0.0;  // scaled max-entry error of F_x vs the numeric oracle
  std::vector<std::pair<std::string, double>> h_errors;  // per output model
  double max_error() const;
  bool pass(double tol) const { return max_error() < tol; }
  std::string text() const;
};

// Compares the plugin's analytic F_x and H against central finite differences
// of the exact continuous error dynamics (transport terms included) and of h
// in the chart at x.
JacobianReport validate_jacobians(const SystemModelPlugin& plugin, const ManifoldPoint& x,
                                  const Eigen::VectorXd& u = Eigen::VectorXd(), double h = 1e-5);

}  // namespace kinestat
