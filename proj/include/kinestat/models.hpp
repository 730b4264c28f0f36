#pragma once

#include <Eigen/Dense>

#include "kinestat/eskf.hpp"
#include "kinestat/motion_model.hpp"

// Concrete system models: the POS-IMU filter in its state and input
// formulations (statistical models appended vs IMU readings as inputs), and
// the minimal-realization inter-IMU calibration model with its
// non-identifiability check.

namespace kinestat {

struct PosImuConfig {
  StatModel accel_model;  // scalar per-axis model for specific acceleration
  StatModel gyro_model;   // scalar per-axis model for angular velocity
  Eigen::Vector3d gravity{0.0, 0.0, -9.81};
  Eigen::Vector3d heading_ref = Eigen::Vector3d::UnitX();
  double q_bias_accel = 1e-6;  // bias random-walk PSDs
  double q_bias_gyro = 1e-8;
  double r_pos = 2.5e-5;  // discrete measurement variances
  double r_heading = 1e-4;
  double r_accel = 2.5e-3;
  double r_gyro = 2.5e-5;
  double q_input_accel = 2.5e-6;  // input-formulation process PSDs (sigma^2 * dt)
  double q_input_gyro = 2.5e-8;
};

// Blocks p, v, R, c, b_a, b_w, g_a (3Na), g_w (3Nw).
LayoutPtr pos_imu_state_layout(int accel_order, int gyro_order);
// Blocks p, v, R, c, b_a, b_w.
LayoutPtr pos_imu_input_layout();
// Blocks b_a (relative), b_w, w, c, R, g_t (3Nt), g_a (3Na).
LayoutPtr inter_imu_layout(int angacc_order, int accel_order);

// Outputs: "pos" (p + Rc), "heading" (R^T e1), "imu" ([a_m; w_m]).
SystemModelPlugin pos_imu_state_plugin(const PosImuConfig& cfg);

// IMU readings enter as u = [a_m; w_m]; outputs "pos", "heading" only.
SystemModelPlugin pos_imu_input_plugin(const PosImuConfig& cfg);

struct InterImuConfig {
  StatModel accel_model;   // biased IMU1 acceleration (post reduction)
  StatModel angacc_model;  // angular acceleration tau
  double q_bias_rel = 1e-6;  // relative accel-bias random walk (combined intensity)
  double q_bias_gyro = 1e-8;
  double r_gyro1 = 2.5e-5;
  double r_accel1 = 2.5e-3;
  double r_accel2 = 2.5e-3;
};

// Outputs: "gyro1" (w + b_w), "accel1" (a), "accel2" (R(a + |w|^2... ) + b_a).
SystemModelPlugin inter_imu_plugin(const InterImuConfig& cfg);

// Pre-reduction inter-IMU model of the calibration section: separate IMU1 and
// IMU2 accelerometer biases alongside a (possibly singular) acceleration model.
struct NonMinimalInterImu {
  StatModel accel_model;   // gamma_a1, A singular for integrator models
  StatModel angacc_model;  // gamma_tau
  Eigen::Matrix3d R_ext = Eigen::Matrix3d::Identity();
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
};

// Basis (columns) of constant state shifts that leave every noiseless output
// trajectory unchanged. With a separate IMU1 bias the constraints are
// A g = 0, C g + b1 = 0, R C g + b2 = 0 over (g, b1, b2); after reduction they
// collapse to A g = 0, C g = 0, b_rel = -R C g over (g, b_rel). A and C are the
// scalar-channel matrices (replicated per axis internally).
Eigen::MatrixXd invariance_shift_basis(const Eigen::MatrixXd& A_scalar,
                                       const Eigen::MatrixXd& C_scalar, bool separate_imu1_bias,
                                       const Eigen::Matrix3d& R_ext, double tol = 1e-9);

struct InvarianceReport {
  bool shift_found = false;
  Eigen::VectorXd shift;  // over (gamma_a1, b_a1, b_a2); empty when already minimal
  double max_output_difference = std::numeric_limits<double>::quiet_NaN();
  std::string text;
};

// Finds a nonzero invariant shift of the non-minimal model (if one exists),
// simulates the original and shifted initial states noiselessly, and reports
// the largest output trajectory difference.
InvarianceReport check_minimal_invariance(const NonMinimalInterImu& model,
                                          double duration_s = 10.0, double dt = 1e-3);

}  // namespace kinestat
