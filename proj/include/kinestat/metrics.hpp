#pragma once

#include <Eigen/Dense>
#include <optional>

// Evaluation helpers: RMSE, Euler-angle attitude errors, cross-correlation
// delay estimation, and convergence detection.

namespace kinestat {

// Per-column root-mean-square of (est - truth); throws on shape mismatch.
Eigen::VectorXd rmse(const Eigen::MatrixXd& est, const Eigen::MatrixXd& truth);

// (yaw, pitch, roll) for R = Rz(yaw) Ry(pitch) Rx(roll), the extrinsic Z-Y-X
// reporting convention.
Eigen::Vector3d euler_zyx(const Eigen::Matrix3d& r);

// Per-axis Euler RMSE between two rotation-vector series (angles wrapped).
Eigen::Vector3d attitude_rmse(const Eigen::Matrix<double, Eigen::Dynamic, 3>& est_rotvec,
                              const Eigen::Matrix<double, Eigen::Dynamic, 3>& truth_rotvec);

// Delay (seconds, positive = `filtered` lags `reference`) from the peak of the
// normalized cross-correlation, refined by parabolic interpolation. Throws on
// flat correlation (constant inputs).
double estimate_delay(const Eigen::VectorXd& filtered, const Eigen::VectorXd& reference,
                      double dt, double max_lag_s);

// First time after which the series stays within `band` of `target` through
// the end of the log; nullopt when it never settles.
std::optional<double> convergence_time(const Eigen::VectorXd& t, const Eigen::VectorXd& series,
                                       double target, double band);

}  // namespace kinestat
