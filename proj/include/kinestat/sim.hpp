#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

// Synthetic trajectory and sensor generation: a vehicle driven by multi-tone
// sinusoidal forcing with an optional smooth climb/hover/descent profile, and
// measurement synthesis with seeded Gaussian noise and bias random walks.

namespace kinestat {

using MatrixX3 = Eigen::Matrix<double, Eigen::Dynamic, 3>;

// Deterministic per-channel Gaussian stream (Box-Muller over mt19937_64), so
// logs are bit-identical for a given seed regardless of the standard library.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : eng_(seed) {}
  double next();
  Eigen::Vector3d next3();

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

struct Sinusoid {
  int axis = 0;          // 0..2
  double amplitude = 0;  // m/s^2 (world accel) or rad/s (body rate)
  double freq_hz = 0;
  double phase = 0;      // rad
};

struct TrajectorySpec {
  double duration_s = 15.0;
  double imu_rate_hz = 1000.0;
  bool vertical_profile = true;
  double takeoff_time_s = 2.0;
  double climb_duration_s = 3.0;
  double hover_height_m = 5.0;
  double landing_time_s = 12.0;
  double descent_duration_s = 3.0;
  std::vector<Sinusoid> accel_world;  // world-frame forcing acceleration
  std::vector<Sinusoid> omega_body;   // body rates

  void validate() const;  // throws on bad rates / Nyquist violations
};

struct TrajectoryTruth {
  double dt = 1e-3;
  Eigen::VectorXd t;
  MatrixX3 p, v;
  MatrixX3 a_world;  // vdot
  MatrixX3 a_body;   // specific force R^T (vdot - g)
  MatrixX3 omega;    // body rates
  MatrixX3 tau;      // body angular acceleration
  std::vector<Eigen::Matrix3d> R;
  Eigen::Vector3d gravity;

  long samples() const { return t.size(); }
};

// Kinematically consistent ground truth: v and p are exact integrals of the
// analytic forcing, R is the product integral of the exact per-step rate
// integral, and a_body is defined through the logged R.
TrajectoryTruth generate_trajectory(const TrajectorySpec& spec,
                                    const Eigen::Vector3d& gravity = {0, 0, -9.81});

struct SensorSpec {
  double pos_rate_hz = 200.0;
  Eigen::Vector3d offset_c{0.5, 0.5, 0.5};
  Eigen::Vector3d heading_ref = Eigen::Vector3d::UnitX();
  double noise_pos = 0.005;
  double noise_heading = 0.01;
  double noise_accel = 0.05;
  double noise_gyro = 0.005;
  double bias_rw_accel = 1e-6;  // PSD
  double bias_rw_gyro = 1e-8;
  Eigen::Vector3d bias_accel0{0.05, -0.03, 0.08};
  Eigen::Vector3d bias_gyro0{0.004, -0.002, 0.003};

  bool inter_imu = false;  // adds a second accelerometer a_m2
  Eigen::Vector3d inter_c{0.1, 0.05, -0.02};
  Eigen::Vector3d inter_rotvec{0.0, 0.0, 0.17453292519943295};
  double noise_accel2 = 0.05;
  double bias_rw_accel2 = 1e-6;
  Eigen::Vector3d bias_accel2_0{-0.04, 0.06, 0.02};
};

struct SensorLog {
  std::string version = "kinestat-log v1";
  double imu_dt = 1e-3;
  Eigen::VectorXd t;
  MatrixX3 omega_m, a_m;
  MatrixX3 p_m, m_m;               // valid only where has_pos
  std::vector<std::uint8_t> has_pos;
  bool inter_imu = false;
  MatrixX3 a_m2;                   // rows allocated only in inter-IMU logs

  bool has_truth = false;
  MatrixX3 gt_p, gt_v, gt_rotvec, gt_a, gt_omega, gt_b_a, gt_b_w;
  MatrixX3 gt_tau, gt_b_a2;        // inter-IMU extras

  // Unknown columns preserved verbatim through read/write.
  std::vector<std::pair<std::string, std::vector<std::string>>> extra_columns;

  long rows() const { return t.size(); }
};

SensorLog synthesize_sensors(const TrajectoryTruth& truth, const SensorSpec& spec,
                             std::uint64_t seed);

}  // namespace kinestat
