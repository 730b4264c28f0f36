#pragma once

#include <map>
#include <string>

#include "kinestat/config.hpp"
#include "kinestat/eskf.hpp"
#include "kinestat/io.hpp"
#include "kinestat/models.hpp"

// Drives an ESEKF over a sensor log: plugin construction from the config,
// propagate-to-measurement sequencing for the asynchronous channels, per-step
// timing, series capture, and metric extraction.

namespace kinestat {

enum class Formulation { State, Input, InterImu };

Formulation parse_formulation(const std::string& name);  // "state"/"input"/"inter-imu"

PosImuConfig pos_imu_config_from(const Config& cfg, double imu_dt);
InterImuConfig inter_imu_config_from(const Config& cfg, double imu_dt);

struct Timing {
  double predict_mean_us = 0.0;
  double update_mean_us = 0.0;
  long predict_count = 0;
  long update_count = 0;
  double total_per_step_us() const { return predict_mean_us + update_mean_us; }
};

struct EstimateRun {
  Formulation formulation = Formulation::State;
  LayoutPtr layout;
  Eigen::VectorXd t;
  Eigen::MatrixXd states;  // flattened nominal per sample (rotations as rotvec)
  Eigen::MatrixXd sigmas;  // sqrt of P diagonal per sample
  ManifoldPoint final_state;
  Eigen::MatrixXd final_P;
  Timing timing;
  bool diverged = false;   // non-finite state; series truncated at divergence
  double diverged_at = 0.0;

  Eigen::MatrixXd block_series(const std::string& name) const;  // columns of one block
  Eigen::VectorXd final_block(const std::string& name) const;
};

// Throws std::invalid_argument on a log/formulation schema mismatch; a filter
// divergence returns the partial run with `diverged` set.
EstimateRun run_estimator(const SensorLog& log, const Config& cfg, Formulation form,
                          bool collect_series = true);

// RMSE / convergence metrics against the log's ground-truth columns over
// t >= filter.metrics_start_s, plus the timing summary.
std::map<std::string, double> estimate_metrics(const EstimateRun& run, const SensorLog& log,
                                               const Config& cfg);

void write_estimates_csv(const std::string& path, const EstimateRun& run);

// State-form EKF vs bandwidth-matched causal Butterworth vs zero-phase
// Butterworth on the rate channels (and acceleration channels for reference),
// biases removed with the log's truth columns.
struct FilterCompareResult {
  std::map<std::string, double> kv;
  double matched_k = 0.0;       // Butterworth time constant
  double sigma_target = 0.0;    // matched noise attenuation
};

FilterCompareResult compare_filters(const SensorLog& log, const Config& cfg);

// Final extrinsics, convergence times, and an excitation warning derived from
// rank-probing empirical derivatives of the log.
struct CalibrationResult {
  std::map<std::string, double> kv;
  bool excitation_warning = false;
  std::string warning_text;
};

CalibrationResult calibrate_inter_imu(const SensorLog& log, const Config& cfg,
                                      const EstimateRun& run);

}  // namespace kinestat
