#include "kinestat/runner.hpp"

#include <chrono>
#include <fstream>
#include <stdexcept>

#include "kinestat/lti.hpp"
#include "kinestat/metrics.hpp"
#include "kinestat/observability.hpp"

namespace kinestat {

namespace {

StatModel model_from_cfg(const ModelCfg& m) {
  return make_integrator_model(m.order, Eigen::Map<const Eigen::VectorXd>(m.q.data(), m.q.size()));
}

using Clock = std::chrono::steady_clock;

double us_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::micro>(Clock::now() - t0).count();
}

}  // namespace

Formulation parse_formulation(const std::string& name) {
  if (name == "state") return Formulation::State;
  if (name == "input") return Formulation::Input;
  if (name == "inter-imu") return Formulation::InterImu;
  throw ConfigError("unknown formulation '" + name + "' (state, input, inter-imu)");
}

PosImuConfig pos_imu_config_from(const Config& cfg, double imu_dt) {
  PosImuConfig p;
  p.accel_model = model_from_cfg(cfg.mm_accel);
  p.gyro_model = model_from_cfg(cfg.mm_gyro);
  p.gravity = cfg.gravity;
  p.heading_ref = cfg.sensors.heading_ref;
  p.q_bias_accel = cfg.sensors.bias_rw_accel;
  p.q_bias_gyro = cfg.sensors.bias_rw_gyro;
  p.r_pos = cfg.sensors.noise_pos * cfg.sensors.noise_pos;
  p.r_heading = cfg.sensors.noise_heading * cfg.sensors.noise_heading;
  p.r_accel = cfg.sensors.noise_accel * cfg.sensors.noise_accel;
  p.r_gyro = cfg.sensors.noise_gyro * cfg.sensors.noise_gyro;
  p.q_input_accel = p.r_accel * imu_dt;
  p.q_input_gyro = p.r_gyro * imu_dt;
  return p;
}

InterImuConfig inter_imu_config_from(const Config& cfg, double imu_dt) {
  (void)imu_dt;
  InterImuConfig p;
  p.accel_model = model_from_cfg(cfg.mm_accel2);
  p.angacc_model = model_from_cfg(cfg.mm_angacc);
  // Relative bias walk w_ba2 - R w_ba1 carried as one combined intensity.
  p.q_bias_rel = cfg.sensors.bias_rw_accel + cfg.sensors.bias_rw_accel2;
  p.q_bias_gyro = cfg.sensors.bias_rw_gyro;
  p.r_gyro1 = cfg.sensors.noise_gyro * cfg.sensors.noise_gyro;
  p.r_accel1 = cfg.sensors.noise_accel * cfg.sensors.noise_accel;
  p.r_accel2 = cfg.sensors.noise_accel2 * cfg.sensors.noise_accel2;
  return p;
}

Eigen::MatrixXd EstimateRun::block_series(const std::string& name) const {
  const int i = layout->index_of(name);
  return states.middleCols(layout->offset(i), layout->block(i).dim);
}

Eigen::VectorXd EstimateRun::final_block(const std::string& name) const {
  const int i = layout->index_of(name);
  if (layout->block(i).rotation) return so3::log<double>(final_state.rotation(i));
  return final_state.euclidean(i);
}

EstimateRun run_estimator(const SensorLog& log, const Config& cfg, Formulation form,
                          bool collect_series) {
  if (form == Formulation::InterImu && !log.inter_imu)
    throw std::invalid_argument("run_estimator: log has no a_m2 columns (not an inter-IMU log)");

  SystemModelPlugin plugin;
  switch (form) {
    case Formulation::State:
      plugin = pos_imu_state_plugin(pos_imu_config_from(cfg, log.imu_dt));
      break;
    case Formulation::Input:
      plugin = pos_imu_input_plugin(pos_imu_config_from(cfg, log.imu_dt));
      break;
    case Formulation::InterImu:
      plugin = inter_imu_plugin(inter_imu_config_from(cfg, log.imu_dt));
      break;
  }

  const auto& layout = plugin.layout;
  const int n = layout->tangent_dim();
  ManifoldPoint x(layout);
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  const auto& fc = cfg.filter;
  auto set_block_cov = [&](const std::string& name, double value) {
    const int i = layout->index_of(name);
    P.block(layout->offset(i), layout->offset(i), layout->block(i).dim, layout->block(i).dim)
        .diagonal()
        .setConstant(value);
  };
  if (form == Formulation::InterImu) {
    set_block_cov("b_a", fc.init_bias);
    set_block_cov("b_w", fc.init_bias);
    set_block_cov("w", fc.init_omega);
    set_block_cov("c", fc.init_c);
    set_block_cov("R", fc.init_ext_att);
    set_block_cov("g_t", fc.init_gamma);
    set_block_cov("g_a", fc.init_gamma);
  } else {
    set_block_cov("p", fc.init_pos);
    set_block_cov("v", fc.init_vel);
    set_block_cov("R", fc.init_att);
    set_block_cov("c", fc.init_c);
    set_block_cov("b_a", fc.init_bias);
    set_block_cov("b_w", fc.init_bias);
    if (form == Formulation::State) {
      set_block_cov("g_a", fc.init_gamma);
      set_block_cov("g_w", fc.init_gamma);
    }
    if (log.has_pos.size() > 0 && log.has_pos[0]) x.euclidean("p") = log.p_m.row(0).transpose();
  }

  EskfOptions opts;
  opts.joseph = fc.joseph;

  EstimateRun run;
  run.formulation = form;
  run.layout = layout;
  const long rows = log.rows();
  if (collect_series) {
    run.t = log.t;
    run.states.resize(rows, n);
    run.sigmas.resize(rows, n);
  }

  double predict_us = 0.0, update_us = 0.0;
  long predict_count = 0, update_count = 0;

  Eigen::VectorXd u;  // input-formulation IMU sample
  long done = 0;
  for (long k = 0; k < rows; ++k) {
    if (k > 0) {
      const double dt = log.t(k) - log.t(k - 1);
      const auto t0 = Clock::now();
      if (form == Formulation::Input) {
        u.resize(6);
        u.head<3>() = log.a_m.row(k).transpose();
        u.tail<3>() = log.omega_m.row(k).transpose();
        propagate(x, P, plugin, dt, u);
      } else {
        propagate(x, P, plugin, dt);
      }
      predict_us += us_since(t0);
      ++predict_count;
    }

    if (form == Formulation::State) {
      Eigen::VectorXd z(6);
      z.head<3>() = log.a_m.row(k).transpose();
      z.tail<3>() = log.omega_m.row(k).transpose();
      const auto t0 = Clock::now();
      update(x, P, plugin.output("imu"), z, opts);
      update_us += us_since(t0);
      ++update_count;
    } else if (form == Formulation::InterImu) {
      Eigen::VectorXd z(9);
      z.segment<3>(0) = log.omega_m.row(k).transpose();
      z.segment<3>(3) = log.a_m.row(k).transpose();
      z.segment<3>(6) = log.a_m2.row(k).transpose();
      const auto t0 = Clock::now();
      update_all(x, P, plugin, z, opts);
      update_us += us_since(t0);
      ++update_count;
    }

    if (form != Formulation::InterImu && log.has_pos[k]) {
      const auto t0 = Clock::now();
      update(x, P, plugin.output("pos"), log.p_m.row(k).transpose(), opts);
      update(x, P, plugin.output("heading"), log.m_m.row(k).transpose(), opts);
      update_us += us_since(t0);
      ++update_count;
    }

    if (!x.all_finite() || !P.allFinite()) {
      run.diverged = true;
      run.diverged_at = log.t(k);
      break;
    }
    if (collect_series) {
      run.states.row(k) = x.flatten().transpose();
      run.sigmas.row(k) = P.diagonal().cwiseMax(0.0).cwiseSqrt().transpose();
    }
    ++done;
  }
  if (run.diverged && collect_series) {
    run.t = log.t.head(done);
    run.states.conservativeResize(done, Eigen::NoChange);
    run.sigmas.conservativeResize(done, Eigen::NoChange);
  }

  run.final_state = x;
  run.final_P = P;
  run.timing.predict_mean_us = predict_count ? predict_us / predict_count : 0.0;
  run.timing.update_mean_us = update_count ? update_us / update_count : 0.0;
  run.timing.predict_count = predict_count;
  run.timing.update_count = update_count;
  return run;
}

namespace {

long first_index_at(const Eigen::VectorXd& t, double start) {
  long k = 0;
  while (k < t.size() && t(k) < start) ++k;
  return std::min(k, t.size() - 1);
}

void put3(std::map<std::string, double>& kv, const std::string& key, const Eigen::Vector3d& v) {
  kv[key + "_x"] = v.x();
  kv[key + "_y"] = v.y();
  kv[key + "_z"] = v.z();
}

}  // namespace

std::map<std::string, double> estimate_metrics(const EstimateRun& run, const SensorLog& log,
                                               const Config& cfg) {
  std::map<std::string, double> kv;
  kv["timing_predict_mean_us"] = run.timing.predict_mean_us;
  kv["timing_update_mean_us"] = run.timing.update_mean_us;
  kv["timing_total_per_step_us"] = run.timing.total_per_step_us();
  if (!log.has_truth || run.states.rows() == 0) return kv;

  const long k0 = first_index_at(log.t, cfg.filter.metrics_start_s);
  const long len = log.rows() - k0;

  if (run.formulation == Formulation::InterImu) {
    const Eigen::Vector3d c_true = cfg.sensors.inter_c;
    const Eigen::Vector3d c_hat = run.final_block("c");
    put3(kv, "c_final_err", (c_hat - c_true).cwiseAbs());
    put3(kv, "c_final", c_hat);
    const Eigen::Matrix3d r_true = so3::exp<double>(cfg.sensors.inter_rotvec);
    const Eigen::Matrix3d r_hat = run.final_state.rotation(run.layout->index_of("R"));
    kv["rot_final_err_rad"] = so3::geodesic_distance<double>(r_hat, r_true);
    put3(kv, "rot_final", so3::log<double>(r_hat));
    const Eigen::MatrixXd c_series = run.block_series("c");
    for (int i = 0; i < 3; ++i) {
      const auto conv = convergence_time(log.t, c_series.col(i), c_true(i), 0.005);
      kv["c_conv_time_s_" + std::string(1, "xyz"[i])] = conv ? *conv : -1.0;
    }
    // Rate / angular-acceleration estimation quality
    const int gt_i = run.layout->index_of("g_t");
    const Eigen::MatrixXd tau_hat = run.states.middleCols(run.layout->offset(gt_i), 3);
    kv["rmse_tau"] = std::sqrt(
        (tau_hat.bottomRows(len) - log.gt_tau.bottomRows(len)).array().square().mean());
    return kv;
  }

  const Eigen::MatrixXd p_hat = run.block_series("p");
  const Eigen::MatrixXd v_hat = run.block_series("v");
  const Eigen::MatrixXd att_hat = run.block_series("R");
  const Eigen::VectorXd rp = rmse(p_hat.bottomRows(len), log.gt_p.bottomRows(len));
  const Eigen::VectorXd rv = rmse(v_hat.bottomRows(len), log.gt_v.bottomRows(len));
  const Eigen::Vector3d ra = attitude_rmse(att_hat.bottomRows(len).eval(),
                                           log.gt_rotvec.bottomRows(len).eval());
  put3(kv, "rmse_p", rp);
  put3(kv, "rmse_v", rv);
  kv["rmse_att_yaw"] = ra(0);
  kv["rmse_att_pitch"] = ra(1);
  kv["rmse_att_roll"] = ra(2);

  const Eigen::Vector3d c_true = cfg.sensors.offset_c;
  const Eigen::Vector3d c_hat = run.final_block("c");
  put3(kv, "c_final_err", (c_hat - c_true).cwiseAbs());
  put3(kv, "c_final", c_hat);
  const Eigen::MatrixXd c_series = run.block_series("c");
  for (int i = 0; i < 3; ++i) {
    const auto conv = convergence_time(log.t, c_series.col(i), c_true(i), 0.01);
    kv["c_conv_time_s_" + std::string(1, "xyz"[i])] = conv ? *conv : -1.0;
  }
  return kv;
}

void write_estimates_csv(const std::string& path, const EstimateRun& run) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_estimates_csv: cannot open '" + path + "'");
  out << "t";
  const StateLayout& layout = *run.layout;
  for (int i = 0; i < layout.size(); ++i)
    for (int d = 0; d < layout.block(i).dim; ++d)
      out << ",est_" << layout.block(i).name << "_" << d;
  for (int i = 0; i < layout.size(); ++i)
    for (int d = 0; d < layout.block(i).dim; ++d)
      out << ",sig3_" << layout.block(i).name << "_" << d;
  out << "\n";
  for (long k = 0; k < run.t.size(); ++k) {
    out << format_double(run.t(k));
    for (int j = 0; j < run.states.cols(); ++j) out << "," << format_double(run.states(k, j));
    // 3-sigma envelopes from the covariance diagonal
    for (int j = 0; j < run.sigmas.cols(); ++j)
      out << "," << format_double(3.0 * run.sigmas(k, j));
    out << "\n";
  }
}

FilterCompareResult compare_filters(const SensorLog& log, const Config& cfg) {
  if (!log.has_truth)
    throw std::runtime_error("compare_filters: log has no ground-truth columns");
  FilterCompareResult res;
  const double dt = log.imu_dt;
  const double dt_pos = 1.0 / cfg.sensors.pos_rate_hz;

  // Scalar stationary-filter design for the rate channel: integrator plant
  // (heading angle) driven by the gyro statistical model, outputs [angle; rate].
  const StatModel gyro = model_from_cfg(cfg.mm_gyro);
  lti::LtiSystem plant{Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Ones(1, 1),
                       Eigen::MatrixXd::Ones(1, 1), {}, {}};
  lti::LtiSystem driver{gyro.A, gyro.B, gyro.C, Eigen::MatrixXd(gyro.q.asDiagonal()), {}};
  lti::LtiSystem cat = lti::series_concat(plant, driver, true);
  const double r_angle = cfg.sensors.noise_heading * cfg.sensors.noise_heading * dt_pos;
  const double r_rate = cfg.sensors.noise_gyro * cfg.sensors.noise_gyro * dt;
  cat.R_meas = Eigen::Vector2d(r_angle, r_rate).asDiagonal();
  const Eigen::MatrixXd L = lti::stationary_kalman_gain(cat, {});
  const auto tfs = lti::transfer_functions(cat, L, 1);  // state 1 = the rate
  const double sigma = std::sqrt(r_angle * std::pow(lti::h2_norm(tfs[0]), 2) +
                                 r_rate * std::pow(lti::h2_norm(tfs[1]), 2));
  // Same output-noise level for the Butterworth on the rate channel whose
  // noise PSD is r_rate: sqrt(r_rate) ||G_f||_2 = sigma.
  const double k_butter = lti::match_butterworth(sigma / std::sqrt(r_rate));
  res.sigma_target = sigma;
  res.matched_k = k_butter;
  res.kv["matched_k_s"] = k_butter;
  res.kv["sigma_target"] = sigma;

  // State-form EKF rate estimates
  const EstimateRun run = run_estimator(log, cfg, Formulation::State);
  const int gw = run.layout->index_of("g_w");
  const Eigen::MatrixXd w_hat = run.states.middleCols(run.layout->offset(gw), 3);
  const int ga = run.layout->index_of("g_a");
  const Eigen::MatrixXd a_hat = run.states.middleCols(run.layout->offset(ga), 3);

  const long k0 = first_index_at(log.t, cfg.filter.metrics_start_s);
  const long len = log.rows() - k0;
  const double max_lag_s = 0.5;

  double d_ekf = 0, d_butter = 0, d_zero = 0;
  double e_ekf = 0, e_butter = 0, e_zero = 0, e_raw = 0;
  double a_ekf = 0, a_butter = 0, a_zero = 0;  // attenuation: filtered vs raw
  for (int i = 0; i < 3; ++i) {
    const Eigen::VectorXd truth = log.gt_omega.col(i);
    const Eigen::VectorXd raw = log.omega_m.col(i) - log.gt_b_w.col(i);
    const Eigen::VectorXd butter = lti::filter_butterworth1(raw, k_butter, dt);
    const Eigen::VectorXd zero = lti::filter_zero_phase(raw, k_butter, dt);
    const Eigen::VectorXd ekf = w_hat.col(i);

    d_ekf += estimate_delay(ekf.tail(len), truth.tail(len), dt, max_lag_s);
    d_butter += estimate_delay(butter.tail(len), truth.tail(len), dt, max_lag_s);
    d_zero += estimate_delay(zero.tail(len), truth.tail(len), dt, max_lag_s);
    e_ekf += (ekf.tail(len) - truth.tail(len)).squaredNorm();
    e_butter += (butter.tail(len) - truth.tail(len)).squaredNorm();
    e_zero += (zero.tail(len) - truth.tail(len)).squaredNorm();
    e_raw += (raw.tail(len) - truth.tail(len)).squaredNorm();
    a_ekf += (ekf.tail(len) - raw.tail(len)).squaredNorm();
    a_butter += (butter.tail(len) - raw.tail(len)).squaredNorm();
    a_zero += (zero.tail(len) - raw.tail(len)).squaredNorm();
  }
  res.kv["delay_ekf_s"] = d_ekf / 3.0;
  res.kv["delay_butterworth_s"] = d_butter / 3.0;
  res.kv["delay_zero_phase_s"] = d_zero / 3.0;
  // residual RMS against the raw bias-removed rates: how much each method
  // strips from the measurements (the attenuation comparison)
  res.kv["rms_ekf"] = std::sqrt(a_ekf / (3.0 * len));
  res.kv["rms_butterworth"] = std::sqrt(a_butter / (3.0 * len));
  res.kv["rms_zero_phase"] = std::sqrt(a_zero / (3.0 * len));
  res.kv["rms_ekf_vs_truth"] = std::sqrt(e_ekf / (3.0 * len));
  res.kv["rms_butterworth_vs_truth"] = std::sqrt(e_butter / (3.0 * len));
  res.kv["rms_zero_phase_vs_truth"] = std::sqrt(e_zero / (3.0 * len));
  res.kv["rms_raw_vs_truth"] = std::sqrt(e_raw / (3.0 * len));

  // Acceleration channels for reference
  double da_ekf = 0, ea_ekf = 0;
  for (int i = 0; i < 3; ++i) {
    const Eigen::VectorXd truth = log.gt_a.col(i);
    const Eigen::VectorXd ekf = a_hat.col(i);
    da_ekf += estimate_delay(ekf.tail(len), truth.tail(len), dt, max_lag_s);
    ea_ekf += (ekf.tail(len) - truth.tail(len)).squaredNorm();
  }
  res.kv["delay_ekf_accel_s"] = da_ekf / 3.0;
  res.kv["rms_ekf_accel"] = std::sqrt(ea_ekf / (3.0 * len));
  return res;
}

CalibrationResult calibrate_inter_imu(const SensorLog& log, const Config& cfg,
                                      const EstimateRun& run) {
  CalibrationResult res;
  res.kv = estimate_metrics(run, log, cfg);

  // Excitation check: rank-probe the observability matrix at a state built
  // from smoothed empirical derivatives of the log. Differentiated sensor
  // noise fakes excitation, so each derivative channel is kept only when it
  // clears 3x the floor of a pure-noise series pushed through the same
  // smoothing/differentiation pipeline; a static log zeroes out and loses the
  // |w| c columns.
  const InterImuConfig icfg = inter_imu_config_from(cfg, log.imu_dt);
  const int nt = icfg.angacc_model.order;
  const int na = icfg.accel_model.order;
  const double dt = log.imu_dt;
  const double k_smooth = 0.05;
  const long rows = log.rows();

  auto smooth3 = [&](const MatrixX3& m) {
    MatrixX3 s(m.rows(), 3);
    for (int i = 0; i < 3; ++i) s.col(i) = lti::filter_zero_phase(m.col(i), k_smooth, dt);
    return s;
  };
  auto derivative = [&](const MatrixX3& m, int times) {
    MatrixX3 d = m;
    for (int rep = 0; rep < times; ++rep) {
      MatrixX3 next = MatrixX3::Zero(d.rows(), 3);
      for (long k = 1; k + 1 < d.rows(); ++k) next.row(k) = (d.row(k + 1) - d.row(k - 1)) / (2 * dt);
      d = next;
    }
    return d;
  };
  auto mid_rms = [&](const MatrixX3& m) {
    const long a = rows / 4, b = 3 * rows / 4;
    return std::sqrt(m.middleRows(a, b - a).squaredNorm() / ((b - a) * 3.0));
  };

  GaussianStream noise_gen(0xFEEDu);
  MatrixX3 noise_w(rows, 3), noise_a(rows, 3);
  for (long k = 0; k < rows; ++k) {
    noise_w.row(k) = (cfg.sensors.noise_gyro * noise_gen.next3()).transpose();
    noise_a.row(k) = (cfg.sensors.noise_accel * noise_gen.next3()).transpose();
  }
  const MatrixX3 w_s = smooth3(log.omega_m), a_s = smooth3(log.a_m);
  const MatrixX3 w_floor = smooth3(noise_w), a_floor = smooth3(noise_a);

  ManifoldPoint probe(inter_imu_layout(nt, na));
  const long mid = rows / 2;
  probe.euclidean("c") = run.final_block("c");
  probe.rotation(4) = run.final_state.rotation(run.layout->index_of("R"));
  auto keep = [&](const MatrixX3& sig, const MatrixX3& floor_sig, int order) -> Eigen::Vector3d {
    const MatrixX3 d = derivative(sig, order);
    if (mid_rms(d) > 3.0 * mid_rms(derivative(floor_sig, order))) return d.row(mid).transpose();
    return Eigen::Vector3d::Zero();
  };
  probe.euclidean("w") = keep(w_s, w_floor, 0);
  for (int k = 0; k < nt; ++k)
    probe.euclidean("g_t").segment<3>(3 * k) = keep(w_s, w_floor, k + 1);
  for (int k = 0; k < na; ++k)
    probe.euclidean("g_a").segment<3>(3 * k) = keep(a_s, a_floor, k);

  const SystemDescription sys = inter_imu_system(icfg);
  const auto chains = inter_imu_chains(nt, na, std::max(nt + 2, 5));
  LieOptions opts;
  opts.stencil_dt = 0.45;
  opts.stencil_half_width = 5;
  opts.grad_step = 1e-4;
  const auto rank = rank_probe(equilibrated(observability_matrix_nl(sys, probe, chains, opts)),
                               cfg.observability.rank_tol);
  const int full = sys.layout->tangent_dim();
  res.kv["excitation_rank"] = rank.rank;
  res.kv["excitation_rank_full"] = full;
  if (rank.rank < full) {
    res.excitation_warning = true;
    res.warning_text = "insufficient excitation: empirical observability rank " +
                       std::to_string(rank.rank) + " < " + std::to_string(full) +
                       "; extrinsic estimates are not trustworthy";
  }
  return res;
}

}  // namespace kinestat
