// kinestat: statistical-motion-model error-state EKF toolkit.
//
// Subcommands: simulate, estimate, compare-filters, observability,
// calibrate-imu. Exit codes: 0 success, 1 usage/config error, 2 numerical
// failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "kinestat/config.hpp"
#include "kinestat/io.hpp"
#include "kinestat/observability.hpp"
#include "kinestat/runner.hpp"

namespace {

using namespace kinestat;

Config load_config(const std::string& path, std::optional<std::uint64_t> seed_override) {
  Config cfg = path.empty() ? default_config() : read_config(path);
  if (seed_override) cfg.seed = *seed_override;
  return cfg;
}

int cmd_simulate(const std::string& config_path, std::optional<std::uint64_t> seed,
                 const std::string& out_path) {
  const Config cfg = load_config(config_path, seed);
  const TrajectoryTruth truth = generate_trajectory(cfg.trajectory, cfg.gravity);
  const SensorLog log = synthesize_sensors(truth, cfg.sensors, cfg.seed);
  write_sensor_log(out_path, log);
  // Sidecar metadata: seed and the full spec echo.
  std::ofstream meta(out_path + ".meta.json");
  meta << config_to_json(cfg);
  std::cout << "wrote " << log.rows() << " rows to " << out_path << " (seed " << cfg.seed
            << (log.inter_imu ? ", inter-IMU" : "") << ")\n";
  return 0;
}

int cmd_estimate(const std::string& log_path, const std::string& config_path,
                 std::optional<std::uint64_t> seed, const std::string& formulation,
                 const std::string& out_path) {
  const Config cfg = load_config(config_path, seed);
  const Formulation form = parse_formulation(formulation);
  const SensorLog log = read_sensor_log(log_path);
  const EstimateRun run = run_estimator(log, cfg, form);
  write_estimates_csv(out_path, run);  // partial when diverged
  if (run.diverged) {
    std::cerr << "numerical error: filter diverged (non-finite state) at t = " << run.diverged_at
              << "; partial estimates written to " << out_path << "\n";
    return 2;
  }
  const auto kv = estimate_metrics(run, log, cfg);
  write_kv_report(out_path + ".metrics.kv", kv, "kinestat estimate metrics (" + formulation + ")");
  std::cout << "formulation " << formulation << ": mean predict "
            << run.timing.predict_mean_us << " us, mean update " << run.timing.update_mean_us
            << " us per step\n";
  for (const auto& [k, v] : kv) std::cout << "  " << k << " = " << v << "\n";
  return 0;
}

int cmd_compare_filters(const std::string& log_path, const std::string& config_path,
                        std::optional<std::uint64_t> seed, const std::string& out_path) {
  const Config cfg = load_config(config_path, seed);
  const SensorLog log = read_sensor_log(log_path);
  const FilterCompareResult res = compare_filters(log, cfg);
  write_kv_report(out_path, res.kv, "kinestat filter comparison (rate channels)");
  for (const auto& [k, v] : res.kv) std::cout << k << " = " << v << "\n";
  return 0;
}

int cmd_observability(const std::string& config_path, std::optional<std::uint64_t> seed,
                      const std::string& mode, int trials, const std::string& out_path) {
  Config cfg = load_config(config_path, seed);
  if (trials > 0) cfg.observability.trials = trials;
  const int t = cfg.observability.trials;

  ProbeReport report;
  if (mode == "input") {
    report = input_formulation_probe(pos_imu_config_from(cfg, 1e-3), t, cfg.observability.seed);
  } else if (mode == "state") {
    StateProbeConfig pc;
    pc.model = pos_imu_config_from(cfg, 1e-3);
    pc.full_rank_tol = cfg.observability.rank_tol;
    pc.seed = cfg.observability.seed;
    report = thin_set_probe_state_formulation(pc, t);
  } else if (mode == "inter-imu") {
    InterImuProbeConfig pc;
    pc.model = inter_imu_config_from(cfg, 1e-3);
    pc.full_rank_tol = cfg.observability.rank_tol;
    pc.seed = cfg.observability.seed;
    report = thin_set_probe_inter_imu(pc, t);
  } else if (mode == "lemma1") {
    report = lemma1_probe(t, cfg.observability.seed);
  } else {
    throw ConfigError("unknown observability mode '" + mode +
                      "' (input, state, inter-imu, lemma1)");
  }
  std::cout << report.summary() << "\n";
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    out << report.full_text();
  }
  return report.pass ? 0 : 2;
}

int cmd_calibrate_imu(const std::string& log_path, const std::string& config_path,
                      std::optional<std::uint64_t> seed, const std::string& out_path) {
  const Config cfg = load_config(config_path, seed);
  const SensorLog log = read_sensor_log(log_path);
  const EstimateRun run = run_estimator(log, cfg, Formulation::InterImu);
  const CalibrationResult res = calibrate_inter_imu(log, cfg, run);
  write_kv_report(out_path, res.kv, "kinestat inter-IMU calibration");
  for (const auto& [k, v] : res.kv) std::cout << k << " = " << v << "\n";
  if (res.excitation_warning) std::cout << "WARNING: " << res.warning_text << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kinestat: statistical-motion-model error-state EKF toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_path, log_path, formulation = "state", mode = "input";
  std::optional<std::uint64_t> seed;
  int trials = 0;

  auto add_common = [&](CLI::App* sub, bool needs_log) {
    sub->add_option("--config", config_path, "config JSON (defaults when omitted)");
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--out", out_path, "output path")->required();
    if (needs_log) sub->add_option("--log", log_path, "sensor log CSV")->required();
  };

  CLI::App* sim = app.add_subcommand("simulate", "generate a synthetic sensor log");
  add_common(sim, false);
  CLI::App* est = app.add_subcommand("estimate", "run an ESEKF over a log");
  add_common(est, true);
  est->add_option("--formulation", formulation, "state | input | inter-imu");
  CLI::App* cmp = app.add_subcommand("compare-filters",
                                     "EKF vs Butterworth vs zero-phase on the rate channels");
  add_common(cmp, true);
  CLI::App* obs = app.add_subcommand("observability", "rank probes and thin-set reports");
  obs->add_option("--config", config_path, "config JSON (defaults when omitted)");
  obs->add_option("--seed", seed, "override the config seed");
  obs->add_option("--out", out_path, "optional report path");
  obs->add_option("--mode", mode, "input | state | inter-imu | lemma1")->required();
  obs->add_option("--trials", trials, "override config trial count");
  CLI::App* cal = app.add_subcommand("calibrate-imu", "inter-IMU extrinsic calibration");
  add_common(cal, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 1;
  }

  try {
    if (sim->parsed()) return cmd_simulate(config_path, seed, out_path);
    if (est->parsed()) return cmd_estimate(log_path, config_path, seed, formulation, out_path);
    if (cmp->parsed()) return cmd_compare_filters(log_path, config_path, seed, out_path);
    if (obs->parsed()) return cmd_observability(config_path, seed, mode, trials, out_path);
    if (cal->parsed()) return cmd_calibrate_imu(log_path, config_path, seed, out_path);
  } catch (const kinestat::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
