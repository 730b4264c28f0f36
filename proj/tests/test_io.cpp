#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "kinestat/config.hpp"
#include "kinestat/io.hpp"
#include "kinestat/runner.hpp"

using namespace kinestat;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) : path("/tmp/kinestat_test_" + name) {}
  ~TempFile() { std::remove(path.c_str()); }
};

SensorLog small_log(bool inter_imu) {
  TrajectorySpec spec;
  spec.duration_s = 0.2;
  spec.vertical_profile = false;
  spec.omega_body = {{0, 0.3, 1.0, 0.2}};
  spec.accel_world = {{1, 0.5, 0.7, 0.0}};
  const TrajectoryTruth truth = generate_trajectory(spec);
  SensorSpec s = default_config().sensors;
  s.inter_imu = inter_imu;
  return synthesize_sensors(truth, s, 5);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("shortest round-trip double formatting") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0, -7.25}) {
      const std::string s = format_double(v);
      CHECK(std::stod(s) == v);
    }
  }

  TEST_CASE("write/read round trip is the identity") {
    for (bool inter : {false, true}) {
      const SensorLog log = small_log(inter);
      TempFile f(inter ? "roundtrip_ii.csv" : "roundtrip.csv");
      write_sensor_log(f.path, log);
      const SensorLog back = read_sensor_log(f.path);
      CHECK(back.inter_imu == inter);
      CHECK(back.has_truth);
      CHECK(back.rows() == log.rows());
      CHECK((back.t - log.t).cwiseAbs().maxCoeff() == 0.0);
      CHECK((back.a_m - log.a_m).cwiseAbs().maxCoeff() == 0.0);
      CHECK((back.omega_m - log.omega_m).cwiseAbs().maxCoeff() == 0.0);
      CHECK((back.gt_rotvec - log.gt_rotvec).cwiseAbs().maxCoeff() == 0.0);
      for (long k = 0; k < back.rows(); ++k) {
        CHECK(back.has_pos[k] == log.has_pos[k]);
        if (back.has_pos[k]) CHECK((back.p_m.row(k) - log.p_m.row(k)).norm() == 0.0);
      }
      if (inter) CHECK((back.a_m2 - log.a_m2).cwiseAbs().maxCoeff() == 0.0);

      // write -> read -> write is byte-stable
      TempFile f2("roundtrip2.csv");
      write_sensor_log(f2.path, back);
      CHECK(slurp(f.path) == slurp(f2.path));
    }
  }

  TEST_CASE("unknown extra columns are preserved") {
    SensorLog log = small_log(false);
    log.extra_columns.emplace_back(
        "custom_tag", std::vector<std::string>(log.rows(), "7"));
    TempFile f("extra.csv");
    write_sensor_log(f.path, log);
    const SensorLog back = read_sensor_log(f.path);
    REQUIRE(back.extra_columns.size() == 1);
    CHECK(back.extra_columns[0].first == "custom_tag");
    CHECK(back.extra_columns[0].second[3] == "7");
  }

  TEST_CASE("non-monotone timestamps are rejected with the row cited") {
    const SensorLog log = small_log(false);
    TempFile f("monotone.csv");
    write_sensor_log(f.path, log);
    std::string text = slurp(f.path);
    // corrupt the timestamp of data row 17
    std::istringstream in(text);
    std::ostringstream out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (lineno == 2 + 17) {
        const auto comma = line.find(',');
        line = "0" + line.substr(comma);
      }
      out << line << "\n";
    }
    std::ofstream(f.path) << out.str();
    try {
      read_sensor_log(f.path);
      FAIL("expected a monotonicity error");
    } catch (const std::exception& e) {
      CHECK(std::string(e.what()).find("row 17") != std::string::npos);
    }
  }

  TEST_CASE("a log without a_m2 cannot drive the inter-IMU formulation") {
    const SensorLog log = small_log(false);
    CHECK_THROWS_WITH_AS(run_estimator(log, default_config(), Formulation::InterImu),
                         doctest::Contains("a_m2"), std::invalid_argument);
  }

  TEST_CASE("empty config file yields the defaults") {
    TempFile f("empty.json");
    std::ofstream(f.path) << "";
    const Config cfg = read_config(f.path);
    CHECK(cfg.trajectory.duration_s == 15.0);
    CHECK(cfg.trajectory.takeoff_time_s == 2.0);
    CHECK(cfg.trajectory.hover_height_m == 5.0);
    CHECK(cfg.trajectory.landing_time_s == 12.0);
    CHECK((cfg.sensors.offset_c - Eigen::Vector3d(0.5, 0.5, 0.5)).norm() == 0.0);
    CHECK(cfg.mm_accel.order == 4);
  }

  TEST_CASE("config rejects a q list of the wrong length") {
    try {
      parse_config(R"({"motion_models": {"accel": {"order": 4, "q": [1.0, 2.0]}}})");
      FAIL("expected a q-length error");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("motion_models.accel.q") != std::string::npos);
    }
  }

  TEST_CASE("config rejects unknown keys and wrong types") {
    CHECK_THROWS_WITH_AS(parse_config(R"({"trjectory": {}})"),
                         doctest::Contains("unknown key 'trjectory'"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"sensors": {"noise_pos": "high"}})"),
                         doctest::Contains("sensors.noise_pos"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"sensors": {"typo_key": 1.0}})"),
                         doctest::Contains("typo_key"), ConfigError);
  }

  TEST_CASE("config json round trip") {
    const Config cfg = default_config();
    const Config back = parse_config(config_to_json(cfg));
    CHECK(back.seed == cfg.seed);
    CHECK(back.trajectory.accel_world.size() == cfg.trajectory.accel_world.size());
    CHECK(back.sensors.noise_pos == cfg.sensors.noise_pos);
    CHECK(back.mm_gyro.q == cfg.mm_gyro.q);
  }

  TEST_CASE("reference config file parses to the experiment values") {
    const Config cfg = read_config(std::string(KINESTAT_SOURCE_DIR) + "/configs/reference.json");
    CHECK(cfg.trajectory.duration_s == 15.0);
    CHECK(cfg.trajectory.takeoff_time_s == 2.0);
    CHECK(cfg.trajectory.hover_height_m == 5.0);
    CHECK(cfg.trajectory.landing_time_s == 12.0);
    CHECK((cfg.sensors.offset_c - Eigen::Vector3d(0.5, 0.5, 0.5)).norm() == 0.0);
    CHECK(cfg.trajectory.imu_rate_hz == 1000.0);
    CHECK(cfg.sensors.pos_rate_hz == 200.0);
  }
}
