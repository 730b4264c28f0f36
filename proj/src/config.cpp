#include "kinestat/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace kinestat {

using nlohmann::json;

namespace {

// Wraps one JSON object, tracks which keys were consumed, rejects leftovers.
class Section {
 public:
  Section(json j, std::string path) : j_(std::move(j)), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError("config " + path_ + ": expected an object");
  }

  bool has(const std::string& key) {
    return j_.contains(key);
  }

  template <typename T>
  void get(const std::string& key, T& out, const char* type_name) {
    used_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("config key '" + full(key) + "': expected " + type_name);
    }
  }

  void get_vec3(const std::string& key, Eigen::Vector3d& out) {
    used_.insert(key);
    if (!j_.contains(key)) return;
    std::vector<double> v;
    try {
      v = j_.at(key).get<std::vector<double>>();
    } catch (const json::exception&) {
      throw ConfigError("config key '" + full(key) + "': expected an array of 3 numbers");
    }
    if (v.size() != 3)
      throw ConfigError("config key '" + full(key) + "': expected an array of 3 numbers");
    out = Eigen::Vector3d(v[0], v[1], v[2]);
  }

  json child(const std::string& key) {
    used_.insert(key);
    return j_.contains(key) ? j_.at(key) : json::object();
  }

  std::string full(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  void finish() {
    for (const auto& item : j_.items())
      if (!used_.count(item.key()))
        throw ConfigError("config: unknown key '" + full(item.key()) + "'");
  }

 private:
  json j_;
  std::string path_;
  std::set<std::string> used_;
};

std::vector<Sinusoid> parse_sinusoids(const json& arr, const std::string& path) {
  if (!arr.is_array()) throw ConfigError("config " + path + ": expected an array");
  std::vector<Sinusoid> out;
  int idx = 0;
  for (const auto& e : arr) {
    Section s(e, path + "[" + std::to_string(idx++) + "]");
    Sinusoid sin;
    s.get("axis", sin.axis, "an integer");
    s.get("amplitude", sin.amplitude, "a number");
    s.get("freq_hz", sin.freq_hz, "a number");
    s.get("phase", sin.phase, "a number");
    s.finish();
    out.push_back(sin);
  }
  return out;
}

json sinusoids_to_json(const std::vector<Sinusoid>& set) {
  json arr = json::array();
  for (const auto& s : set)
    arr.push_back({{"axis", s.axis},
                   {"amplitude", s.amplitude},
                   {"freq_hz", s.freq_hz},
                   {"phase", s.phase}});
  return arr;
}

ModelCfg parse_model(const json& j, const std::string& path, const ModelCfg& defaults) {
  Section s(j, path);
  ModelCfg m = defaults;
  s.get("order", m.order, "an integer");
  s.get("q", m.q, "an array of numbers");
  s.finish();
  if (m.order < 1) throw ConfigError("config " + path + ".order: must be >= 1");
  if (static_cast<int>(m.q.size()) != m.order)
    throw ConfigError("config " + path + ".q: expected " + std::to_string(m.order) +
                      " entries (one per integrator order), got " + std::to_string(m.q.size()));
  return m;
}

json model_to_json(const ModelCfg& m) { return {{"order", m.order}, {"q", m.q}}; }

std::vector<double> vec(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }

}  // namespace

Config default_config() {
  Config c;
  c.trajectory.accel_world = {{0, 0.6, 0.45, 0.3}, {0, 0.25, 1.7, 1.1},
                              {1, 0.5, 0.33, 1.2}, {1, 0.2, 1.3, 0.4},
                              {2, 0.3, 0.8, 2.1},  {2, 0.15, 2.2, 0.9}};
  c.trajectory.omega_body = {{0, 1.25, 0.22, 0.0}, {0, 0.5, 0.47, 0.7},
                             {1, 1.13, 0.28, 1.9}, {1, 0.45, 0.55, 0.3},
                             {2, 1.0, 0.18, 0.9},  {2, 0.38, 0.4, 2.4}};
  c.sensors.noise_gyro = 0.05;
  c.sensors.noise_heading = 0.0025;
  c.mm_accel = {4, {0.1, 10.0, 1e3, 1e5}};
  c.mm_gyro = {4, {0.1, 10.0, 1e3, 1e5}};
  c.mm_angacc = {3, {1e3, 1e5, 1e7}};
  c.mm_accel2 = {4, {10.0, 1e3, 1e5, 1e7}};
  return c;
}

Config parse_config(const std::string& text) {
  std::string trimmed = text;
  trimmed.erase(0, trimmed.find_first_not_of(" \t\r\n"));
  if (trimmed.empty()) return default_config();

  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }

  Config c = default_config();
  Section root(j, "");
  root.get("seed", c.seed, "an unsigned integer");
  root.get_vec3("gravity", c.gravity);

  {
    Section t(root.child("trajectory"), "trajectory");
    auto& tr = c.trajectory;
    t.get("duration_s", tr.duration_s, "a number");
    t.get("imu_rate_hz", tr.imu_rate_hz, "a number");
    t.get("vertical_profile", tr.vertical_profile, "a boolean");
    t.get("takeoff_time_s", tr.takeoff_time_s, "a number");
    t.get("climb_duration_s", tr.climb_duration_s, "a number");
    t.get("hover_height_m", tr.hover_height_m, "a number");
    t.get("landing_time_s", tr.landing_time_s, "a number");
    t.get("descent_duration_s", tr.descent_duration_s, "a number");
    if (t.has("accel_world")) tr.accel_world = parse_sinusoids(t.child("accel_world"), "trajectory.accel_world");
    else t.child("accel_world");
    if (t.has("omega_body")) tr.omega_body = parse_sinusoids(t.child("omega_body"), "trajectory.omega_body");
    else t.child("omega_body");
    t.finish();
  }
  {
    Section s(root.child("sensors"), "sensors");
    auto& sn = c.sensors;
    s.get("pos_rate_hz", sn.pos_rate_hz, "a number");
    s.get_vec3("offset_c", sn.offset_c);
    s.get_vec3("heading_ref", sn.heading_ref);
    s.get("noise_pos", sn.noise_pos, "a number");
    s.get("noise_heading", sn.noise_heading, "a number");
    s.get("noise_accel", sn.noise_accel, "a number");
    s.get("noise_gyro", sn.noise_gyro, "a number");
    s.get("bias_rw_accel", sn.bias_rw_accel, "a number");
    s.get("bias_rw_gyro", sn.bias_rw_gyro, "a number");
    s.get_vec3("bias_accel0", sn.bias_accel0);
    s.get_vec3("bias_gyro0", sn.bias_gyro0);
    s.get("inter_imu", sn.inter_imu, "a boolean");
    s.get_vec3("inter_c", sn.inter_c);
    s.get_vec3("inter_rotvec", sn.inter_rotvec);
    s.get("noise_accel2", sn.noise_accel2, "a number");
    s.get("bias_rw_accel2", sn.bias_rw_accel2, "a number");
    s.get_vec3("bias_accel2_0", sn.bias_accel2_0);
    s.finish();
  }
  {
    Section m(root.child("motion_models"), "motion_models");
    c.mm_accel = parse_model(m.child("accel"), "motion_models.accel", c.mm_accel);
    c.mm_gyro = parse_model(m.child("gyro"), "motion_models.gyro", c.mm_gyro);
    c.mm_angacc = parse_model(m.child("angacc"), "motion_models.angacc", c.mm_angacc);
    c.mm_accel2 = parse_model(m.child("accel2"), "motion_models.accel2", c.mm_accel2);
    m.finish();
  }
  {
    Section f(root.child("filter"), "filter");
    auto& fc = c.filter;
    f.get("init_pos", fc.init_pos, "a number");
    f.get("init_vel", fc.init_vel, "a number");
    f.get("init_att", fc.init_att, "a number");
    f.get("init_bias", fc.init_bias, "a number");
    f.get("init_gamma", fc.init_gamma, "a number");
    f.get("init_c", fc.init_c, "a number");
    f.get("init_omega", fc.init_omega, "a number");
    f.get("init_ext_att", fc.init_ext_att, "a number");
    f.get("joseph", fc.joseph, "a boolean");
    f.get("metrics_start_s", fc.metrics_start_s, "a number");
    f.finish();
  }
  {
    Section o(root.child("observability"), "observability");
    auto& oc = c.observability;
    o.get("trials", oc.trials, "an integer");
    o.get("rank_tol", oc.rank_tol, "a number");
    o.get("svd_tol", oc.svd_tol, "a number");
    o.get("seed", oc.seed, "an unsigned integer");
    o.finish();
  }
  root.finish();
  c.trajectory.validate();
  return c;
}

Config read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const Config& c) {
  json j;
  j["seed"] = c.seed;
  j["gravity"] = vec(c.gravity);
  j["trajectory"] = {{"duration_s", c.trajectory.duration_s},
                     {"imu_rate_hz", c.trajectory.imu_rate_hz},
                     {"vertical_profile", c.trajectory.vertical_profile},
                     {"takeoff_time_s", c.trajectory.takeoff_time_s},
                     {"climb_duration_s", c.trajectory.climb_duration_s},
                     {"hover_height_m", c.trajectory.hover_height_m},
                     {"landing_time_s", c.trajectory.landing_time_s},
                     {"descent_duration_s", c.trajectory.descent_duration_s},
                     {"accel_world", sinusoids_to_json(c.trajectory.accel_world)},
                     {"omega_body", sinusoids_to_json(c.trajectory.omega_body)}};
  j["sensors"] = {{"pos_rate_hz", c.sensors.pos_rate_hz},
                  {"offset_c", vec(c.sensors.offset_c)},
                  {"heading_ref", vec(c.sensors.heading_ref)},
                  {"noise_pos", c.sensors.noise_pos},
                  {"noise_heading", c.sensors.noise_heading},
                  {"noise_accel", c.sensors.noise_accel},
                  {"noise_gyro", c.sensors.noise_gyro},
                  {"bias_rw_accel", c.sensors.bias_rw_accel},
                  {"bias_rw_gyro", c.sensors.bias_rw_gyro},
                  {"bias_accel0", vec(c.sensors.bias_accel0)},
                  {"bias_gyro0", vec(c.sensors.bias_gyro0)},
                  {"inter_imu", c.sensors.inter_imu},
                  {"inter_c", vec(c.sensors.inter_c)},
                  {"inter_rotvec", vec(c.sensors.inter_rotvec)},
                  {"noise_accel2", c.sensors.noise_accel2},
                  {"bias_rw_accel2", c.sensors.bias_rw_accel2},
                  {"bias_accel2_0", vec(c.sensors.bias_accel2_0)}};
  j["motion_models"] = {{"accel", model_to_json(c.mm_accel)},
                        {"gyro", model_to_json(c.mm_gyro)},
                        {"angacc", model_to_json(c.mm_angacc)},
                        {"accel2", model_to_json(c.mm_accel2)}};
  j["filter"] = {{"init_pos", c.filter.init_pos},
                 {"init_vel", c.filter.init_vel},
                 {"init_att", c.filter.init_att},
                 {"init_bias", c.filter.init_bias},
                 {"init_gamma", c.filter.init_gamma},
                 {"init_c", c.filter.init_c},
                 {"init_omega", c.filter.init_omega},
                 {"init_ext_att", c.filter.init_ext_att},
                 {"joseph", c.filter.joseph},
                 {"metrics_start_s", c.filter.metrics_start_s}};
  j["observability"] = {{"trials", c.observability.trials},
                        {"rank_tol", c.observability.rank_tol},
                        {"svd_tol", c.observability.svd_tol},
                        {"seed", c.observability.seed}};
  return j.dump(2) + "\n";
}

}  // namespace kinestat
