#include "kinestat/sim.hpp"

#include <cmath>
#include <stdexcept>

#include "kinestat/so3.hpp"

namespace kinestat {

double GaussianStream::next() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // Box-Muller; uniforms mapped into (0, 1].
  const double u1 = (static_cast<double>(eng_()) + 1.0) * (1.0 / 18446744073709551616.0);
  const double u2 = (static_cast<double>(eng_()) + 1.0) * (1.0 / 18446744073709551616.0);
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * M_PI * u2);
  have_spare_ = true;
  return r * std::cos(2.0 * M_PI * u2);
}

Eigen::Vector3d GaussianStream::next3() { return {next(), next(), next()}; }

void TrajectorySpec::validate() const {
  if (duration_s <= 0) throw std::invalid_argument("trajectory: duration must be > 0");
  if (imu_rate_hz <= 0) throw std::invalid_argument("trajectory: imu rate must be > 0");
  for (const auto& s : accel_world)
    if (s.freq_hz >= 0.5 * imu_rate_hz || s.axis < 0 || s.axis > 2)
      throw std::invalid_argument("trajectory: bad accel sinusoid (axis or Nyquist)");
  for (const auto& s : omega_body)
    if (s.freq_hz >= 0.5 * imu_rate_hz || s.axis < 0 || s.axis > 2)
      throw std::invalid_argument("trajectory: bad rate sinusoid (axis or Nyquist)");
  if (vertical_profile) {
    if (climb_duration_s <= 0 || descent_duration_s <= 0)
      throw std::invalid_argument("trajectory: climb/descent durations must be > 0");
    if (landing_time_s < takeoff_time_s + climb_duration_s)
      throw std::invalid_argument("trajectory: landing before the climb completes");
  }
}

namespace {

// C2 bump s(u) = 140 u^3 (1-u)^3 with unit integral, plus its first and
// second antiderivatives; the double-bump accel pulse A[s, -s] climbs by
// exactly A T^2 with zero terminal velocity.
double bump(double u) {
  const double w = u * (1.0 - u);
  return 140.0 * w * w * w;
}
double bump_i(double u) {  // int_0^u s
  const double u4 = u * u * u * u;
  return 140.0 * (u4 / 4.0 - 3.0 * u4 * u / 5.0 + u4 * u * u / 2.0 - u4 * u * u * u / 7.0);
}
double bump_ii(double u) {  // int_0^u int s
  const double u5 = u * u * u * u * u;
  return 140.0 *
         (u5 / 20.0 - u5 * u / 10.0 + u5 * u * u / 14.0 - u5 * u * u * u / 56.0);
}

// Acceleration / velocity / displacement of a climb by `height` starting at t0
// over 2T (accelerate then decelerate), all in closed form.
struct Pulse {
  double t0 = 0, T = 1, height = 0;
  void eval(double t, double& a, double& v, double& d) const {
    const double A = height / (T * T);
    if (t <= t0) {
      a = v = d = 0;
    } else if (t < t0 + T) {
      const double u = (t - t0) / T;
      a = A * bump(u);
      v = A * T * bump_i(u);
      d = A * T * T * bump_ii(u);
    } else if (t < t0 + 2 * T) {
      const double u = (t - t0 - T) / T;
      a = -A * bump(u);
      v = A * T * (1.0 - bump_i(u));
      d = A * T * T * (0.5 + u - bump_ii(u));
    } else {
      a = 0;
      v = 0;
      d = height;
    }
  }
};

void sinusoid_eval(const std::vector<Sinusoid>& set, double t, Eigen::Vector3d& val,
                   Eigen::Vector3d& integral, Eigen::Vector3d& double_integral,
                   Eigen::Vector3d& derivative) {
  val.setZero();
  integral.setZero();
  double_integral.setZero();
  derivative.setZero();
  for (const auto& s : set) {
    if (s.freq_hz == 0.0) {
      const double c = s.amplitude * std::sin(s.phase);
      val(s.axis) += c;
      integral(s.axis) += c * t;
      double_integral(s.axis) += 0.5 * c * t * t;
      continue;
    }
    const double w = 2.0 * M_PI * s.freq_hz;
    const double arg = w * t + s.phase;
    val(s.axis) += s.amplitude * std::sin(arg);
    derivative(s.axis) += s.amplitude * w * std::cos(arg);
    integral(s.axis) += s.amplitude / w * (std::cos(s.phase) - std::cos(arg));
    double_integral(s.axis) +=
        s.amplitude / w * (std::cos(s.phase) * t - std::sin(arg) / w + std::sin(s.phase) / w);
  }
}

Eigen::Vector3d rate_step_integral(const std::vector<Sinusoid>& set, double t1, double t2) {
  Eigen::Vector3d out = Eigen::Vector3d::Zero();
  for (const auto& s : set) {
    if (s.freq_hz == 0.0) {
      out(s.axis) += s.amplitude * std::sin(s.phase) * (t2 - t1);
      continue;
    }
    const double w = 2.0 * M_PI * s.freq_hz;
    out(s.axis) += s.amplitude / w * (std::cos(w * t1 + s.phase) - std::cos(w * t2 + s.phase));
  }
  return out;
}

}  // namespace

TrajectoryTruth generate_trajectory(const TrajectorySpec& spec, const Eigen::Vector3d& gravity) {
  spec.validate();
  TrajectoryTruth truth;
  truth.dt = 1.0 / spec.imu_rate_hz;
  truth.gravity = gravity;
  const long n = static_cast<long>(std::llround(spec.duration_s * spec.imu_rate_hz)) + 1;
  truth.t.resize(n);
  truth.p.resize(n, 3);
  truth.v.resize(n, 3);
  truth.a_world.resize(n, 3);
  truth.a_body.resize(n, 3);
  truth.omega.resize(n, 3);
  truth.tau.resize(n, 3);
  truth.R.resize(n);

  Pulse climb{spec.takeoff_time_s, spec.climb_duration_s / 2.0, spec.hover_height_m};
  Pulse descent{spec.landing_time_s, spec.descent_duration_s / 2.0, -spec.hover_height_m};

  Eigen::Matrix3d r = Eigen::Matrix3d::Identity();
  for (long k = 0; k < n; ++k) {
    const double t = k * truth.dt;
    truth.t(k) = t;

    Eigen::Vector3d a, vi, pi, da;
    sinusoid_eval(spec.accel_world, t, a, vi, pi, da);
    if (spec.vertical_profile) {
      double ac, vc, dc, ad, vd, dd;
      climb.eval(t, ac, vc, dc);
      descent.eval(t, ad, vd, dd);
      a(2) += ac + ad;
      vi(2) += vc + vd;
      pi(2) += dc + dd;
    }
    truth.a_world.row(k) = a.transpose();
    truth.v.row(k) = vi.transpose();
    truth.p.row(k) = pi.transpose();

    Eigen::Vector3d w, w_i, w_ii, wd;
    sinusoid_eval(spec.omega_body, t, w, w_i, w_ii, wd);
    truth.omega.row(k) = w.transpose();
    truth.tau.row(k) = wd.transpose();

    truth.R[k] = r;
    truth.a_body.row(k) = (r.transpose() * (a - gravity)).transpose();
    if (k + 1 < n)
      r = r * so3::exp<double>(rate_step_integral(spec.omega_body, t, t + truth.dt));
  }
  return truth;
}

SensorLog synthesize_sensors(const TrajectoryTruth& truth, const SensorSpec& spec,
                             std::uint64_t seed) {
  if (spec.pos_rate_hz <= 0 || spec.pos_rate_hz > 1.0 / truth.dt + 1e-9)
    throw std::invalid_argument("synthesize_sensors: pos rate must be in (0, imu rate]");
  const long n = truth.samples();
  const long stride = std::max(1L, static_cast<long>(std::llround(1.0 / (truth.dt * spec.pos_rate_hz))));

  auto stream = [&](std::uint64_t channel) {
    return GaussianStream(seed ^ ((channel + 1) * 0x9E3779B97F4A7C15ULL));
  };
  GaussianStream s_gyro = stream(0), s_accel = stream(1), s_pos = stream(2), s_head = stream(3),
                 s_accel2 = stream(4), s_bias_a = stream(5), s_bias_w = stream(6),
                 s_bias_a2 = stream(7);

  SensorLog log;
  log.imu_dt = truth.dt;
  log.inter_imu = spec.inter_imu;
  log.t = truth.t;
  log.omega_m.resize(n, 3);
  log.a_m.resize(n, 3);
  log.p_m.setZero(n, 3);
  log.m_m.setZero(n, 3);
  log.has_pos.assign(n, 0);
  if (spec.inter_imu) log.a_m2.resize(n, 3);

  log.has_truth = true;
  log.gt_p = truth.p;
  log.gt_v = truth.v;
  log.gt_rotvec.resize(n, 3);
  log.gt_a = truth.a_body;
  log.gt_omega = truth.omega;
  log.gt_b_a.resize(n, 3);
  log.gt_b_w.resize(n, 3);
  if (spec.inter_imu) {
    log.gt_tau = truth.tau;
    log.gt_b_a2.resize(n, 3);
  }

  const Eigen::Matrix3d r_ext = so3::exp<double>(spec.inter_rotvec);
  Eigen::Vector3d b_a = spec.bias_accel0;
  Eigen::Vector3d b_w = spec.bias_gyro0;
  Eigen::Vector3d b_a2 = spec.bias_accel2_0;
  const double sq_dt = std::sqrt(truth.dt);

  for (long k = 0; k < n; ++k) {
    const Eigen::Matrix3d& R = truth.R[k];
    log.gt_rotvec.row(k) = so3::log<double>(R).transpose();
    log.gt_b_a.row(k) = b_a.transpose();
    log.gt_b_w.row(k) = b_w.transpose();

    log.omega_m.row(k) =
        (truth.omega.row(k).transpose() + b_w + spec.noise_gyro * s_gyro.next3()).transpose();
    log.a_m.row(k) =
        (truth.a_body.row(k).transpose() + b_a + spec.noise_accel * s_accel.next3()).transpose();

    if (k % stride == 0) {
      log.has_pos[k] = 1;
      log.p_m.row(k) = (truth.p.row(k).transpose() + R * spec.offset_c +
                        spec.noise_pos * s_pos.next3())
                           .transpose();
      log.m_m.row(k) =
          (R.transpose() * spec.heading_ref + spec.noise_heading * s_head.next3()).transpose();
    }

    if (spec.inter_imu) {
      log.gt_b_a2.row(k) = b_a2.transpose();
      const Eigen::Vector3d w = truth.omega.row(k).transpose();
      const Eigen::Vector3d tau = truth.tau.row(k).transpose();
      const Eigen::Matrix3d sw = so3::skew<double>(w);
      const Eigen::Vector3d f2 =
          r_ext * (truth.a_body.row(k).transpose() + sw * sw * spec.inter_c +
                   so3::skew<double>(tau) * spec.inter_c);
      log.a_m2.row(k) = (f2 + b_a2 + spec.noise_accel2 * s_accel2.next3()).transpose();
    }

    b_a += std::sqrt(spec.bias_rw_accel) * sq_dt * s_bias_a.next3();
    b_w += std::sqrt(spec.bias_rw_gyro) * sq_dt * s_bias_w.next3();
    if (spec.inter_imu) b_a2 += std::sqrt(spec.bias_rw_accel2) * sq_dt * s_bias_a2.next3();
  }
  return log;
}

}  // namespace kinestat
