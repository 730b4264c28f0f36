#include "kinestat/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include "kinestat/so3.hpp"

namespace kinestat {

Eigen::VectorXd rmse(const Eigen::MatrixXd& est, const Eigen::MatrixXd& truth) {
  if (est.rows() != truth.rows() || est.cols() != truth.cols())
    throw std::invalid_argument("rmse: series are misaligned");
  if (est.rows() == 0) throw std::invalid_argument("rmse: empty series");
  return ((est - truth).array().square().colwise().mean()).sqrt().matrix().transpose();
}

Eigen::Vector3d euler_zyx(const Eigen::Matrix3d& r) {
  // R = Rz(yaw) Ry(pitch) Rx(roll)
  const double pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
  double yaw, roll;
  if (std::abs(r(2, 0)) < 1.0 - 1e-12) {
    yaw = std::atan2(r(1, 0), r(0, 0));
    roll = std::atan2(r(2, 1), r(2, 2));
  } else {  // gimbal lock: fold everything into yaw
    yaw = std::atan2(-r(0, 1), r(1, 1));
    roll = 0.0;
  }
  return {yaw, pitch, roll};
}

namespace {
double wrap_angle(double a) {
  while (a > M_PI) a -= 2.0 * M_PI;
  while (a < -M_PI) a += 2.0 * M_PI;
  return a;
}
}  // namespace

Eigen::Vector3d attitude_rmse(const Eigen::Matrix<double, Eigen::Dynamic, 3>& est_rotvec,
                              const Eigen::Matrix<double, Eigen::Dynamic, 3>& truth_rotvec) {
  if (est_rotvec.rows() != truth_rotvec.rows())
    throw std::invalid_argument("attitude_rmse: series are misaligned");
  Eigen::Vector3d acc = Eigen::Vector3d::Zero();
  for (long k = 0; k < est_rotvec.rows(); ++k) {
    const Eigen::Vector3d e =
        euler_zyx(so3::exp<double>(Eigen::Vector3d(est_rotvec.row(k).transpose())));
    const Eigen::Vector3d g =
        euler_zyx(so3::exp<double>(Eigen::Vector3d(truth_rotvec.row(k).transpose())));
    for (int i = 0; i < 3; ++i) {
      const double d = wrap_angle(e(i) - g(i));
      acc(i) += d * d;
    }
  }
  return (acc / static_cast<double>(est_rotvec.rows())).cwiseSqrt();
}

double estimate_delay(const Eigen::VectorXd& filtered, const Eigen::VectorXd& reference,
                      double dt, double max_lag_s) {
  if (filtered.size() != reference.size())
    throw std::invalid_argument("estimate_delay: series are misaligned");
  const long n = filtered.size();
  const long max_lag = std::min<long>(static_cast<long>(std::round(max_lag_s / dt)), n - 2);
  if (max_lag < 1) throw std::invalid_argument("estimate_delay: window too short");

  // corr(L) = normalized sum f[k] r[k - L] over the overlap; peak at L = D
  // when f lags r by D samples.
  auto corr = [&](long lag) {
    const long k0 = std::max(0L, lag);
    const long k1 = std::min(n, n + lag);
    const long len = k1 - k0;
    if (len < 8) return -2.0;
    const auto f = filtered.segment(k0, len);
    const auto r = reference.segment(k0 - lag, len);
    const double fm = f.mean(), rm = r.mean();
    const Eigen::ArrayXd fc = f.array() - fm;
    const Eigen::ArrayXd rc = r.array() - rm;
    const double denom = std::sqrt(fc.square().sum() * rc.square().sum());
    if (denom < 1e-12) throw std::runtime_error("estimate_delay: flat correlation");
    return (fc * rc).sum() / denom;
  };

  long best = 0;
  double best_val = -2.0;
  Eigen::VectorXd vals(2 * max_lag + 1);
  for (long lag = -max_lag; lag <= max_lag; ++lag) {
    const double v = corr(lag);
    vals(lag + max_lag) = v;
    if (v > best_val) {
      best_val = v;
      best = lag;
    }
  }
  double refined = static_cast<double>(best);
  if (best > -max_lag && best < max_lag) {
    const double cm = vals(best - 1 + max_lag);
    const double c0 = vals(best + max_lag);
    const double cp = vals(best + 1 + max_lag);
    const double denom = cm - 2.0 * c0 + cp;
    if (std::abs(denom) > 1e-15) refined += 0.5 * (cm - cp) / denom;
  }
  return refined * dt;
}

std::optional<double> convergence_time(const Eigen::VectorXd& t, const Eigen::VectorXd& series,
                                       double target, double band) {
  if (t.size() != series.size() || t.size() == 0)
    throw std::invalid_argument("convergence_time: bad series");
  long last_violation = -1;
  for (long k = 0; k < series.size(); ++k)
    if (std::abs(series(k) - target) > band) last_violation = k;
  if (last_violation == series.size() - 1) return std::nullopt;
  return t(last_violation + 1);
}

}  // namespace kinestat
