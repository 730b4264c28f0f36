#pragma once

#include <Eigen/Dense>
#include <cmath>

// SO(3) primitives shared by the filter and the observability analyzer.
// Rotations are plain 3x3 matrices (R^T R = I, det R = +1); attitude errors and
// chart coordinates are rotation vectors with the right-multiplicative
// convention R_true = R_nominal * Exp(theta).

namespace kinestat::so3 {

template <typename S>
Eigen::Matrix<S, 3, 3> skew(const Eigen::Matrix<S, 3, 1>& v) {
  Eigen::Matrix<S, 3, 3> m;
  m << S(0), -v.z(), v.y(),  //
      v.z(), S(0), -v.x(),   //
      -v.y(), v.x(), S(0);
  return m;
}

template <typename S>
Eigen::Matrix<S, 3, 1> vee(const Eigen::Matrix<S, 3, 3>& m) {
  return Eigen::Matrix<S, 3, 1>(m(2, 1), m(0, 2), m(1, 0));
}

// Rodrigues formula. Below 1e-8 rad the sin/cos ratios degenerate, so a
// second-order Taylor expansion is used instead.
template <typename S>
Eigen::Matrix<S, 3, 3> exp(const Eigen::Matrix<S, 3, 1>& v) {
  const S theta = v.norm();
  const Eigen::Matrix<S, 3, 3> k = skew(v);
  if (theta < S(1e-8)) {
    return Eigen::Matrix<S, 3, 3>::Identity() + k + S(0.5) * k * k;
  }
  const S s = std::sin(theta) / theta;
  const S half = std::sin(theta / S(2)) / theta;
  const S c = S(2) * half * half;  // (1 - cos)/theta^2 without cancellation
  return Eigen::Matrix<S, 3, 3>::Identity() + s * k + c * k * k;
}

// Matrix logarithm onto the ball ||v|| <= pi. Near the pi branch the axis is
// recovered from the largest diagonal entry, which keeps the result
// deterministic at exactly half a turn.
template <typename S>
Eigen::Matrix<S, 3, 1> log(const Eigen::Matrix<S, 3, 3>& r) {
  const S tr = r.trace();
  const S cos_theta = std::clamp((tr - S(1)) / S(2), S(-1), S(1));
  const S theta = std::acos(cos_theta);
  const Eigen::Matrix<S, 3, 1> w = vee<S>(r - r.transpose()) / S(2);  // = sin(theta) * axis

  if (theta < S(1e-8)) {
    return w;  // sin(theta)/theta -> 1
  }
  if (theta < S(3.0)) {
    return (theta / std::sin(theta)) * w;
  }
  // Near pi the angle is recovered from ||w|| = sin(theta) (well conditioned
  // where acos is not) and the axis from the symmetric part,
  // (R + R^T)/2 = cos(theta) I + (1 - cos(theta)) a a^T, anchored at the
  // largest diagonal entry.
  const S angle = S(M_PI) - std::asin(std::clamp(w.norm(), S(0), S(1)));
  const S c = std::cos(angle);
  int i = 0;
  r.diagonal().maxCoeff(&i);
  const int j = (i + 1) % 3;
  const int k = (i + 2) % 3;
  Eigen::Matrix<S, 3, 1> axis;
  axis(i) = std::sqrt(std::max(S(0), (r(i, i) - c) / (S(1) - c)));
  axis(j) = (r(i, j) + r(j, i)) / (S(2) * (S(1) - c) * axis(i));
  axis(k) = (r(i, k) + r(k, i)) / (S(2) * (S(1) - c) * axis(i));
  axis.normalize();
  if (w.norm() > S(1e-12) && axis.dot(w) < S(0)) axis = -axis;
  return angle * axis;
}

// Right Jacobian of Exp and its inverse: Log(Exp(v) Exp(d)) ~ v + Jr(v)^-1 d.
template <typename S>
Eigen::Matrix<S, 3, 3> right_jacobian(const Eigen::Matrix<S, 3, 1>& v) {
  const S theta = v.norm();
  const Eigen::Matrix<S, 3, 3> k = skew(v);
  if (theta < S(1e-5)) {
    return Eigen::Matrix<S, 3, 3>::Identity() - S(0.5) * k + k * k / S(6);
  }
  const S t2 = theta * theta;
  return Eigen::Matrix<S, 3, 3>::Identity() - (S(1) - std::cos(theta)) / t2 * k +
         (theta - std::sin(theta)) / (t2 * theta) * k * k;
}

template <typename S>
Eigen::Matrix<S, 3, 3> right_jacobian_inv(const Eigen::Matrix<S, 3, 1>& v) {
  const S theta = v.norm();
  const Eigen::Matrix<S, 3, 3> k = skew(v);
  if (theta < S(1e-5)) {
    return Eigen::Matrix<S, 3, 3>::Identity() + S(0.5) * k + k * k / S(12);
  }
  const S t2 = theta * theta;
  const S coeff = S(1) / t2 - (S(1) + std::cos(theta)) / (S(2) * theta * std::sin(theta));
  return Eigen::Matrix<S, 3, 3>::Identity() + S(0.5) * k + coeff * k * k;
}

// d(R1, R2) = ||Log(R2^T R1)||, the geodesic metric on SO(3).
template <typename S>
S geodesic_distance(const Eigen::Matrix<S, 3, 3>& r1, const Eigen::Matrix<S, 3, 3>& r2) {
  return log<S>(Eigen::Matrix<S, 3, 3>(r2.transpose() * r1)).norm();
}

// Projects a drifted matrix back onto SO(3) (polar factor via SVD).
template <typename S>
Eigen::Matrix<S, 3, 3> orthonormalize(const Eigen::Matrix<S, 3, 3>& m) {
  Eigen::JacobiSVD<Eigen::Matrix<S, 3, 3>> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix<S, 3, 3> r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < S(0)) {
    Eigen::Matrix<S, 3, 3> d = Eigen::Matrix<S, 3, 3>::Identity();
    d(2, 2) = S(-1);
    r = svd.matrixU() * d * svd.matrixV().transpose();
  }
  return r;
}

template <typename S>
bool is_rotation(const Eigen::Matrix<S, 3, 3>& m, S tol = S(1e-9)) {
  return (m.transpose() * m - Eigen::Matrix<S, 3, 3>::Identity()).norm() < tol &&
         std::abs(m.determinant() - S(1)) < tol;
}

}  // namespace kinestat::so3
