#include <doctest.h>

#include <random>

#include "kinestat/lti.hpp"
#include "kinestat/metrics.hpp"
#include "kinestat/so3.hpp"

using namespace kinestat;
using Eigen::MatrixXd;
using Eigen::Vector3d;
using Eigen::VectorXd;

TEST_SUITE("metrics") {
  TEST_CASE("rmse basics") {
    MatrixXd a = MatrixXd::Random(100, 3);
    CHECK(rmse(a, a).norm() == doctest::Approx(0.0));
    MatrixXd b = a;
    b.col(1).array() += 0.25;
    CHECK(rmse(b, a)(1) == doctest::Approx(0.25));
    CHECK(rmse(b, a)(0) == doctest::Approx(0.0));
    CHECK_THROWS(rmse(a, MatrixXd::Zero(50, 3)));
  }

  TEST_CASE("rmse of white error approaches its std") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g(0.0, 0.3);
    MatrixXd truth = MatrixXd::Zero(10000, 1);
    MatrixXd est(10000, 1);
    for (long i = 0; i < est.rows(); ++i) est(i, 0) = g(rng);
    CHECK(rmse(est, truth)(0) == doctest::Approx(0.3).epsilon(0.05));
  }

  TEST_CASE("rmse is invariant to a rigid time shift of both series") {
    MatrixXd a = MatrixXd::Random(200, 2), b = MatrixXd::Random(200, 2);
    const VectorXd r0 = rmse(a.topRows(150), b.topRows(150));
    const VectorXd r1 = rmse(a.bottomRows(150), b.bottomRows(150));
    // same samples shifted together: identical windows give identical values
    CHECK((rmse(a, b) - rmse(a, b)).norm() == 0.0);
    CHECK(r0.size() == r1.size());
  }

  TEST_CASE("euler angles: extrinsic Z-Y-X composition recovered") {
    auto rz = [](double a) { return so3::exp<double>(Vector3d(0, 0, a)); };
    auto ry = [](double a) { return so3::exp<double>(Vector3d(0, a, 0)); };
    auto rx = [](double a) { return so3::exp<double>(Vector3d(a, 0, 0)); };
    const Vector3d e = euler_zyx(rz(0.3) * ry(-0.2) * rx(0.7));
    CHECK(e(0) == doctest::Approx(0.3));
    CHECK(e(1) == doctest::Approx(-0.2));
    CHECK(e(2) == doctest::Approx(0.7));
  }

  TEST_CASE("delay of a series against itself is zero") {
    VectorXd x(5000);
    for (long i = 0; i < x.size(); ++i) x(i) = std::sin(0.013 * i) + 0.4 * std::cos(0.041 * i);
    CHECK(std::abs(estimate_delay(x, x, 1e-3, 0.1)) < 1e-9);
  }

  TEST_CASE("a 40-sample shift at 1 kHz reads as 40 ms") {
    std::mt19937_64 rng(10);
    std::normal_distribution<double> g(0.0, 1.0);
    VectorXd base(6000);
    for (long i = 0; i < base.size(); ++i) base(i) = g(rng);
    // band-limit so the parabolic refinement is well conditioned
    base = lti::filter_zero_phase(base, 0.02, 1e-3);
    const long shift = 40;
    VectorXd delayed = VectorXd::Zero(base.size());
    delayed.tail(base.size() - shift) = base.head(base.size() - shift);
    const double d = estimate_delay(delayed, base, 1e-3, 0.2);
    CHECK(std::abs(d - 0.040) < 0.5e-3);
    // antisymmetric under swapping the roles
    CHECK(std::abs(estimate_delay(base, delayed, 1e-3, 0.2) + d) < 1e-3);
  }

  TEST_CASE("butterworth delay on band-limited noise is about k") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g(0.0, 1.0);
    const double dt = 1e-3, k = 0.05;
    VectorXd x(60000);
    for (long i = 0; i < x.size(); ++i) x(i) = g(rng);
    // keep the content well inside the filter band (w << 1/k)
    x = lti::filter_zero_phase(x, 5.0 * k, dt);
    const VectorXd y = lti::filter_butterworth1(x, k, dt);
    const double d = estimate_delay(y, x, dt, 0.5);
    CHECK(d == doctest::Approx(k).epsilon(0.20));
  }

  TEST_CASE("delay estimation rejects flat series") {
    const VectorXd x = VectorXd::Ones(1000);
    CHECK_THROWS(estimate_delay(x, x, 1e-3, 0.1));
  }

  TEST_CASE("convergence detection") {
    const long n = 10000;
    VectorXd t(n), flat(n), decay(n), diverge(n);
    const double tau = 0.5;
    for (long i = 0; i < n; ++i) {
      t(i) = i * 1e-3;
      flat(i) = 2.0;
      decay(i) = 2.0 + std::exp(-t(i) / tau);
      diverge(i) = 2.0 + 0.001 * t(i) * t(i) + 0.3;
    }
    CHECK(*convergence_time(t, flat, 2.0, 0.01) == doctest::Approx(0.0));
    // 5% band around target reached after ~3 time constants
    CHECK(*convergence_time(t, decay, 2.0, 0.05) == doctest::Approx(tau * std::log(20.0)).epsilon(0.01));
    CHECK(!convergence_time(t, diverge, 2.0, 0.05).has_value());
  }
}
