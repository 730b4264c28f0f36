#include <doctest.h>

#include <complex>
#include <random>

#include "kinestat/lti.hpp"
#include "kinestat/motion_model.hpp"

using namespace kinestat;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {
int mat_rank(const MatrixXd& m, double tol = 1e-9) {
  Eigen::JacobiSVD<MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(0) > 0 && sv(i) > tol * sv(0)) ++r;
  return r;
}
}  // namespace

TEST_SUITE("motion_model") {
  TEST_CASE("first-order model is the constant-velocity style process") {
    const StatModel m = make_integrator_model(1, VectorXd::Ones(1));
    CHECK(m.A(0, 0) == 0.0);
    CHECK(m.C(0) == 1.0);
    CHECK(psd(m, 1.0) == doctest::Approx(1.0));
  }

  TEST_CASE("construction rejects bad q") {
    CHECK_THROWS(make_integrator_model(3, VectorXd::Ones(2)));   // wrong length
    CHECK_THROWS(make_integrator_model(2, VectorXd::Zero(2)));   // undriven
    CHECK_THROWS(make_integrator_model(2, Eigen::Vector2d(1, -1)));
    CHECK_THROWS(make_integrator_model(0, VectorXd::Zero(0)));
  }

  TEST_CASE("4th-order PSD closed form") {
    const StatModel m = make_integrator_model(4, VectorXd::Ones(4));
    CHECK(psd(m, 1.0) == doctest::Approx(4.0).epsilon(1e-12));
    const double expect10 = 1e-2 + 1e-4 + 1e-6 + 1e-8;
    CHECK(psd(m, 10.0) == doctest::Approx(expect10).epsilon(1e-12));
    CHECK_THROWS(psd(m, 0.0));
  }

  TEST_CASE("PSD equals sum q_i / w^2i over a log grid") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.05, 3.0);
    for (int n = 1; n <= 5; ++n) {
      VectorXd q(n);
      for (int i = 0; i < n; ++i) q(i) = u(rng);
      const StatModel m = make_integrator_model(n, q);
      for (double w = 1e-2; w < 1e4; w *= 2.7) {
        double expect = 0.0;
        for (int i = 1; i <= n; ++i) expect += q(i - 1) / std::pow(w, 2 * i);
        CHECK(std::abs(psd(m, w) - expect) < 1e-10 * expect);
      }
    }
  }

  TEST_CASE("high-frequency asymptote rolls off at -20 dB/dec per leading order") {
    const StatModel m = make_integrator_model(4, VectorXd::Ones(4));
    // At high frequency the q_1 / w^2 term dominates: one decade = -20 dB.
    const double drop_db = 10.0 * std::log10(psd(m, 1e3) / psd(m, 1e2));
    CHECK(drop_db == doctest::Approx(-20.0).epsilon(0.01));
  }

  TEST_CASE("vectorize replicates the model per axis") {
    const StatModel m1 = make_integrator_model(1, VectorXd::Ones(1));
    const lti::LtiSystem v1 = vectorize(m1, 3);
    CHECK(v1.A.isZero(0.0));
    CHECK(v1.A.rows() == 3);
    CHECK((v1.C - MatrixXd::Identity(3, 3)).norm() == doctest::Approx(0.0));

    const StatModel m4 = make_integrator_model(4, VectorXd::Ones(4));
    const lti::LtiSystem v4 = vectorize(m4, 3);
    CHECK(v4.A.rows() == 12);  // state dim 3N
    CHECK(mat_rank(lti::observability_matrix(v4)) == 12);  // observability preserved
  }

  TEST_CASE("structural rank tests pass for orders 1..6") {
    for (int n = 1; n <= 6; ++n)
      CHECK_NOTHROW(make_integrator_model(n, VectorXd::Ones(n)));
  }

  TEST_CASE("Monte-Carlo spectrum matches psd() within a factor of 2") {
    // Simulate the N = 2 model at 1 kHz for 200 s; the realization is
    // prewhitened by double differencing (exact discrete transfer applied to
    // the theory side) so the steep w^-4 spectrum does not leak across the
    // Welch window at the 0.1 rad/s band edge.
    const double dt = 1e-3;
    const long n = 200000;
    const Eigen::Vector2d q(0.3, 2.0);
    const StatModel m = make_integrator_model(2, q);

    std::mt19937_64 rng(77);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::Vector2d state = Eigen::Vector2d::Zero();
    VectorXd u(n);
    const double sq = std::sqrt(dt);
    for (long k = 0; k < n; ++k) {
      u(k) = state(0);
      const Eigen::Vector2d w(std::sqrt(q(0)) * g(rng), std::sqrt(q(1)) * g(rng));
      state = state + dt * (m.A * state) + sq * w;
    }
    VectorXd d = u.tail(n - 1) - u.head(n - 1);
    d = (d.tail(d.size() - 1) - d.head(d.size() - 1)).eval();

    const long seg = 16384;
    const long hop = seg / 2;
    VectorXd window(seg);
    for (long i = 0; i < seg; ++i) window(i) = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / (seg - 1));
    const double wnorm = window.squaredNorm();

    for (double omega : {0.1, 0.5, 2.0, 10.0, 50.0}) {
      double acc = 0.0;
      int count = 0;
      for (long start = 0; start + seg <= d.size(); start += hop, ++count) {
        std::complex<double> X(0.0, 0.0);
        for (long i = 0; i < seg; ++i) {
          const double ph = -omega * dt * static_cast<double>(i);
          X += d(start + i) * window(i) * std::complex<double>(std::cos(ph), std::sin(ph));
        }
        acc += std::norm(X) * dt / wnorm;
      }
      const double estimated = acc / count;
      const double diff_gain = std::pow(std::abs(1.0 - std::polar(1.0, -omega * dt)), 4.0);
      const double expected = diff_gain * psd(m, omega);
      CHECK(estimated / expected > 0.5);
      CHECK(estimated / expected < 2.0);
    }
  }
}
