#include "kinestat/lti.hpp"

#include <cmath>
#include <stdexcept>

namespace kinestat::lti {

namespace {

int svd_rank(const Eigen::MatrixXd& m, double tol) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > tol * sv(0)) ++r;
  return r;
}

bool is_hurwitz(const Eigen::MatrixXd& a) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(a);
  return (es.eigenvalues().real().array() < 0.0).all();
}

// Solves A^T X + X A + W = 0 for symmetric W via the Kronecker system.
Eigen::MatrixXd lyapunov_observability(const Eigen::MatrixXd& a, const Eigen::MatrixXd& w) {
  const int n = static_cast<int>(a.rows());
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n * n, n * n);
  // vec(A^T X + X A) = (I (x) A^T + A^T (x) I) vec(X)
  for (int i = 0; i < n; ++i) {
    k.block(i * n, i * n, n, n) += a.transpose();
    for (int j = 0; j < n; ++j) k.block(i * n, j * n, n, n).diagonal().array() += a(j, i);
  }
  Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(w.data(), n * n);
  Eigen::VectorXd x = k.fullPivLu().solve(rhs);
  return Eigen::Map<Eigen::MatrixXd>(x.data(), n, n);
}

}  // namespace

void LtiSystem::check_dimensions() const {
  if (A.rows() != A.cols()) throw std::invalid_argument("LtiSystem: A must be square");
  if (B.size() > 0 && B.rows() != A.rows())
    throw std::invalid_argument("LtiSystem: B row count must match A");
  if (C.size() > 0 && C.cols() != A.cols())
    throw std::invalid_argument("LtiSystem: C column count must match A");
  if (Q.size() > 0 && (Q.rows() != Q.cols() || Q.rows() != B.cols()))
    throw std::invalid_argument("LtiSystem: Q must be p x p");
  if (R_meas.size() > 0 && (R_meas.rows() != R_meas.cols() || R_meas.rows() != C.rows()))
    throw std::invalid_argument("LtiSystem: R_meas must be m x m");
}

Eigen::MatrixXd observability_matrix(const LtiSystem& sys) {
  sys.check_dimensions();
  const int n = sys.states();
  const int m = sys.outputs();
  if (m == 0) throw std::invalid_argument("observability_matrix: system has no outputs");
  Eigen::MatrixXd obs(n * m, n);
  Eigen::MatrixXd row = sys.C;
  for (int k = 0; k < n; ++k) {
    obs.middleRows(k * m, m) = row;
    row = row * sys.A;
  }
  return obs;
}

LtiSystem series_concat(const LtiSystem& plant, const LtiSystem& driver,
                        bool expose_driver_output) {
  plant.check_dimensions();
  driver.check_dimensions();
  if (driver.outputs() != plant.inputs())
    throw std::invalid_argument("series_concat: driver output dim must equal plant input dim");
  const int ns = plant.states();
  const int ng = driver.states();

  LtiSystem out;
  out.A = Eigen::MatrixXd::Zero(ns + ng, ns + ng);
  out.A.topLeftCorner(ns, ns) = plant.A;
  out.A.topRightCorner(ns, ng) = plant.B * driver.C;
  out.A.bottomRightCorner(ng, ng) = driver.A;

  out.B = Eigen::MatrixXd::Zero(ns + ng, driver.inputs());
  out.B.bottomRows(ng) = driver.B;
  out.Q = driver.Q;

  const int mp = plant.outputs();
  const int md = expose_driver_output ? driver.outputs() : 0;
  out.C = Eigen::MatrixXd::Zero(mp + md, ns + ng);
  out.C.topLeftCorner(mp, ns) = plant.C;
  if (expose_driver_output) out.C.bottomRightCorner(md, ng) = driver.C;

  if (plant.R_meas.size() > 0 && (!expose_driver_output || driver.R_meas.size() > 0)) {
    out.R_meas = Eigen::MatrixXd::Zero(mp + md, mp + md);
    out.R_meas.topLeftCorner(mp, mp) = plant.R_meas;
    if (expose_driver_output) out.R_meas.bottomRightCorner(md, md) = driver.R_meas;
  }
  return out;
}

namespace {

// One pass of the prediction-form recursion at a fixed dt, starting from p.
// Returns the converged predicted covariance; throws on divergence/cap.
Eigen::MatrixXd riccati_iterate(const LtiSystem& sys, double dt, Eigen::MatrixXd p,
                                const RiccatiOptions& opts) {
  const int n = sys.states();
  const Eigen::MatrixXd ad = Eigen::MatrixXd::Identity(n, n) + sys.A * dt;
  const Eigen::MatrixXd qd = sys.B * sys.Q * sys.B.transpose() * dt;
  const Eigen::MatrixXd rd = sys.R_meas / dt;
  const double scale0 = p.norm() + qd.norm() + 1.0;

  double rel = 1.0;
  for (long it = 0; it < opts.max_iters; ++it) {
    Eigen::MatrixXd s = sys.C * p * sys.C.transpose() + rd;
    Eigen::MatrixXd k = s.ldlt().solve(sys.C * p).transpose();  // P C^T S^-1
    Eigen::MatrixXd post = p - k * sys.C * p;
    Eigen::MatrixXd next = ad * post * ad.transpose() + qd;
    next = 0.5 * (next + next.transpose());
    rel = (next - p).norm() / std::max(p.norm(), 1e-300);
    p = next;
    if (rel < opts.tol) return p;
    if (!p.allFinite() || p.norm() > 1e12 * scale0)
      throw std::runtime_error("stationary_kalman_gain: Riccati recursion diverged (system "
                               "detectable? last step " + std::to_string(rel) + ")");
  }
  throw std::runtime_error(
      "stationary_kalman_gain: Riccati recursion did not converge, last relative step " +
      std::to_string(rel));
}

}  // namespace

Eigen::MatrixXd stationary_kalman_gain(const LtiSystem& sys, const RiccatiOptions& opts) {
  sys.check_dimensions();
  if (sys.Q.size() == 0 || sys.R_meas.size() == 0)
    throw std::invalid_argument("stationary_kalman_gain: Q and R_meas are required");
  if (opts.dt <= 0) throw std::invalid_argument("stationary_kalman_gain: dt must be positive");
  const int n = sys.states();
  if (svd_rank(observability_matrix(sys), 1e-9) < n)
    throw std::runtime_error("stationary_kalman_gain: (C, A) is not observable");

  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n, n);
  if (opts.warm_start) {
    // Walk dt down a decade at a time so each level starts near its fixed point.
    double level = std::max(opts.dt, 1e-3);
    for (; level > opts.dt * 1.001; level = std::max(level / 10.0, opts.dt))
      p = riccati_iterate(sys, level, p, opts);
  }
  p = riccati_iterate(sys, opts.dt, p, opts);

  const Eigen::MatrixXd s = sys.C * p * sys.C.transpose() + sys.R_meas / opts.dt;
  const Eigen::MatrixXd k = s.ldlt().solve(sys.C * p).transpose();
  return k / opts.dt;
}

TransferFunction TransferFunction::from_realization(const Eigen::MatrixXd& a,
                                                    const Eigen::MatrixXd& b,
                                                    const Eigen::MatrixXd& c,
                                                    const Eigen::MatrixXd& d) {
  TransferFunction tf;
  tf.has_realization = true;
  tf.A = a;
  tf.B = b;
  tf.C = c;
  tf.D = d.size() > 0 ? d : Eigen::MatrixXd::Zero(c.rows(), b.cols());
  tf.eval = [a, b, c, dd = tf.D](double w) -> Eigen::MatrixXcd {
    const int n = static_cast<int>(a.rows());
    Eigen::MatrixXcd m = std::complex<double>(0.0, w) * Eigen::MatrixXcd::Identity(n, n) - a;
    return c * m.partialPivLu().solve(Eigen::MatrixXcd(b)) + dd;
  };
  return tf;
}

std::complex<double> TransferFunction::scalar(double w) const {
  const Eigen::MatrixXcd g = eval(w);
  if (g.rows() != 1 || g.cols() != 1)
    throw std::invalid_argument("TransferFunction::scalar: response is not 1x1");
  return g(0, 0);
}

std::vector<TransferFunction> transfer_functions(const LtiSystem& sys, const Eigen::MatrixXd& L,
                                                 int pick_row) {
  sys.check_dimensions();
  if (L.rows() != sys.states() || L.cols() != sys.outputs())
    throw std::invalid_argument("transfer_functions: gain dimension mismatch");
  if (pick_row < 0 || pick_row >= sys.states())
    throw std::invalid_argument("transfer_functions: pick_row out of range");
  const Eigen::MatrixXd acl = sys.A - L * sys.C;
  if (!is_hurwitz(acl))
    throw std::runtime_error("transfer_functions: closed loop A - LC is not Hurwitz");

  Eigen::MatrixXd row = Eigen::MatrixXd::Zero(1, sys.states());
  row(0, pick_row) = 1.0;
  std::vector<TransferFunction> out;
  out.reserve(sys.outputs());
  for (int j = 0; j < sys.outputs(); ++j)
    out.push_back(TransferFunction::from_realization(acl, L.col(j), row,
                                                     Eigen::MatrixXd::Zero(1, 1)));
  return out;
}

double h2_norm(const TransferFunction& g, const H2Options& opts) {
  if (opts.points < 16) throw std::invalid_argument("h2_norm: need at least 16 grid points");
  const double lmin = std::log(opts.w_min);
  const double lmax = std::log(opts.w_max);
  const int n = opts.points;

  // ||G||_2^2 = (1/pi) int_0^inf ||G(jw)||_F^2 dw for real-coefficient G.
  Eigen::VectorXd w(n), f(n);
  for (int i = 0; i < n; ++i) {
    w(i) = std::exp(lmin + (lmax - lmin) * i / (n - 1));
    f(i) = g.eval(w(i)).squaredNorm();
  }
  if (f.maxCoeff() <= 0.0) return 0.0;
  double integral = 0.0;
  for (int i = 0; i + 1 < n; ++i)
    integral += 0.5 * (f(i) * w(i) + f(i + 1) * w(i + 1)) * std::log(w(i + 1) / w(i));
  // Flat head below the grid (strictly proper stable G is flat near DC).
  integral += f(0) * w(0);
  // Power-law tail: f ~ w^p with p < -1, else the integral diverges.
  const double p = std::log(f(n - 1) / f(n - 2)) / std::log(w(n - 1) / w(n - 2));
  if (!(p < -1.0))
    throw std::runtime_error("h2_norm: integrand does not decay (G not strictly proper?)");
  integral += f(n - 1) * w(n - 1) / (-p - 1.0);
  const double quad = std::sqrt(integral / M_PI);

  if (g.has_realization) {
    if (g.D.norm() > 0)
      throw std::runtime_error("h2_norm: realization has a direct term (not strictly proper)");
    if (!is_hurwitz(g.A)) throw std::runtime_error("h2_norm: realization is unstable");
    const Eigen::MatrixXd qo = lyapunov_observability(g.A, g.C.transpose() * g.C);
    const double lyap = std::sqrt((g.B.transpose() * qo * g.B).trace());
    if (std::abs(quad - lyap) > opts.realization_check_tol * std::max(lyap, 1e-300))
      throw std::runtime_error("h2_norm: quadrature (" + std::to_string(quad) +
                               ") and Lyapunov (" + std::to_string(lyap) +
                               ") disagree beyond tolerance; widen the grid");
    return lyap;
  }
  return quad;
}

double match_butterworth(double target_sigma) {
  if (target_sigma <= 0) throw std::invalid_argument("match_butterworth: target must be > 0");
  return 1.0 / (2.0 * target_sigma * target_sigma);
}

Eigen::VectorXd filter_butterworth1(const Eigen::VectorXd& x, double k, double dt) {
  if (dt <= 0) throw std::invalid_argument("filter_butterworth1: dt must be positive");
  const long n = x.size();
  Eigen::VectorXd y(n);
  if (n == 0) return y;
  // Tustin: y_n = [x_n + x_{n-1} - (1 - 2k/dt) y_{n-1}] / (1 + 2k/dt),
  // initialized at steady state on the first sample.
  const double a = 2.0 * k / dt;
  double yprev = x(0);
  double xprev = x(0);
  for (long i = 0; i < n; ++i) {
    y(i) = (x(i) + xprev - (1.0 - a) * yprev) / (1.0 + a);
    xprev = x(i);
    yprev = y(i);
  }
  return y;
}

Eigen::VectorXd filter_zero_phase(const Eigen::VectorXd& x, double k, double dt) {
  Eigen::VectorXd y = filter_butterworth1(x, k, dt).reverse();
  return filter_butterworth1(y, k, dt).reverse();
}

LtiSystem kalman_observable_reduction(const LtiSystem& sys, double rank_tol) {
  sys.check_dimensions();
  const int n = sys.states();
  const Eigen::MatrixXd obs = observability_matrix(sys);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(obs, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(0) > 0 && sv(i) > rank_tol * sv(0)) ++r;
  if (r == 0) throw std::runtime_error("kalman_observable_reduction: system fully unobservable");

  // Rows of O span the observable subspace; ker O is A-invariant, so the
  // orthogonal split produces the staircase form and the top-left block is the
  // observable subsystem.
  const Eigen::MatrixXd v_obs = svd.matrixV().leftCols(r);
  LtiSystem out;
  out.A = v_obs.transpose() * sys.A * v_obs;
  out.B = v_obs.transpose() * sys.B;
  out.C = sys.C * v_obs;
  out.Q = sys.Q;
  out.R_meas = sys.R_meas;
  return out;
}

}  // namespace kinestat::lti
