#include "kinestat/observability.hpp"

#include <cmath>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include "kinestat/lti.hpp"

namespace kinestat {

bool LieChain::drift_only() const {
  for (int f : fields)
    if (f != 0) return false;
  return true;
}

LieChain LieChain::drift_chain(int output, int order) {
  LieChain c;
  c.output = output;
  c.fields.assign(order, 0);
  return c;
}

Eigen::MatrixXd fd_weights(double x0, const Eigen::VectorXd& x, int max_order) {
  const int n = static_cast<int>(x.size());
  if (max_order >= n)
    throw std::invalid_argument("fd_weights: need more nodes than the derivative order");
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(max_order + 1, n);
  double c1 = 1.0;
  double c4 = x(0) - x0;
  c(0, 0) = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, max_order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x(i) - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = x(i) - x(j);
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c(k, i) = c1 * (k * c(k - 1, i - 1) - c5 * c(k, i - 1)) / c2;
        c(0, i) = -c1 * c5 * c(0, i - 1) / c2;
      }
      for (int k = mn; k >= 1; --k) c(k, j) = (c4 * c(k, j) - k * c(k - 1, j)) / c3;
      c(0, j) = c4 * c(0, j) / c3;
    }
    c1 = c2;
  }
  return c;
}

namespace {

struct StencilPlan {
  Eigen::VectorXd times;    // ascending, includes 0 at the center
  Eigen::MatrixXd weights;  // (max_order+1) x nodes
  int center = 0;
};

StencilPlan make_stencil(int max_order, const LieOptions& opts) {
  const int m =
      opts.stencil_half_width > 0 ? opts.stencil_half_width : std::max(5, (max_order + 7) / 2);
  StencilPlan plan;
  plan.center = m;
  plan.times.resize(2 * m + 1);
  for (int s = -m; s <= m; ++s) plan.times(s + m) = s * opts.stencil_dt;
  plan.weights = fd_weights(0.0, plan.times, max_order);
  return plan;
}

// Output samples along the drift flow through x at the stencil nodes.
std::vector<Eigen::MatrixXd> sample_flow(const SystemDescription& sys, const ManifoldPoint& x,
                                         const StencilPlan& plan, const LieOptions& opts) {
  const int nodes = static_cast<int>(plan.times.size());
  std::vector<Eigen::MatrixXd> tables(sys.outputs.size());
  auto record = [&](int node, const ManifoldPoint& p) {
    for (size_t j = 0; j < sys.outputs.size(); ++j) {
      const Eigen::VectorXd y = sys.outputs[j](p);
      if (tables[j].size() == 0) tables[j].resize(nodes, y.size());
      tables[j].row(node) = y.transpose();
    }
  };
  record(plan.center, x);
  ManifoldPoint cur = x;
  for (int s = plan.center + 1; s < nodes; ++s) {
    cur = integrate_flow(cur, sys.drift, plan.times(s) - plan.times(s - 1), opts.flow_max_dt);
    record(s, cur);
  }
  cur = x;
  for (int s = plan.center - 1; s >= 0; --s) {
    cur = integrate_flow(cur, sys.drift, plan.times(s) - plan.times(s + 1), opts.flow_max_dt);
    record(s, cur);
  }
  return tables;
}

// Gradients of the drift-chain Lie derivatives for every output, orders
// 0..max_order[j], from 2n perturbed flow integrations.
std::vector<std::vector<Eigen::MatrixXd>> batched_drift_gradients(
    const SystemDescription& sys, const ManifoldPoint& x, const std::vector<int>& max_order,
    const LieOptions& opts) {
  const int n = x.layout().tangent_dim();
  int overall = 0;
  for (int k : max_order) overall = std::max(overall, k);
  const StencilPlan plan = make_stencil(overall, opts);
  const double h = opts.grad_step;

  std::vector<std::vector<Eigen::MatrixXd>> grads(sys.outputs.size());
  Eigen::VectorXd delta = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < n; ++j) {
    delta(j) = h;
    ManifoldPoint xp = x;
    xp.boxplus(delta);
    delta(j) = -h;
    ManifoldPoint xm = x;
    xm.boxplus(delta);
    delta(j) = 0.0;
    const auto tp = sample_flow(sys, xp, plan, opts);
    const auto tm = sample_flow(sys, xm, plan, opts);
    for (size_t o = 0; o < sys.outputs.size(); ++o) {
      if (max_order[o] < 0) continue;
      const Eigen::MatrixXd diff = (tp[o] - tm[o]) / (2.0 * h);  // nodes x dim
      if (grads[o].empty()) {
        grads[o].resize(max_order[o] + 1);
        for (int k = 0; k <= max_order[o]; ++k)
          grads[o][k] = Eigen::MatrixXd::Zero(diff.cols(), n);
      }
      for (int k = 0; k <= max_order[o]; ++k)
        grads[o][k].col(j) = (plan.weights.row(k) * diff).transpose();
    }
  }
  return grads;
}

TangentField field_by_index(const SystemDescription& sys, int idx) {
  if (idx == 0) return sys.drift;
  return sys.controls.at(idx - 1);
}

// Nested chart-FD realization of the chain value as a callable.
ManifoldFn nested_lie_fn(const SystemDescription& sys, const LieChain& chain,
                         const LieOptions& opts) {
  ManifoldFn fn = sys.outputs.at(chain.output);
  for (int level = 1; level <= chain.order(); ++level) {
    const TangentField vf = field_by_index(sys, chain.fields[level - 1]);
    const double h = opts.nested_base_step * std::pow(10.0, (level - 1) / 2.0);
    ManifoldFn prev = fn;
    fn = [prev, vf, h](const ManifoldPoint& p) -> Eigen::VectorXd {
      return chart_gradient(prev, p, h) * vf(p);
    };
  }
  return fn;
}

int chain_output_dim(const SystemDescription& sys, const ManifoldPoint& x, int output) {
  return static_cast<int>(sys.outputs.at(output)(x).size());
}

}  // namespace

Eigen::VectorXd lie_derivative(const SystemDescription& sys, const LieChain& chain,
                               const ManifoldPoint& x, const LieOptions& opts) {
  if (chain.order() == 0) return sys.outputs.at(chain.output)(x);
  if (chain.drift_only()) {
    const StencilPlan plan = make_stencil(chain.order(), opts);
    const auto tables = sample_flow(sys, x, plan, opts);
    return (plan.weights.row(chain.order()) * tables[chain.output]).transpose();
  }
  return nested_lie_fn(sys, chain, opts)(x);
}

Eigen::MatrixXd observability_matrix_nl(const SystemDescription& sys, const ManifoldPoint& x,
                                        const std::vector<LieChain>& chains,
                                        const LieOptions& opts) {
  const int n = x.layout().tangent_dim();
  std::vector<int> max_order(sys.outputs.size(), -1);
  bool any_drift = false;
  for (const auto& c : chains)
    if (c.drift_only()) {
      any_drift = true;
      max_order[c.output] = std::max(max_order[c.output], c.order());
    }
  std::vector<std::vector<Eigen::MatrixXd>> drift_grads;
  if (any_drift) drift_grads = batched_drift_gradients(sys, x, max_order, opts);

  int rows = 0;
  for (const auto& c : chains) rows += chain_output_dim(sys, x, c.output);
  Eigen::MatrixXd obs(rows, n);
  int at = 0;
  for (const auto& c : chains) {
    const int dim = chain_output_dim(sys, x, c.output);
    if (c.drift_only()) {
      obs.middleRows(at, dim) = drift_grads[c.output][c.order()];
    } else {
      const double h = opts.nested_base_step * std::pow(10.0, c.order() / 2.0);
      obs.middleRows(at, dim) = chart_gradient(nested_lie_fn(sys, c, opts), x, h);
    }
    at += dim;
  }
  return obs;
}

Eigen::MatrixXd observability_matrix_nl_anchored(const SystemDescription& sys,
                                                 const ManifoldPoint& anchor,
                                                 const ManifoldPoint& x,
                                                 const std::vector<LieChain>& chains,
                                                 const LieOptions& opts) {
  const int n = x.layout().tangent_dim();
  int rows = 0;
  for (const auto& c : chains) rows += chain_output_dim(sys, x, c.output);
  Eigen::MatrixXd obs(rows, n);
  int at = 0;
  for (const auto& c : chains) {
    const int dim = chain_output_dim(sys, x, c.output);
    auto value = [&sys, &c, &opts](const ManifoldPoint& p) {
      return lie_derivative(sys, c, p, opts);
    };
    obs.middleRows(at, dim) = chart_gradient_anchored(value, anchor, x, opts.grad_step);
    at += dim;
  }
  return obs;
}

Eigen::MatrixXd drift_chain_gradients(const SystemDescription& sys, const ManifoldPoint& x,
                                      int output, int max_order, const LieOptions& opts) {
  std::vector<LieChain> chains;
  for (int k = 0; k <= max_order; ++k) chains.push_back(LieChain::drift_chain(output, k));
  return observability_matrix_nl(sys, x, chains, opts);
}

RankResult rank_probe(const Eigen::MatrixXd& m, double tol) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinV);
  RankResult out;
  out.tol = tol;
  out.singular_values = svd.singularValues();
  const double smax = out.singular_values.size() > 0 ? out.singular_values(0) : 0.0;
  for (int i = 0; i < out.singular_values.size(); ++i)
    if (smax > 0 && out.singular_values(i) > tol * smax) ++out.rank;
  if (svd.matrixV().cols() > 0) out.null_direction = svd.matrixV().col(svd.matrixV().cols() - 1);
  return out;
}

Eigen::MatrixXd equilibrated(Eigen::MatrixXd m) {
  for (int pass = 0; pass < 2; ++pass) {
    for (int i = 0; i < m.rows(); ++i) {
      const double n = m.row(i).norm();
      if (n > 1e-300) m.row(i) /= n;
    }
    for (int j = 0; j < m.cols(); ++j) {
      const double n = m.col(j).norm();
      if (n > 1e-300) m.col(j) /= n;
    }
  }
  return m;
}

// --- Concrete systems ----------------------------------------------------------

SystemDescription input_formulation_system(const PosImuConfig& cfg) {
  SystemDescription sys;
  sys.layout = pos_imu_input_layout();
  const int n = sys.layout->tangent_dim();
  const Eigen::Vector3d g = cfg.gravity;
  const Eigen::Vector3d m0 = cfg.heading_ref;
  const int oP = 0, oV = 3, oTh = 6;

  sys.drift = [=](const ManifoldPoint& x) {
    Eigen::VectorXd dx = Eigen::VectorXd::Zero(n);
    dx.segment<3>(oP) = x.euclidean(1);
    dx.segment<3>(oV) = g - x.rotation(2) * x.euclidean(4);
    dx.segment<3>(oTh) = -x.euclidean(5);
    return dx;
  };
  for (int i = 0; i < 3; ++i)  // gyro fields: body rate e_i
    sys.controls.push_back([=](const ManifoldPoint&) {
      Eigen::VectorXd dx = Eigen::VectorXd::Zero(n);
      dx.segment<3>(oTh) = Eigen::Vector3d::Unit(i);
      return dx;
    });
  for (int i = 0; i < 3; ++i)  // accelerometer fields: vdot = R e_i
    sys.controls.push_back([=](const ManifoldPoint& x) {
      Eigen::VectorXd dx = Eigen::VectorXd::Zero(n);
      dx.segment<3>(oV) = x.rotation(2) * Eigen::Vector3d::Unit(i);
      return dx;
    });
  sys.outputs.push_back([](const ManifoldPoint& x) -> Eigen::VectorXd {
    return x.euclidean(0) + x.rotation(2) * x.euclidean(3);
  });
  sys.outputs.push_back([m0](const ManifoldPoint& x) -> Eigen::VectorXd {
    return x.rotation(2).transpose() * m0;
  });
  return sys;
}

SystemDescription state_formulation_system(const PosImuConfig& cfg) {
  SystemDescription sys;
  sys.layout = pos_imu_state_layout(cfg.accel_model.order, cfg.gyro_model.order);
  SystemModelPlugin plugin = pos_imu_state_plugin(cfg);
  sys.drift = plugin.drift();
  sys.outputs.push_back([](const ManifoldPoint& x) -> Eigen::VectorXd {
    return x.euclidean(0) + x.rotation(2) * x.euclidean(3);
  });
  const Eigen::Vector3d m0 = cfg.heading_ref;
  sys.outputs.push_back([m0](const ManifoldPoint& x) -> Eigen::VectorXd {
    return x.rotation(2).transpose() * m0;
  });
  const Eigen::MatrixXd Ca = kron_identity(cfg.accel_model.C, 3);
  const Eigen::MatrixXd Cw = kron_identity(cfg.gyro_model.C, 3);
  sys.outputs.push_back([Ca](const ManifoldPoint& x) -> Eigen::VectorXd {
    return x.euclidean(4) + Ca * x.euclidean(6);
  });
  sys.outputs.push_back([Cw](const ManifoldPoint& x) -> Eigen::VectorXd {
    return x.euclidean(5) + Cw * x.euclidean(7);
  });
  return sys;
}

SystemDescription inter_imu_system(const InterImuConfig& cfg) {
  SystemDescription sys;
  sys.layout = inter_imu_layout(cfg.angacc_model.order, cfg.accel_model.order);
  SystemModelPlugin plugin = inter_imu_plugin(cfg);
  sys.drift = plugin.drift();
  // Output order used by the rank analysis: a_m2 first, then w + b_w, a.
  const auto h_accel2 = plugin.output("accel2").h;
  const auto h_gyro1 = plugin.output("gyro1").h;
  const auto h_accel1 = plugin.output("accel1").h;
  sys.outputs = {h_accel2, h_gyro1, h_accel1};
  return sys;
}

std::vector<LieChain> input_formulation_chains() {
  std::vector<LieChain> chains;
  chains.push_back({0, {}});
  chains.push_back({0, {0}});
  chains.push_back({0, {1}});
  chains.push_back({0, {2}});
  chains.push_back({0, {0, 0}});
  chains.push_back({0, {0, 4}});  // L_{f4} L_{f0} h1
  chains.push_back({0, {0, 5}});
  chains.push_back({1, {0}});
  chains.push_back({1, {0, 1}});
  chains.push_back({1, {0, 2}});
  return chains;
}

std::vector<LieChain> state_formulation_chains(int accel_order, int gyro_order) {
  std::vector<LieChain> chains;
  const int n1 = accel_order + 2;
  const int n2 = gyro_order + 1;
  for (int k = 0; k <= n1; ++k) chains.push_back(LieChain::drift_chain(0, k));
  for (int k = 0; k <= n2; ++k) chains.push_back(LieChain::drift_chain(1, k));
  for (int k = 0; k <= 1; ++k) chains.push_back(LieChain::drift_chain(2, k));
  for (int k = 0; k <= 1; ++k) chains.push_back(LieChain::drift_chain(3, k));
  return chains;
}

std::vector<LieChain> inter_imu_chains(int angacc_order, int accel_order, int h1_max_order) {
  std::vector<LieChain> chains;
  for (int k = 0; k <= h1_max_order; ++k) chains.push_back(LieChain::drift_chain(0, k));
  for (int k = 0; k <= angacc_order; ++k) chains.push_back(LieChain::drift_chain(1, k));
  for (int k = 0; k < accel_order; ++k) chains.push_back(LieChain::drift_chain(2, k));
  return chains;
}

Eigen::MatrixXd state_formulation_reduced_matrix(const SystemDescription& sys,
                                                 const ManifoldPoint& x, int accel_order,
                                                 int gyro_order, const LieOptions& opts) {
  const int n1 = accel_order + 2;
  const int n2 = gyro_order + 1;
  std::vector<int> max_order(sys.outputs.size(), -1);
  max_order[0] = n1;
  max_order[1] = n2;
  const auto grads = batched_drift_gradients(sys, x, max_order, opts);

  const StateLayout& layout = x.layout();
  const int oTh = layout.offset(2);
  const int oC = layout.offset(3);
  const int oA = layout.offset(6);                  // gamma_a[0:3] = a
  const int oW = layout.offset(7);                  // gamma_w[0:3] = omega
  auto restrict4 = [&](const Eigen::MatrixXd& m) {
    Eigen::MatrixXd r(m.rows(), 12);
    r.middleCols(0, 3) = m.middleCols(oTh, 3);
    r.middleCols(3, 3) = m.middleCols(oC, 3);
    r.middleCols(6, 3) = m.middleCols(oA, 3);
    r.middleCols(9, 3) = m.middleCols(oW, 3);
    return r;
  };

  const int rows = 3 + 3 * (n1 - 1) + 3 * n2;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows, 12);
  int at = 0;
  out.middleRows(at, 3) = restrict4(grads[1][0]);  // |beta| row
  at += 3;
  for (int k = 2; k <= n1; ++k, at += 3) out.middleRows(at, 3) = restrict4(grads[0][k]);
  for (int k = 1; k <= n2; ++k, at += 3) {
    // The elimination that produces the reduced matrix zeroes everything in
    // the h2 rows except the omega columns.
    out.block(at, 9, 3, 3) = grads[1][k].middleCols(oW, 3);
  }
  return out;
}

// --- Probes -----------------------------------------------------------------

std::string ProbeReport::summary() const {
  std::ostringstream os;
  os << name << ": " << (pass ? "PASS" : "FAIL");
  for (const auto& n : notes) os << "\n  " << n;
  return os.str();
}

std::string ProbeReport::full_text() const {
  std::ostringstream os;
  os << summary() << "\n";
  for (const auto& l : trial_lines) os << l << "\n";
  return os.str();
}

namespace {

// "trial,<tag>,rank,<r>/<full>,sv_tail,<s3>,<s2>,<s1>,deficit_block,<name>"
std::string trial_line(const StateLayout& layout, const std::string& tag, int trial,
                       const RankResult& r, int full) {
  std::ostringstream os;
  os << "trial," << trial << "," << tag << ",rank," << r.rank << "/" << full << ",sv_tail";
  const auto& sv = r.singular_values;
  const double smax = sv.size() > 0 ? sv(0) : 1.0;
  for (int i = std::max<int>(0, sv.size() - 3); i < sv.size(); ++i) os << "," << sv(i) / smax;
  os << ",deficit_block,";
  if (r.null_direction.size() == layout.tangent_dim()) {
    int best = 0;
    double best_norm = -1.0;
    for (int b = 0; b < layout.size(); ++b) {
      const double n =
          r.null_direction.segment(layout.offset(b), layout.block(b).dim).norm();
      if (n > best_norm) {
        best_norm = n;
        best = b;
      }
    }
    os << layout.block(best).name;
  } else {
    os << "-";
  }
  return os.str();
}

}  // namespace

Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uni(0.0, 0.97 * M_PI);
  Eigen::Vector3d axis(gauss(rng), gauss(rng), gauss(rng));
  axis.normalize();
  return so3::exp<double>(Eigen::Vector3d(uni(rng) * axis));
}

ManifoldPoint random_pos_imu_state(const PosImuConfig& cfg, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto g3 = [&] { return Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng)); };
  ManifoldPoint x(pos_imu_state_layout(cfg.accel_model.order, cfg.gyro_model.order));
  x.euclidean(0) = g3();
  x.euclidean(1) = g3();
  x.rotation(2) = random_rotation(rng);
  x.euclidean(3) = 0.3 * g3();
  x.euclidean(4) = 0.1 * g3();
  x.euclidean(5) = 0.05 * g3();
  for (int k = 0; k < cfg.accel_model.order; ++k)
    x.euclidean(6).segment<3>(3 * k) = std::pow(10.0, -k) * g3();
  for (int k = 0; k < cfg.gyro_model.order; ++k)
    x.euclidean(7).segment<3>(3 * k) = std::pow(10.0, -k) * g3();
  return x;
}

ManifoldPoint random_inter_imu_state(const InterImuConfig& cfg, std::mt19937_64& rng,
                                     bool zero_c) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto g3 = [&] { return Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng)); };
  ManifoldPoint x(inter_imu_layout(cfg.angacc_model.order, cfg.accel_model.order));
  x.euclidean(0) = 0.05 * g3();
  x.euclidean(1) = 0.01 * g3();
  x.euclidean(2) = 0.5 * g3();
  if (zero_c) {
    x.euclidean(3).setZero();
  } else {
    Eigen::Vector3d c = 0.15 * g3();
    while (c.norm() < 0.02) c = 0.15 * g3();
    x.euclidean(3) = c;
  }
  x.rotation(4) = random_rotation(rng);
  for (int k = 0; k < cfg.angacc_model.order; ++k)
    x.euclidean(5).segment<3>(3 * k) = std::pow(10.0, -k) * g3();
  for (int k = 0; k < cfg.accel_model.order; ++k)
    x.euclidean(6).segment<3>(3 * k) = std::pow(10.0, -k) * g3();
  return x;
}

ProbeReport thin_set_probe_state_formulation(const StateProbeConfig& cfg, int trials) {
  ProbeReport report;
  report.name = "thin-set probe, state formulation";
  const int na = cfg.model.accel_model.order;
  const int nw = cfg.model.gyro_model.order;
  const SystemDescription sys = state_formulation_system(cfg.model);
  const auto chains = state_formulation_chains(na, nw);
  const int full = sys.layout->tangent_dim();
  const int n2 = nw + 1;
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  LieOptions opts;
  opts.stencil_dt = 0.45;   // probe stencil: noise floor ~2e-10 after equilibration
  opts.stencil_half_width = 5;
  opts.grad_step = 1e-4;    // high-order stencil weights amplify chart-FD roundoff

  int rand_full = 0, degen_deficient = 0, restored = 0;
  for (int t = 0; t < trials; ++t) {
    // (a) random excitation
    ManifoldPoint x = random_pos_imu_state(cfg.model, rng);
    {
      const auto r = rank_probe(equilibrated(observability_matrix_nl(sys, x, chains, opts)),
                                cfg.full_rank_tol);
      if (r.rank == full) ++rand_full;
      report.trial_lines.push_back(trial_line(*sys.layout, "random", t, r, full));
    }

    // (b) every omega-derivative state collinear with beta = R^T e1
    ManifoldPoint xd = random_pos_imu_state(cfg.model, rng);
    const Eigen::Vector3d beta = xd.rotation(2).transpose() * cfg.model.heading_ref;
    for (int k = 0; k < nw; ++k)
      xd.euclidean(7).segment<3>(3 * k) = gauss(rng) * std::pow(0.8, k) * beta;
    {
      const Eigen::MatrixXd grads = drift_chain_gradients(sys, xd, 1, n2, opts);
      const int oW = sys.layout->offset(7);
      // O_S2: h2 rows of orders 1..n2, omega columns only.
      const Eigen::MatrixXd os2 = grads.middleRows(3, 3 * n2).middleCols(oW, 3);
      const auto r = rank_probe(equilibrated(os2), cfg.os2_deficiency_tol);
      if (r.rank < 3) ++degen_deficient;
      report.trial_lines.push_back(trial_line(*sys.layout, "degenerate_OS2", t, r, 3));
    }

    // (c) thin-set escape: perturb the degenerate state
    ManifoldPoint xr = xd;
    Eigen::VectorXd noise(full);
    for (int i = 0; i < full; ++i) noise(i) = cfg.perturbation * gauss(rng);
    xr.boxplus(noise);
    {
      const auto r = rank_probe(equilibrated(observability_matrix_nl(sys, xr, chains, opts)),
                                cfg.full_rank_tol);
      if (r.rank == full) ++restored;
      report.trial_lines.push_back(trial_line(*sys.layout, "perturbed", t, r, full));
    }
  }

  std::ostringstream a, b, c;
  a << "random excitation full rank (" << full << "): " << rand_full << "/" << trials;
  b << "omega-derivatives || beta: O_S2 deficient " << degen_deficient << "/" << trials;
  c << "perturbed by " << cfg.perturbation << ": full rank restored " << restored << "/" << trials;
  report.notes = {a.str(), b.str(), c.str()};
  report.pass = rand_full >= static_cast<int>(std::ceil(0.99 * trials)) &&
                degen_deficient == trials && restored == trials;
  return report;
}

namespace {

Eigen::Matrix3d omega_poly_matrix(const std::vector<Eigen::Vector3d>& wder, int m) {
  // Omega^(m) = sum_k C(m,k) |w^(k)| |w^(m-k)| + |w^(m+1)|
  auto at = [&](int k) {
    return k < static_cast<int>(wder.size()) ? wder[k] : Eigen::Vector3d::Zero().eval();
  };
  Eigen::Matrix3d out = so3::skew<double>(at(m + 1));
  double binom = 1.0;
  for (int k = 0; k <= m; ++k) {
    out += binom * so3::skew<double>(at(k)) * so3::skew<double>(at(m - k));
    binom = binom * (m - k) / (k + 1.0);
  }
  return out;
}

}  // namespace

ProbeReport thin_set_probe_inter_imu(const InterImuProbeConfig& cfg, int trials) {
  ProbeReport report;
  report.name = "thin-set probe, inter-IMU";
  const int nt = cfg.model.angacc_model.order;
  const int na = cfg.model.accel_model.order;
  const SystemDescription sys = inter_imu_system(cfg.model);
  const auto chains = inter_imu_chains(nt, na, std::max(nt + 2, 5));
  const int full = sys.layout->tangent_dim();
  std::mt19937_64 rng(cfg.seed);
  LieOptions opts;
  opts.stencil_dt = 0.45;
  opts.stencil_half_width = 5;
  opts.grad_step = 1e-4;

  int excited_full = 0, zero_c_deficient = 0;
  for (int t = 0; t < trials; ++t) {
    ManifoldPoint x = random_inter_imu_state(cfg.model, rng, false);
    const auto r = rank_probe(equilibrated(observability_matrix_nl(sys, x, chains, opts)),
                              cfg.full_rank_tol);
    if (r.rank == full) ++excited_full;
    report.trial_lines.push_back(trial_line(*sys.layout, "excited", t, r, full));

    ManifoldPoint x0 = random_inter_imu_state(cfg.model, rng, true);
    const auto r0 = rank_probe(equilibrated(observability_matrix_nl(sys, x0, chains, opts)),
                               cfg.full_rank_tol);
    if (full - r0.rank >= 3) ++zero_c_deficient;
    report.trial_lines.push_back(trial_line(*sys.layout, "zero_c", t, r0, full));
  }

  // Constructed sufficient-condition state (i = 2, j = 4, k = 5, l = 6, m = 4):
  // needs a 4th-order angular-acceleration chain and a 7th-order acceleration
  // chain so the required derivative pattern exists.
  InterImuConfig ccfg = cfg.model;
  ccfg.angacc_model = make_integrator_model(4, Eigen::VectorXd::Ones(4));
  ccfg.accel_model = make_integrator_model(7, Eigen::VectorXd::Ones(7));
  const SystemDescription csys = inter_imu_system(ccfg);
  ManifoldPoint xc(inter_imu_layout(4, 7));
  const Eigen::Vector3d c(0.3, 0.1, -0.2);
  const Eigen::Vector3d w2(1.0, 0.0, 0.0);
  const Eigen::Vector3d w4(0.0, 1.2, 0.5);
  xc.euclidean(0) = Eigen::Vector3d(0.01, -0.02, 0.03);
  xc.euclidean(1) = Eigen::Vector3d(0.002, 0.001, -0.003);
  xc.euclidean(2).setZero();  // omega = 0
  xc.euclidean(3) = c;
  xc.rotation(4) = so3::exp<double>(Eigen::Vector3d(0.2, -0.1, 0.3));
  xc.euclidean(5).setZero();
  xc.euclidean(5).segment<3>(3) = w2;   // omega^(2)
  xc.euclidean(5).segment<3>(9) = w4;   // omega^(4)
  xc.euclidean(6).setZero();
  xc.euclidean(6).segment<3>(0) = Eigen::Vector3d(0.4, -0.2, 0.6);
  xc.euclidean(6).segment<3>(3) = -so3::skew<double>(w2) * c;   // a^(1) + Omega^(1) c = 0
  xc.euclidean(6).segment<3>(6) = Eigen::Vector3d(0.1, 0.3, -0.2);
  xc.euclidean(6).segment<3>(9) = -so3::skew<double>(w4) * c;   // a^(3) + Omega^(3) c = 0
  xc.euclidean(6).segment<3>(12) = Eigen::Vector3d(0.2, -0.1, 0.1);
  xc.euclidean(6).segment<3>(15) = Eigen::Vector3d(0.8, 0.0, 0.0);   // a^(5)
  xc.euclidean(6).segment<3>(18) = Eigen::Vector3d(0.0, 0.9, 0.0);   // a^(6)

  // Theta = [Omega^(i-1); Omega^(j-1)] must have full column rank for the
  // construction to be valid.
  std::vector<Eigen::Vector3d> wder = {Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero(), w2,
                                       Eigen::Vector3d::Zero(), w4};
  Eigen::MatrixXd theta(6, 3);
  theta.topRows(3) = omega_poly_matrix(wder, 1);
  theta.bottomRows(3) = omega_poly_matrix(wder, 3);
  const bool theta_full = rank_probe(theta, 1e-9).rank == 3;

  const auto cchains = inter_imu_chains(4, 7, 7);
  const auto rc = rank_probe(equilibrated(observability_matrix_nl(csys, xc, cchains, opts)),
                             cfg.full_rank_tol);
  const int cfull = csys.layout->tangent_dim();
  const bool constructed_full = rc.rank == cfull;
  report.trial_lines.push_back(trial_line(*csys.layout, "constructed", 0, rc, cfull));

  std::ostringstream a, b, d;
  a << "excited, c != 0: full rank (" << full << ") " << excited_full << "/" << trials;
  b << "c = 0: rank deficit >= 3 " << zero_c_deficient << "/" << trials;
  d << "constructed sufficient-condition state: rank " << rc.rank << "/" << cfull
    << (constructed_full ? " (full)" : " (DEFICIENT)") << ", Theta full column rank: "
    << (theta_full ? "yes" : "NO");
  report.notes = {a.str(), b.str(), d.str()};
  report.pass = excited_full >= static_cast<int>(std::ceil(0.99 * trials)) &&
                zero_c_deficient == trials && constructed_full && theta_full;
  return report;
}

ProbeReport input_formulation_probe(const PosImuConfig& cfg, int trials, std::uint64_t seed) {
  ProbeReport report;
  report.name = "input-formulation observability";
  const SystemDescription sys = input_formulation_system(cfg);
  const auto chains = input_formulation_chains();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  LieOptions opts;

  int full_count = 0;
  for (int t = 0; t < trials; ++t) {
    ManifoldPoint x(pos_imu_input_layout());
    auto g3 = [&] { return Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng)); };
    x.euclidean(0) = g3();
    x.euclidean(1) = g3();
    x.rotation(2) = random_rotation(rng);
    x.euclidean(3) = 0.3 * g3();
    x.euclidean(4) = 0.1 * g3();
    x.euclidean(5) = 0.05 * g3();
    const auto r = rank_probe(observability_matrix_nl(sys, x, chains, opts), 1e-6);
    if (r.rank == 18) ++full_count;
    report.trial_lines.push_back(trial_line(*sys.layout, "random", t, r, 18));
  }
  std::ostringstream note;
  note << "O_I rank 18 at " << full_count << "/" << trials << " random states";
  report.notes = {note.str()};
  report.pass = full_count == trials;
  return report;
}

ProbeReport lemma1_probe(int trials, std::uint64_t seed) {
  ProbeReport report;
  report.name = "series-concatenation observability (lemma1 mode)";
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> nsd(2, 5), ngd(1, 4), md(1, 2);

  auto randn = [&](int r, int c) {
    Eigen::MatrixXd m(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) m(i, j) = gauss(rng);
    return m;
  };
  auto random_observable = [&](int n, int m, int p) {
    lti::LtiSystem sys;
    do {
      sys.A = randn(n, n) / std::sqrt(static_cast<double>(n));
      sys.B = randn(n, p);
      sys.C = randn(m, n);
    } while (rank_probe(lti::observability_matrix(sys), 1e-9).rank < n);
    return sys;
  };

  int ok = 0;
  for (int t = 0; t < trials; ++t) {
    const int p = md(rng);
    const lti::LtiSystem plant = random_observable(nsd(rng), md(rng), p);
    const lti::LtiSystem driver = random_observable(ngd(rng), p, md(rng));
    const lti::LtiSystem cat = lti::series_concat(plant, driver, true);
    const auto r = rank_probe(lti::observability_matrix(cat), 1e-9);
    if (r.rank == cat.states()) ++ok;
    std::ostringstream line;
    line << "trial," << t << ",concat,rank," << r.rank << "/" << cat.states() << ",sv_tail";
    const auto& sv = r.singular_values;
    for (int i = std::max<int>(0, sv.size() - 3); i < sv.size(); ++i)
      line << "," << sv(i) / sv(0);
    report.trial_lines.push_back(line.str());
  }
  std::ostringstream note;
  note << ok << "/" << trials << " concatenations observable";
  report.notes = {note.str()};
  report.pass = ok == trials;
  return report;
}

}  // namespace kinestat
