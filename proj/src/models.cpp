#include "kinestat/models.hpp"

#include <sstream>
#include <stdexcept>

namespace kinestat {

namespace {

Eigen::MatrixXd blkdiag_process_noise(std::initializer_list<Eigen::MatrixXd> blocks) {
  int n = 0;
  for (const auto& b : blocks) n += static_cast<int>(b.rows());
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
  int at = 0;
  for (const auto& b : blocks) {
    q.block(at, at, b.rows(), b.cols()) = b;
    at += static_cast<int>(b.rows());
  }
  return q;
}

}  // namespace

LayoutPtr pos_imu_state_layout(int accel_order, int gyro_order) {
  return make_layout({StateBlock::euclidean("p", 3), StateBlock::euclidean("v", 3),
                      StateBlock::so3("R"), StateBlock::euclidean("c", 3),
                      StateBlock::euclidean("b_a", 3), StateBlock::euclidean("b_w", 3),
                      StateBlock::euclidean("g_a", 3 * accel_order),
                      StateBlock::euclidean("g_w", 3 * gyro_order)});
}

LayoutPtr pos_imu_input_layout() {
  return make_layout({StateBlock::euclidean("p", 3), StateBlock::euclidean("v", 3),
                      StateBlock::so3("R"), StateBlock::euclidean("c", 3),
                      StateBlock::euclidean("b_a", 3), StateBlock::euclidean("b_w", 3)});
}

LayoutPtr inter_imu_layout(int angacc_order, int accel_order) {
  return make_layout({StateBlock::euclidean("b_a", 3), StateBlock::euclidean("b_w", 3),
                      StateBlock::euclidean("w", 3), StateBlock::euclidean("c", 3),
                      StateBlock::so3("R"), StateBlock::euclidean("g_t", 3 * angacc_order),
                      StateBlock::euclidean("g_a", 3 * accel_order)});
}

SystemModelPlugin pos_imu_state_plugin(const PosImuConfig& cfg) {
  const int na = cfg.accel_model.order;
  const int nw = cfg.gyro_model.order;
  const auto layout = pos_imu_state_layout(na, nw);
  const int n = layout->tangent_dim();

  const Eigen::MatrixXd Ca = kron_identity(cfg.accel_model.C, 3);  // 3 x 3na
  const Eigen::MatrixXd Cw = kron_identity(cfg.gyro_model.C, 3);
  const Eigen::MatrixXd Aa = kron_identity(cfg.accel_model.A, 3);
  const Eigen::MatrixXd Aw = kron_identity(cfg.gyro_model.A, 3);
  const Eigen::MatrixXd Ba = kron_identity(cfg.accel_model.B, 3);
  const Eigen::MatrixXd Bw = kron_identity(cfg.gyro_model.B, 3);

  const int oP = layout->offset(0), oV = layout->offset(1), oTh = layout->offset(2),
            oC = layout->offset(3), oBA = layout->offset(4), oBW = layout->offset(5),
            oGA = layout->offset(6), oGW = layout->offset(7);
  const Eigen::Vector3d g = cfg.gravity;

  SystemModelPlugin plugin;
  plugin.layout = layout;
  plugin.input_dim = 0;

  plugin.f = [=](const ManifoldPoint& x, const Eigen::VectorXd&) {
    const Eigen::Vector3d a = Ca * x.euclidean(6);
    const Eigen::Vector3d w = Cw * x.euclidean(7);
    Eigen::VectorXd dx = Eigen::VectorXd::Zero(n);
    dx.segment<3>(oP) = x.euclidean(1);
    dx.segment<3>(oV) = x.rotation(2) * a + g;
    dx.segment<3>(oTh) = w;
    dx.segment(oGA, 3 * na) = Aa * x.euclidean(6);
    dx.segment(oGW, 3 * nw) = Aw * x.euclidean(7);
    return dx;
  };

  plugin.F_x = [=](const ManifoldPoint& x, const Eigen::VectorXd&) {
    const Eigen::Vector3d a = Ca * x.euclidean(6);
    const Eigen::Vector3d w = Cw * x.euclidean(7);
    const Eigen::Matrix3d R = x.rotation(2);
    Eigen::MatrixXd F = Eigen::MatrixXd::Zero(n, n);
    F.block<3, 3>(oP, oV).setIdentity();
    F.block<3, 3>(oV, oTh) = -R * so3::skew<double>(a);
    F.block(oV, oGA, 3, 3 * na) = R * Ca;
    F.block<3, 3>(oTh, oTh) = -so3::skew<double>(w);
    F.block(oTh, oGW, 3, 3 * nw) = Cw;
    F.block(oGA, oGA, 3 * na, 3 * na) = Aa;
    F.block(oGW, oGW, 3 * nw, 3 * nw) = Aw;
    return F;
  };

  const int nwdim = 6 + static_cast<int>(Ba.cols() + Bw.cols());
  plugin.F_w = [=](const ManifoldPoint&, const Eigen::VectorXd&) {
    Eigen::MatrixXd Fw = Eigen::MatrixXd::Zero(n, nwdim);
    Fw.block<3, 3>(oBA, 0).setIdentity();
    Fw.block<3, 3>(oBW, 3).setIdentity();
    Fw.block(oGA, 6, 3 * na, Ba.cols()) = Ba;
    Fw.block(oGW, 6 + Ba.cols(), 3 * nw, Bw.cols()) = Bw;
    return Fw;
  };
  plugin.Q = blkdiag_process_noise(
      {cfg.q_bias_accel * Eigen::Matrix3d::Identity(), cfg.q_bias_gyro * Eigen::Matrix3d::Identity(),
       kron_identity(Eigen::MatrixXd(cfg.accel_model.q.asDiagonal()), 3),
       kron_identity(Eigen::MatrixXd(cfg.gyro_model.q.asDiagonal()), 3)});

  MeasurementModel pos;
  pos.name = "pos";
  pos.dim = 3;
  pos.h = [=](const ManifoldPoint& x) -> Eigen::VectorXd {
    return x.euclidean(0) + x.rotation(2) * x.euclidean(3);
  };
  pos.H = [=](const ManifoldPoint& x) {
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(3, n);
    H.block<3, 3>(0, oP).setIdentity();
    H.block<3, 3>(0, oTh) = -x.rotation(2) * so3::skew<double>(Eigen::Vector3d(x.euclidean(3)));
    H.block<3, 3>(0, oC) = x.rotation(2);
    return H;
  };
  pos.R = cfg.r_pos * Eigen::Matrix3d::Identity();

  MeasurementModel heading;
  heading.name = "heading";
  heading.dim = 3;
  const Eigen::Vector3d m0 = cfg.heading_ref;
  heading.h = [=](const ManifoldPoint& x) -> Eigen::VectorXd {
    return x.rotation(2).transpose() * m0;
  };
  heading.H = [=](const ManifoldPoint& x) {
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(3, n);
    H.block<3, 3>(0, oTh) = so3::skew<double>(Eigen::Vector3d(x.rotation(2).transpose() * m0));
    return H;
  };
  heading.R = cfg.r_heading * Eigen::Matrix3d::Identity();

  MeasurementModel imu;
  imu.name = "imu";
  imu.dim = 6;
  imu.h = [=](const ManifoldPoint& x) {
    Eigen::VectorXd z(6);
    z.head<3>() = Ca * x.euclidean(6) + x.euclidean(4);
    z.tail<3>() = Cw * x.euclidean(7) + x.euclidean(5);
    return z;
  };
  imu.H = [=](const ManifoldPoint&) {
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(6, n);
    H.block<3, 3>(0, oBA).setIdentity();
    H.block(0, oGA, 3, 3 * na) = Ca;
    H.block<3, 3>(3, oBW).setIdentity();
    H.block(3, oGW, 3, 3 * nw) = Cw;
    return H;
  };
  imu.R = blkdiag_process_noise({cfg.r_accel * Eigen::Matrix3d::Identity(),
                                 cfg.r_gyro * Eigen::Matrix3d::Identity()});

  plugin.outputs = {pos, heading, imu};
  return plugin;
}

SystemModelPlugin pos_imu_input_plugin(const PosImuConfig& cfg) {
  const auto layout = pos_imu_input_layout();
  const int n = layout->tangent_dim();
  const int oP = layout->offset(0), oV = layout->offset(1), oTh = layout->offset(2),
            oC = layout->offset(3), oBA = layout->offset(4), oBW = layout->offset(5);
  const Eigen::Vector3d g = cfg.gravity;

  SystemModelPlugin plugin;
  plugin.layout = layout;
  plugin.input_dim = 6;  // u = [a_m; w_m]

  plugin.f = [=](const ManifoldPoint& x, const Eigen::VectorXd& u) {
    if (u.size() != 6)
      throw std::invalid_argument("pos_imu_input_plugin: missing IMU input sample");
    Eigen::VectorXd dx = Eigen::VectorXd::Zero(n);
    dx.segment<3>(oP) = x.euclidean(1);
    dx.segment<3>(oV) = x.rotation(2) * (u.head<3>() - x.euclidean(4)) + g;
    dx.segment<3>(oTh) = u.tail<3>() - x.euclidean(5);
    return dx;
  };

  plugin.F_x = [=](const ManifoldPoint& x, const Eigen::VectorXd& u) {
    if (u.size() != 6)
      throw std::invalid_argument("pos_imu_input_plugin: missing IMU input sample");
    const Eigen::Matrix3d R = x.rotation(2);
    Eigen::MatrixXd F = Eigen::MatrixXd::Zero(n, n);
    F.block<3, 3>(oP, oV).setIdentity();
    F.block<3, 3>(oV, oTh) =
        -R * so3::skew<double>(Eigen::Vector3d(u.head<3>() - x.euclidean(4)));
    F.block<3, 3>(oV, oBA) = -R;
    F.block<3, 3>(oTh, oTh) = -so3::skew<double>(Eigen::Vector3d(u.tail<3>() - x.euclidean(5)));
    F.block<3, 3>(oTh, oBW) = -Eigen::Matrix3d::Identity();
    return F;
  };

  plugin.F_w = [=](const ManifoldPoint& x, const Eigen::VectorXd&) {
    Eigen::MatrixXd Fw = Eigen::MatrixXd::Zero(n, 12);
    Fw.block<3, 3>(oV, 0) = -x.rotation(2);  // accelerometer noise
    Fw.block<3, 3>(oTh, 3) = -Eigen::Matrix3d::Identity();  // gyro noise
    Fw.block<3, 3>(oBA, 6).setIdentity();
    Fw.block<3, 3>(oBW, 9).setIdentity();
    return Fw;
  };
  plugin.Q = blkdiag_process_noise(
      {cfg.q_input_accel * Eigen::Matrix3d::Identity(),
       cfg.q_input_gyro * Eigen::Matrix3d::Identity(),
       cfg.q_bias_accel * Eigen::Matrix3d::Identity(),
       cfg.q_bias_gyro * Eigen::Matrix3d::Identity()});

  MeasurementModel pos;
  pos.name = "pos";
  pos.dim = 3;
  pos.h = [=](const ManifoldPoint& x) -> Eigen::VectorXd {
    return x.euclidean(0) + x.rotation(2) * x.euclidean(3);
  };
  pos.H = [=](const ManifoldPoint& x) {
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(3, n);
    H.block<3, 3>(0, oP).setIdentity();
    H.block<3, 3>(0, oTh) = -x.rotation(2) * so3::skew<double>(Eigen::Vector3d(x.euclidean(3)));
    H.block<3, 3>(0, oC) = x.rotation(2);
    return H;
  };
  pos.R = cfg.r_pos * Eigen::Matrix3d::Identity();

  MeasurementModel heading;
  heading.name = "heading";
  heading.dim = 3;
  const Eigen::Vector3d m0 = cfg.heading_ref;
  heading.h = [=](const ManifoldPoint& x) -> Eigen::VectorXd {
    return x.rotation(2).transpose() * m0;
  };
  heading.H = [=](const ManifoldPoint& x) {
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(3, n);
    H.block<3, 3>(0, oTh) = so3::skew<double>(Eigen::Vector3d(x.rotation(2).transpose() * m0));
    return H;
  };
  heading.R = cfg.r_heading * Eigen::Matrix3d::Identity();

  plugin.outputs = {pos, heading};
  return plugin;
}

SystemModelPlugin inter_imu_plugin(const InterImuConfig& cfg) {
  const int nt = cfg.angacc_model.order;
  const int na = cfg.accel_model.order;
  const auto layout = inter_imu_layout(nt, na);
  const int n = layout->tangent_dim();

  const Eigen::MatrixXd Ct = kron_identity(cfg.angacc_model.C, 3);
  const Eigen::MatrixXd Ca = kron_identity(cfg.accel_model.C, 3);
  const Eigen::MatrixXd At = kron_identity(cfg.angacc_model.A, 3);
  const Eigen::MatrixXd Aa = kron_identity(cfg.accel_model.A, 3);
  const Eigen::MatrixXd Bt = kron_identity(cfg.angacc_model.B, 3);
  const Eigen::MatrixXd Ba = kron_identity(cfg.accel_model.B, 3);

  const int oBA = layout->offset(0), oBW = layout->offset(1), oW = layout->offset(2),
            oC = layout->offset(3), oTh = layout->offset(4), oGT = layout->offset(5),
            oGA = layout->offset(6);

  SystemModelPlugin plugin;
  plugin.layout = layout;
  plugin.input_dim = 0;

  plugin.f = [=](const ManifoldPoint& x, const Eigen::VectorXd&) {
    Eigen::VectorXd dx = Eigen::VectorXd::Zero(n);
    dx.segment<3>(oW) = Ct * x.euclidean(5);  // w_dot = tau
    dx.segment(oGT, 3 * nt) = At * x.euclidean(5);
    dx.segment(oGA, 3 * na) = Aa * x.euclidean(6);
    return dx;  // R block has zero rate: constant extrinsic rotation
  };

  plugin.F_x = [=](const ManifoldPoint&, const Eigen::VectorXd&) {
    Eigen::MatrixXd F = Eigen::MatrixXd::Zero(n, n);
    F.block(oW, oGT, 3, 3 * nt) = Ct;
    F.block(oGT, oGT, 3 * nt, 3 * nt) = At;
    F.block(oGA, oGA, 3 * na, 3 * na) = Aa;
    return F;
  };

  const int nwdim = 6 + static_cast<int>(Bt.cols() + Ba.cols());
  plugin.F_w = [=](const ManifoldPoint&, const Eigen::VectorXd&) {
    Eigen::MatrixXd Fw = Eigen::MatrixXd::Zero(n, nwdim);
    Fw.block<3, 3>(oBA, 0).setIdentity();
    Fw.block<3, 3>(oBW, 3).setIdentity();
    Fw.block(oGT, 6, 3 * nt, Bt.cols()) = Bt;
    Fw.block(oGA, 6 + Bt.cols(), 3 * na, Ba.cols()) = Ba;
    return Fw;
  };
  plugin.Q = blkdiag_process_noise(
      {cfg.q_bias_rel * Eigen::Matrix3d::Identity(), cfg.q_bias_gyro * Eigen::Matrix3d::Identity(),
       kron_identity(Eigen::MatrixXd(cfg.angacc_model.q.asDiagonal()), 3),
       kron_identity(Eigen::MatrixXd(cfg.accel_model.q.asDiagonal()), 3)});

  MeasurementModel gyro1;
  gyro1.name = "gyro1";
  gyro1.dim = 3;
  gyro1.h = [=](const ManifoldPoint& x) -> Eigen::VectorXd {
    return x.euclidean(2) + x.euclidean(1);
  };
  gyro1.H = [=](const ManifoldPoint&) {
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(3, n);
    H.block<3, 3>(0, oW).setIdentity();
    H.block<3, 3>(0, oBW).setIdentity();
    return H;
  };
  gyro1.R = cfg.r_gyro1 * Eigen::Matrix3d::Identity();

  MeasurementModel accel1;
  accel1.name = "accel1";
  accel1.dim = 3;
  accel1.h = [=](const ManifoldPoint& x) -> Eigen::VectorXd { return Ca * x.euclidean(6); };
  accel1.H = [=](const ManifoldPoint&) {
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(3, n);
    H.block(0, oGA, 3, 3 * na) = Ca;
    return H;
  };
  accel1.R = cfg.r_accel1 * Eigen::Matrix3d::Identity();

  MeasurementModel accel2;
  accel2.name = "accel2";
  accel2.dim = 3;
  accel2.h = [=](const ManifoldPoint& x) -> Eigen::VectorXd {
    const Eigen::Vector3d a = Ca * x.euclidean(6);
    const Eigen::Vector3d w = x.euclidean(2);
    const Eigen::Vector3d tau = Ct * x.euclidean(5);
    const Eigen::Vector3d c = x.euclidean(3);
    const Eigen::Matrix3d sw = so3::skew<double>(w);
    return x.rotation(4) * (a + sw * sw * c + so3::skew<double>(tau) * c) + x.euclidean(0);
  };
  accel2.H = [=](const ManifoldPoint& x) {
    const Eigen::Vector3d a = Ca * x.euclidean(6);
    const Eigen::Vector3d w = x.euclidean(2);
    const Eigen::Vector3d tau = Ct * x.euclidean(5);
    const Eigen::Vector3d c = x.euclidean(3);
    const Eigen::Matrix3d R = x.rotation(4);
    const Eigen::Matrix3d sw = so3::skew<double>(w);
    const Eigen::Vector3d u = a + sw * sw * c + so3::skew<double>(tau) * c;
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(3, n);
    H.block<3, 3>(0, oBA).setIdentity();
    H.block<3, 3>(0, oTh) = -R * so3::skew<double>(u);
    H.block<3, 3>(0, oC) = R * (sw * sw + so3::skew<double>(tau));
    H.block<3, 3>(0, oW) =
        R * (-so3::skew<double>(Eigen::Vector3d(sw * c)) - sw * so3::skew<double>(c));
    H.block(0, oGT, 3, 3 * nt) = -R * so3::skew<double>(c) * Ct;
    H.block(0, oGA, 3, 3 * na) = R * Ca;
    return H;
  };
  accel2.R = cfg.r_accel2 * Eigen::Matrix3d::Identity();

  plugin.outputs = {gyro1, accel1, accel2};
  return plugin;
}

Eigen::MatrixXd invariance_shift_basis(const Eigen::MatrixXd& A_scalar,
                                       const Eigen::MatrixXd& C_scalar, bool separate_imu1_bias,
                                       const Eigen::Matrix3d& R_ext, double tol) {
  const Eigen::MatrixXd A3 = kron_identity(A_scalar, 3);
  const Eigen::MatrixXd C3 = kron_identity(C_scalar, 3);
  const int ng = static_cast<int>(A3.cols());

  Eigen::MatrixXd M;
  if (separate_imu1_bias) {
    M = Eigen::MatrixXd::Zero(ng + 6, ng + 6);
    M.topLeftCorner(ng, ng) = A3;
    M.block(ng, 0, 3, ng) = C3;
    M.block(ng, ng, 3, 3).setIdentity();
    M.block(ng + 3, 0, 3, ng) = R_ext * C3;
    M.block(ng + 3, ng + 3, 3, 3).setIdentity();
  } else {
    M = Eigen::MatrixXd::Zero(ng + 6, ng + 3);
    M.topLeftCorner(ng, ng) = A3;
    M.block(ng, 0, 3, ng) = C3;
    M.block(ng + 3, 0, 3, ng) = R_ext * C3;
    M.block(ng + 3, ng, 3, 3).setIdentity();
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > tol * smax) ++rank;
  const int nullity = static_cast<int>(M.cols()) - rank;
  return svd.matrixV().rightCols(nullity);
}

InvarianceReport check_minimal_invariance(const NonMinimalInterImu& model, double duration_s,
                                          double dt) {
  const int na = model.accel_model.order;
  const int nt = model.angacc_model.order;
  const auto layout = make_layout(
      {StateBlock::euclidean("g_a1", 3 * na), StateBlock::euclidean("g_t", 3 * nt),
       StateBlock::euclidean("w", 3), StateBlock::euclidean("b_w1", 3),
       StateBlock::euclidean("b_a1", 3), StateBlock::euclidean("b_a2", 3)});

  const Eigen::MatrixXd Aa = kron_identity(model.accel_model.A, 3);
  const Eigen::MatrixXd Ca = kron_identity(model.accel_model.C, 3);
  const Eigen::MatrixXd At = kron_identity(model.angacc_model.A, 3);
  const Eigen::MatrixXd Ct = kron_identity(model.angacc_model.C, 3);
  const Eigen::Matrix3d R = model.R_ext;
  const Eigen::Vector3d c = model.c;
  const int n = layout->tangent_dim();

  TangentField f = [&](const ManifoldPoint& x) {
    Eigen::VectorXd dx = Eigen::VectorXd::Zero(n);
    dx.segment(0, 3 * na) = Aa * x.euclidean(0);
    dx.segment(3 * na, 3 * nt) = At * x.euclidean(1);
    dx.segment<3>(3 * na + 3 * nt) = Ct * x.euclidean(1);  // w_dot = tau
    return dx;
  };
  auto outputs = [&](const ManifoldPoint& x) {
    const Eigen::Vector3d a1 = Ca * x.euclidean(0);
    const Eigen::Vector3d tau = Ct * x.euclidean(1);
    const Eigen::Vector3d w = x.euclidean(2);
    const Eigen::Matrix3d sw = so3::skew<double>(w);
    Eigen::VectorXd y(9);
    y.segment<3>(0) = w + x.euclidean(3);
    y.segment<3>(3) = a1 + x.euclidean(4);
    y.segment<3>(6) = R * (a1 + sw * sw * c + so3::skew<double>(tau) * c) + x.euclidean(5);
    return y;
  };

  InvarianceReport report;
  const Eigen::MatrixXd basis =
      invariance_shift_basis(model.accel_model.A, model.accel_model.C, true, R);
  if (basis.cols() == 0) {
    report.text = "model already minimal: invariance constraints admit only the zero shift";
    return report;
  }
  report.shift_found = true;
  report.shift = basis.col(0);

  // Deterministic excitation so the trajectories are not trivially constant.
  ManifoldPoint x0(layout);
  for (int k = 0; k < na; ++k)
    x0.euclidean(0).segment<3>(3 * k) =
        Eigen::Vector3d(0.7, -0.4, 0.9) * std::pow(10.0, -k);
  for (int k = 0; k < nt; ++k)
    x0.euclidean(1).segment<3>(3 * k) =
        Eigen::Vector3d(0.5, 0.8, -0.3) * std::pow(10.0, -k);
  x0.euclidean(2) = Eigen::Vector3d(0.2, -0.1, 0.3);
  x0.euclidean(3) = Eigen::Vector3d(0.01, -0.02, 0.015);
  x0.euclidean(4) = Eigen::Vector3d(0.05, 0.02, -0.04);
  x0.euclidean(5) = Eigen::Vector3d(-0.03, 0.04, 0.01);

  ManifoldPoint xs = x0;
  {
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(n);
    delta.segment(0, 3 * na) = report.shift.segment(0, 3 * na);
    delta.segment<3>(3 * na + 3 * nt + 6) = report.shift.segment<3>(3 * na);      // b_a1
    delta.segment<3>(3 * na + 3 * nt + 9) = report.shift.segment<3>(3 * na + 3);  // b_a2
    xs.boxplus(delta);
  }

  double max_diff = 0.0;
  ManifoldPoint a = x0, b = xs;
  const int steps = static_cast<int>(std::round(duration_s / dt));
  for (int i = 0; i <= steps; ++i) {
    max_diff = std::max(max_diff, (outputs(a) - outputs(b)).cwiseAbs().maxCoeff());
    if (i < steps) {
      a = rk4_step(a, f, dt);
      b = rk4_step(b, f, dt);
    }
  }
  report.max_output_difference = max_diff;
  std::ostringstream os;
  os << "nonzero invariant shift found (|x| = " << report.shift.norm()
     << "); max noiseless output difference over " << duration_s << " s = " << max_diff;
  report.text = os.str();
  return report;
}

}  // namespace kinestat
