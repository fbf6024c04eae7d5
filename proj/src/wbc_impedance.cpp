#include "cocarry/wbc_impedance.hpp"

#include <Eigen/SVD>

#include "cocarry/errors.hpp"

namespace cocarry {

ImpedanceParams ImpedanceParams::with_damping_ratio(const Vec6& K_d, double xi, const VecX& K_0,
                                                    const VecX& H, const VecX& q_0) {
  if (xi <= 0.0 || xi > 1.0) throw InputError("damping ratio must be in (0, 1]");
  ImpedanceParams p;
  p.K_d = K_d;
  p.D_d = 2.0 * xi * K_d.cwiseSqrt();
  p.K_0 = K_0;
  p.D_0 = 2.0 * xi * K_0.cwiseSqrt();
  p.H = H;
  p.q_0 = q_0;
  return p;
}

Vec6 impedance_wrench(const Pose& x, const Vec6& xdot, const Pose& x_d, const Vec6& xdot_d,
                      const ImpedanceParams& params) {
  Pose cur = x;
  Pose des = x_d;
  if (std::abs(cur.orientation.norm() - 1.0) > 1e-6) cur.orientation.normalize();
  if (std::abs(des.orientation.norm() - 1.0) > 1e-6) des.orientation.normalize();
  const Vec6 err = pose_error(des, cur);
  return params.D_d.asDiagonal() * (xdot_d - xdot) + params.K_d.asDiagonal() * err;
}

VecX nullspace_torque(const VecX& q, const VecX& dq, const ImpedanceParams& params) {
  if (q.size() != params.q_0.size() || dq.size() != q.size())
    throw InputError("nullspace_torque: dimension mismatch");
  return -(params.D_0.asDiagonal() * dq) - (params.K_0.asDiagonal() * (q - params.q_0));
}

MatX weighting_matrix(const MatX& M, const VecX& H) {
  if (M.rows() != M.cols() || H.size() != M.rows())
    throw InputError("weighting_matrix: dimension mismatch");
  if ((H.cwiseAbs().array() < 1e-12).any())
    throw SingularityError("degenerate weighting");
  const MatX Minv = M.llt().solve(MatX::Identity(M.rows(), M.cols()));
  return H.asDiagonal() * Minv * H.asDiagonal();
}

VecX solve_torques(const MatX& M, const Mat6X& J, const Vec6& F, const VecX& tau_0,
                   const MatX& W, double mu) {
  const auto n = M.rows();
  if (J.cols() != n || tau_0.size() != n || W.rows() != n || W.cols() != n)
    throw InputError("solve_torques: dimension mismatch");

  if (mu <= 0.0) {
    const Eigen::JacobiSVD<MatX> svd(J);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    if (smin < 1e-8 * smax) throw SingularityError("task singularity");
  }

  const MatX In = MatX::Identity(n, n);
  const MatX Minv = M.llt().solve(In);
  const MatX Winv = W.llt().solve(In);
  const Mat6X A = J * Minv;  // J M^-1

  Mat6 lambda_inv = A * J.transpose();              // L^-1 = J M^-1 J^T
  Mat6 lambda_w_inv = A * Winv * A.transpose();     // Lw^-1
  if (mu > 0.0) {
    lambda_inv += mu * Mat6::Identity();
    lambda_w_inv += mu * Mat6::Identity();
  }

  const Eigen::LLT<Mat6> llt_w(lambda_w_inv);
  if (llt_w.info() != Eigen::Success) throw SingularityError("task singularity");

  const Vec6 y = llt_w.solve(lambda_inv * F - A * tau_0);  // Lw (L^-1 F - J M^-1 tau_0)
  return Winv * (A.transpose() * y) + tau_0;
}

TorqueSolution impedance_control_tick(const RobotModel& model, const WholeBodyState& state,
                                      const Pose& x_d, const Vec6& xdot_d,
                                      const ImpedanceParams& params) {
  const MatX M = mass_matrix(model, state.q);
  const Mat6X J = whole_body_jacobian(model, state.q);
  const Pose x = forward_kinematics(model, state.q);
  const Vec6 xdot = J * state.dq;

  const Vec6 F = impedance_wrench(x, xdot, x_d, xdot_d, params);
  const VecX tau_0 = nullspace_torque(state.q, state.dq, params);
  const MatX W = weighting_matrix(M, params.H);

  TorqueSolution out;
  try {
    out.tau = solve_torques(M, J, F, tau_0, W);
  } catch (const SingularityError&) {
    out.tau = solve_torques(M, J, F, tau_0, W, 1e-6);
    out.damped = true;
  }
  // Arm gravity feedforward on top of the model's g block.
  out.tau.tail(model.arm_dof()) += arm_gravity(model, state.q.tail(model.arm_dof()));
  return out;
}

}  // namespace cocarry
