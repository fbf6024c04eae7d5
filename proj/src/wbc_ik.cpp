#include "cocarry/wbc_ik.hpp"

#include <cmath>

#include "cocarry/errors.hpp"

namespace cocarry {

void IkParams::validate() const {
  if (!(W_1.array() > 0).all()) throw InputError("W_1 must be positive definite");
  if (!(W_2.array() > 0).all()) throw InputError("W_2 must be positive definite");
  if ((W_3.array() < 0).any()) throw InputError("W_3 must be positive semidefinite");
  if (schedule.k_max <= 0 || schedule.w_threshold <= 0)
    throw InputError("damping schedule constants must be > 0");
}

double manipulability(const MatX& J_arm) {
  const double det = (J_arm * J_arm.transpose()).determinant();
  return det > 0.0 ? std::sqrt(det) : 0.0;
}

double damping_factor(double w, const DampingSchedule& schedule) {
  if (w >= schedule.w_threshold) return 0.0;
  const double r = 1.0 - w / schedule.w_threshold;
  return schedule.k_max * r * r;
}

namespace {

Vec6 task_error(const Mat6X&, const Pose& x, const Vec6& xdot_d, const Pose& x_d,
                const IkParams& params) {
  return xdot_d + Vec6(params.K.asDiagonal() * pose_error(x_d, x));
}

// The W1/W2-weighted damped right inverse in its 6x6 dual form:
//   (J^T W1 J + k^2 W2)^-1 J^T W1 == W2^-1 J^T (J W2^-1 J^T + k^2 W1^-1)^-1
// (push-through identity). The left-hand normal matrix is rank-deficient for
// redundant arms whenever k^2 sits below the task-weight scale, so the dual
// form is the one that stays solvable for every k >= 0. At k = 0 it is the
// exact W2-weighted pseudo-inverse.
MatX weighted_pinv(const Mat6X& J, double k, const IkParams& params) {
  const MatX W2inv_Jt = params.W_2.cwiseInverse().asDiagonal() * J.transpose();
  Mat6 G = J * W2inv_Jt;
  G += (k * k) * Mat6(params.W_1.cwiseInverse().asDiagonal());
  const Eigen::LLT<Mat6> llt(G);
  if (llt.info() != Eigen::Success)
    throw SingularityError("singular task; damping inactive");
  return W2inv_Jt * llt.solve(Mat6::Identity());
}

}  // namespace

VecX solve_primary(const Mat6X& J, const Pose& x, const Vec6& xdot_d, const Pose& x_d,
                   double k, const IkParams& params) {
  if (params.W_2.size() != J.cols()) throw InputError("solve_primary: W_2 dimension mismatch");
  const Vec6 e = task_error(J, x, xdot_d, x_d, params);
  return weighted_pinv(J, k, params) * e;
}

VecX solve_secondary(const VecX& q, const VecX& dq_1, const Mat6X& J, double k,
                     const IkParams& params) {
  if (q.size() != J.cols() || dq_1.size() != J.cols() || params.W_3.size() != J.cols() ||
      params.q_0.size() != J.cols())
    throw InputError("solve_secondary: dimension mismatch");
  const VecX dq_2 = params.W_3.asDiagonal() * (params.q_0 - q);
  const MatX pinv = weighted_pinv(J, k, params);
  return dq_1 + dq_2 - pinv * (J * dq_2);
}

IkSolution ik_control_tick(const RobotModel& model, const WholeBodyState& state, const Pose& x_d,
                           const Vec6& xdot_d, const IkParams& params) {
  const Mat6X J = whole_body_jacobian(model, state.q);
  const Pose x = forward_kinematics(model, state.q);

  IkSolution out;
  out.manipulability = manipulability(J.rightCols(model.arm_dof()));
  out.damping = damping_factor(out.manipulability, params.schedule);
  const VecX dq_1 = solve_primary(J, x, xdot_d, x_d, out.damping, params);
  out.dq_d = solve_secondary(state.q, dq_1, J, out.damping, params);
  return out;
}

}  // namespace cocarry
