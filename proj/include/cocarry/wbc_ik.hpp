#pragma once

#include "cocarry/geometry.hpp"
#include "cocarry/model.hpp"

namespace cocarry {

struct DampingSchedule {
  double w_threshold{0.05};  // manipulability below which damping ramps in
  double k_max{0.1};
};

struct IkParams {
  Vec6 K;     // diagonal closed-loop tracking gain, 1/s
  Vec6 W_1;   // diagonal task weight
  VecX W_2;   // diagonal velocity weight
  VecX W_3;   // diagonal posture weight (PSD; zero entries allowed)
  VecX q_0;   // default configuration
  DampingSchedule schedule;

  void validate() const;
};

/// w = sqrt(det(J J^T)); round-off negatives clamp to zero.
double manipulability(const MatX& J_arm);

/// Classical quadratic ramp: k = k_max (1 - w/w_th)^2 below the threshold,
/// zero above it.
double damping_factor(double w, const DampingSchedule& schedule);

/// Primary task: dq_1 = argmin |e - J dq|^2_W1 + |k dq|^2_W2 with
/// e = xdot_d + K * pose_error(x_d, x). With k = 0 the W2-weighted
/// least-norm solution is returned (exact tracking on full-rank tasks).
VecX solve_primary(const Mat6X& J, const Pose& x, const Vec6& xdot_d, const Pose& x_d,
                   double k, const IkParams& params);

/// Secondary posture task dq_2 = W_3 (q_0 - q) projected through
/// N = I - Jpinv J, where Jpinv is the W2-weighted damped pseudo-inverse
/// built with the same k. Returns dq_d = dq_1 + N dq_2.
VecX solve_secondary(const VecX& q, const VecX& dq_1, const Mat6X& J, double k,
                     const IkParams& params);

struct IkSolution {
  VecX dq_d;
  double manipulability{0.0};
  double damping{0.0};
};

/// manipulability -> damping factor -> primary -> secondary, using the
/// arm-only Jacobian columns for the manipulability index.
IkSolution ik_control_tick(const RobotModel& model, const WholeBodyState& state, const Pose& x_d,
                           const Vec6& xdot_d, const IkParams& params);

}  // namespace cocarry
