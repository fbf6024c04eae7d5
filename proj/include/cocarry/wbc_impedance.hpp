#pragma once

#include "cocarry/geometry.hpp"
#include "cocarry/model.hpp"

namespace cocarry {

struct ImpedanceParams {
  Vec6 K_d;   // diagonal Cartesian stiffness, N/m and N m/rad
  Vec6 D_d;   // diagonal Cartesian damping
  VecX K_0;   // diagonal joint-space stiffness
  VecX D_0;   // diagonal joint-space damping
  VecX H;     // diagonal weighting selector (mobility tuning)
  VecX q_0;   // default configuration for the null-space task

  /// D = 2 xi sqrt(K), applied to both the Cartesian and joint-space pairs.
  static ImpedanceParams with_damping_ratio(const Vec6& K_d, double xi, const VecX& K_0,
                                            const VecX& H, const VecX& q_0);
};

/// F = D_d (xdot_d - xdot) + K_d (x_d - x), quaternion-log orientation error.
/// Quaternions drifting from unit norm by more than 1e-6 are renormalized.
Vec6 impedance_wrench(const Pose& x, const Vec6& xdot, const Pose& x_d, const Vec6& xdot_d,
                      const ImpedanceParams& params);

/// tau_0 = -D_0 dq - K_0 (q - q_0).
VecX nullspace_torque(const VecX& q, const VecX& dq, const ImpedanceParams& params);

/// W = H^T M^-1 H. Throws SingularityError("degenerate weighting") when H is
/// singular, since the closed form needs W^-1.
MatX weighting_matrix(const MatX& M, const VecX& H);

struct TorqueSolution {
  VecX tau;
  bool damped{false};  // damped fallback engaged near a task singularity
};

/// Closed-form prioritized weighted inverse dynamics:
///   tau = W^-1 M^-1 J^T Lw L^-1 F + (I - W^-1 M^-1 J^T Lw J M^-1) tau_0
/// with L = (J M^-1 J^T)^-1 and Lw = (J M^-1 W^-1 M^-1 J^T)^-1, the unique
/// SPD choice that makes this the exact KKT solution of
///   min 0.5 |tau - tau_0|^2_W   s.t.  Jbar^T tau = F.
/// `mu > 0` regularizes both 6x6 inversions (damped variant).
VecX solve_torques(const MatX& M, const Mat6X& J, const Vec6& F, const VecX& tau_0,
                   const MatX& W, double mu = 0.0);

/// Composition for one control tick: impedance wrench + null-space posture
/// through solve_torques, plus arm gravity compensation. Falls back to the
/// damped solve (mu = 1e-6) at task singularities.
TorqueSolution impedance_control_tick(const RobotModel& model, const WholeBodyState& state,
                                      const Pose& x_d, const Vec6& xdot_d,
                                      const ImpedanceParams& params);

}  // namespace cocarry
