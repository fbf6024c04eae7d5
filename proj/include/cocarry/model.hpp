#pragma once

#include <string>
#include <vector>

#include "cocarry/geometry.hpp"

namespace cocarry {

/// One revolute joint: fixed transform from the parent joint frame, then a
/// rotation of q about `axis` (unit vector, local frame).
struct ArmJoint {
  Pose origin;
  Vec3 axis{Vec3::UnitZ()};
};

/// Rigid-body inertia of the link attached to a joint frame.
struct LinkInertia {
  double mass{0.0};
  Vec3 com{Vec3::Zero()};        // link frame, m
  Mat3 inertia{Mat3::Zero()};    // about the COM, link frame, kg m^2
};

struct ArmModel {
  std::vector<ArmJoint> joints;
  std::vector<LinkInertia> links;
  VecX rotor_inertias;  // reflected actuator inertia per joint, kg m^2 (>= 0)
  VecX q_home;
  Pose ee_offset;  // last joint frame -> end-effector frame

  int dof() const { return static_cast<int>(joints.size()); }
};

/// Planar omni-directional base (x, y, yaw) with virtual dynamics
/// M_b qdd_b + D_b qd_b = tau_b + tau_b_ext.
struct BaseModel {
  Vec3 inertia{105.0, 105.0, 210.0};   // kg, kg, kg m^2
  Vec3 damping{1050.0, 1050.0, 2100.0};

  static constexpr int dof() { return 3; }
};

struct RobotModel {
  std::string name;
  BaseModel base;
  ArmModel arm;
  Pose mount;  // base frame -> arm root frame

  int dof() const { return BaseModel::dof() + arm.dof(); }
  int base_dof() const { return BaseModel::dof(); }
  int arm_dof() const { return arm.dof(); }
};

struct WholeBodyState {
  VecX q;
  VecX dq;
};

struct BiasTerms {
  VecX coriolis;  // C(q, dq) * dq, with D_b * dq_b in the base rows
  VecX gravity;   // zero base rows, g_a(q_a) in the arm rows
};

/// World-frame pose of every arm joint frame plus the end-effector,
/// as produced by one forward pass; used by the Jacobian and tests.
struct ArmFrames {
  std::vector<Pose> joint_frames;  // size n_a, world frame
  Pose ee;                         // world frame
};

Pose forward_kinematics(const RobotModel& model, const VecX& q);
ArmFrames compute_arm_frames(const RobotModel& model, const VecX& q);

/// 6 x n Jacobian mapping dq to the end-effector twist [linear; angular],
/// world frame. Columns 0..2 are the planar base contribution.
Mat6X whole_body_jacobian(const RobotModel& model, const VecX& q);

/// Block-diagonal inertia: constant M_b (top-left), composite-rigid-body
/// M_a(q_a) (bottom-right). Off-diagonal blocks are exactly zero.
MatX mass_matrix(const RobotModel& model, const VecX& q);

BiasTerms bias_terms(const RobotModel& model, const VecX& q, const VecX& dq);

/// Arm-only versions used by the dynamics internals and the test oracles.
MatX arm_mass_matrix(const RobotModel& model, const VecX& q_arm);
VecX arm_gravity(const RobotModel& model, const VecX& q_arm);
VecX arm_coriolis(const RobotModel& model, const VecX& q_arm, const VecX& dq_arm);

/// Inverse dynamics of the arm alone (root fixed): tau = M qdd + C qd + g.
VecX arm_inverse_dynamics(const RobotModel& model, const VecX& q_arm, const VecX& dq_arm,
                          const VecX& ddq_arm, bool with_gravity);

RobotModel load_robot_model(const std::string& path);
RobotModel parse_robot_model(const std::string& json_text, const std::string& locator);

inline constexpr double kGravity = 9.81;  // m/s^2

}  // namespace cocarry
