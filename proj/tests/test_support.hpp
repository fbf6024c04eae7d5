#pragma once

#include <random>

#include "cocarry/model.hpp"

namespace cocarry::testing {

/// Planar 2-link arm (1 m links, z axes) on the standard base; mount 0.2 m up.
inline RobotModel make_planar_2link() {
  RobotModel m;
  m.name = "planar-2link";
  m.mount = Pose(Vec3(0, 0, 0.2), Quat::Identity());
  for (int i = 0; i < 2; ++i) {
    ArmJoint j;
    j.origin = Pose(i == 0 ? Vec3(0, 0, 0) : Vec3(1, 0, 0), Quat::Identity());
    j.axis = Vec3::UnitZ();
    m.arm.joints.push_back(j);
    LinkInertia link;
    link.mass = 1.0;
    link.com = Vec3(0.5, 0, 0);
    link.inertia = Vec3(0.01, 0.1, 0.1).asDiagonal();
    m.arm.links.push_back(link);
  }
  m.arm.ee_offset = Pose(Vec3(1, 0, 0), Quat::Identity());
  m.arm.q_home = VecX::Zero(2);
  return m;
}

/// 2-link pendulum arm (y axes) that hangs along -z at q = 0; point-mass-ish
/// links for hand statics.
inline RobotModel make_pendulum_2link(double m1 = 2.0, double m2 = 1.5) {
  RobotModel m;
  m.name = "pendulum-2link";
  m.mount = Pose(Vec3(0, 0, 1.5), Quat::Identity());
  ArmJoint j1;
  j1.origin = Pose(Vec3::Zero(), Quat::Identity());
  j1.axis = Vec3::UnitY();
  ArmJoint j2;
  j2.origin = Pose(Vec3(0, 0, -1.0), Quat::Identity());
  j2.axis = Vec3::UnitY();
  m.arm.joints = {j1, j2};
  LinkInertia l1;
  l1.mass = m1;
  l1.com = Vec3(0, 0, -0.5);
  l1.inertia = Vec3(0.05, 0.05, 0.01).asDiagonal();
  LinkInertia l2;
  l2.mass = m2;
  l2.com = Vec3(0, 0, -0.5);
  l2.inertia = Vec3(0.04, 0.04, 0.008).asDiagonal();
  m.arm.links = {l1, l2};
  m.arm.ee_offset = Pose(Vec3(0, 0, -1.0), Quat::Identity());
  m.arm.q_home = VecX::Zero(2);
  return m;
}

/// 7-DoF S-R-S style chain, Panda-scale masses; n = 10 with the base.
inline RobotModel make_arm7() {
  RobotModel m;
  m.name = "test-7dof";
  m.mount = Pose(Vec3(0.15, 0, 0.45), Quat::Identity());
  const Vec3 axes[7] = {Vec3::UnitZ(), Vec3::UnitY(), Vec3::UnitZ(), Vec3::UnitY(),
                        Vec3::UnitZ(), Vec3::UnitY(), Vec3::UnitZ()};
  const Vec3 offsets[7] = {Vec3(0, 0, 0.30), Vec3(0, 0, 0.05), Vec3(0, 0, 0.25),
                           Vec3(0, 0, 0.05), Vec3(0, 0, 0.25), Vec3(0, 0, 0.05),
                           Vec3(0, 0, 0.08)};
  const double masses[7] = {4.0, 4.0, 3.0, 3.0, 2.5, 1.5, 0.5};
  for (int i = 0; i < 7; ++i) {
    ArmJoint j;
    j.origin = Pose(offsets[i], Quat::Identity());
    j.axis = axes[i];
    m.arm.joints.push_back(j);
    LinkInertia link;
    link.mass = masses[i];
    link.com = Vec3(0.0, 0.02, 0.10);
    link.inertia = Vec3(0.03, 0.03, 0.01).asDiagonal();
    m.arm.links.push_back(link);
  }
  m.arm.ee_offset = Pose(Vec3(0, 0, 0.10), Quat::Identity());
  m.arm.q_home = (VecX(7) << 0.0, 0.5, 0.0, -1.2, 0.0, 0.9, 0.0).finished();
  return m;
}

/// 6-DoF elbow arm, UR16e-scale masses; n = 9 with the base. Square task
/// Jacobian in the arm, used for the n = 6-like reductions via arm-only ops.
inline RobotModel make_arm6() {
  RobotModel m;
  m.name = "test-6dof";
  m.mount = Pose(Vec3(0.15, 0, 0.40), Quat::Identity());
  ArmJoint j;
  j.origin = Pose(Vec3(0, 0, 0.18), Quat::Identity());
  j.axis = Vec3::UnitZ();
  m.arm.joints.push_back(j);
  j.origin = Pose(Vec3(0, 0, 0.06), Quat::Identity());
  j.axis = Vec3::UnitY();
  m.arm.joints.push_back(j);
  j.origin = Pose(Vec3(0, 0, 0.45), Quat::Identity());
  j.axis = Vec3::UnitY();
  m.arm.joints.push_back(j);
  j.origin = Pose(Vec3(0, 0, 0.40), Quat::Identity());
  j.axis = Vec3::UnitY();
  m.arm.joints.push_back(j);
  j.origin = Pose(Vec3(0.10, 0, 0), Quat::Identity());
  j.axis = Vec3::UnitZ();
  m.arm.joints.push_back(j);
  j.origin = Pose(Vec3(0.08, 0, 0), Quat::Identity());
  j.axis = Vec3::UnitY();
  m.arm.joints.push_back(j);
  const double masses[6] = {7.4, 10.8, 4.0, 2.2, 2.2, 0.9};
  for (int i = 0; i < 6; ++i) {
    LinkInertia link;
    link.mass = masses[i];
    link.com = Vec3(0.05, 0.0, 0.08);
    link.inertia = Vec3(0.05, 0.05, 0.02).asDiagonal();
    m.arm.links.push_back(link);
  }
  m.arm.ee_offset = Pose(Vec3(0.10, 0, 0), Quat::Identity());
  m.arm.q_home = (VecX(6) << 0.0, 0.6, -1.1, 0.5, 0.8, 0.4).finished();
  return m;
}

inline VecX random_config(const RobotModel& m, std::mt19937& rng, double base_range = 1.0,
                          double arm_range = 1.5) {
  std::uniform_real_distribution<double> ub(-base_range, base_range);
  std::uniform_real_distribution<double> ua(-arm_range, arm_range);
  VecX q(m.dof());
  for (int i = 0; i < 3; ++i) q[i] = ub(rng);
  for (int i = 3; i < m.dof(); ++i) q[i] = ua(rng);
  return q;
}

inline VecX random_vec(int n, std::mt19937& rng, double range = 1.0) {
  std::uniform_real_distribution<double> u(-range, range);
  VecX v(n);
  for (int i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

}  // namespace cocarry::testing
