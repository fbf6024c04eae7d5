#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

namespace cocarry {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Quat = Eigen::Quaterniond;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using Mat6X = Eigen::Matrix<double, 6, Eigen::Dynamic>;

/// Rigid pose: position plus unit quaternion, both in the parent frame.
struct Pose {
  Vec3 position{Vec3::Zero()};
  Quat orientation{Quat::Identity()};

  Pose() = default;
  Pose(const Vec3& p, const Quat& q) : position(p), orientation(q.normalized()) {}

  Pose operator*(const Pose& other) const {
    return Pose(position + orientation * other.position, orientation * other.orientation);
  }

  Vec3 operator*(const Vec3& p) const { return position + orientation * p; }

  Pose inverse() const {
    const Quat qi = orientation.conjugate();
    return Pose(qi * (-position), qi);
  }
};

/// Spatial velocity of a frame: [linear; angular], world coordinates.
struct Twist {
  Vec3 linear{Vec3::Zero()};
  Vec3 angular{Vec3::Zero()};

  Vec6 vector() const {
    Vec6 v;
    v << linear, angular;
    return v;
  }
  static Twist from_vector(const Vec6& v) { return Twist{v.head<3>(), v.tail<3>()}; }
};

inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

/// Rotation-vector logarithm of a unit quaternion (axis * angle, angle in [0, pi]).
inline Vec3 quat_log(const Quat& q_in) {
  Quat q = q_in;
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  const double vnorm = q.vec().norm();
  if (vnorm < 1e-14) return 2.0 * q.vec();  // small-angle: log(q) ~ 2*vec
  const double angle = 2.0 * std::atan2(vnorm, q.w());
  return (angle / vnorm) * q.vec();
}

/// Exponential map: rotation vector -> unit quaternion.
inline Quat quat_exp(const Vec3& w) {
  const double angle = w.norm();
  if (angle < 1e-14) {
    Quat q(1.0, 0.5 * w.x(), 0.5 * w.y(), 0.5 * w.z());
    return q.normalized();
  }
  const Vec3 axis = w / angle;
  return Quat(Eigen::AngleAxisd(angle, axis));
}

/// Orientation error as a world-frame rotation vector taking `q` onto `q_des`.
inline Vec3 orientation_error(const Quat& q_des, const Quat& q) {
  return quat_log(q_des * q.conjugate());
}

/// 6-vector pose error [position; orientation], world frame.
inline Vec6 pose_error(const Pose& desired, const Pose& current) {
  Vec6 e;
  e.head<3>() = desired.position - current.position;
  e.tail<3>() = orientation_error(desired.orientation, current.orientation);
  return e;
}

/// Integrate a world-frame angular velocity over dt onto a quaternion.
inline Quat integrate_orientation(const Quat& q, const Vec3& omega_world, double dt) {
  return (quat_exp(omega_world * dt) * q).normalized();
}

inline Pose planar_pose(double x, double y, double yaw) {
  return Pose(Vec3(x, y, 0.0), Quat(Eigen::AngleAxisd(yaw, Vec3::UnitZ())));
}

inline Pose pose_from_xyz_rpy(const Vec3& xyz, const Vec3& rpy) {
  const Quat q = Eigen::AngleAxisd(rpy.z(), Vec3::UnitZ()) *
                 Eigen::AngleAxisd(rpy.y(), Vec3::UnitY()) *
                 Eigen::AngleAxisd(rpy.x(), Vec3::UnitX());
  return Pose(xyz, q);
}

}  // namespace cocarry
