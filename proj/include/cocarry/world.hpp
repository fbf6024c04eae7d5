#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cocarry/geometry.hpp"

namespace cocarry {

struct ObjectBody {
  double mass{1.0};
  Mat3 inertia{Mat3::Identity()};  // about the COM, body frame
  Pose pose;
  Vec3 linear_velocity{Vec3::Zero()};
  Vec3 angular_velocity{Vec3::Zero()};  // world frame
  std::vector<Vec3> attachments;        // body frame

  Vec3 attachment_world(int index) const { return pose * attachments.at(index); }
  Vec3 attachment_velocity(int index) const {
    return linear_velocity +
           angular_velocity.cross(pose.orientation * attachments.at(index));
  }
};

enum class LinkKind { Strap, Rigid };

/// Id of the agent holding one end of a link. Robots are indexed as in the
/// scenario; the human is a separate agent.
struct AgentId {
  bool is_human{false};
  int robot{-1};
  static AgentId human() { return AgentId{true, -1}; }
  static AgentId robot_id(int i) { return AgentId{false, i}; }
};

struct CouplingLink {
  LinkKind kind{LinkKind::Strap};
  AgentId agent;
  int attachment{0};                // index into ObjectBody::attachments
  Vec3 agent_offset{Vec3::Zero()};  // agent frame -> grip point
  double rest_length{0.0};          // m, strap only; resolved at scenario start if "auto"
  double stiffness{2000.0};         // N/m
  double damping{50.0};             // N s/m
  double rotational_stiffness{0.0};  // N m/rad, rigid only; 0 = pure point grasp
  double rotational_damping{0.0};    // N m s/rad
  Vec3 rigid_rest_offset{Vec3::Zero()};   // rigid only: grasp offset captured at start
  Quat rigid_rest_rotation{Quat::Identity()};  // rigid only: agent->object at start
};

struct AgentPoint {
  Vec3 position{Vec3::Zero()};
  Vec3 velocity{Vec3::Zero()};
  Quat orientation{Quat::Identity()};
  Vec3 angular_velocity{Vec3::Zero()};
};

struct LinkForce {
  Vec3 on_agent{Vec3::Zero()};   // world frame; reaction on the object is the negative
  Vec3 torque_on_agent{Vec3::Zero()};  // rigid grasp moment, world frame
  bool taut{false};
  bool degenerate{false};  // coincident endpoints: direction undefined, force zeroed
};

/// Force the link applies to the agent-side grip point. Straps never push:
/// the axial force is clamped at zero. Rigid links act as a stiff 3-D
/// spring-damper on the displacement from the captured grasp offset.
LinkForce link_force(const CouplingLink& link, const AgentPoint& agent,
                     const ObjectBody& object);

struct PointForce {
  int attachment{0};
  Vec3 force{Vec3::Zero()};   // world frame, applied at the attachment
  Vec3 torque{Vec3::Zero()};  // pure moment about the COM, world frame
};

/// End-effector force measurement for one robot: the link force in the world
/// frame, tool weight already compensated, plus optional zero-mean Gaussian
/// noise drawn from `rng` when sigma > 0.
Vec3 measure_end_effector_force(const CouplingLink& link, const AgentPoint& ee_point,
                                const ObjectBody& object, double noise_sigma,
                                std::mt19937_64* rng);

/// Semi-implicit Euler step of the Newton-Euler equations; the quaternion is
/// renormalized after integration.
void step_object(ObjectBody& object, const std::vector<PointForce>& forces,
                 const Vec3& gravity, double dt);

struct TrajectorySegment {
  std::string label;  // backwards | sideways | down-up | custom
  double t_start{0.0};
  double t_end{0.0};
  int axis{0};  // 0 = X, 1 = Y, 2 = Z
};

struct HumanSample {
  Pose pose;
  Vec3 v_h{Vec3::Zero()};
  bool clamped{false};  // t outside the trajectory span
};

/// Time-indexed hand poses with velocities; cubic Hermite interpolation
/// between knots, exact at the knots.
class HumanTrajectory {
 public:
  struct Knot {
    double t{0.0};
    Pose pose;
    Vec3 velocity{Vec3::Zero()};
  };

  static HumanTrajectory from_knots(std::vector<Knot> knots,
                                    std::vector<TrajectorySegment> segments = {});
  /// CSV with header t,px,py,pz,qw,qx,qy,qz,vx,vy,vz.
  static HumanTrajectory load_csv(const std::string& path);
  /// The bundled 60 s experiment path: hold, backwards 1.2 m (+x), hold,
  /// sideways 0.8 m (+y), hold, down 0.2 m, up 0.2 m, hold; minimum-jerk
  /// point-to-point sub-movements starting from `start`.
  static HumanTrajectory paper_path(const Vec3& start);

  HumanSample sample(double t) const;
  double t_begin() const { return knots_.front().t; }
  double t_end() const { return knots_.back().t; }
  const std::vector<Knot>& knots() const { return knots_; }
  const std::vector<TrajectorySegment>& segments() const { return segments_; }

  void write_csv(const std::string& path) const;

 private:
  void validate() const;
  std::vector<Knot> knots_;
  std::vector<TrajectorySegment> segments_;
};

}  // namespace cocarry
