#include "cocarry/model.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cocarry/errors.hpp"

namespace cocarry {

namespace {

void check_dim(const VecX& v, int n, const char* what) {
  if (v.size() != n) {
    std::ostringstream os;
    os << what << ": expected length " << n << ", got " << v.size();
    throw InputError(os.str());
  }
}

Pose joint_pose_in_parent(const ArmJoint& joint, double q) {
  return joint.origin * Pose(Vec3::Zero(), Quat(Eigen::AngleAxisd(q, joint.axis)));
}

// Gravity expressed in the arm root frame. The base yaw rotates about the
// world z axis, so it drops out and g_a depends on q_a only.
Vec3 gravity_in_root(const RobotModel& model) {
  return model.mount.orientation.conjugate() * Vec3(0.0, 0.0, -kGravity);
}

// Spatial inertia about the frame origin, [angular; linear] coordinates.
Mat6 spatial_inertia(const LinkInertia& link) {
  const Mat3 cx = skew(link.com);
  Mat6 I = Mat6::Zero();
  I.topLeftCorner<3, 3>() = link.inertia + link.mass * cx * cx.transpose();
  I.topRightCorner<3, 3>() = link.mass * cx;
  I.bottomLeftCorner<3, 3>() = link.mass * cx.transpose();
  I.bottomRightCorner<3, 3>() = link.mass * Mat3::Identity();
  return I;
}

// Motion transform child <- parent for a child posed at (R, p) in the parent.
Mat6 motion_transform(const Mat3& R, const Vec3& p) {
  Mat6 X = Mat6::Zero();
  X.topLeftCorner<3, 3>() = R.transpose();
  X.bottomLeftCorner<3, 3>() = -R.transpose() * skew(p);
  X.bottomRightCorner<3, 3>() = R.transpose();
  return X;
}

}  // namespace

ArmFrames compute_arm_frames(const RobotModel& model, const VecX& q) {
  check_dim(q, model.dof(), "q");
  const Pose base = planar_pose(q[0], q[1], q[2]);
  Pose frame = base * model.mount;
  ArmFrames out;
  out.joint_frames.reserve(model.arm.dof());
  for (int i = 0; i < model.arm.dof(); ++i) {
    frame = frame * joint_pose_in_parent(model.arm.joints[i], q[3 + i]);
    out.joint_frames.push_back(frame);
  }
  out.ee = frame * model.arm.ee_offset;
  out.ee.orientation.normalize();
  return out;
}

Pose forward_kinematics(const RobotModel& model, const VecX& q) {
  return compute_arm_frames(model, q).ee;
}

Mat6X whole_body_jacobian(const RobotModel& model, const VecX& q) {
  const ArmFrames frames = compute_arm_frames(model, q);
  const Vec3 p_ee = frames.ee.position;

  Mat6X J = Mat6X::Zero(6, model.dof());
  J(0, 0) = 1.0;
  J(1, 1) = 1.0;
  // Yaw axis through the base origin.
  const Vec3 z = Vec3::UnitZ();
  const Vec3 p_base(q[0], q[1], 0.0);
  J.block<3, 1>(0, 2) = z.cross(p_ee - p_base);
  J.block<3, 1>(3, 2) = z;

  for (int i = 0; i < model.arm.dof(); ++i) {
    const Pose& f = frames.joint_frames[i];
    const Vec3 axis_w = f.orientation * model.arm.joints[i].axis;
    J.block<3, 1>(0, 3 + i) = axis_w.cross(p_ee - f.position);
    J.block<3, 1>(3, 3 + i) = axis_w;
  }
  return J;
}

MatX arm_mass_matrix(const RobotModel& model, const VecX& q_arm) {
  const int n = model.arm.dof();
  check_dim(q_arm, n, "q_arm");

  // Pose of each joint frame in its parent and the composite inertias.
  std::vector<Mat3> R(n);
  std::vector<Vec3> p(n);
  std::vector<Mat6> Ic(n);
  for (int i = 0; i < n; ++i) {
    const Pose pose = joint_pose_in_parent(model.arm.joints[i], q_arm[i]);
    R[i] = pose.orientation.toRotationMatrix();
    p[i] = pose.position;
    Ic[i] = spatial_inertia(model.arm.links[i]);
  }
  for (int i = n - 1; i >= 1; --i) {
    const Mat6 X = motion_transform(R[i], p[i]);
    Ic[i - 1] += X.transpose() * Ic[i] * X;
  }

  MatX M = MatX::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    Vec6 S = Vec6::Zero();
    S.head<3>() = model.arm.joints[i].axis;
    Vec6 F = Ic[i] * S;
    M(i, i) = S.dot(F);
    for (int j = i - 1; j >= 0; --j) {
      F = motion_transform(R[j + 1], p[j + 1]).transpose() * F;
      Vec6 Sj = Vec6::Zero();
      Sj.head<3>() = model.arm.joints[j].axis;
      M(i, j) = Sj.dot(F);
      M(j, i) = M(i, j);
    }
  }
  if (model.arm.rotor_inertias.size() == n) M.diagonal() += model.arm.rotor_inertias;
  return M;
}

VecX arm_inverse_dynamics(const RobotModel& model, const VecX& q_arm, const VecX& dq_arm,
                          const VecX& ddq_arm, bool with_gravity) {
  const int n = model.arm.dof();
  check_dim(q_arm, n, "q_arm");
  check_dim(dq_arm, n, "dq_arm");
  check_dim(ddq_arm, n, "ddq_arm");

  std::vector<Mat3> R(n);
  std::vector<Vec3> p(n);
  std::vector<Vec3> w(n), wd(n), a(n);   // local angular vel/acc, frame linear acc
  std::vector<Vec3> F(n), N(n);          // net force/moment at each link COM

  // Fictitious root acceleration implements gravity.
  Vec3 w_prev = Vec3::Zero();
  Vec3 wd_prev = Vec3::Zero();
  Vec3 a_prev = with_gravity ? Vec3(-gravity_in_root(model)) : Vec3::Zero();

  for (int i = 0; i < n; ++i) {
    const Pose pose = joint_pose_in_parent(model.arm.joints[i], q_arm[i]);
    R[i] = pose.orientation.toRotationMatrix();
    p[i] = pose.position;
    const Vec3& axis = model.arm.joints[i].axis;

    const Mat3 Rt = R[i].transpose();
    const Vec3 w_in = Rt * w_prev;
    w[i] = w_in + axis * dq_arm[i];
    wd[i] = Rt * wd_prev + w_in.cross(axis * dq_arm[i]) + axis * ddq_arm[i];
    a[i] = Rt * (a_prev + wd_prev.cross(p[i]) + w_prev.cross(w_prev.cross(p[i])));

    const LinkInertia& link = model.arm.links[i];
    const Vec3 a_com = a[i] + wd[i].cross(link.com) + w[i].cross(w[i].cross(link.com));
    F[i] = link.mass * a_com;
    N[i] = link.inertia * wd[i] + w[i].cross(link.inertia * w[i]);

    w_prev = w[i];
    wd_prev = wd[i];
    a_prev = a[i];
  }

  VecX tau(n);
  Vec3 f_child = Vec3::Zero();
  Vec3 n_child = Vec3::Zero();
  for (int i = n - 1; i >= 0; --i) {
    Vec3 f = F[i];
    Vec3 nn = N[i] + model.arm.links[i].com.cross(F[i]);
    if (i + 1 < n) {
      const Vec3 f_in = R[i + 1] * f_child;
      f += f_in;
      nn += R[i + 1] * n_child + p[i + 1].cross(f_in);
    }
    tau[i] = model.arm.joints[i].axis.dot(nn);
    f_child = f;
    n_child = nn;
  }
  return tau;
}

VecX arm_gravity(const RobotModel& model, const VecX& q_arm) {
  const VecX zero = VecX::Zero(model.arm.dof());
  return arm_inverse_dynamics(model, q_arm, zero, zero, true);
}

VecX arm_coriolis(const RobotModel& model, const VecX& q_arm, const VecX& dq_arm) {
  const VecX zero = VecX::Zero(model.arm.dof());
  return arm_inverse_dynamics(model, q_arm, dq_arm, zero, false);
}

MatX mass_matrix(const RobotModel& model, const VecX& q) {
  check_dim(q, model.dof(), "q");
  const int n = model.dof();
  MatX M = MatX::Zero(n, n);
  M.topLeftCorner<3, 3>() = model.base.inertia.asDiagonal();
  M.bottomRightCorner(model.arm.dof(), model.arm.dof()) =
      arm_mass_matrix(model, q.tail(model.arm.dof()));
  return M;
}

BiasTerms bias_terms(const RobotModel& model, const VecX& q, const VecX& dq) {
  check_dim(q, model.dof(), "q");
  check_dim(dq, model.dof(), "dq");
  BiasTerms out;
  out.coriolis = VecX::Zero(model.dof());
  out.gravity = VecX::Zero(model.dof());
  out.coriolis.head<3>() = model.base.damping.asDiagonal() * dq.head<3>();
  out.coriolis.tail(model.arm.dof()) =
      arm_coriolis(model, q.tail(model.arm.dof()), dq.tail(model.arm.dof()));
  out.gravity.tail(model.arm.dof()) = arm_gravity(model, q.tail(model.arm.dof()));
  return out;
}

namespace {

using nlohmann::json;

Vec3 vec3_of(const json& j, const std::string& loc) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(loc, "expected an array of 3 numbers");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

VecX vecx_of(const json& j, const std::string& loc) {
  if (!j.is_array()) throw ConfigError(loc, "expected an array of numbers");
  VecX v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v[static_cast<int>(i)] = j[i].get<double>();
  return v;
}

Mat3 inertia_of(const json& j, const std::string& loc) {
  if (!j.is_array()) throw ConfigError(loc, "expected [ixx,iyy,izz] or [ixx,iyy,izz,ixy,ixz,iyz]");
  Mat3 I = Mat3::Zero();
  if (j.size() == 3) {
    I.diagonal() = vec3_of(j, loc);
  } else if (j.size() == 6) {
    I(0, 0) = j[0].get<double>();
    I(1, 1) = j[1].get<double>();
    I(2, 2) = j[2].get<double>();
    I(0, 1) = I(1, 0) = j[3].get<double>();
    I(0, 2) = I(2, 0) = j[4].get<double>();
    I(1, 2) = I(2, 1) = j[5].get<double>();
  } else {
    throw ConfigError(loc, "expected 3 or 6 entries");
  }
  return I;
}

Pose pose_of(const json& j, const std::string& loc) {
  Vec3 xyz = Vec3::Zero();
  Vec3 rpy = Vec3::Zero();
  if (j.contains("xyz")) xyz = vec3_of(j["xyz"], loc + ".xyz");
  if (j.contains("rpy")) rpy = vec3_of(j["rpy"], loc + ".rpy");
  return pose_from_xyz_rpy(xyz, rpy);
}

void require(bool ok, const std::string& loc, const std::string& msg) {
  if (!ok) throw ConfigError(loc, msg);
}

}  // namespace

RobotModel parse_robot_model(const std::string& json_text, const std::string& locator) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(locator, std::string("JSON parse error: ") + e.what());
  }

  require(j.contains("version"), locator, "missing 'version'");
  require(j["version"].get<int>() == 1, locator + ".version", "unsupported model schema version");

  RobotModel model;
  model.name = j.value("name", std::string("unnamed"));

  const json& base = j.at("base");
  model.base.inertia = vec3_of(base.at("inertia"), locator + ".base.inertia");
  model.base.damping = vec3_of(base.at("damping"), locator + ".base.damping");
  require((model.base.inertia.array() > 0).all(), locator + ".base.inertia",
          "entries must be > 0");
  require((model.base.damping.array() > 0).all(), locator + ".base.damping",
          "entries must be > 0");

  if (j.contains("mount")) model.mount = pose_of(j["mount"], locator + ".mount");

  const json& arm = j.at("arm");
  const json& joints = arm.at("joints");
  const json& links = arm.at("links");
  require(joints.is_array() && !joints.empty(), locator + ".arm.joints", "need at least 1 joint");
  require(links.size() == joints.size(), locator + ".arm.links",
          "must have one link per joint");

  for (size_t i = 0; i < joints.size(); ++i) {
    const std::string jl = locator + ".arm.joints[" + std::to_string(i) + "]";
    ArmJoint joint;
    joint.origin = pose_of(joints[i], jl);
    joint.axis = joints[i].contains("axis") ? vec3_of(joints[i]["axis"], jl + ".axis")
                                            : Vec3::UnitZ();
    require(joint.axis.norm() > 1e-9, jl + ".axis", "axis must be non-zero");
    joint.axis.normalize();
    model.arm.joints.push_back(joint);

    const std::string ll = locator + ".arm.links[" + std::to_string(i) + "]";
    LinkInertia link;
    link.mass = links[i].at("mass").get<double>();
    require(link.mass > 0.0, ll + ".mass", "mass must be > 0");
    link.com = vec3_of(links[i].at("com"), ll + ".com");
    link.inertia = inertia_of(links[i].at("inertia"), ll + ".inertia");
    require((link.inertia - link.inertia.transpose()).norm() < 1e-12, ll + ".inertia",
            "inertia must be symmetric");
    Eigen::LLT<Mat3> llt(link.inertia);
    require(llt.info() == Eigen::Success, ll + ".inertia", "inertia must be positive definite");
    model.arm.links.push_back(link);
  }

  model.arm.rotor_inertias = VecX::Zero(model.arm.dof());
  if (arm.contains("rotor_inertia")) {
    model.arm.rotor_inertias = vecx_of(arm["rotor_inertia"], locator + ".arm.rotor_inertia");
    require(model.arm.rotor_inertias.size() == model.arm.dof(), locator + ".arm.rotor_inertia",
            "length must equal the arm DoF count");
    require((model.arm.rotor_inertias.array() >= 0).all(), locator + ".arm.rotor_inertia",
            "entries must be >= 0");
  }
  model.arm.q_home = arm.contains("q_home") ? vecx_of(arm["q_home"], locator + ".arm.q_home")
                                            : VecX::Zero(model.arm.dof());
  require(model.arm.q_home.size() == model.arm.dof(), locator + ".arm.q_home",
          "length must equal the arm DoF count");
  if (arm.contains("ee")) model.arm.ee_offset = pose_of(arm["ee"], locator + ".arm.ee");

  return model;
}

RobotModel load_robot_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open robot model file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_robot_model(ss.str(), path);
}

}  // namespace cocarry
