#include "cocarry/world.hpp"

#include <algorithm>
#include <array>
#include <random>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cocarry/errors.hpp"

namespace cocarry {

LinkForce link_force(const CouplingLink& link, const AgentPoint& agent,
                     const ObjectBody& object) {
  const Vec3 p_obj = object.attachment_world(link.attachment);
  const Vec3 v_obj = object.attachment_velocity(link.attachment);
  LinkForce out;

  if (link.kind == LinkKind::Rigid) {
    const Vec3 d = p_obj - agent.position - link.rigid_rest_offset;
    const Vec3 dv = v_obj - agent.velocity;
    out.on_agent = link.stiffness * d + link.damping * dv;
    if (link.rotational_stiffness > 0.0 || link.rotational_damping > 0.0) {
      // Grasp moment: weld spring on the relative orientation captured at start.
      const Quat obj_des = agent.orientation * link.rigid_rest_rotation;
      const Vec3 rot_err = quat_log(object.pose.orientation * obj_des.conjugate());
      out.torque_on_agent =
          link.rotational_stiffness * rot_err +
          link.rotational_damping * (object.angular_velocity - agent.angular_velocity);
    }
    out.taut = true;
    return out;
  }

  const Vec3 d = p_obj - agent.position;
  const double dist = d.norm();
  if (dist < 1e-9) {
    out.degenerate = true;
    return out;
  }
  const double elongation = dist - link.rest_length;
  if (elongation <= 0.0) return out;  // slack strap

  const Vec3 u = d / dist;
  const double rate = u.dot(v_obj - agent.velocity);
  const double tension = std::max(link.stiffness * elongation + link.damping * rate, 0.0);
  out.on_agent = tension * u;
  out.taut = tension > 0.0;
  return out;
}

Vec3 measure_end_effector_force(const CouplingLink& link, const AgentPoint& ee_point,
                                const ObjectBody& object, double noise_sigma,
                                std::mt19937_64* rng) {
  // The simulated tool is massless, so the gravity-compensated reading is the
  // link force itself.
  Vec3 f = link_force(link, ee_point, object).on_agent;
  if (noise_sigma > 0.0) {
    if (rng == nullptr) throw InputError("force noise requested without a generator");
    std::normal_distribution<double> gauss(0.0, noise_sigma);
    f += Vec3(gauss(*rng), gauss(*rng), gauss(*rng));
  }
  return f;
}

void step_object(ObjectBody& object, const std::vector<PointForce>& forces,
                 const Vec3& gravity, double dt) {
  if (dt <= 0.0) throw InputError("step_object: dt must be > 0");

  Vec3 f_total = object.mass * gravity;
  Vec3 torque = Vec3::Zero();
  for (const PointForce& pf : forces) {
    f_total += pf.force;
    torque += (object.pose.orientation * object.attachments.at(pf.attachment)).cross(pf.force);
    torque += pf.torque;
  }

  const Mat3 R = object.pose.orientation.toRotationMatrix();
  const Mat3 I_world = R * object.inertia * R.transpose();

  object.linear_velocity += dt * f_total / object.mass;
  object.angular_velocity +=
      dt * I_world.ldlt().solve(torque -
                                object.angular_velocity.cross(I_world * object.angular_velocity));

  object.pose.position += dt * object.linear_velocity;
  object.pose.orientation = integrate_orientation(object.pose.orientation,
                                                  object.angular_velocity, dt);
}

HumanTrajectory HumanTrajectory::from_knots(std::vector<Knot> knots,
                                            std::vector<TrajectorySegment> segments) {
  HumanTrajectory traj;
  traj.knots_ = std::move(knots);
  traj.segments_ = std::move(segments);
  traj.validate();
  return traj;
}

void HumanTrajectory::validate() const {
  if (knots_.empty()) throw InputError("trajectory has no samples");
  for (size_t i = 1; i < knots_.size(); ++i) {
    if (knots_[i].t <= knots_[i - 1].t)
      throw InputError("trajectory timestamps must be strictly increasing (row " +
                       std::to_string(i) + ")");
  }
  if (knots_.size() < 2) return;

  // Stored velocities must agree with the position derivative to 5% RMS.
  double err2 = 0.0;
  double ref2 = 0.0;
  for (size_t i = 1; i < knots_.size(); ++i) {
    const double h = knots_[i].t - knots_[i - 1].t;
    const Vec3 fd = (knots_[i].pose.position - knots_[i - 1].pose.position) / h;
    const Vec3 mid = 0.5 * (knots_[i].velocity + knots_[i - 1].velocity);
    err2 += (fd - mid).squaredNorm();
    ref2 += fd.squaredNorm();
  }
  const double rms_err = std::sqrt(err2 / static_cast<double>(knots_.size() - 1));
  const double rms_ref = std::sqrt(ref2 / static_cast<double>(knots_.size() - 1));
  if (rms_err > 0.05 * rms_ref + 1e-9)
    throw InputError("trajectory velocities inconsistent with positions (" +
                     std::to_string(rms_err) + " RMS vs " + std::to_string(rms_ref) + ")");
}

HumanSample HumanTrajectory::sample(double t) const {
  HumanSample out;
  if (t <= knots_.front().t) {
    out.pose = knots_.front().pose;
    out.clamped = t < knots_.front().t;
    out.v_h = out.clamped ? Vec3::Zero() : knots_.front().velocity;
    return out;
  }
  if (t >= knots_.back().t) {
    out.pose = knots_.back().pose;
    out.clamped = t > knots_.back().t;
    out.v_h = out.clamped ? Vec3::Zero() : knots_.back().velocity;
    return out;
  }

  const auto it = std::upper_bound(
      knots_.begin(), knots_.end(), t,
      [](double value, const Knot& k) { return value < k.t; });
  const Knot& k1 = *it;
  const Knot& k0 = *(it - 1);
  const double h = k1.t - k0.t;
  const double u = (t - k0.t) / h;

  const double u2 = u * u;
  const double u3 = u2 * u;
  const double h00 = 2 * u3 - 3 * u2 + 1;
  const double h10 = u3 - 2 * u2 + u;
  const double h01 = -2 * u3 + 3 * u2;
  const double h11 = u3 - u2;
  out.pose.position = h00 * k0.pose.position + (h10 * h) * k0.velocity +
                      h01 * k1.pose.position + (h11 * h) * k1.velocity;
  const double d00 = 6 * u2 - 6 * u;
  const double d10 = 3 * u2 - 4 * u + 1;
  const double d01 = -6 * u2 + 6 * u;
  const double d11 = 3 * u2 - 2 * u;
  out.v_h = (d00 / h) * k0.pose.position + d10 * k0.velocity +
            (d01 / h) * k1.pose.position + d11 * k1.velocity;
  out.pose.orientation = k0.pose.orientation.slerp(u, k1.pose.orientation);
  return out;
}

namespace {

// Minimum-jerk blend: s goes 0 -> 1 with zero boundary velocity/acceleration.
double min_jerk(double u) { return u * u * u * (10.0 - 15.0 * u + 6.0 * u * u); }
double min_jerk_rate(double u) { return 30.0 * u * u * (1.0 - u) * (1.0 - u); }

struct Move {
  double t0, t1;
  Vec3 delta;
};

}  // namespace

HumanTrajectory HumanTrajectory::paper_path(const Vec3& start) {
  // hold | backwards 1.2 m | hold | sideways 0.8 m | hold | down-up 0.2 m | hold
  const std::vector<Move> moves = {
      {4.0, 15.0, Vec3(1.2, 0.0, 0.0)},
      {18.0, 28.0, Vec3(0.0, 0.8, 0.0)},
      {31.0, 35.5, Vec3(0.0, 0.0, -0.2)},
      {35.5, 40.0, Vec3(0.0, 0.0, 0.2)},
  };
  const double duration = 60.0;
  const double dt = 0.02;

  std::vector<Knot> knots;
  const int n = static_cast<int>(std::lround(duration / dt));
  knots.reserve(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double t = i * dt;
    Vec3 p = start;
    Vec3 v = Vec3::Zero();
    for (const Move& m : moves) {
      if (t >= m.t1) {
        p += m.delta;
      } else if (t > m.t0) {
        const double u = (t - m.t0) / (m.t1 - m.t0);
        p += m.delta * min_jerk(u);
        v += m.delta * (min_jerk_rate(u) / (m.t1 - m.t0));
      }
    }
    knots.push_back(Knot{t, Pose(p, Quat::Identity()), v});
  }

  std::vector<TrajectorySegment> segments = {
      {"backwards", 4.0, 15.0, 0},
      {"sideways", 18.0, 28.0, 1},
      {"down-up", 31.0, 40.0, 2},
  };
  return from_knots(std::move(knots), std::move(segments));
}

HumanTrajectory HumanTrajectory::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open trajectory file");

  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path, "empty trajectory file");
  auto strip = [](std::string s) {
    s.erase(std::remove_if(s.begin(), s.end(), [](char c) { return std::isspace(c); }), s.end());
    return s;
  };
  if (strip(line) != "t,px,py,pz,qw,qx,qy,qz,vx,vy,vz")
    throw ConfigError(path, "expected header t,px,py,pz,qw,qx,qy,qz,vx,vy,vz");

  std::vector<Knot> knots;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (strip(line).empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::array<double, 11> vals{};
    for (int i = 0; i < 11; ++i) {
      if (!std::getline(ss, field, ','))
        throw ConfigError(path + ":" + std::to_string(row), "expected 11 comma-separated values");
      vals[i] = std::stod(field);
    }
    Knot k;
    k.t = vals[0];
    k.pose.position = Vec3(vals[1], vals[2], vals[3]);
    k.pose.orientation = Quat(vals[4], vals[5], vals[6], vals[7]).normalized();
    k.velocity = Vec3(vals[8], vals[9], vals[10]);
    knots.push_back(k);
  }
  try {
    return from_knots(std::move(knots));
  } catch (const InputError& e) {
    throw ConfigError(path, e.what());
  }
}

void HumanTrajectory::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError(path, "cannot write trajectory file");
  out << "t,px,py,pz,qw,qx,qy,qz,vx,vy,vz\n";
  char buf[512];
  for (const Knot& k : knots_) {
    std::snprintf(buf, sizeof(buf),
                  "%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n", k.t,
                  k.pose.position.x(), k.pose.position.y(), k.pose.position.z(),
                  k.pose.orientation.w(), k.pose.orientation.x(), k.pose.orientation.y(),
                  k.pose.orientation.z(), k.velocity.x(), k.velocity.y(), k.velocity.z());
    out << buf;
  }
}

}  // namespace cocarry
