#include "cocarry/sim.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "cocarry/errors.hpp"

namespace cocarry {

namespace {

struct RobotRuntime {
  const RobotSpec* spec{nullptr};
  WholeBodyState state;
  AciState aci;
  int link_index{-1};
  Vec3 tare_bias{Vec3::Zero()};
  bool tared{false};
  Pose ee_pose;
  Vec6 ee_twist{Vec6::Zero()};
};

Vec3 grip_point(const Pose& frame, const Vec3& offset) { return frame * offset; }

Vec3 grip_velocity(const Pose& frame, const Vec3& offset, const Vec3& linear,
                   const Vec3& angular) {
  return linear + angular.cross(frame.orientation * offset);
}

}  // namespace

RunLog run(const ScenarioConfig& config, const RunOptions& options) {
  config.validate();
  const auto t_wall0 = std::chrono::steady_clock::now();

  std::vector<int> order = options.controller_order;
  if (order.empty()) {
    order.resize(config.robots.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  }
  if (order.size() != config.robots.size())
    throw InputError("controller_order must list every robot exactly once");

  RunLog log;
  log.scenario_name = config.name;
  log.seed = config.seed;
  log.dt = config.dt;
  log.segments = config.segments;
  log.config_json = config.config_json;

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // --- initialize robots ---
  std::vector<RobotRuntime> robots(config.robots.size());
  for (size_t i = 0; i < robots.size(); ++i) {
    RobotRuntime& r = robots[i];
    r.spec = &config.robots[i];
    r.state.q = r.spec->initial_q();
    r.state.dq = VecX::Zero(r.spec->model.dof());
    r.ee_pose = forward_kinematics(r.spec->model, r.state.q);
    r.aci = AciState::initialized(r.ee_pose);
    log.robot_names.push_back(r.spec->name);
    log.robot_dofs.push_back(r.spec->model.dof());
  }
  log.damped_ticks.assign(robots.size(), 0);

  // --- resolve links against the initial geometry ---
  ObjectBody object = config.object;
  std::vector<CouplingLink> links = config.links;
  HumanSample human0 = config.trajectory.sample(0.0);
  for (CouplingLink& link : links) {
    const Pose agent_frame =
        link.agent.is_human ? human0.pose : robots[link.agent.robot].ee_pose;
    const Vec3 p_agent = grip_point(agent_frame, link.agent_offset);
    const Vec3 p_att = object.attachment_world(link.attachment);
    if (link.kind == LinkKind::Strap) {
      if (!std::isfinite(link.rest_length)) link.rest_length = (p_att - p_agent).norm();
    } else {
      link.rigid_rest_offset = p_att - p_agent;
      link.rigid_rest_rotation =
          agent_frame.orientation.conjugate() * config.object.pose.orientation;
    }
  }
  for (size_t i = 0; i < robots.size(); ++i) {
    for (size_t l = 0; l < links.size(); ++l)
      if (!links[l].agent.is_human && links[l].agent.robot == static_cast<int>(i))
        robots[i].link_index = static_cast<int>(l);
  }

  const int n_ticks = static_cast<int>(std::lround(config.duration / config.dt));
  log.ticks.reserve(n_ticks + 1);

  try {
    for (int k = 0; k <= n_ticks; ++k) {
      const double t = k * config.dt;

      // 1. world measurement on a frozen snapshot
      const HumanSample human = config.trajectory.sample(t);
      std::vector<LinkForce> forces(links.size());
      for (size_t l = 0; l < links.size(); ++l) {
        const CouplingLink& link = links[l];
        AgentPoint point;
        if (link.agent.is_human) {
          point.position = grip_point(human.pose, link.agent_offset);
          point.velocity = grip_velocity(human.pose, link.agent_offset, human.v_h, Vec3::Zero());
          point.orientation = human.pose.orientation;
        } else {
          const RobotRuntime& r = robots[link.agent.robot];
          point.position = grip_point(r.ee_pose, link.agent_offset);
          point.velocity = grip_velocity(r.ee_pose, link.agent_offset, r.ee_twist.head<3>(),
                                         r.ee_twist.tail<3>());
          point.orientation = r.ee_pose.orientation;
          point.angular_velocity = r.ee_twist.tail<3>();
        }
        forces[l] = link_force(link, point, object);
      }

      // F/T measurement per robot: tare, then optional noise (fixed robot
      // order so draws are independent of controller evaluation order).
      std::vector<Vec3> measured(robots.size());
      for (size_t i = 0; i < robots.size(); ++i) {
        RobotRuntime& r = robots[i];
        const Vec3 raw = forces[r.link_index].on_agent;
        Vec3 f = Vec3::Zero();
        if (t + 1e-12 >= config.force_tare_time) {
          if (!r.tared) {
            r.tare_bias = raw;
            r.tared = true;
          }
          f = raw - r.tare_bias;
        }
        if (config.force_noise_sigma > 0.0)
          f += config.force_noise_sigma * Vec3(gauss(rng), gauss(rng), gauss(rng));
        measured[i] = f;
      }

      // 2.-3. per-robot ACI and whole-body controller (order-independent)
      TickRecord rec;
      rec.t = t;
      rec.robots.resize(robots.size());
      rec.human_pose = human.pose;
      rec.v_h = human.v_h;
      rec.object_pose = object.pose;
      for (size_t l = 0; l < links.size(); ++l) rec.link_forces.push_back(forces[l].on_agent);

      std::vector<VecX> commands(robots.size());
      for (int idx : order) {
        RobotRuntime& r = robots[idx];
        const Reference ref = aci_tick(r.aci, r.spec->aci, measured[idx], human.v_h);
        if (r.spec->controller == ControllerKind::Impedance) {
          const TorqueSolution sol =
              impedance_control_tick(r.spec->model, r.state, ref.x_d, ref.xdot_d,
                                     r.spec->impedance);
          commands[idx] = sol.tau;
          if (sol.damped) ++log.damped_ticks[idx];
          if (r.spec->torque_limit.size() == commands[idx].size())
            commands[idx] =
                commands[idx].cwiseMax(-r.spec->torque_limit).cwiseMin(r.spec->torque_limit);
        } else {
          commands[idx] = ik_control_tick(r.spec->model, r.state, ref.x_d, ref.xdot_d, r.spec->ik)
                              .dq_d;
        }
        if (!commands[idx].allFinite())
          throw SingularityError(r.spec->name + ": non-finite controller command");
      }

      for (size_t i = 0; i < robots.size(); ++i) {
        RobotRuntime& r = robots[i];
        RobotTickRecord& rr = rec.robots[i];
        rr.F_H = measured[i];
        rr.v_adm = r.aci.v_adm;
        rr.alpha = r.aci.alpha;
        rr.v_d = r.aci.v_d;
        rr.x_d = r.aci.x_d;
        rr.ee_pose = r.ee_pose;
        rr.ee_twist = r.ee_twist;
        rr.q = r.state.q;
        rr.dq = r.state.dq;
        rr.cmd = commands[i];
      }
      log.ticks.push_back(std::move(rec));

      if (k == n_ticks) break;

      // 4. robot integration
      for (size_t i = 0; i < robots.size(); ++i) {
        RobotRuntime& r = robots[i];
        const RobotModel& model = r.spec->model;
        if (r.spec->controller == ControllerKind::Impedance) {
          const MatX M = mass_matrix(model, r.state.q);
          const Mat6X J = whole_body_jacobian(model, r.state.q);
          const BiasTerms bias = bias_terms(model, r.state.q, r.state.dq);
          const CouplingLink& link = links[r.link_index];
          Vec6 f_ext = Vec6::Zero();
          f_ext.head<3>() = forces[r.link_index].on_agent;
          f_ext.tail<3>() = forces[r.link_index].torque_on_agent +
                            Vec3(r.ee_pose.orientation * link.agent_offset)
                                .cross(forces[r.link_index].on_agent);
          const VecX tau_ext = J.transpose() * f_ext;
          const VecX ddq =
              M.llt().solve(commands[i] + tau_ext - bias.coriolis - bias.gravity);
          r.state.dq += config.dt * ddq;
          r.state.q += config.dt * r.state.dq;
        } else {
          // First-order tracking of the commanded joint velocities.
          const double a = std::exp(-config.dt / r.spec->velocity_tau);
          r.state.dq = commands[i] + a * (r.state.dq - commands[i]);
          r.state.q += config.dt * r.state.dq;
        }
        if (!r.state.q.allFinite() || !r.state.dq.allFinite())
          throw SingularityError(r.spec->name + ": state diverged");
        r.ee_pose = forward_kinematics(model, r.state.q);
        r.ee_twist = whole_body_jacobian(model, r.state.q) * r.state.dq;
      }

      // 5. object integration with the reactions from the same snapshot
      std::vector<PointForce> reactions;
      reactions.reserve(links.size());
      for (size_t l = 0; l < links.size(); ++l)
        reactions.push_back(
            PointForce{links[l].attachment, -forces[l].on_agent, -forces[l].torque_on_agent});
      step_object(object, reactions, config.gravity, config.dt);
    }
  } catch (const std::exception& e) {
    log.aborted = true;
    log.abort_reason = e.what();
  }

  const auto t_wall1 = std::chrono::steady_clock::now();
  log.wall_seconds = std::chrono::duration<double>(t_wall1 - t_wall0).count();
  const double simulated = static_cast<double>(log.ticks.empty() ? 0 : log.ticks.size() - 1) *
                           config.dt;
  log.real_time_factor = log.wall_seconds > 0 ? simulated / log.wall_seconds : 0.0;
  return log;
}

std::vector<RunResult> batch(const std::vector<ScenarioConfig>& configs, int parallelism) {
  std::vector<RunResult> results(configs.size());
  if (parallelism < 1) parallelism = 1;

  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= configs.size()) return;
      try {
        results[i].log = run(configs[i]);
        results[i].ok = !results[i].log.aborted;
        if (results[i].log.aborted) results[i].error = results[i].log.abort_reason;
      } catch (const std::exception& e) {
        results[i].ok = false;
        results[i].error = e.what();
      }
    }
  };

  if (parallelism == 1 || configs.size() <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    const int n = std::min<int>(parallelism, static_cast<int>(configs.size()));
    pool.reserve(n);
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return results;
}

// ---------------------------------------------------------------------------
// RunLog serialization
// ---------------------------------------------------------------------------

namespace {

void append_num(std::string& out, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  out += buf;
}

void append_vec(std::string& out, const Eigen::Ref<const VecX>& v) {
  for (int i = 0; i < v.size(); ++i) {
    out += ',';
    append_num(out, v[i]);
  }
}

void append_pose(std::string& out, const Pose& p) {
  for (int i = 0; i < 3; ++i) {
    out += ',';
    append_num(out, p.position[i]);
  }
  out += ',';
  append_num(out, p.orientation.w());
  out += ',';
  append_num(out, p.orientation.x());
  out += ',';
  append_num(out, p.orientation.y());
  out += ',';
  append_num(out, p.orientation.z());
}

}  // namespace

std::string RunLog::to_csv() const {
  std::string out;
  out.reserve(ticks.size() * 1024 + 4096);

  const auto vec_header = [&](const std::string& prefix, const char* const* names, int n) {
    for (int i = 0; i < n; ++i) out += "," + prefix + names[i];
  };
  static const char* kXyz[] = {"x", "y", "z"};
  static const char* kPose[] = {"px", "py", "pz", "qw", "qx", "qy", "qz"};
  static const char* kTwist[] = {"vx", "vy", "vz", "wx", "wy", "wz"};

  out += "t";
  for (size_t r = 0; r < robot_names.size(); ++r) {
    const std::string p = "r" + std::to_string(r + 1) + "_";
    vec_header(p + "FH_", kXyz, 3);
    vec_header(p + "vadm_", kXyz, 3);
    out += "," + p + "alpha";
    vec_header(p + "vd_", kXyz, 3);
    vec_header(p + "xd_", kPose, 7);
    vec_header(p + "ee_", kPose, 7);
    vec_header(p + "ee_", kTwist, 6);
    for (int i = 0; i < robot_dofs[r]; ++i) out += "," + p + "q_" + std::to_string(i);
    for (int i = 0; i < robot_dofs[r]; ++i) out += "," + p + "dq_" + std::to_string(i);
    for (int i = 0; i < robot_dofs[r]; ++i) out += "," + p + "cmd_" + std::to_string(i);
  }
  vec_header("h_", kPose, 7);
  vec_header("h_v", kXyz, 3);
  vec_header("obj_", kPose, 7);
  const size_t n_links = ticks.empty() ? 0 : ticks.front().link_forces.size();
  for (size_t l = 0; l < n_links; ++l)
    vec_header("link" + std::to_string(l) + "_F", kXyz, 3);
  out += '\n';

  for (const TickRecord& tick : ticks) {
    append_num(out, tick.t);
    for (const RobotTickRecord& rr : tick.robots) {
      append_vec(out, rr.F_H);
      append_vec(out, rr.v_adm);
      out += ',';
      append_num(out, rr.alpha);
      append_vec(out, rr.v_d);
      append_pose(out, rr.x_d);
      append_pose(out, rr.ee_pose);
      append_vec(out, rr.ee_twist);
      append_vec(out, rr.q);
      append_vec(out, rr.dq);
      append_vec(out, rr.cmd);
    }
    append_pose(out, tick.human_pose);
    append_vec(out, tick.v_h);
    append_pose(out, tick.object_pose);
    for (const Vec3& f : tick.link_forces) append_vec(out, f);
    out += '\n';
  }
  return out;
}

std::uint64_t RunLog::csv_hash() const {
  const std::string csv = to_csv();
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (unsigned char c : csv) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

void RunLog::write_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError(path, "cannot write log file");
  out << to_csv();
}

std::string RunLog::sidecar_json() const {
  nlohmann::json j;
  j["version"] = 1;
  j["scenario"] = scenario_name;
  j["seed"] = seed;
  j["dt"] = dt;
  j["ticks"] = ticks.size();
  j["aborted"] = aborted;
  if (aborted) j["abort_reason"] = abort_reason;
  j["wall_seconds"] = wall_seconds;
  j["real_time_factor"] = real_time_factor;
  {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(csv_hash()));
    j["csv_fnv1a"] = buf;
  }
  for (size_t r = 0; r < robot_names.size(); ++r) {
    nlohmann::json rj;
    rj["name"] = robot_names[r];
    rj["dof"] = robot_dofs[r];
    double alpha_sum = 0.0;
    double force_sum = 0.0;
    for (const TickRecord& tick : ticks) {
      alpha_sum += tick.robots[r].alpha;
      force_sum += tick.robots[r].F_H.norm();
    }
    const double n = ticks.empty() ? 1.0 : static_cast<double>(ticks.size());
    rj["mean_alpha"] = alpha_sum / n;
    rj["mean_force"] = force_sum / n;
    if (r < damped_ticks.size()) rj["damped_ticks"] = damped_ticks[r];
    j["robots"].push_back(rj);
  }
  for (const TrajectorySegment& s : segments) {
    j["segments"].push_back({{"label", s.label},
                             {"t_start", s.t_start},
                             {"t_end", s.t_end},
                             {"axis", std::string(1, "XYZ"[s.axis])}});
  }
  if (!config_json.empty()) j["config"] = nlohmann::json::parse(config_json);
  return j.dump(2);
}

void RunLog::write_sidecar(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError(path, "cannot write sidecar file");
  out << sidecar_json();
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  return out;
}

}  // namespace

RunLog load_run_log(const std::string& csv_path) {
  const std::string suffix = "_log.csv";
  if (csv_path.size() < suffix.size() ||
      csv_path.compare(csv_path.size() - suffix.size(), suffix.size(), suffix) != 0)
    throw ConfigError(csv_path, "expected a <name>_log.csv file");
  const std::string sidecar_path =
      csv_path.substr(0, csv_path.size() - suffix.size()) + "_run.json";

  std::ifstream side(sidecar_path);
  if (!side) throw ConfigError(sidecar_path, "missing run sidecar");
  nlohmann::json meta;
  try {
    side >> meta;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(sidecar_path, std::string("JSON parse error: ") + e.what());
  }

  RunLog log;
  log.scenario_name = meta.value("scenario", std::string("run"));
  log.seed = meta.value("seed", 0ull);
  log.dt = meta.value("dt", 1e-3);
  if (meta.contains("robots")) {
    for (const auto& rj : meta["robots"]) {
      log.robot_names.push_back(rj.value("name", "robot"));
      log.robot_dofs.push_back(rj.value("dof", 0));
    }
  }
  if (meta.contains("segments")) {
    for (const auto& sj : meta["segments"]) {
      TrajectorySegment seg;
      seg.label = sj.value("label", "custom");
      seg.t_start = sj.value("t_start", 0.0);
      seg.t_end = sj.value("t_end", 0.0);
      const std::string axis = sj.value("axis", "X");
      seg.axis = axis == "Y" ? 1 : (axis == "Z" ? 2 : 0);
      log.segments.push_back(seg);
    }
  }

  std::ifstream in(csv_path);
  if (!in) throw ConfigError(csv_path, "cannot open log file");
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(csv_path, "empty log file");
  const size_t n_cols = split_csv_line(line).size();

  const size_t n_robots = log.robot_names.size();
  size_t expected = 1;  // t
  for (size_t r = 0; r < n_robots; ++r) expected += 3 + 3 + 1 + 3 + 7 + 7 + 6 + 3 * log.robot_dofs[r];
  expected += 7 + 3 + 7;
  if (n_cols < expected) throw ConfigError(csv_path, "log header does not match the sidecar");
  const size_t n_links = (n_cols - expected) / 3;

  const auto read_vec3 = [](const std::vector<std::string>& f, size_t& i) {
    Vec3 v(std::stod(f[i]), std::stod(f[i + 1]), std::stod(f[i + 2]));
    i += 3;
    return v;
  };
  const auto read_pose = [](const std::vector<std::string>& f, size_t& i) {
    Pose p;
    p.position = Vec3(std::stod(f[i]), std::stod(f[i + 1]), std::stod(f[i + 2]));
    p.orientation = Quat(std::stod(f[i + 3]), std::stod(f[i + 4]), std::stod(f[i + 5]),
                         std::stod(f[i + 6]));
    i += 7;
    return p;
  };

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != n_cols) throw ConfigError(csv_path, "ragged log row");
    size_t i = 0;
    TickRecord rec;
    rec.t = std::stod(fields[i++]);
    for (size_t r = 0; r < n_robots; ++r) {
      RobotTickRecord rr;
      rr.F_H = read_vec3(fields, i);
      rr.v_adm = read_vec3(fields, i);
      rr.alpha = std::stod(fields[i++]);
      rr.v_d = read_vec3(fields, i);
      rr.x_d = read_pose(fields, i);
      rr.ee_pose = read_pose(fields, i);
      for (int j = 0; j < 6; ++j) rr.ee_twist[j] = std::stod(fields[i++]);
      const int n = log.robot_dofs[r];
      rr.q.resize(n);
      rr.dq.resize(n);
      rr.cmd.resize(n);
      for (int j = 0; j < n; ++j) rr.q[j] = std::stod(fields[i++]);
      for (int j = 0; j < n; ++j) rr.dq[j] = std::stod(fields[i++]);
      for (int j = 0; j < n; ++j) rr.cmd[j] = std::stod(fields[i++]);
      rec.robots.push_back(std::move(rr));
    }
    rec.human_pose = read_pose(fields, i);
    rec.v_h = read_vec3(fields, i);
    rec.object_pose = read_pose(fields, i);
    for (size_t l = 0; l < n_links; ++l) rec.link_forces.push_back(read_vec3(fields, i));
    log.ticks.push_back(std::move(rec));
  }
  return log;
}

}  // namespace cocarry
