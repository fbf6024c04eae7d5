#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cocarry/errors.hpp"
#include "cocarry/sim.hpp"

namespace cocarry {

namespace {

using nlohmann::json;

void require(bool ok, const std::string& loc, const std::string& msg) {
  if (!ok) throw ConfigError(loc, msg);
}

Vec3 vec3_of(const json& j, const std::string& loc) {
  require(j.is_array() && j.size() == 3, loc, "expected an array of 3 numbers");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

Vec6 vec6_of(const json& j, const std::string& loc) {
  require(j.is_array() && j.size() == 6, loc, "expected an array of 6 numbers");
  Vec6 v;
  for (int i = 0; i < 6; ++i) v[i] = j[i].get<double>();
  return v;
}

VecX vecx_of(const json& j, const std::string& loc) {
  require(j.is_array(), loc, "expected an array of numbers");
  VecX v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v[static_cast<int>(i)] = j[i].get<double>();
  return v;
}

// Scalar -> uniform diagonal, array -> per-entry diagonal.
VecX diag_of(const json& j, int n, const std::string& loc) {
  if (j.is_number()) return VecX::Constant(n, j.get<double>());
  VecX v = vecx_of(j, loc);
  require(v.size() == n, loc, "expected " + std::to_string(n) + " entries");
  return v;
}

AciParams parse_aci(const json& j, double dt, const std::string& loc) {
  AciParams p;
  p.dt = dt;
  if (j.contains("mass")) p.adm.mass = vec3_of(j["mass"], loc + ".mass");
  if (j.contains("damping")) p.adm.damping = vec3_of(j["damping"], loc + ".damping");
  if (j.contains("window")) p.window_length = j["window"].get<double>();
  if (j.contains("epsilon")) p.epsilon = j["epsilon"].get<double>();
  if (j.contains("vh_filter_tau")) p.vh_filter_tau = j["vh_filter_tau"].get<double>();
  try {
    p.validate();
  } catch (const InputError& e) {
    throw ConfigError(loc, e.what());
  }
  return p;
}

ImpedanceParams parse_impedance(const json& j, const RobotModel& model, const VecX& q_init,
                                const std::string& loc) {
  const int n = model.dof();
  Vec6 K_d;
  K_d << 200, 200, 200, 30, 30, 30;
  double xi = 0.7;
  VecX K_0 = VecX::Constant(n, 50.0);
  VecX H = VecX::Ones(n);
  if (j.contains("K_d")) K_d = vec6_of(j["K_d"], loc + ".K_d");
  if (j.contains("xi")) xi = j["xi"].get<double>();
  if (j.contains("K_0")) K_0 = diag_of(j["K_0"], n, loc + ".K_0");
  if (j.contains("H")) H = diag_of(j["H"], n, loc + ".H");
  require((K_d.array() >= 0).all(), loc + ".K_d", "entries must be >= 0");
  require((K_0.array() >= 0).all(), loc + ".K_0", "entries must be >= 0");
  require(xi > 0 && xi <= 1, loc + ".xi", "xi must be in (0, 1]");
  ImpedanceParams p = ImpedanceParams::with_damping_ratio(K_d, xi, K_0, H, q_init);
  if (j.contains("D_d")) p.D_d = vec6_of(j["D_d"], loc + ".D_d");
  return p;
}

IkParams parse_ik(const json& j, const RobotModel& model, const VecX& q_init,
                  const std::string& loc) {
  const int n = model.dof();
  const int nb = model.base_dof();
  IkParams p;
  p.K << 0.1, 0.1, 0.1, 0.01, 0.01, 0.01;
  p.W_1 << 1000, 1000, 1000, 500, 500, 500;
  p.W_2 = VecX::Constant(n, 0.5);
  p.W_2.head(nb).setConstant(10.0);
  p.W_3 = VecX::Ones(n);
  p.W_3.head(nb).setZero();
  p.q_0 = q_init;
  if (j.contains("K")) p.K = vec6_of(j["K"], loc + ".K");
  if (j.contains("W_1")) p.W_1 = vec6_of(j["W_1"], loc + ".W_1");
  if (j.contains("W_2")) p.W_2 = diag_of(j["W_2"], n, loc + ".W_2");
  if (j.contains("W_3")) p.W_3 = diag_of(j["W_3"], n, loc + ".W_3");
  if (j.contains("w_threshold")) p.schedule.w_threshold = j["w_threshold"].get<double>();
  if (j.contains("k_max")) p.schedule.k_max = j["k_max"].get<double>();
  try {
    p.validate();
  } catch (const InputError& e) {
    throw ConfigError(loc, e.what());
  }
  return p;
}

AgentId parse_agent(const json& j, const std::vector<RobotSpec>& robots,
                    const std::string& loc) {
  require(j.is_string(), loc, "expected \"human\", \"robot:<i>\" or a robot name");
  const std::string s = j.get<std::string>();
  if (s == "human") return AgentId::human();
  if (s.rfind("robot:", 0) == 0) {
    const int idx = std::stoi(s.substr(6));
    require(idx >= 0 && idx < static_cast<int>(robots.size()), loc,
            "robot index out of range: " + s);
    return AgentId::robot_id(idx);
  }
  for (size_t i = 0; i < robots.size(); ++i)
    if (robots[i].name == s) return AgentId::robot_id(static_cast<int>(i));
  throw ConfigError(loc, "unknown agent '" + s + "'");
}

int axis_of(const json& j, const std::string& loc) {
  const std::string s = j.get<std::string>();
  if (s == "X" || s == "x") return 0;
  if (s == "Y" || s == "y") return 1;
  if (s == "Z" || s == "z") return 2;
  throw ConfigError(loc, "axis must be X, Y or Z");
}

}  // namespace

VecX RobotSpec::initial_q() const {
  VecX q(model.dof());
  q.head<3>() = base_pose;
  q.tail(model.arm_dof()) = arm_q;
  return q;
}

void ScenarioConfig::validate() const {
  require(dt > 0 && dt <= 0.01, name + ".dt", "dt must be in (0, 0.01]");
  require(duration > 0, name + ".duration", "duration must be > 0");
  require(!robots.empty(), name + ".robots", "at least one robot is required");
  require(force_noise_sigma >= 0, name + ".force_noise_sigma", "sigma must be >= 0");
  require(force_tare_time >= 0 && force_tare_time < duration, name + ".force_tare_time",
          "tare time must be in [0, duration)");
  require(object.mass > 0, name + ".object.mass", "mass must be > 0");
  Eigen::LLT<Mat3> llt(object.inertia);
  require((object.inertia - object.inertia.transpose()).norm() < 1e-12 &&
              llt.info() == Eigen::Success,
          name + ".object.inertia", "inertia must be symmetric positive definite");

  std::vector<int> link_count(robots.size(), 0);
  for (size_t i = 0; i < links.size(); ++i) {
    const std::string loc = name + ".links[" + std::to_string(i) + "]";
    const CouplingLink& l = links[i];
    require(l.stiffness > 0, loc + ".stiffness", "stiffness must be > 0");
    require(l.damping >= 0, loc + ".damping", "damping must be >= 0");
    require(l.rotational_stiffness >= 0 && l.rotational_damping >= 0,
            loc + ".rotational_stiffness", "rotational grasp terms must be >= 0");
    require(l.attachment >= 0 && l.attachment < static_cast<int>(object.attachments.size()),
            loc + ".attachment", "attachment index out of range");
    if (l.kind == LinkKind::Strap && std::isfinite(l.rest_length))
      require(l.rest_length > 0, loc + ".rest_length", "rest length must be > 0 or \"auto\"");
    if (!l.agent.is_human) ++link_count.at(l.agent.robot);
  }
  for (size_t i = 0; i < robots.size(); ++i)
    require(link_count[i] == 1, name + ".robots[" + std::to_string(i) + "]",
            "each robot needs exactly one coupling link");

  for (size_t i = 0; i < segments.size(); ++i) {
    const std::string loc = name + ".segments[" + std::to_string(i) + "]";
    require(segments[i].t_start < segments[i].t_end, loc, "segment start must precede end");
    require(segments[i].t_start >= 0 && segments[i].t_end <= duration + 1e-9, loc,
            "segment must lie within the run span");
  }
}

ScenarioConfig parse_scenario(const std::string& json_text, const std::string& locator,
                              const std::string& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(locator, std::string("JSON parse error: ") + e.what());
  }

  require(j.contains("version"), locator, "missing 'version'");
  require(j["version"].get<int>() == 1, locator + ".version",
          "unsupported scenario schema version");

  ScenarioConfig cfg;
  cfg.name = j.value("name", std::string("scenario"));
  cfg.dt = j.value("dt", 1e-3);
  cfg.duration = j.value("duration", 10.0);
  cfg.seed = j.value("seed", 0ull);
  if (j.contains("gravity")) cfg.gravity = Vec3(0, 0, j["gravity"].get<double>());
  cfg.force_noise_sigma = j.value("force_noise_sigma", 0.0);
  cfg.force_tare_time = j.value("force_tare_time", 0.0);
  cfg.output_hint = j.value("output", std::string());

  const auto resolve = [&](const std::string& rel) {
    std::filesystem::path p(rel);
    if (p.is_absolute()) return p.string();
    return (std::filesystem::path(base_dir) / p).string();
  };

  require(j.contains("robots") && j["robots"].is_array() && !j["robots"].empty(),
          locator + ".robots", "at least one robot is required");
  for (size_t i = 0; i < j["robots"].size(); ++i) {
    const json& rj = j["robots"][i];
    const std::string loc = locator + ".robots[" + std::to_string(i) + "]";
    RobotSpec spec;
    spec.name = rj.value("name", "robot" + std::to_string(i));
    require(rj.contains("model"), loc, "missing 'model' path");
    spec.model_path = resolve(rj["model"].get<std::string>());
    spec.model = load_robot_model(spec.model_path);

    const std::string kind = rj.value("controller", std::string("impedance"));
    if (kind == "impedance") {
      spec.controller = ControllerKind::Impedance;
    } else if (kind == "ik") {
      spec.controller = ControllerKind::Ik;
    } else {
      throw ConfigError(loc + ".controller", "must be 'impedance' or 'ik'");
    }

    if (rj.contains("base_pose")) spec.base_pose = vec3_of(rj["base_pose"], loc + ".base_pose");
    spec.arm_q = rj.contains("arm_q") ? vecx_of(rj["arm_q"], loc + ".arm_q")
                                      : spec.model.arm.q_home;
    require(spec.arm_q.size() == spec.model.arm_dof(), loc + ".arm_q",
            "length must equal the arm DoF count");

    const VecX q_init = spec.initial_q();
    spec.aci = parse_aci(rj.value("aci", json::object()), cfg.dt, loc + ".aci");
    spec.impedance =
        parse_impedance(rj.value("impedance", json::object()), spec.model, q_init, loc + ".impedance");
    spec.ik = parse_ik(rj.value("ik", json::object()), spec.model, q_init, loc + ".ik");
    spec.velocity_tau = rj.value("velocity_tau", 0.02);
    require(spec.velocity_tau > 0, loc + ".velocity_tau", "must be > 0");
    if (rj.contains("torque_limit")) {
      spec.torque_limit = diag_of(rj["torque_limit"], spec.model.dof(), loc + ".torque_limit");
      require((spec.torque_limit.array() > 0).all(), loc + ".torque_limit",
              "limits must be > 0");
    }
    cfg.robots.push_back(std::move(spec));
  }

  require(j.contains("object"), locator, "missing 'object'");
  {
    const json& oj = j["object"];
    const std::string loc = locator + ".object";
    cfg.object.mass = oj.value("mass", 1.0);
    if (oj.contains("inertia")) {
      const VecX d = vecx_of(oj["inertia"], loc + ".inertia");
      require(d.size() == 3, loc + ".inertia", "expected diagonal [ixx,iyy,izz]");
      cfg.object.inertia = d.asDiagonal();
    }
    if (oj.contains("position")) cfg.object.pose.position = vec3_of(oj["position"], loc + ".position");
    require(oj.contains("attachments") && oj["attachments"].is_array(), loc,
            "missing 'attachments'");
    for (size_t a = 0; a < oj["attachments"].size(); ++a)
      cfg.object.attachments.push_back(
          vec3_of(oj["attachments"][a], loc + ".attachments[" + std::to_string(a) + "]"));
  }

  require(j.contains("links") && j["links"].is_array(), locator, "missing 'links'");
  for (size_t i = 0; i < j["links"].size(); ++i) {
    const json& lj = j["links"][i];
    const std::string loc = locator + ".links[" + std::to_string(i) + "]";
    CouplingLink link;
    const std::string kind = lj.value("kind", std::string("strap"));
    if (kind == "strap") {
      link.kind = LinkKind::Strap;
      link.stiffness = 2000.0;
      link.damping = 50.0;
    } else if (kind == "rigid") {
      link.kind = LinkKind::Rigid;
      link.stiffness = 1e5;
      link.damping = 1000.0;
    } else {
      throw ConfigError(loc + ".kind", "must be 'strap' or 'rigid'");
    }
    require(lj.contains("agent"), loc, "missing 'agent'");
    link.agent = parse_agent(lj["agent"], cfg.robots, loc + ".agent");
    link.attachment = lj.value("attachment", 0);
    if (lj.contains("agent_offset"))
      link.agent_offset = vec3_of(lj["agent_offset"], loc + ".agent_offset");
    if (lj.contains("stiffness")) link.stiffness = lj["stiffness"].get<double>();
    if (lj.contains("damping")) link.damping = lj["damping"].get<double>();
    if (lj.contains("rotational_stiffness"))
      link.rotational_stiffness = lj["rotational_stiffness"].get<double>();
    if (lj.contains("rotational_damping"))
      link.rotational_damping = lj["rotational_damping"].get<double>();
    link.rest_length = std::numeric_limits<double>::quiet_NaN();  // auto
    if (lj.contains("rest_length") && lj["rest_length"].is_number())
      link.rest_length = lj["rest_length"].get<double>();
    cfg.links.push_back(link);
  }

  require(j.contains("human") && j["human"].contains("trajectory"), locator,
          "missing 'human.trajectory'");
  {
    const json& tj = j["human"]["trajectory"];
    const std::string loc = locator + ".human.trajectory";
    if (tj.contains("file")) {
      cfg.trajectory = HumanTrajectory::load_csv(resolve(tj["file"].get<std::string>()));
    } else if (tj.contains("builtin")) {
      const std::string which = tj["builtin"].get<std::string>();
      require(which == "paper_path", loc + ".builtin", "unknown builtin '" + which + "'");
      Vec3 start = Vec3::Zero();
      if (tj.contains("start")) start = vec3_of(tj["start"], loc + ".start");
      cfg.trajectory = HumanTrajectory::paper_path(start);
    } else {
      throw ConfigError(loc, "needs either 'file' or 'builtin'");
    }
  }

  if (j.contains("segments")) {
    for (size_t i = 0; i < j["segments"].size(); ++i) {
      const json& sj = j["segments"][i];
      const std::string loc = locator + ".segments[" + std::to_string(i) + "]";
      TrajectorySegment seg;
      seg.label = sj.value("label", "custom");
      require(sj.contains("t_start") && sj.contains("t_end"), loc, "needs t_start and t_end");
      seg.t_start = sj["t_start"].get<double>();
      seg.t_end = sj["t_end"].get<double>();
      seg.axis = sj.contains("axis") ? axis_of(sj["axis"], loc + ".axis") : 0;
      cfg.segments.push_back(seg);
    }
  } else {
    // Default to the trajectory's own segments, dropping any the run is too
    // short to cover.
    for (const TrajectorySegment& seg : cfg.trajectory.segments())
      if (seg.t_end <= cfg.duration + 1e-9) cfg.segments.push_back(seg);
  }

  cfg.config_json = j.dump(2);
  cfg.validate();
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open scenario file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path, std::filesystem::path(path).parent_path().string());
}

ScenarioConfig baseline_mode(ScenarioConfig config) {
  for (RobotSpec& r : config.robots) r.aci.force_alpha_zero = true;
  return config;
}

}  // namespace cocarry
