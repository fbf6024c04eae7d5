#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cocarry/aci.hpp"
#include "cocarry/model.hpp"
#include "cocarry/wbc_ik.hpp"
#include "cocarry/wbc_impedance.hpp"
#include "cocarry/world.hpp"

namespace cocarry {

enum class ControllerKind { Impedance, Ik };

struct RobotSpec {
  std::string name;
  std::string model_path;
  RobotModel model;
  ControllerKind controller{ControllerKind::Impedance};
  ImpedanceParams impedance;
  IkParams ik;
  AciParams aci;
  Vec3 base_pose{Vec3::Zero()};  // x, y, yaw
  VecX arm_q;
  double velocity_tau{0.02};  // s, first-order joint-velocity tracking (ik robots)
  VecX torque_limit;  // optional per-joint clamp on tau_c (impedance robots); empty = none

  VecX initial_q() const;
};

struct ScenarioConfig {
  std::string name{"scenario"};
  double dt{1e-3};
  double duration{10.0};
  std::uint64_t seed{0};
  Vec3 gravity{0.0, 0.0, -9.81};
  double force_noise_sigma{0.0};
  double force_tare_time{0.0};
  std::vector<RobotSpec> robots;
  ObjectBody object;
  std::vector<CouplingLink> links;
  HumanTrajectory trajectory;
  std::vector<TrajectorySegment> segments;
  std::string output_hint;  // optional default output directory for the CLI
  std::string config_json;  // resolved echo for the log sidecar

  void validate() const;
};

ScenarioConfig load_scenario(const std::string& path);
ScenarioConfig parse_scenario(const std::string& json_text, const std::string& locator,
                              const std::string& base_dir);

/// Same scenario with every robot's ACI forced to alpha = 0 (plain
/// admittance). Idempotent.
ScenarioConfig baseline_mode(ScenarioConfig config);

struct RobotTickRecord {
  Vec3 F_H{Vec3::Zero()};
  Vec3 v_adm{Vec3::Zero()};
  double alpha{0.0};
  Vec3 v_d{Vec3::Zero()};
  Pose x_d;
  Pose ee_pose;
  Vec6 ee_twist{Vec6::Zero()};
  VecX q, dq, cmd;  // cmd is tau_c (impedance) or dq_d (ik)
};

struct TickRecord {
  double t{0.0};
  std::vector<RobotTickRecord> robots;
  Pose human_pose;
  Vec3 v_h{Vec3::Zero()};
  Pose object_pose;
  std::vector<Vec3> link_forces;  // on-agent force per link, config order
};

struct RunLog {
  std::string scenario_name;
  std::uint64_t seed{0};
  double dt{0.0};
  std::vector<std::string> robot_names;
  std::vector<int> robot_dofs;
  std::vector<TrajectorySegment> segments;
  std::vector<TickRecord> ticks;
  bool aborted{false};
  std::string abort_reason;
  std::vector<long> damped_ticks;  // per robot: damped-fallback solves engaged
  double wall_seconds{0.0};
  double real_time_factor{0.0};
  std::string config_json;

  std::string to_csv() const;
  std::uint64_t csv_hash() const;  // FNV-1a over to_csv()
  void write_csv(const std::string& path) const;
  std::string sidecar_json() const;
  void write_sidecar(const std::string& path) const;
};

struct RunOptions {
  /// Controller evaluation order (indices into config.robots). Empty means
  /// config order. Results must not depend on it; a test permutes this.
  std::vector<int> controller_order;
};

RunLog run(const ScenarioConfig& config, const RunOptions& options = {});

/// Read back a persisted run: `<name>_log.csv` plus its `<name>_run.json`
/// sidecar (robot names, dofs, segments, dt).
RunLog load_run_log(const std::string& csv_path);

struct RunResult {
  bool ok{false};
  std::string error;
  RunLog log;
};

/// Independent runs, optionally in parallel; results ordered as the inputs
/// and bit-identical under any parallelism.
std::vector<RunResult> batch(const std::vector<ScenarioConfig>& configs, int parallelism);

}  // namespace cocarry
