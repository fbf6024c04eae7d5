#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cocarry/aci.hpp"
#include "cocarry/errors.hpp"
#include "cocarry/metrics.hpp"
#include "cocarry/model.hpp"
#include "cocarry/sim.hpp"
#include "cocarry/wbc_ik.hpp"
#include "cocarry/wbc_impedance.hpp"
#include "cocarry/world.hpp"

namespace py = pybind11;
using namespace cocarry;

namespace {

Eigen::Vector4d quat_to_wxyz(const Quat& q) {
  return Eigen::Vector4d(q.w(), q.x(), q.y(), q.z());
}

Quat wxyz_to_quat(const Eigen::Vector4d& v) {
  return Quat(v[0], v[1], v[2], v[3]).normalized();
}

MatX positions_of(const RunLog& log, const std::function<Vec3(const TickRecord&)>& get) {
  MatX out(log.ticks.size(), 3);
  for (size_t k = 0; k < log.ticks.size(); ++k) out.row(k) = get(log.ticks[k]).transpose();
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Deterministic human-multi-robot co-transportation simulator";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigurationError", PyExc_ValueError);
  py::register_exception<SingularityError>(m, "SingularityError", PyExc_RuntimeError);

  py::class_<Pose>(m, "Pose")
      .def(py::init([](const Vec3& p, const Eigen::Vector4d& q) {
             return Pose(p, wxyz_to_quat(q));
           }),
           py::arg("position") = Vec3::Zero(),
           py::arg("quaternion") = Eigen::Vector4d(1, 0, 0, 0))
      .def_property(
          "position", [](const Pose& p) { return p.position; },
          [](Pose& p, const Vec3& v) { p.position = v; })
      .def_property(
          "quaternion", [](const Pose& p) { return quat_to_wxyz(p.orientation); },
          [](Pose& p, const Eigen::Vector4d& v) { p.orientation = wxyz_to_quat(v); })
      .def("__repr__", [](const Pose& p) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "Pose([%g, %g, %g])", p.position.x(), p.position.y(),
                      p.position.z());
        return std::string(buf);
      });

  // --- model ---
  py::class_<RobotModel>(m, "RobotModel")
      .def_readonly("name", &RobotModel::name)
      .def_property_readonly("dof", &RobotModel::dof)
      .def_property_readonly("arm_dof", &RobotModel::arm_dof)
      .def("q_home",
           [](const RobotModel& model) {
             VecX q = VecX::Zero(model.dof());
             q.tail(model.arm_dof()) = model.arm.q_home;
             return q;
           })
      .def("forward_kinematics",
           [](const RobotModel& model, const VecX& q) { return forward_kinematics(model, q); })
      .def("jacobian",
           [](const RobotModel& model, const VecX& q) { return MatX(whole_body_jacobian(model, q)); })
      .def("mass_matrix",
           [](const RobotModel& model, const VecX& q) { return mass_matrix(model, q); })
      .def("bias_terms", [](const RobotModel& model, const VecX& q, const VecX& dq) {
        const BiasTerms b = bias_terms(model, q, dq);
        return py::make_tuple(b.coriolis, b.gravity);
      });
  m.def("load_robot_model", &load_robot_model, py::arg("path"));

  // --- aci ---
  py::class_<AciParams>(m, "AciParams")
      .def(py::init<>())
      .def_property(
          "mass", [](const AciParams& p) { return Vec3(p.adm.mass); },
          [](AciParams& p, const Vec3& v) { p.adm.mass = v; })
      .def_property(
          "damping", [](const AciParams& p) { return Vec3(p.adm.damping); },
          [](AciParams& p, const Vec3& v) { p.adm.damping = v; })
      .def_readwrite("window_length", &AciParams::window_length)
      .def_readwrite("epsilon", &AciParams::epsilon)
      .def_readwrite("dt", &AciParams::dt)
      .def_readwrite("force_alpha_zero", &AciParams::force_alpha_zero);

  py::class_<AciState>(m, "AciState")
      .def(py::init([](const Pose& initial) { return AciState::initialized(initial); }),
           py::arg("initial_ee_pose") = Pose())
      .def_readonly("v_adm", &AciState::v_adm)
      .def_readonly("alpha", &AciState::alpha)
      .def_readonly("v_d", &AciState::v_d)
      .def_readonly("x_d", &AciState::x_d)
      .def_readonly("data_quality_flag", &AciState::data_quality_flag);

  m.def("admittance_step", &admittance_step, py::arg("state"), py::arg("params"),
        py::arg("force"));
  m.def("alpha_from_integrals", &alpha_from_integrals, py::arg("integral_v_adm"),
        py::arg("integral_v_h"), py::arg("epsilon"));
  m.def("aci_tick", [](AciState& s, const AciParams& p, const Vec3& F, const Vec3& vh) {
    const Reference ref = aci_tick(s, p, F, vh);
    return py::make_tuple(ref.x_d, Vec6(ref.xdot_d));
  });

  // --- whole-body controllers ---
  m.def("impedance_wrench",
        [](const Pose& x, const Vec6& xdot, const Pose& x_d, const Vec6& xdot_d, const Vec6& K_d,
           double xi, int n) {
          const ImpedanceParams p = ImpedanceParams::with_damping_ratio(
              K_d, xi, VecX::Constant(n, 50.0), VecX::Ones(n), VecX::Zero(n));
          return Vec6(impedance_wrench(x, xdot, x_d, xdot_d, p));
        },
        py::arg("x"), py::arg("xdot"), py::arg("x_d"), py::arg("xdot_d"), py::arg("K_d"),
        py::arg("xi") = 0.7, py::arg("n") = 10);
  m.def("weighting_matrix", &weighting_matrix, py::arg("M"), py::arg("H"));
  m.def("solve_torques",
        [](const MatX& M, const MatX& J, const Vec6& F, const VecX& tau0, const MatX& W,
           double mu) { return solve_torques(M, Mat6X(J), F, tau0, W, mu); },
        py::arg("M"), py::arg("J"), py::arg("F"), py::arg("tau_0"), py::arg("W"),
        py::arg("mu") = 0.0);
  m.def("manipulability", &manipulability, py::arg("J_arm"));
  m.def("damping_factor",
        [](double w, double w_threshold, double k_max) {
          return damping_factor(w, DampingSchedule{w_threshold, k_max});
        },
        py::arg("w"), py::arg("w_threshold") = 0.05, py::arg("k_max") = 0.1);

  // --- world ---
  py::class_<TrajectorySegment>(m, "TrajectorySegment")
      .def(py::init<>())
      .def_readwrite("label", &TrajectorySegment::label)
      .def_readwrite("t_start", &TrajectorySegment::t_start)
      .def_readwrite("t_end", &TrajectorySegment::t_end)
      .def_readwrite("axis", &TrajectorySegment::axis);

  py::class_<HumanTrajectory>(m, "HumanTrajectory")
      .def_static("load_csv", &HumanTrajectory::load_csv, py::arg("path"))
      .def_static("paper_path", &HumanTrajectory::paper_path, py::arg("start"))
      .def("sample",
           [](const HumanTrajectory& traj, double t) {
             const HumanSample s = traj.sample(t);
             return py::make_tuple(s.pose, Vec3(s.v_h), s.clamped);
           })
      .def_property_readonly("t_begin", &HumanTrajectory::t_begin)
      .def_property_readonly("t_end", &HumanTrajectory::t_end)
      .def_property_readonly("segments", &HumanTrajectory::segments)
      .def("write_csv", &HumanTrajectory::write_csv, py::arg("path"));

  // --- sim ---
  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def_readwrite("name", &ScenarioConfig::name)
      .def_readwrite("dt", &ScenarioConfig::dt)
      .def_readwrite("duration", &ScenarioConfig::duration)
      .def_readwrite("seed", &ScenarioConfig::seed)
      .def_readwrite("force_noise_sigma", &ScenarioConfig::force_noise_sigma)
      .def_readwrite("force_tare_time", &ScenarioConfig::force_tare_time)
      .def_readwrite("segments", &ScenarioConfig::segments);

  py::class_<RunLog>(m, "RunLog")
      .def_readonly("scenario_name", &RunLog::scenario_name)
      .def_readonly("seed", &RunLog::seed)
      .def_readonly("dt", &RunLog::dt)
      .def_readonly("robot_names", &RunLog::robot_names)
      .def_readonly("aborted", &RunLog::aborted)
      .def_readonly("abort_reason", &RunLog::abort_reason)
      .def_readonly("real_time_factor", &RunLog::real_time_factor)
      .def_readonly("segments", &RunLog::segments)
      .def_property_readonly("n_ticks", [](const RunLog& log) { return log.ticks.size(); })
      .def("times",
           [](const RunLog& log) {
             VecX t(log.ticks.size());
             for (size_t k = 0; k < log.ticks.size(); ++k) t[k] = log.ticks[k].t;
             return t;
           })
      .def("alpha",
           [](const RunLog& log, int robot) {
             VecX a(log.ticks.size());
             for (size_t k = 0; k < log.ticks.size(); ++k) a[k] = log.ticks[k].robots.at(robot).alpha;
             return a;
           })
      .def("force",
           [](const RunLog& log, int robot) {
             return positions_of(log, [robot](const TickRecord& t) { return t.robots.at(robot).F_H; });
           })
      .def("v_adm",
           [](const RunLog& log, int robot) {
             return positions_of(log,
                                 [robot](const TickRecord& t) { return t.robots.at(robot).v_adm; });
           })
      .def("ee_position",
           [](const RunLog& log, int robot) {
             return positions_of(
                 log, [robot](const TickRecord& t) { return t.robots.at(robot).ee_pose.position; });
           })
      .def("human_position",
           [](const RunLog& log) {
             return positions_of(log, [](const TickRecord& t) { return t.human_pose.position; });
           })
      .def("object_position",
           [](const RunLog& log) {
             return positions_of(log, [](const TickRecord& t) { return t.object_pose.position; });
           })
      .def("to_csv", &RunLog::to_csv)
      .def("csv_hash",
           [](const RunLog& log) {
             char buf[32];
             std::snprintf(buf, sizeof(buf), "%016llx",
                           static_cast<unsigned long long>(log.csv_hash()));
             return std::string(buf);
           })
      .def("write_csv", &RunLog::write_csv, py::arg("path"))
      .def("write_sidecar", &RunLog::write_sidecar, py::arg("path"));

  m.def("load_scenario", &load_scenario, py::arg("path"));
  m.def("parse_scenario", &parse_scenario, py::arg("json_text"), py::arg("locator"),
        py::arg("base_dir"));
  m.def("baseline_mode", &baseline_mode, py::arg("config"));
  m.def("run", [](const ScenarioConfig& cfg) { return run(cfg); }, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def("load_run_log", &load_run_log, py::arg("csv_path"));

  // --- metrics ---
  py::class_<SegmentSpec>(m, "SegmentSpec")
      .def(py::init([](const std::string& label, double t_start, double t_end, int axis) {
             return SegmentSpec{label, t_start, t_end, axis};
           }),
           py::arg("label"), py::arg("t_start"), py::arg("t_end"), py::arg("axis") = 0)
      .def_readwrite("label", &SegmentSpec::label)
      .def_readwrite("t_start", &SegmentSpec::t_start)
      .def_readwrite("t_end", &SegmentSpec::t_end)
      .def_readwrite("axis", &SegmentSpec::axis);

  m.def("alignment_metric",
        [](const RunLog& log, int robot, const SegmentSpec& seg) {
          const AlignmentResult a = alignment_metric(log, robot, seg);
          return py::make_tuple(Vec3(a.per_axis), a.norm);
        },
        py::arg("log"), py::arg("robot"), py::arg("segment"));
  m.def("alpha_stats",
        [](const RunLog& log, int robot, double t0, double t1) {
          const Stats s = alpha_stats(log, robot, t0, t1);
          return py::make_tuple(s.mean, s.stderr_over_time, s.count);
        },
        py::arg("log"), py::arg("robot"), py::arg("t_start"), py::arg("t_end"));
  m.def("force_stats",
        [](const RunLog& log, int robot, double t0, double t1) {
          const Stats s = force_stats(log, robot, t0, t1);
          return py::make_tuple(s.mean, s.stderr_over_time, s.count);
        },
        py::arg("log"), py::arg("robot"), py::arg("t_start"), py::arg("t_end"));
  m.def("segments_of", &segments_of, py::arg("log"));
}
