"""Deterministic human-multi-robot co-transportation simulator."""

from ._core import (  # noqa: F401
    AciParams,
    AciState,
    ConfigurationError,
    HumanTrajectory,
    InputError,
    Pose,
    RobotModel,
    RunLog,
    ScenarioConfig,
    SegmentSpec,
    SingularityError,
    TrajectorySegment,
    aci_tick,
    admittance_step,
    alignment_metric,
    alpha_from_integrals,
    alpha_stats,
    baseline_mode,
    damping_factor,
    force_stats,
    impedance_wrench,
    load_robot_model,
    load_run_log,
    load_scenario,
    manipulability,
    parse_scenario,
    run,
    segments_of,
    solve_torques,
    weighting_matrix,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
