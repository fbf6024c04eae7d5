#pragma once

#include <deque>

#include "cocarry/geometry.hpp"

namespace cocarry {

struct AdmittanceParams {
  Vec3 mass{4.0, 4.0, 4.0};      // kg, diagonal desired mass
  Vec3 damping{45.0, 45.0, 45.0};  // N s/m, diagonal desired damping
};

struct AciParams {
  AdmittanceParams adm;
  double window_length{0.5};  // s, sliding window for the adaptive index
  double epsilon{1e-6};
  double dt{1e-3};
  double vh_filter_tau{0.0};   // s; 0 disables the optional hand-velocity filter
  bool force_alpha_zero{false};  // baseline mode: plain admittance

  void validate() const;
};

/// Per-robot ACI state. One instance per robot, no cross-robot data.
struct AciState {
  Vec3 v_adm{Vec3::Zero()};
  Vec3 v_h_filtered{Vec3::Zero()};
  double alpha{0.0};
  Vec3 v_d{Vec3::Zero()};
  Pose x_d;                      // desired pose; orientation stays at its initial value
  std::deque<std::pair<double, double>> window;  // (|v_adm|, |v_h|) samples, oldest first
  bool data_quality_flag{false};
  long rejected_samples{0};

  static AciState initialized(const Pose& initial_ee_pose) {
    AciState s;
    s.x_d = initial_ee_pose;
    return s;
  }
};

/// Exact exponential update of M v' + D v = F over one control period
/// (zero-order hold on F; M, D diagonal). Non-finite forces are rejected:
/// v_adm is held and the data-quality flag raised.
Vec3 admittance_step(AciState& state, const AciParams& params, const Vec3& F_H);

/// Push one (|v_adm|, |v_h|) sample; the window is primed with zeros at start
/// so it always spans window_length.
void push_window_sample(AciState& state, const AciParams& params, const Vec3& v_h);

/// alpha = 1 - int|v_adm| / (int|v_h| + eps) over the trailing window,
/// trapezoidal quadrature, clamped to [0, 1].
double adaptive_index(AciState& state, const AciParams& params);

/// Clamped ratio term shared by adaptive_index and its property tests.
double alpha_from_integrals(double integral_v_adm, double integral_v_h, double epsilon);

/// v_d = v_adm + alpha * v_h.
Vec3 reference_velocity(AciState& state, const Vec3& v_h);

struct Reference {
  Pose x_d;
  Vec6 xdot_d;  // [v_d; 0]: the angular part is identically zero
};

/// Explicit-Euler position integration of v_d; orientation held constant.
Reference integrate_reference(AciState& state, double dt);

/// One full ACI tick: admittance -> window -> alpha -> fusion -> integration.
Reference aci_tick(AciState& state, const AciParams& params, const Vec3& F_H, const Vec3& v_h);

}  // namespace cocarry
