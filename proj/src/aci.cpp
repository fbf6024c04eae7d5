#include "cocarry/aci.hpp"

#include <cmath>

#include "cocarry/errors.hpp"

namespace cocarry {

void AciParams::validate() const {
  if (!(adm.mass.array() > 0).all() || !(adm.damping.array() > 0).all())
    throw InputError("admittance mass and damping diagonals must be > 0");
  if (window_length <= 0) throw InputError("window_length must be > 0");
  if (epsilon <= 0) throw InputError("epsilon must be > 0");
  if (dt <= 0) throw InputError("dt must be > 0");
  if (window_length < dt) throw InputError("window_length must be >= dt");
}

Vec3 admittance_step(AciState& state, const AciParams& params, const Vec3& F_H) {
  if (!F_H.allFinite()) {
    state.data_quality_flag = true;
    ++state.rejected_samples;
    return state.v_adm;
  }
  for (int i = 0; i < 3; ++i) {
    const double m = params.adm.mass[i];
    const double d = params.adm.damping[i];
    const double decay = std::exp(-d / m * params.dt);
    state.v_adm[i] = decay * state.v_adm[i] + (1.0 - decay) * F_H[i] / d;
  }
  return state.v_adm;
}

void push_window_sample(AciState& state, const AciParams& params, const Vec3& v_h) {
  const size_t capacity =
      static_cast<size_t>(std::lround(params.window_length / params.dt)) + 1;
  while (state.window.size() < capacity) state.window.emplace_back(0.0, 0.0);
  state.window.emplace_back(state.v_adm.norm(), v_h.norm());
  while (state.window.size() > capacity) state.window.pop_front();
}

double alpha_from_integrals(double integral_v_adm, double integral_v_h, double epsilon) {
  const double raw = 1.0 - integral_v_adm / (integral_v_h + epsilon);
  return std::clamp(raw, 0.0, 1.0);
}

double adaptive_index(AciState& state, const AciParams& params) {
  if (state.window.empty()) throw InputError("adaptive index needs a non-empty window");
  if (params.force_alpha_zero) {
    state.alpha = 0.0;
    return 0.0;
  }
  double int_adm = 0.0;
  double int_h = 0.0;
  for (size_t i = 1; i < state.window.size(); ++i) {
    int_adm += 0.5 * (state.window[i - 1].first + state.window[i].first) * params.dt;
    int_h += 0.5 * (state.window[i - 1].second + state.window[i].second) * params.dt;
  }
  state.alpha = alpha_from_integrals(int_adm, int_h, params.epsilon);
  return state.alpha;
}

Vec3 reference_velocity(AciState& state, const Vec3& v_h) {
  state.v_d = state.v_adm + state.alpha * v_h;
  return state.v_d;
}

Reference integrate_reference(AciState& state, double dt) {
  state.x_d.position += state.v_d * dt;
  Reference ref;
  ref.x_d = state.x_d;
  ref.xdot_d.setZero();
  ref.xdot_d.head<3>() = state.v_d;
  return ref;
}

Reference aci_tick(AciState& state, const AciParams& params, const Vec3& F_H, const Vec3& v_h) {
  Vec3 v_h_used = v_h;
  if (params.vh_filter_tau > 0.0) {
    const double a = std::exp(-params.dt / params.vh_filter_tau);
    state.v_h_filtered = a * state.v_h_filtered + (1.0 - a) * v_h;
    v_h_used = state.v_h_filtered;
  }
  admittance_step(state, params, F_H);
  push_window_sample(state, params, v_h_used);
  adaptive_index(state, params);
  reference_velocity(state, v_h_used);
  return integrate_reference(state, params.dt);
}

}  // namespace cocarry
