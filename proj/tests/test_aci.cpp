#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cocarry/aci.hpp"
#include "cocarry/errors.hpp"

using namespace cocarry;

namespace {

AciParams paper_params() {
  AciParams p;
  p.adm.mass = Vec3(4, 4, 4);
  p.adm.damping = Vec3(45, 45, 45);
  p.window_length = 0.5;
  p.epsilon = 1e-6;
  p.dt = 1e-3;
  return p;
}

}  // namespace

TEST_CASE("admittance: steady state reaches F/D within 1% after 5 time constants") {
  AciParams p = paper_params();
  AciState s;
  const Vec3 F(45, 0, 0);
  const double settle = 5.0 * (4.0 / 45.0);
  const int n = static_cast<int>(settle / p.dt) + 1;
  for (int i = 0; i < n; ++i) admittance_step(s, p, F);
  CHECK(std::abs(s.v_adm.x() - 1.0) < 0.01);
  CHECK(s.v_adm.y() == 0.0);
  CHECK(s.v_adm.z() == 0.0);
}

TEST_CASE("admittance: zero force keeps zero velocity") {
  AciParams p = paper_params();
  AciState s;
  for (int i = 0; i < 1000; ++i) admittance_step(s, p, Vec3::Zero());
  CHECK(s.v_adm.norm() == 0.0);
}

TEST_CASE("admittance: discrete step response matches the scalar closed form") {
  AciParams p = paper_params();
  AciState s;
  const double F = 12.0;
  const double M = 4.0, D = 45.0;
  for (int k = 1; k <= 5000; ++k) {
    admittance_step(s, p, Vec3(F, 0, 0));
    const double t = k * p.dt;
    const double expected = (F / D) * (1.0 - std::exp(-D * t / M));
    CHECK(std::abs(s.v_adm.x() - expected) < 1e-9);
  }
}

TEST_CASE("admittance: non-finite force is rejected and flagged") {
  AciParams p = paper_params();
  AciState s;
  admittance_step(s, p, Vec3(45, 0, 0));
  const Vec3 held = s.v_adm;
  admittance_step(s, p, Vec3(std::nan(""), 0, 0));
  CHECK(s.v_adm == held);
  CHECK(s.data_quality_flag);
  CHECK(s.rejected_samples == 1);
}

TEST_CASE("adaptive index: deformability regimes") {
  AciParams p = paper_params();

  const auto fill_window = [&](double v_adm_norm, double v_h_norm) {
    AciState s;
    s.v_adm = Vec3(v_adm_norm, 0, 0);
    const int n = static_cast<int>(p.window_length / p.dt) + 1;
    for (int i = 0; i < n; ++i) push_window_sample(s, p, Vec3(v_h_norm, 0, 0));
    return s;
  };

  // Highly deformable: robot sees no force, human moves.
  AciState s = fill_window(0.0, 0.1);
  CHECK(adaptive_index(s, p) > 1.0 - 1e-4);

  // Non-deformable: admittance velocity tracks the hand velocity.
  s = fill_window(0.1, 0.1);
  CHECK(adaptive_index(s, p) < 1e-4);

  // Saturation at zero: raw value would be -1.
  s = fill_window(0.2, 0.1);
  CHECK(adaptive_index(s, p) == 0.0);
}

TEST_CASE("adaptive index: empty window is an input error") {
  AciParams p = paper_params();
  AciState s;
  CHECK_THROWS_AS(adaptive_index(s, p), InputError);
}

TEST_CASE("adaptive index: alpha stays in [0,1] and scaling invariance holds") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const double ia = u(rng);
    const double ih = u(rng);
    const double a = alpha_from_integrals(ia, ih, 1e-6);
    CHECK(a >= 0.0);
    CHECK(a <= 1.0);
    // Common positive rescaling leaves the ratio unchanged (epsilon = 0).
    const double c = 0.1 + u(rng);
    if (ih > 0.0)
      CHECK(alpha_from_integrals(c * ia, c * ih, 0.0) ==
            doctest::Approx(alpha_from_integrals(ia, ih, 0.0)).epsilon(1e-12));
  }
}

TEST_CASE("reference velocity: fusion arithmetic and affine structure") {
  AciState s;

  s.v_adm = Vec3::Zero();
  s.alpha = 1.0;
  CHECK(reference_velocity(s, Vec3(0.1, 0, 0)) == Vec3(0.1, 0, 0));

  s.v_adm = Vec3(0.05, 0, 0);
  s.alpha = 0.0;
  CHECK(reference_velocity(s, Vec3(3, -2, 9)) == Vec3(0.05, 0, 0));

  s.v_adm = Vec3(0.02, 0, 0);
  s.alpha = 0.5;
  CHECK((reference_velocity(s, Vec3(0.1, 0, 0)) - Vec3(0.07, 0, 0)).norm() < 1e-15);

  // Affine in v_h with slope alpha.
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    s.v_adm = Vec3(u(rng), u(rng), u(rng));
    s.alpha = 0.5 * (u(rng) + 1.0);
    const Vec3 v1(u(rng), u(rng), u(rng));
    const Vec3 v2(u(rng), u(rng), u(rng));
    const Vec3 r1 = reference_velocity(s, v1);
    const Vec3 r2 = reference_velocity(s, v2);
    CHECK((r2 - r1 - s.alpha * (v2 - v1)).norm() < 1e-12);
  }
}

TEST_CASE("reference integration: constant, zero and sinusoidal velocities") {
  const double dt = 1e-3;
  AciState s = AciState::initialized(Pose(Vec3(1, 2, 3), Quat::Identity()));

  s.v_d = Vec3(0.1, 0, 0);
  for (int i = 0; i < 1000; ++i) integrate_reference(s, dt);
  CHECK((s.x_d.position - Vec3(1.1, 2, 3)).norm() < 1e-12);

  s.v_d = Vec3::Zero();
  const Vec3 before = s.x_d.position;
  for (int i = 0; i < 1000; ++i) integrate_reference(s, dt);
  CHECK(s.x_d.position == before);

  // Sinusoid: explicit Euler error stays below 2 * dt * amplitude.
  s = AciState::initialized(Pose());
  const double amp = 0.2;
  const double w = 2.0 * M_PI;
  for (int k = 0; k < 2000; ++k) {
    s.v_d = Vec3(amp * std::sin(w * k * dt), 0, 0);
    integrate_reference(s, dt);
    const double analytic = amp / w * (1.0 - std::cos(w * (k + 1) * dt));
    CHECK(std::abs(s.x_d.position.x() - analytic) < 2.0 * dt * amp);
  }

  // Angular reference is identically zero and the orientation never moves.
  Reference ref = integrate_reference(s, dt);
  CHECK(ref.xdot_d.tail<3>().norm() == 0.0);
  CHECK(ref.x_d.orientation.angularDistance(Quat::Identity()) == 0.0);
}

TEST_CASE("aci_tick composes the full interface and holds alpha in range") {
  AciParams p = paper_params();
  AciState s = AciState::initialized(Pose());
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int k = 0; k < 3000; ++k) {
    const Vec3 F(u(rng), u(rng), u(rng));
    const Vec3 vh(0.05 * u(rng), 0, 0);
    const Reference ref = aci_tick(s, p, F, vh);
    CHECK(s.alpha >= 0.0);
    CHECK(s.alpha <= 1.0);
    CHECK(ref.xdot_d.tail<3>().norm() == 0.0);
  }
  // Window span never exceeds W_l + dt.
  CHECK(static_cast<double>(s.window.size() - 1) * p.dt <= p.window_length + p.dt);
}

TEST_CASE("optional hand-velocity filter smooths the fused reference") {
  AciParams p = paper_params();
  p.vh_filter_tau = 0.2;
  AciState s = AciState::initialized(Pose());
  // Step in v_h with zero force: v_d = alpha * filtered v_h lags the raw step.
  Reference ref;
  for (int k = 0; k < 50; ++k) ref = aci_tick(s, p, Vec3::Zero(), Vec3(0.2, 0, 0));
  CHECK(s.v_d.x() < 0.2 * 0.25);  // 50 ms into a 200 ms filter
  for (int k = 0; k < 2000; ++k) ref = aci_tick(s, p, Vec3::Zero(), Vec3(0.2, 0, 0));
  CHECK(s.v_h_filtered.x() == doctest::Approx(0.2).epsilon(1e-3));
  CHECK(ref.xdot_d.tail<3>().norm() == 0.0);
}

TEST_CASE("baseline mode forces alpha to zero") {
  AciParams p = paper_params();
  p.force_alpha_zero = true;
  AciState s = AciState::initialized(Pose());
  for (int k = 0; k < 100; ++k) {
    aci_tick(s, p, Vec3(1, 2, 3), Vec3(0.1, 0, 0));
    CHECK(s.alpha == 0.0);
    CHECK(s.v_d == s.v_adm);
  }
}
