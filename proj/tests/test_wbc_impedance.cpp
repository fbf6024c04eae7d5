#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "cocarry/errors.hpp"
#include "cocarry/wbc_impedance.hpp"
#include "test_support.hpp"

using namespace cocarry;
using namespace cocarry::testing;

namespace {

MatX random_spd(int n, std::mt19937& rng, double eig_lo = 0.5, double eig_hi = 5.0) {
  std::normal_distribution<double> g(0.0, 1.0);
  MatX A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = g(rng);
  const Eigen::HouseholderQR<MatX> qr(A);
  const MatX Q = qr.householderQ();
  std::uniform_real_distribution<double> u(eig_lo, eig_hi);
  VecX d(n);
  for (int i = 0; i < n; ++i) d[i] = u(rng);
  return Q * d.asDiagonal() * Q.transpose();
}

Mat6X random_task(int n, std::mt19937& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Mat6X J(6, n);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < n; ++j) J(i, j) = g(rng);
  return J;
}

// Equality-constrained least-squares oracle for Eq-5-style problems:
// min 0.5 |tau - tau0|^2_W  s.t.  (L J M^-1) tau = F, solved via the KKT system.
VecX kkt_oracle(const MatX& M, const Mat6X& J, const Vec6& F, const VecX& tau0, const MatX& W) {
  const auto n = M.rows();
  const MatX Minv = M.llt().solve(MatX::Identity(n, n));
  const Mat6 lambda = (J * Minv * J.transpose()).inverse();
  const MatX A = lambda * J * Minv;  // Jbar^T, 6 x n

  MatX K = MatX::Zero(n + 6, n + 6);
  K.topLeftCorner(n, n) = W;
  K.topRightCorner(n, 6) = A.transpose();
  K.bottomLeftCorner(6, n) = A;
  VecX rhs(n + 6);
  rhs.head(n) = W * tau0;
  rhs.tail(6) = F;
  const VecX sol = K.partialPivLu().solve(rhs);
  return sol.head(n);
}

ImpedanceParams default_params(int n) {
  Vec6 K_d;
  K_d << 200, 200, 200, 30, 30, 30;
  return ImpedanceParams::with_damping_ratio(K_d, 0.7, VecX::Constant(n, 50.0), VecX::Ones(n),
                                             VecX::Zero(n));
}

}  // namespace

TEST_CASE("impedance wrench: zero at the target pose and twist") {
  const ImpedanceParams p = default_params(10);
  const Pose x(Vec3(0.3, -0.2, 1.1), quat_exp(Vec3(0.2, 0.1, -0.4)));
  Vec6 xdot;
  xdot << 0.1, 0, -0.2, 0.05, 0, 0;
  CHECK(impedance_wrench(x, xdot, x, xdot, p).norm() == 0.0);
}

TEST_CASE("impedance wrench: pure translation offset with the paper stiffness") {
  const ImpedanceParams p = default_params(10);
  const Pose x(Vec3::Zero(), Quat::Identity());
  const Pose x_d(Vec3(0.01, 0, 0), Quat::Identity());
  const Vec6 F = impedance_wrench(x, Vec6::Zero(), x_d, Vec6::Zero(), p);
  CHECK(std::abs(F[0] - 2.0) < 1e-12);
  CHECK(F.tail<5>().norm() < 1e-12);
}

TEST_CASE("impedance wrench: small rotation about z maps through K_d(6,6)") {
  const ImpedanceParams p = default_params(10);
  for (double delta : {0.01, 0.03, 0.05}) {
    const Pose x(Vec3::Zero(), Quat::Identity());
    const Pose x_d(Vec3::Zero(), quat_exp(Vec3(0, 0, delta)));
    const Vec6 F = impedance_wrench(x, Vec6::Zero(), x_d, Vec6::Zero(), p);
    CHECK(std::abs(F[5] - 30.0 * delta) < 0.01 * 30.0 * delta);
    CHECK(F.head<3>().norm() < 1e-12);
  }
}

TEST_CASE("impedance wrench: drifting quaternions are renormalized") {
  const ImpedanceParams p = default_params(10);
  Pose x(Vec3::Zero(), Quat::Identity());
  x.orientation.coeffs() *= 1.001;  // beyond the 1e-6 drift budget
  const Vec6 F = impedance_wrench(x, Vec6::Zero(), Pose(), Vec6::Zero(), p);
  CHECK(F.allFinite());
  CHECK(F.norm() < 1e-9);
}

TEST_CASE("nullspace torque: zero at rest, stiffness and damping arithmetic") {
  const int n = 10;
  ImpedanceParams p = default_params(n);
  const VecX q0 = p.q_0;

  CHECK(nullspace_torque(q0, VecX::Zero(n), p).norm() == 0.0);

  VecX q = q0;
  q[4] += 0.1;
  const VecX tau_k = nullspace_torque(q, VecX::Zero(n), p);
  CHECK(std::abs(tau_k[4] + 5.0) < 1e-12);
  CHECK(tau_k.norm() == doctest::Approx(5.0));

  VecX dq = VecX::Zero(n);
  dq[6] = 1.0;
  const VecX tau_d = nullspace_torque(q0, dq, p);
  CHECK(std::abs(tau_d[6] + 2.0 * 0.7 * std::sqrt(50.0)) < 1e-12);  // -9.899...
}

TEST_CASE("weighting matrix: identity and scaled selectors") {
  std::mt19937 rng(31);
  const MatX M = random_spd(8, rng);
  const MatX Minv = M.inverse();
  CHECK((weighting_matrix(M, VecX::Ones(8)) - Minv).norm() < 1e-10);
  CHECK((weighting_matrix(M, VecX::Constant(8, 2.0)) - 4.0 * Minv).norm() < 1e-9);
}

TEST_CASE("weighting matrix: SPD for random diagonal selectors") {
  std::mt19937 rng(37);
  std::uniform_real_distribution<double> u(0.2, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    const MatX M = random_spd(9, rng);
    VecX H(9);
    for (int i = 0; i < 9; ++i) H[i] = u(rng);
    const MatX W = weighting_matrix(M, H);
    const MatX direct = H.asDiagonal() * M.inverse() * H.asDiagonal();
    CHECK((W - direct).norm() < 1e-9 * direct.norm());
    CHECK(Eigen::LLT<MatX>(W).info() == Eigen::Success);
  }
}

TEST_CASE("weighting matrix: singular H is degenerate") {
  std::mt19937 rng(41);
  const MatX M = random_spd(6, rng);
  VecX H = VecX::Ones(6);
  H[3] = 0.0;
  CHECK_THROWS_AS(weighting_matrix(M, H), SingularityError);
}

TEST_CASE("solve_torques: zero task and posture give zero torque") {
  std::mt19937 rng(43);
  const MatX M = random_spd(10, rng);
  const Mat6X J = random_task(10, rng);
  const MatX W = weighting_matrix(M, VecX::Ones(10));
  const VecX tau = solve_torques(M, J, Vec6::Zero(), VecX::Zero(10), W);
  CHECK(tau.norm() < 1e-12);
}

TEST_CASE("solve_torques: square Jacobian reduces to J^T F for any W, tau0") {
  std::mt19937 rng(47);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const MatX M = random_spd(6, rng);
    Mat6X J(6, 6);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) J(i, j) = g(rng);
    if (std::abs(J.determinant()) < 1e-3) continue;
    const MatX W = random_spd(6, rng);
    Vec6 F;
    for (int i = 0; i < 6; ++i) F[i] = g(rng);
    VecX tau0(6);
    for (int i = 0; i < 6; ++i) tau0[i] = g(rng);
    const VecX tau = solve_torques(M, J, F, tau0, W);
    CHECK((tau - J.transpose() * F).norm() < 1e-9 * std::max(1.0, F.norm()));
  }
}

TEST_CASE("solve_torques: matches the KKT oracle on redundant instances") {
  std::mt19937 rng(53);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> uh(0.5, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = (trial % 2 == 0) ? 10 : 9;
    const MatX M = random_spd(n, rng);
    const Mat6X J = random_task(n, rng);
    VecX H(n);
    for (int i = 0; i < n; ++i) H[i] = uh(rng);
    const MatX W = weighting_matrix(M, H);
    Vec6 F;
    for (int i = 0; i < 6; ++i) F[i] = 10.0 * g(rng);
    VecX tau0(n);
    for (int i = 0; i < n; ++i) tau0[i] = 5.0 * g(rng);

    const VecX tau = solve_torques(M, J, F, tau0, W);
    const VecX ref = kkt_oracle(M, J, F, tau0, W);
    CHECK((tau - ref).norm() < 1e-7 * std::max(1.0, ref.norm()));

    // Constraint: Jbar^T tau = F.
    const MatX Minv = M.llt().solve(MatX::Identity(n, n));
    const Mat6 lambda = (J * Minv * J.transpose()).inverse();
    CHECK((lambda * (J * (Minv * tau)) - F).norm() < 1e-8);

    // First-order optimality: gradient orthogonal to the constraint null space.
    const MatX A = lambda * J * Minv;
    const VecX grad = W * (tau - tau0);
    const Eigen::JacobiSVD<MatX> svd(A, Eigen::ComputeFullV);
    const MatX V = svd.matrixV();
    for (int k = 6; k < n; ++k) CHECK(std::abs(grad.dot(V.col(k))) < 1e-7 * grad.norm());
  }
}

TEST_CASE("solve_torques: null-space term vanishes with tau0 = 0") {
  std::mt19937 rng(59);
  const int n = 10;
  const MatX M = random_spd(n, rng);
  const Mat6X J = random_task(n, rng);
  const MatX W = weighting_matrix(M, VecX::Ones(n));
  Vec6 F;
  F << 1, -2, 3, 0.1, 0.2, -0.3;
  const VecX tau = solve_torques(M, J, F, VecX::Zero(n), W);
  // With tau0 = 0 the torque lies in the range of W^-1 M^-1 J^T.
  const MatX Minv = M.llt().solve(MatX::Identity(n, n));
  const MatX range = W.llt().solve(Minv * J.transpose());
  const VecX coef = range.colPivHouseholderQr().solve(tau);
  CHECK((range * coef - tau).norm() < 1e-8 * tau.norm());
}

TEST_CASE("solve_torques: rank-deficient task throws, damped fallback answers") {
  std::mt19937 rng(61);
  const int n = 9;
  const MatX M = random_spd(n, rng);
  Mat6X J = random_task(n, rng);
  J.row(5) = J.row(4);  // drop to rank 5
  const MatX W = weighting_matrix(M, VecX::Ones(n));
  Vec6 F;
  F << 1, 0, 0, 0, 0, 0;
  CHECK_THROWS_AS(solve_torques(M, J, F, VecX::Zero(n), W), SingularityError);
  const VecX tau = solve_torques(M, J, F, VecX::Zero(n), W, 1e-6);
  CHECK(tau.allFinite());
}

TEST_CASE("control tick: gravity hold at rest on the target") {
  const RobotModel model = make_arm7();
  WholeBodyState s;
  s.q = VecX::Zero(model.dof());
  s.q.tail(7) = model.arm.q_home;
  s.dq = VecX::Zero(model.dof());

  ImpedanceParams p = default_params(model.dof());
  p.q_0 = s.q;
  const Pose target = forward_kinematics(model, s.q);

  const TorqueSolution sol = impedance_control_tick(model, s, target, Vec6::Zero(), p);
  CHECK_FALSE(sol.damped);
  CHECK(sol.tau.head<3>().norm() < 1e-9);
  const VecX g_a = arm_gravity(model, s.q.tail(7));
  CHECK((sol.tau.tail(7) - g_a).norm() < 1e-9);
}

TEST_CASE("control tick: constant offset realizes the impedance wrench statically") {
  const RobotModel model = make_arm7();
  WholeBodyState s;
  s.q = VecX::Zero(model.dof());
  s.q.tail(7) = model.arm.q_home;
  s.dq = VecX::Zero(model.dof());

  ImpedanceParams p = default_params(model.dof());
  p.q_0 = s.q;
  Pose target = forward_kinematics(model, s.q);
  target.position += Vec3(0.05, 0, 0);

  const TorqueSolution sol = impedance_control_tick(model, s, target, Vec6::Zero(), p);
  VecX tau = sol.tau;
  tau.tail(7) -= arm_gravity(model, s.q.tail(7));

  const MatX M = mass_matrix(model, s.q);
  const Mat6X J = whole_body_jacobian(model, s.q);
  const MatX Minv = M.llt().solve(MatX::Identity(model.dof(), model.dof()));
  const Mat6 lambda = (J * Minv * J.transpose()).inverse();
  const Vec6 realized = lambda * (J * (Minv * tau));
  Vec6 expected = Vec6::Zero();
  expected[0] = 200.0 * 0.05;  // K_d * offset
  CHECK((realized - expected).norm() < 1e-8 * expected.norm());
}

TEST_CASE("control tick: closed-loop step lands without excessive overshoot") {
  const RobotModel model = make_arm7();
  WholeBodyState s;
  s.q = VecX::Zero(model.dof());
  s.q.tail(7) = model.arm.q_home;
  s.dq = VecX::Zero(model.dof());

  ImpedanceParams p = default_params(model.dof());
  p.q_0 = s.q;
  Pose target = forward_kinematics(model, s.q);
  const double x0 = target.position.x();
  target.position.x() += 0.05;

  const double dt = 1e-3;
  double peak = -1e9;
  for (int k = 0; k < 4000; ++k) {
    const TorqueSolution sol = impedance_control_tick(model, s, target, Vec6::Zero(), p);
    const MatX M = mass_matrix(model, s.q);
    const BiasTerms bias = bias_terms(model, s.q, s.dq);
    const VecX ddq = M.llt().solve(sol.tau - bias.coriolis - bias.gravity);
    s.dq += dt * ddq;
    s.q += dt * s.dq;
    peak = std::max(peak, forward_kinematics(model, s.q).position.x());
  }
  const double xf = forward_kinematics(model, s.q).position.x();
  CHECK(std::abs(xf - (x0 + 0.05)) < 0.005);  // settles near the step
  // Frozen from the simulated step-response oracle: the mass-normalized
  // damping rule leaves the task-space loop underdamped (Lambda >> 1 kg),
  // measured peak overshoot 17.9% of the step.
  CHECK(peak - (x0 + 0.05) < 0.25 * 0.05);
}
