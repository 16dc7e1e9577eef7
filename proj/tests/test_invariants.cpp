#include <doctest.h>

#include <cmath>

#include <hyperflow/invariants.hpp>

#include "oracles.hpp"

using hyperflow::Orientation;
using hyperflow::OscillatorSystem;
using hyperflow::ScalarExpression;
using hyperflow::SystemDescriptor;
using hyperflow::Vector;

namespace {

OscillatorSystem make_system(int blocks, const char* c1, const char* c2,
                             const char* c3,
                             std::vector<Orientation> signature = {}) {
  OscillatorSystem sys;
  sys.profile.blocks = blocks;
  int dim = 4 * blocks;
  sys.profile.c = {ScalarExpression::parse(c1, dim),
                   ScalarExpression::parse(c2, dim),
                   ScalarExpression::parse(c3, dim)};
  if (signature.empty()) signature.assign(blocks, Orientation::Positive);
  sys.profile.signature = signature;
  sys.structure = hyperflow::assemble_block_structure(signature);
  return sys;
}

// The eight invariants written out longhand, kept deliberately separate from
// the library's quadratic-form tables.
double ref_q2(const Vector& x, double c1, double c2, double c3) {
  return c1 * (x(0) * x(0) + x(1) * x(1)) +
         c3 * (x(1) * x(2) + x(0) * x(3)) + c2 * (x(1) * x(3) - x(0) * x(2));
}

double ref_q3(const Vector& x, double c1, double c2, double c3) {
  return c3 * (x(0) * x(0) + x(2) * x(2)) +
         c2 * (x(0) * x(1) + x(2) * x(3)) + c1 * (x(1) * x(2) - x(0) * x(3));
}

double ref_b(int i, int j, const Vector& x, double c1, double c2, double c3) {
  auto pair = [&](int a, int b) { return x(a) * x(b); };
  if (i == 1 && j == 2)
    return c1 * (pair(0, 0) + pair(1, 1)) + c3 * (pair(1, 2) + pair(0, 3)) +
           c2 * (pair(1, 3) - pair(0, 2));
  if (i == 1 && j == 3)
    return c3 * (pair(0, 0) + pair(2, 2)) + c2 * (pair(0, 1) + pair(2, 3)) +
           c1 * (pair(1, 2) - pair(0, 3));
  if (i == 1 && j == 4)
    return c2 * (pair(0, 0) + pair(3, 3)) + c1 * (pair(0, 2) + pair(1, 3)) +
           c3 * (pair(2, 3) - pair(0, 1));
  if (i == 2 && j == 3)
    return c2 * (pair(1, 1) + pair(2, 2)) + c3 * (pair(0, 1) - pair(2, 3)) -
           c1 * (pair(0, 2) + pair(1, 3));
  if (i == 2 && j == 4)
    return c3 * (pair(1, 1) + pair(3, 3)) + c1 * (pair(0, 3) - pair(1, 2)) -
           c2 * (pair(0, 1) + pair(2, 3));
  if (i == 3 && j == 4)
    return c1 * (pair(2, 2) + pair(3, 3)) + c2 * (pair(0, 2) - pair(1, 3)) -
           c3 * (pair(1, 2) + pair(0, 3));
  return 0.0;
}

}  // namespace

TEST_CASE("block radii sum to the squared norm") {
  Vector x(8);
  x << 1, 2, 0, 0, 3, 0, 4, 0;
  Vector rho = hyperflow::block_radii(x);
  REQUIRE(rho.size() == 2);
  CHECK(rho(0) == 5.0);
  CHECK(rho(1) == 25.0);
  CHECK(rho.sum() == x.squaredNorm());
}

TEST_CASE("quadratic invariants at axis points") {
  Eigen::Vector3d c(2.0, 0.0, 0.0);
  Vector e1 = Vector::Zero(4);
  e1(0) = 1.0;
  auto q = hyperflow::q_invariants(e1, c);
  CHECK(q.q2 == 2.0);
  CHECK(q.q3 == 0.0);
  CHECK(hyperflow::q_invariants(Vector::Zero(4), c).q2 == 0.0);

  Eigen::Vector3d full(1.0, 2.0, 3.0);
  auto b = hyperflow::b_invariants(e1, full);
  CHECK(b[0] == 1.0);  // B12 -> c1
  CHECK(b[1] == 3.0);  // B13 -> c3
  CHECK(b[2] == 2.0);  // B14 -> c2
  CHECK(b[3] == 0.0);
  CHECK(b[4] == 0.0);
  CHECK(b[5] == 0.0);
}

TEST_CASE("invariants match the longhand formulas") {
  oracles::Rng rng(71);
  for (int trial = 0; trial < 30; ++trial) {
    Vector x = rng.gaussian_vector(4);
    Eigen::Vector3d c(rng.uniform(-2, 2), rng.uniform(-2, 2),
                      rng.uniform(-2, 2));
    auto q = hyperflow::q_invariants(x, c);
    CHECK(q.q2 ==
          doctest::Approx(ref_q2(x, c(0), c(1), c(2))).epsilon(1e-13));
    CHECK(q.q3 ==
          doctest::Approx(ref_q3(x, c(0), c(1), c(2))).epsilon(1e-13));
    auto b = hyperflow::b_invariants(x, c);
    int idx = 0;
    for (int i = 1; i <= 3; ++i)
      for (int j = i + 1; j <= 4; ++j) {
        CHECK(b[idx] == doctest::Approx(ref_b(i, j, x, c(0), c(1), c(2)))
                            .epsilon(1e-13));
        ++idx;
      }
    // The identities Q2 = B12 and Q3 = B13 hold pointwise.
    CHECK(q.q2 == b[0]);
    CHECK(q.q3 == b[1]);
  }
}

TEST_CASE("closed-form flows conserve the full invariant set") {
  auto sys = make_system(1, "1", "2", "2");
  Vector x0(4);
  x0 << 0.6, -0.2, 0.4, 0.8;
  auto times = hyperflow::sample_times(10.0, 0.05);
  auto traj = hyperflow::closed_form_flow(sys, x0, times);
  SystemDescriptor desc;
  desc.signature = sys.profile.signature;
  desc.c = Eigen::Vector3d(1.0, 2.0, 2.0);
  auto reports = hyperflow::conservation_report(traj, desc);
  REQUIRE(reports.size() == 9);  // rho1, Q2, Q3, B12..B34
  for (const auto& r : reports) {
    INFO(r.name);
    CHECK(r.max_drift <= 1e-10);
  }
}

TEST_CASE("radius-dependent coefficients still conserve the invariants") {
  auto sys = make_system(1, "r1", "0", "1 - r1");
  Vector x0(4);
  x0 << 1.0, 0.5, -0.5, 1.0;  // rho = 2.5
  Vector rho0(1);
  rho0 << x0.squaredNorm();
  auto times = hyperflow::sample_times(10.0, 0.02);
  auto traj = hyperflow::closed_form_flow(sys, x0, times);
  SystemDescriptor desc;
  desc.signature = sys.profile.signature;
  desc.c = Eigen::Vector3d(sys.profile.c[0].evaluate_radii(rho0),
                           sys.profile.c[1].evaluate_radii(rho0),
                           sys.profile.c[2].evaluate_radii(rho0));
  for (const auto& r : hyperflow::conservation_report(traj, desc)) {
    INFO(r.name);
    CHECK(r.max_drift <= 1e-10);
  }
}

TEST_CASE("negative-orientation blocks report conserved invariants too") {
  auto sys = make_system(1, "1", "-1", "2", {Orientation::Negative});
  Vector x0(4);
  x0 << 0.3, 0.9, -0.1, 0.4;
  auto traj = hyperflow::closed_form_flow(
      sys, x0, hyperflow::sample_times(10.0, 0.05));
  SystemDescriptor desc;
  desc.signature = sys.profile.signature;
  desc.c = Eigen::Vector3d(1.0, -1.0, 2.0);
  auto reports = hyperflow::conservation_report(traj, desc);
  REQUIRE(reports.size() == 9);
  for (const auto& r : reports) {
    INFO(r.name);
    CHECK(r.max_drift <= 1e-10);
  }
}

TEST_CASE("runge-kutta radii drift stays within tolerance over long runs") {
  auto sys = make_system(1, "r1", "0", "1 - r1");
  Vector x0(4);
  x0 << 1.0, 0.0, 1.0, 0.0;
  auto field = [&](const Vector& x) {
    return hyperflow::oscillator_field(sys.profile, sys.structure, x);
  };
  auto traj = hyperflow::integrate_rk4(field, x0, 10.0, 1e-3, 100);
  SystemDescriptor desc;
  desc.signature = sys.profile.signature;
  auto reports = hyperflow::conservation_report(traj, desc);
  REQUIRE(reports.size() == 1);
  CHECK(reports[0].name == "rho1");
  CHECK(reports[0].max_drift <= 1e-9);
}

TEST_CASE("single-axis coefficients preserve the two plane radii") {
  auto sys = make_system(1, "7/5", "0", "0");
  Vector x0(4);
  x0 << 0.5, -1.0, 2.0, 0.25;
  auto traj = hyperflow::closed_form_flow(
      sys, x0, hyperflow::sample_times(8.0, 0.1));
  double i1 = x0(0) * x0(0) + x0(1) * x0(1);
  double i2 = x0(2) * x0(2) + x0(3) * x0(3);
  for (const auto& x : traj.states) {
    CHECK(std::abs(x(0) * x(0) + x(1) * x(1) - i1) <= 1e-12);
    CHECK(std::abs(x(2) * x(2) + x(3) * x(3) - i2) <= 1e-12);
  }
}

TEST_CASE("constant trajectories report zero drift") {
  hyperflow::Trajectory traj;
  traj.times = {0.0, 1.0};
  Vector x(4);
  x << 1, 2, 3, 4;
  traj.states = {x, x};
  SystemDescriptor desc;
  desc.signature = {Orientation::Positive};
  for (const auto& r : hyperflow::conservation_report(traj, desc))
    CHECK(r.max_drift == 0.0);
}

TEST_CASE("jacobian rank is three at generic points") {
  Vector x(4);
  x << 1, 2, 3, 4;
  x /= std::sqrt(30.0);
  Eigen::Vector3d c(1.0, 2.0, 2.0);
  CHECK(hyperflow::independence_rank(x, c) == 3);
  CHECK(hyperflow::independence_rank(Vector::Zero(4), c) == 0);

  oracles::Rng rng(81);
  int hits = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Vector p = rng.gaussian_vector(4);
    Eigen::Vector3d cc(rng.uniform(-2, 2), rng.uniform(-2, 2),
                       rng.uniform(-2, 2));
    if (hyperflow::independence_rank(p, cc) == 3) ++hits;
  }
  CHECK(hits >= 99);
}

TEST_CASE("action-spin coordinates round-trip") {
  Vector x(8);
  x << 2, 0, 0, 0, 0.3, -0.4, 0.5, 1.2;
  auto as = hyperflow::action_spin(x);
  REQUIRE(as.actions.size() == 2);
  CHECK(as.actions(0) == doctest::Approx(4.0));
  CHECK(as.spins[0](0) == doctest::Approx(1.0));
  CHECK(as.spins[1].norm() == doctest::Approx(1.0).epsilon(1e-14));
  Vector back = hyperflow::action_spin_inverse(as);
  CHECK((back - x).cwiseAbs().maxCoeff() <= 1e-14);

  CHECK_THROWS_AS(hyperflow::action_spin(Vector::Zero(4)),
                  hyperflow::NumericalError);
}

TEST_CASE("spins trace great circles under the closed-form flow") {
  auto sys = make_system(1, "1", "0", "0");
  Vector x0(4);
  x0 << 1.0, 0.0, 1.0, 1.0;
  auto traj = hyperflow::closed_form_flow(
      sys, x0, hyperflow::sample_times(6.0, 0.05));
  CHECK(hyperflow::hopf_check(traj, sys) <= 1e-12);
}

TEST_CASE("great-circle residual is small for rk4 trajectories") {
  auto sys = make_system(2, "1 - r1", "2", "r2",
                         {Orientation::Positive, Orientation::Negative});
  Vector x0(8);
  x0 << 1, 0, 0, 1, 0.5, 0.5, -0.5, 0.5;
  auto field = [&](const Vector& x) {
    return hyperflow::oscillator_field(sys.profile, sys.structure, x);
  };
  auto rk = hyperflow::integrate_rk4(field, x0, 3.0, 1e-3, 50);
  CHECK(hyperflow::hopf_check(rk, sys) <= 1e-8);

  auto closed = hyperflow::closed_form_flow(
      sys, x0, hyperflow::sample_times(3.0, 0.05));
  CHECK(hyperflow::hopf_check(closed, sys) <= 1e-12);
}

TEST_CASE("zero-frequency blocks are skipped by the great-circle check") {
  auto sys = make_system(1, "0", "0", "0");
  Vector x0(4);
  x0 << 1, 2, 3, 4;
  auto traj = hyperflow::closed_form_flow(
      sys, x0, hyperflow::sample_times(1.0, 0.25));
  CHECK(hyperflow::hopf_check(traj, sys) == 0.0);
}
