#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "hyperflow/flows.hpp"
#include "hyperflow/types.hpp"

namespace hyperflow {

struct QInvariants {
  double q2 = 0.0;
  double q3 = 0.0;
};

struct ActionSpin {
  Vector actions;              // block radii
  std::vector<Vector> spins;   // unit 4-vectors
};

// What the conservation report needs to know about the generating system:
// block orientations (empty means standard positive) and, when available,
// the numeric coefficient triple at the trajectory's initial radii.
struct SystemDescriptor {
  std::vector<Orientation> signature;
  std::optional<Eigen::Vector3d> c;
};

struct InvariantReport {
  std::string name;
  std::vector<double> values;
  double max_drift = 0.0;  // max |v(t) - v(0)| / max(1, |v(0)|)
};

// Squared norms of the four-dimensional coordinate blocks.
Vector block_radii(const Vector& x);

// The two quadratic constants of motion of the standard positive
// four-dimensional oscillator with coefficient triple c.
QInvariants q_invariants(const Vector& x, const Eigen::Vector3d& c);

// The six bilinear constants (B12, B13, B14, B23, B24, B34); B12 and B13
// coincide with Q2 and Q3 identically.
std::array<double, 6> b_invariants(const Vector& x, const Eigen::Vector3d& c);

// Numerical rank of the 7x4 Jacobian of {rho, B12..B34} at x: singular
// values above rel_tol times the largest. Expected 3 at generic points;
// degenerate points simply return a smaller rank.
int independence_rank(const Vector& x, const Eigen::Vector3d& c,
                      double rel_tol = 1e-8);

// Action-spin coordinates: I_k = rho_k, s_k = x_k / sqrt(rho_k). Throws
// NumericalError when a block sits at the origin, where the chart is
// singular.
ActionSpin action_spin(const Vector& x);

// Reconstructs x from action-spin coordinates.
Vector action_spin_inverse(const ActionSpin& as);

// Drift reports for every block radius and, on four-dimensional systems with
// a known coefficient triple, the Q and B invariants. For a negative-
// orientation block the invariants are evaluated in coordinates rotated onto
// the standard positive structure.
std::vector<InvariantReport> conservation_report(const Trajectory& traj,
                                                 const SystemDescriptor& sys);

// Max residual, over blocks and trajectory states, of projecting each block
// state onto the plane spanned by its initial state and the initial
// velocity direction; closed-form block motion is a great circle in that
// plane. Zero-frequency blocks are skipped.
double hopf_check(const Trajectory& traj, const OscillatorSystem& sys);

}  // namespace hyperflow
