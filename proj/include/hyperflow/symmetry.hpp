#pragma once

#include <array>
#include <vector>

#include "hyperflow/flows.hpp"
#include "hyperflow/structures.hpp"
#include "hyperflow/types.hpp"

namespace hyperflow {

// One solution of the infinitesimal invariance equation
// [X, L_a] = sum_b J_{ab} L_b with X skew on R^{4n} and J skew on R^3
// annihilating the coefficient vector.
struct InvarianceSolution {
  Matrix X;
  Eigen::Matrix3d J;
};

struct LieAlgebraBasis {
  int dim = 0;  // 4n
  Eigen::Vector3d c;
  std::vector<InvarianceSolution> basis;
  // structure_constants[k](i, j) is the k-th coefficient of [X_i, X_j]
  // expanded over the basis X-parts.
  std::vector<Matrix> structure_constants;
  double smallest_kept = 0.0;      // singular values around the rank cut
  double largest_discarded = 0.0;
};

struct SplitComponents {
  std::vector<InvarianceSolution> commutant;  // solutions with J = 0
  InvarianceSolution rotation_generator;      // J equals the canonical form
};

struct ClosureReport {
  double max_residual = 0.0;          // worst bracket projection defect
  double commutation_residual = 0.0;  // commutant against rotation generator
  std::vector<Matrix> structure_constants;
};

struct ProfileEstimate {
  int block = 0;
  Vector radii;                    // full radius vector of the sample group
  std::array<double, 3> c{};       // recovered coefficients at those radii
};

struct DetectionReport {
  bool oscillator = false;
  double residual = 0.0;              // worst relative reconstruction error
  double consistency = 0.0;           // worst equal-radius estimate spread
  double equivariance_residual = 0.0; // against the blockwise dual action
  int skipped_samples = 0;
  std::vector<ProfileEstimate> estimates;
};

// Solves the invariance equation for the structure triple at fixed numeric
// coefficients: an orthonormal null-space basis over the unknowns (strict
// lower triangle of X plus one scalar for the admissible J direction),
// singular values below rel_tol times the largest treated as zero.
// Throws NumericalError for c = 0, where the field vanishes and the
// invariance algebra degenerates to all of so(4n).
LieAlgebraBasis solve_invariance(const StructureTriple& S,
                                 const Eigen::Vector3d& c,
                                 double rel_tol = 1e-10);

// Splits a solved basis into the commutant (J = 0) and the rotation
// generator, normalized so that J_{ab} = sum_g eps_{abg} c_g exactly and the
// X-part is trace-orthogonal to the commutant.
SplitComponents split_components(const LieAlgebraBasis& B,
                                 const Eigen::Vector3d& c, double tol = 1e-10);

// Projects every pairwise bracket onto the basis span and verifies the
// commutant commutes with the rotation generator. Throws NumericalError
// when a bracket leaves the span by more than tol.
ClosureReport closure_check(const LieAlgebraBasis& B, double tol);

// Max over samples and generators of |A f(x) - Df(x) (A x)| with the
// Jacobian action taken by central finite differences (h = 1e-6).
double equivariance_check(const VectorField& field,
                          const std::vector<Matrix>& generators,
                          const std::vector<Vector>& samples);

// Tests whether a field is an oscillator field of the given standard
// block-diagonal structure: recovers per-block coefficients from inner
// products against L_a x, reconstructs the field, and checks consistency
// across samples of equal radii plus equivariance under the blockwise dual
// action. Samples with a block at the origin are skipped and counted.
DetectionReport detect_oscillator(const VectorField& field,
                                  const StructureTriple& S,
                                  const std::vector<Vector>& samples);

}  // namespace hyperflow
