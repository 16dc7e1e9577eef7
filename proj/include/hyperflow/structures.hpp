#pragma once

#include <array>
#include <vector>

#include "hyperflow/types.hpp"

namespace hyperflow {

// A triple of real skew-symmetric matrices L1, L2, L3 on R^{4n} satisfying
// the quaternion relations L_a L_b = sum_c eps_{abc} L_c - delta_{ab} I.
// `signature` records per-block orientations when the triple was assembled
// from standard blocks; it is empty for triples given by explicit matrices.
struct StructureTriple {
  int dim = 0;  // 4n
  std::array<Matrix, 3> L;
  std::vector<Orientation> signature;

  int blocks() const { return dim / 4; }
};

struct QuaternionicReport {
  bool ok = false;
  double max_residual = 0.0;  // worst entry over all checked identities
};

// Result of rotating a four-dimensional triple onto the standard one of its
// orientation: rows of `rotation` are the adapted orthonormal frame.
struct Reduction {
  Matrix rotation;  // in SO(4); rotation * L_a * rotation^T is standard
  Orientation orientation;
  double residual = 0.0;  // max entry error against the standard triple
};

// Standard triple on R^4 of the given orientation. Entries are exactly 0/+1/-1
// and the quaternion relations hold with zero residual.
StructureTriple standard_triple(Orientation orientation);

// Checks skew-symmetry and the quaternion relations entrywise within tol.
// Throws StructuralError if the three matrices are not square of equal
// dimension divisible by 4.
QuaternionicReport verify_quaternionic(const StructureTriple& triple,
                                       double tol);

// Pfaffian of a 4x4 skew-symmetric matrix.
double pfaffian4(const Matrix& a);

// Orientation of a four-dimensional triple, read off the common sign of the
// three Pfaffians. Throws NumericalError if any |Pfaffian| <= tol or the
// signs disagree; throws StructuralError if dim != 4.
Orientation orientation_of(const StructureTriple& triple, double tol = 1e-9);

// Block-diagonal triple on R^{4n} whose k-th 4x4 block is the standard triple
// of signature[k]. Throws StructuralError on an empty signature.
StructureTriple assemble_block_structure(
    const std::vector<Orientation>& signature);

// Rotates a valid four-dimensional triple onto the standard triple of its
// orientation. Throws StructuralError if the triple fails verification at
// tolerance 1e-8 and NumericalError if the frame degenerates.
Reduction canonical_reduction(const StructureTriple& triple);

// Max commutator entry over all pairs of one standard positive and one
// standard negative generator on R^4 (exactly zero for the standard pair).
QuaternionicReport dual_commutation_check(double tol = 1e-12);

}  // namespace hyperflow
