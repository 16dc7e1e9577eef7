#include "hyperflow/structures.hpp"

#include <cmath>

namespace hyperflow {

namespace {

Matrix from_rows(const int rows[4][4]) {
  Matrix m(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m(i, j) = rows[i][j];
  return m;
}

const int kPositive1[4][4] = {
    {0, 1, 0, 0}, {-1, 0, 0, 0}, {0, 0, 0, 1}, {0, 0, -1, 0}};
const int kPositive2[4][4] = {
    {0, 0, 0, 1}, {0, 0, 1, 0}, {0, -1, 0, 0}, {-1, 0, 0, 0}};
const int kPositive3[4][4] = {
    {0, 0, 1, 0}, {0, 0, 0, -1}, {-1, 0, 0, 0}, {0, 1, 0, 0}};

const int kNegative1[4][4] = {
    {0, 0, 1, 0}, {0, 0, 0, 1}, {-1, 0, 0, 0}, {0, -1, 0, 0}};
const int kNegative2[4][4] = {
    {0, 0, 0, -1}, {0, 0, 1, 0}, {0, -1, 0, 0}, {1, 0, 0, 0}};
const int kNegative3[4][4] = {
    {0, -1, 0, 0}, {1, 0, 0, 0}, {0, 0, 0, 1}, {0, 0, -1, 0}};

}  // namespace

StructureTriple standard_triple(Orientation orientation) {
  StructureTriple t;
  t.dim = 4;
  t.signature = {orientation};
  if (orientation == Orientation::Positive) {
    t.L = {from_rows(kPositive1), from_rows(kPositive2), from_rows(kPositive3)};
  } else {
    t.L = {from_rows(kNegative1), from_rows(kNegative2), from_rows(kNegative3)};
  }
  return t;
}

QuaternionicReport verify_quaternionic(const StructureTriple& triple,
                                       double tol) {
  const int d = triple.dim;
  if (d <= 0 || d % 4 != 0)
    throw StructuralError("structure dimension must be a positive multiple of 4");
  for (const Matrix& L : triple.L)
    if (L.rows() != d || L.cols() != d)
      throw StructuralError("structure matrices must be square of the stated dimension");

  const Matrix id = Matrix::Identity(d, d);
  double worst = 0.0;
  for (int a = 0; a < 3; ++a)
    worst = std::max(worst, max_abs(triple.L[a] + triple.L[a].transpose()));
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      Matrix expected = (a == b) ? Matrix(-id) : Matrix::Zero(d, d);
      for (int c = 0; c < 3; ++c) {
        int e = epsilon3(a, b, c);
        if (e != 0) expected += e * triple.L[c];
      }
      worst = std::max(worst, max_abs(triple.L[a] * triple.L[b] - expected));
    }
  }
  return {worst <= tol, worst};
}

double pfaffian4(const Matrix& a) {
  if (a.rows() != 4 || a.cols() != 4)
    throw StructuralError("Pfaffian requires a 4x4 matrix");
  return a(0, 1) * a(2, 3) - a(0, 2) * a(1, 3) + a(0, 3) * a(1, 2);
}

Orientation orientation_of(const StructureTriple& triple, double tol) {
  if (triple.dim != 4)
    throw StructuralError("orientation is defined per 4-dimensional block");
  double pf[3];
  for (int a = 0; a < 3; ++a) {
    pf[a] = pfaffian4(triple.L[a]);
    if (std::abs(pf[a]) <= tol)
      throw NumericalError("degenerate structure: Pfaffian magnitude below tolerance");
  }
  bool pos = pf[0] > 0;
  for (int a = 1; a < 3; ++a)
    if ((pf[a] > 0) != pos)
      throw NumericalError("inconsistent structure: Pfaffian signs disagree");
  return pos ? Orientation::Positive : Orientation::Negative;
}

StructureTriple assemble_block_structure(
    const std::vector<Orientation>& signature) {
  if (signature.empty())
    throw StructuralError("signature must name at least one block");
  const int n = static_cast<int>(signature.size());
  StructureTriple t;
  t.dim = 4 * n;
  t.signature = signature;
  for (int a = 0; a < 3; ++a) t.L[a] = Matrix::Zero(t.dim, t.dim);
  for (int k = 0; k < n; ++k) {
    StructureTriple block = standard_triple(signature[k]);
    for (int a = 0; a < 3; ++a)
      t.L[a].block(4 * k, 4 * k, 4, 4) = block.L[a];
  }
  return t;
}

Reduction canonical_reduction(const StructureTriple& triple) {
  QuaternionicReport check = verify_quaternionic(triple, 1e-8);
  if (triple.dim != 4)
    throw StructuralError("canonical reduction operates on one 4-dimensional block");
  if (!check.ok)
    throw StructuralError("canonical reduction requires a valid structure triple");

  Orientation orientation = orientation_of(triple);
  Vector v1 = Vector::Zero(4);
  v1(0) = 1.0;

  // Rows of the frame send the triple onto the standard one of its
  // orientation; the row recipes differ per orientation so the frame lands
  // in SO(4) in both cases.
  Matrix rotation(4, 4);
  rotation.row(0) = v1;
  if (orientation == Orientation::Positive) {
    rotation.row(1) = -(triple.L[0] * v1);
    rotation.row(2) = -(triple.L[2] * v1);
    rotation.row(3) = -(triple.L[1] * v1);
  } else {
    rotation.row(1) = triple.L[2] * v1;
    rotation.row(2) = -(triple.L[0] * v1);
    rotation.row(3) = triple.L[1] * v1;
  }

  double frame_err = max_abs(rotation * rotation.transpose() - Matrix::Identity(4, 4));
  if (frame_err > 1e-8 || rotation.determinant() < 0)
    throw NumericalError("adapted frame is not a rotation");

  StructureTriple target = standard_triple(orientation);
  double residual = 0.0;
  for (int a = 0; a < 3; ++a) {
    Matrix mapped = rotation * triple.L[a] * rotation.transpose();
    residual = std::max(residual, max_abs(mapped - target.L[a]));
  }
  return {rotation, orientation, residual};
}

QuaternionicReport dual_commutation_check(double tol) {
  StructureTriple pos = standard_triple(Orientation::Positive);
  StructureTriple neg = standard_triple(Orientation::Negative);
  double worst = 0.0;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      worst = std::max(
          worst, max_abs(pos.L[a] * neg.L[b] - neg.L[b] * pos.L[a]));
  return {worst <= tol, worst};
}

}  // namespace hyperflow
