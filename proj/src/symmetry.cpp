#include "hyperflow/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace hyperflow {

namespace {

// Strict-lower-triangle pairs (i > j) in a fixed order; the vectorization
// v -> X = sum_u v_u (E_{i_u j_u} - E_{j_u i_u}) identifies R^{d(d-1)/2}
// with so(d).
std::vector<std::pair<int, int>> lower_pairs(int d) {
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(d * (d - 1) / 2);
  for (int j = 0; j < d; ++j)
    for (int i = j + 1; i < d; ++i) pairs.emplace_back(i, j);
  return pairs;
}

Vector vectorize_skew(const Matrix& X,
                      const std::vector<std::pair<int, int>>& pairs) {
  Vector v(pairs.size());
  for (size_t u = 0; u < pairs.size(); ++u)
    v(u) = X(pairs[u].first, pairs[u].second);
  return v;
}

Matrix skew_from_vector(const Vector& v, int d,
                        const std::vector<std::pair<int, int>>& pairs) {
  Matrix X = Matrix::Zero(d, d);
  for (size_t u = 0; u < pairs.size(); ++u) {
    X(pairs[u].first, pairs[u].second) = v(u);
    X(pairs[u].second, pairs[u].first) = -v(u);
  }
  return X;
}

// Canonical admissible J for the coefficient vector: J_{ab} = sum_g
// eps_{abg} c_g, which spans {J skew : J c = 0} for c != 0.
Eigen::Matrix3d canonical_j(const Eigen::Vector3d& c) {
  Eigen::Matrix3d J;
  J << 0.0, c(2), -c(1), -c(2), 0.0, c(0), c(1), -c(0), 0.0;
  return J;
}

// Least-squares machinery expressing skew matrices over the basis X-parts.
struct SpanProjector {
  std::vector<std::pair<int, int>> pairs;
  Matrix columns;  // vectorized basis X-parts
  Eigen::ColPivHouseholderQR<Matrix> qr;

  explicit SpanProjector(const LieAlgebraBasis& B)
      : pairs(lower_pairs(B.dim)), columns(pairs.size(), B.basis.size()) {
    for (size_t i = 0; i < B.basis.size(); ++i)
      columns.col(i) = vectorize_skew(B.basis[i].X, pairs);
    qr.compute(columns);
  }

  // Coefficients and Frobenius residual of projecting X onto the span.
  std::pair<Vector, double> project(const Matrix& X) const {
    Vector b = vectorize_skew(X, pairs);
    Vector coeffs = qr.solve(b);
    double residual = std::sqrt(2.0) * (columns * coeffs - b).norm();
    return {coeffs, residual};
  }
};

std::pair<std::vector<Matrix>, double> bracket_table(
    const LieAlgebraBasis& B, const SpanProjector& projector) {
  const int N = static_cast<int>(B.basis.size());
  std::vector<Matrix> constants(N, Matrix::Zero(N, N));
  double worst = 0.0;
  for (int i = 0; i < N; ++i) {
    for (int j = i + 1; j < N; ++j) {
      Matrix bracket =
          B.basis[i].X * B.basis[j].X - B.basis[j].X * B.basis[i].X;
      auto [coeffs, residual] = projector.project(bracket);
      worst = std::max(worst, residual);
      for (int k = 0; k < N; ++k) {
        constants[k](i, j) = coeffs(k);
        constants[k](j, i) = -coeffs(k);
      }
    }
  }
  return {constants, worst};
}

}  // namespace

LieAlgebraBasis solve_invariance(const StructureTriple& S,
                                 const Eigen::Vector3d& c, double rel_tol) {
  QuaternionicReport check = verify_quaternionic(S, 1e-8);
  if (!check.ok)
    throw StructuralError("invariance solver requires a valid structure triple");
  if (c.norm() <= 1e-14)
    throw NumericalError(
        "degenerate system: zero coefficients make the field vanish and the "
        "invariance algebra all of so(4n)");

  const int d = S.dim;
  const std::vector<std::pair<int, int>> pairs = lower_pairs(d);
  const int m = static_cast<int>(pairs.size());
  const Eigen::Matrix3d Jc = canonical_j(c);

  // Unknowns: the strict lower triangle of X, then one scalar s with
  // J = s * Jc. Equations: all entries of [X, L_a] - sum_b J_{ab} L_b.
  Matrix A = Matrix::Zero(3 * d * d, m + 1);
  for (int a = 0; a < 3; ++a) {
    const Matrix& L = S.L[a];
    for (int u = 0; u < m; ++u) {
      auto [i, j] = pairs[u];
      // [E_ij - E_ji, L] affects row i (+L_j:), row j (-L_i:), column i
      // (+L_:j), column j (-L_:i).
      for (int q = 0; q < d; ++q) {
        A(a * d * d + i * d + q, u) += L(j, q);
        A(a * d * d + j * d + q, u) -= L(i, q);
      }
      for (int p = 0; p < d; ++p) {
        A(a * d * d + p * d + i, u) += L(p, j);
        A(a * d * d + p * d + j, u) -= L(p, i);
      }
    }
    Matrix rhs = Matrix::Zero(d, d);
    for (int b = 0; b < 3; ++b) rhs += Jc(a, b) * S.L[b];
    for (int p = 0; p < d; ++p)
      for (int q = 0; q < d; ++q) A(a * d * d + p * d + q, m) = -rhs(p, q);
  }

  // JacobiSVD: BDCSVD misorders small singular values on these stacked
  // commutator matrices and can emit non-orthogonal V columns.
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const double cutoff = rel_tol * sv(0);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) ++rank;
  const int nullity = static_cast<int>(sv.size()) - rank;
  if (nullity == 0)
    throw NumericalError("invariance solver found no solutions; expected at least the rotation generator");

  LieAlgebraBasis B;
  B.dim = d;
  B.c = c;
  B.smallest_kept = rank > 0 ? sv(rank - 1) : 0.0;
  B.largest_discarded = sv(rank);
  for (int i = rank; i < sv.size(); ++i) {
    Vector v = svd.matrixV().col(i);
    InvarianceSolution sol;
    sol.X = skew_from_vector(v.head(m), d, pairs);
    sol.J = v(m) * Jc;
    B.basis.push_back(std::move(sol));
  }

  SpanProjector projector(B);
  auto [constants, residual] = bracket_table(B, projector);
  (void)residual;
  B.structure_constants = std::move(constants);
  return B;
}

SplitComponents split_components(const LieAlgebraBasis& B,
                                 const Eigen::Vector3d& c, double tol) {
  if (B.basis.empty())
    throw StructuralError("cannot split an empty basis");
  const int N = static_cast<int>(B.basis.size());
  const Eigen::Matrix3d Jc = canonical_j(c);
  const double jc_sq = Jc.squaredNorm();
  if (jc_sq <= 0.0)
    throw NumericalError("coefficient vector is zero; no rotation component exists");

  // Scalar s_i with J_i = s_i Jc.
  Vector s(N);
  for (int i = 0; i < N; ++i)
    s(i) = (B.basis[i].J.array() * Jc.array()).sum() / jc_sq;
  if (s.cwiseAbs().maxCoeff() <= tol)
    throw NumericalError("no rotation component found in the solved basis");

  auto combine = [&](const Vector& w) {
    InvarianceSolution out;
    out.X = Matrix::Zero(B.dim, B.dim);
    out.J.setZero();
    for (int i = 0; i < N; ++i) {
      out.X += w(i) * B.basis[i].X;
      out.J += w(i) * B.basis[i].J;
    }
    return out;
  };

  // Coefficient directions orthogonal to s span the J = 0 solutions.
  Eigen::HouseholderQR<Matrix> qr(s);
  Matrix Q = qr.householderQ();
  SplitComponents split;
  for (int i = 1; i < N; ++i) split.commutant.push_back(combine(Q.col(i)));

  // s . w = 1 makes J equal the canonical form exactly.
  InvarianceSolution gen = combine(s / s.squaredNorm());
  gen.J = Jc;
  if (!split.commutant.empty()) {
    // The rotation part and the commutant are trace-orthogonal ideals;
    // removing the commutant component leaves the canonical generator.
    std::vector<std::pair<int, int>> pairs = lower_pairs(B.dim);
    Matrix cols(pairs.size(), split.commutant.size());
    for (size_t i = 0; i < split.commutant.size(); ++i)
      cols.col(i) = vectorize_skew(split.commutant[i].X, pairs);
    Vector b = vectorize_skew(gen.X, pairs);
    Vector coeffs = Eigen::ColPivHouseholderQR<Matrix>(cols).solve(b);
    gen.X = skew_from_vector(b - cols * coeffs, B.dim, pairs);
  }
  split.rotation_generator = std::move(gen);
  return split;
}

ClosureReport closure_check(const LieAlgebraBasis& B, double tol) {
  if (B.basis.empty())
    throw StructuralError("closure check requires a nonempty basis");
  SpanProjector projector(B);
  auto [constants, worst] = bracket_table(B, projector);

  ClosureReport report;
  report.max_residual = worst;
  report.structure_constants = std::move(constants);

  // A basis with no rotation component (every J = 0) has nothing to check
  // against; the commutation residual stays zero.
  try {
    SplitComponents split = split_components(B, B.c, tol);
    const Matrix& G = split.rotation_generator.X;
    for (const InvarianceSolution& sol : split.commutant)
      report.commutation_residual =
          std::max(report.commutation_residual,
                   max_abs(G * sol.X - sol.X * G));
  } catch (const NumericalError&) {
  }

  if (report.max_residual > tol)
    throw NumericalError("bracket left the solved span: the basis does not close");
  return report;
}

double equivariance_check(const VectorField& field,
                          const std::vector<Matrix>& generators,
                          const std::vector<Vector>& samples) {
  constexpr double h = 1e-6;
  double worst = 0.0;
  for (const Matrix& A : generators) {
    if (max_abs(A + A.transpose()) > 1e-12)
      throw StructuralError("equivariance generators must be skew");
    for (const Vector& x : samples) {
      Vector v = A * x;
      Vector push = A * field(x);
      Vector df = (field(x + h * v) - field(x - h * v)) / (2.0 * h);
      worst = std::max(worst, (push - df).norm());
    }
  }
  return worst;
}

DetectionReport detect_oscillator(const VectorField& field,
                                  const StructureTriple& S,
                                  const std::vector<Vector>& samples) {
  if (S.signature.empty())
    throw StructuralError("detection requires a structure assembled from standard blocks");
  StructureTriple standard = assemble_block_structure(S.signature);
  for (int a = 0; a < 3; ++a)
    if (max_abs(S.L[a] - standard.L[a]) > 1e-12)
      throw StructuralError("detection requires the standard block-diagonal structure");
  const int n = S.blocks();
  const int d = S.dim;

  DetectionReport report;

  // Partners L_a x share every block radius with x, giving each sample an
  // equal-radius group for the consistency check.
  std::vector<Vector> points;
  for (const Vector& x : samples) {
    if (x.size() != d)
      throw StructuralError("sample dimension mismatch");
    points.push_back(x);
    for (int a = 0; a < 3; ++a) points.push_back(S.L[a] * x);
  }

  struct Estimate {
    Vector radii;
    std::vector<std::array<double, 3>> c;  // per block
  };
  std::vector<Estimate> estimates;

  double residual = 0.0;
  for (const Vector& x : points) {
    Vector rho(n);
    bool degenerate = false;
    for (int k = 0; k < n; ++k) {
      rho(k) = x.segment(4 * k, 4).squaredNorm();
      if (rho(k) <= 1e-12) degenerate = true;
    }
    if (degenerate) {
      ++report.skipped_samples;
      continue;
    }
    Vector f = field(x);
    if (f.size() != d)
      throw StructuralError("field value dimension mismatch");
    Estimate est;
    est.radii = rho;
    est.c.resize(n);
    Vector recon = Vector::Zero(d);
    for (int k = 0; k < n; ++k) {
      for (int a = 0; a < 3; ++a) {
        Vector lx = S.L[a].block(4 * k, 4 * k, 4, 4) * x.segment(4 * k, 4);
        double coeff = f.segment(4 * k, 4).dot(lx) / rho(k);
        est.c[k][a] = coeff;
        recon.segment(4 * k, 4) += coeff * lx;
      }
    }
    double scale = f.norm();
    residual = std::max(residual,
                        scale > 0.0 ? (f - recon).norm() / scale : 0.0);
    estimates.push_back(std::move(est));
  }
  if (estimates.empty())
    throw NumericalError("every sample had a block at the origin; nothing to detect");
  report.residual = residual;

  // Group estimates by radii (tolerance 1e-9) and measure the spread of the
  // recovered coefficients within each group.
  std::vector<int> order(estimates.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    for (int k = 0; k < n; ++k) {
      if (estimates[a].radii(k) < estimates[b].radii(k) - 1e-15) return true;
      if (estimates[a].radii(k) > estimates[b].radii(k) + 1e-15) return false;
    }
    return false;
  });
  double consistency = 0.0;
  size_t group_start = 0;
  auto same_radii = [&](int a, int b) {
    return (estimates[a].radii - estimates[b].radii).cwiseAbs().maxCoeff() <=
           1e-9;
  };
  for (size_t i = 1; i <= order.size(); ++i) {
    if (i < order.size() && same_radii(order[group_start], order[i])) continue;
    const Estimate& head = estimates[order[group_start]];
    for (int k = 0; k < n; ++k) {
      ProfileEstimate pe;
      pe.block = k;
      pe.radii = head.radii;
      pe.c = head.c[k];
      report.estimates.push_back(pe);
      for (size_t j = group_start; j < i; ++j)
        for (int a = 0; a < 3; ++a)
          consistency = std::max(
              consistency,
              std::abs(estimates[order[j]].c[k][a] - head.c[k][a]));
    }
    group_start = i;
  }
  report.consistency = consistency;

  // The oscillator field commutes with the blockwise action of each block's
  // dual triple.
  std::vector<Matrix> dual_generators;
  for (int k = 0; k < n; ++k) {
    StructureTriple dual = standard_triple(
        S.signature[k] == Orientation::Positive ? Orientation::Negative
                                                : Orientation::Positive);
    for (int a = 0; a < 3; ++a) {
      Matrix G = Matrix::Zero(d, d);
      G.block(4 * k, 4 * k, 4, 4) = dual.L[a];
      dual_generators.push_back(G);
    }
  }
  report.equivariance_residual =
      equivariance_check(field, dual_generators, samples);

  report.oscillator = report.residual <= 1e-8 &&
                      report.consistency <= 1e-8 &&
                      report.equivariance_residual <= 1e-6;
  return report;
}

}  // namespace hyperflow
