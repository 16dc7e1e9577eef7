#include "hyperflow/invariants.hpp"

#include <cmath>

#include "hyperflow/structures.hpp"

namespace hyperflow {

namespace {

void add_quad(Matrix& m, int i, int j, double coeff) {
  if (i == j) {
    m(i, i) += coeff;
  } else {
    m(i, j) += 0.5 * coeff;
    m(j, i) += 0.5 * coeff;
  }
}

// Symmetric matrices of the six bilinear invariants, as quadratic forms
// x^T M x. The first two coincide with Q2 and Q3.
std::array<Matrix, 6> b_forms(const Eigen::Vector3d& c) {
  std::array<Matrix, 6> out;
  for (Matrix& m : out) m = Matrix::Zero(4, 4);
  // B12 = c1(x1^2+x2^2) + c3(x2x3+x1x4) + c2(x2x4-x1x3)
  add_quad(out[0], 0, 0, c(0));
  add_quad(out[0], 1, 1, c(0));
  add_quad(out[0], 1, 2, c(2));
  add_quad(out[0], 0, 3, c(2));
  add_quad(out[0], 1, 3, c(1));
  add_quad(out[0], 0, 2, -c(1));
  // B13 = c3(x1^2+x3^2) + c2(x1x2+x3x4) + c1(x2x3-x1x4)
  add_quad(out[1], 0, 0, c(2));
  add_quad(out[1], 2, 2, c(2));
  add_quad(out[1], 0, 1, c(1));
  add_quad(out[1], 2, 3, c(1));
  add_quad(out[1], 1, 2, c(0));
  add_quad(out[1], 0, 3, -c(0));
  // B14 = c2(x1^2+x4^2) + c1(x1x3+x2x4) - c3(x1x2-x3x4)
  add_quad(out[2], 0, 0, c(1));
  add_quad(out[2], 3, 3, c(1));
  add_quad(out[2], 0, 2, c(0));
  add_quad(out[2], 1, 3, c(0));
  add_quad(out[2], 0, 1, -c(2));
  add_quad(out[2], 2, 3, c(2));
  // B23 = c2(x2^2+x3^2) - c1(x1x3+x2x4) + c3(x1x2-x3x4)
  add_quad(out[3], 1, 1, c(1));
  add_quad(out[3], 2, 2, c(1));
  add_quad(out[3], 0, 2, -c(0));
  add_quad(out[3], 1, 3, -c(0));
  add_quad(out[3], 0, 1, c(2));
  add_quad(out[3], 2, 3, -c(2));
  // B24 = c3(x2^2+x4^2) + c1(x1x4-x2x3) - c2(x1x2+x3x4)
  add_quad(out[4], 1, 1, c(2));
  add_quad(out[4], 3, 3, c(2));
  add_quad(out[4], 0, 3, c(0));
  add_quad(out[4], 1, 2, -c(0));
  add_quad(out[4], 0, 1, -c(1));
  add_quad(out[4], 2, 3, -c(1));
  // B34 = c1(x3^2+x4^2) - c3(x2x3+x1x4) + c2(x1x3-x2x4)
  add_quad(out[5], 2, 2, c(0));
  add_quad(out[5], 3, 3, c(0));
  add_quad(out[5], 1, 2, -c(2));
  add_quad(out[5], 0, 3, -c(2));
  add_quad(out[5], 0, 2, c(1));
  add_quad(out[5], 1, 3, -c(1));
  return out;
}

void check_dim4(const Vector& x) {
  if (x.size() != 4)
    throw StructuralError("invariant formulas are four-dimensional");
}

// Rotation taking the standard negative triple onto the standard positive
// one: x -> (x1, x3, -x2, -x4).
Matrix negative_to_positive_map() {
  Matrix g = Matrix::Zero(4, 4);
  g(0, 0) = 1;
  g(1, 2) = 1;
  g(2, 1) = -1;
  g(3, 3) = -1;
  return g;
}

double drift_of(const std::vector<double>& values) {
  double v0 = values.front();
  double scale = std::max(1.0, std::abs(v0));
  double worst = 0.0;
  for (double v : values) worst = std::max(worst, std::abs(v - v0) / scale);
  return worst;
}

}  // namespace

Vector block_radii(const Vector& x) {
  if (x.size() == 0 || x.size() % 4 != 0)
    throw StructuralError("state dimension must be a positive multiple of 4");
  Vector rho(x.size() / 4);
  for (int k = 0; k < rho.size(); ++k)
    rho(k) = x.segment(4 * k, 4).squaredNorm();
  return rho;
}

QInvariants q_invariants(const Vector& x, const Eigen::Vector3d& c) {
  check_dim4(x);
  std::array<Matrix, 6> forms = b_forms(c);
  return {x.dot(forms[0] * x), x.dot(forms[1] * x)};
}

std::array<double, 6> b_invariants(const Vector& x, const Eigen::Vector3d& c) {
  check_dim4(x);
  std::array<Matrix, 6> forms = b_forms(c);
  std::array<double, 6> out;
  for (int i = 0; i < 6; ++i) out[i] = x.dot(forms[i] * x);
  return out;
}

int independence_rank(const Vector& x, const Eigen::Vector3d& c,
                      double rel_tol) {
  check_dim4(x);
  std::array<Matrix, 6> forms = b_forms(c);
  Matrix jac(7, 4);
  jac.row(0) = 2.0 * x.transpose();
  for (int i = 0; i < 6; ++i) jac.row(i + 1) = 2.0 * (forms[i] * x).transpose();
  Eigen::JacobiSVD<Matrix> svd(jac);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > rel_tol * sv(0)) ++rank;
  return rank;
}

ActionSpin action_spin(const Vector& x) {
  Vector rho = block_radii(x);
  ActionSpin as;
  as.actions = rho;
  for (int k = 0; k < rho.size(); ++k) {
    if (rho(k) <= 0.0)
      throw NumericalError("action-spin chart is singular at a block origin");
    as.spins.push_back(x.segment(4 * k, 4) / std::sqrt(rho(k)));
  }
  return as;
}

Vector action_spin_inverse(const ActionSpin& as) {
  const int n = static_cast<int>(as.actions.size());
  if (static_cast<int>(as.spins.size()) != n)
    throw StructuralError("action and spin counts disagree");
  Vector x(4 * n);
  for (int k = 0; k < n; ++k)
    x.segment(4 * k, 4) = std::sqrt(as.actions(k)) * as.spins[k];
  return x;
}

std::vector<InvariantReport> conservation_report(const Trajectory& traj,
                                                 const SystemDescriptor& sys) {
  if (traj.states.empty())
    throw StructuralError("conservation report requires a nonempty trajectory");
  const int dim = traj.dim();
  const int n = dim / 4;
  if (dim == 0 || dim % 4 != 0)
    throw StructuralError("trajectory dimension must be a positive multiple of 4");

  std::vector<InvariantReport> reports;
  for (int k = 0; k < n; ++k) {
    InvariantReport rep;
    rep.name = "rho" + std::to_string(k + 1);
    rep.values.reserve(traj.states.size());
    for (const Vector& x : traj.states)
      rep.values.push_back(x.segment(4 * k, 4).squaredNorm());
    rep.max_drift = drift_of(rep.values);
    reports.push_back(std::move(rep));
  }

  if (dim == 4 && sys.c) {
    bool negative = !sys.signature.empty() &&
                    sys.signature.front() == Orientation::Negative;
    Matrix map = negative ? negative_to_positive_map()
                          : Matrix(Matrix::Identity(4, 4));
    std::array<Matrix, 6> forms = b_forms(*sys.c);
    const char* names[8] = {"Q2", "Q3", "B12", "B13", "B14", "B23", "B24", "B34"};
    // Q2 and Q3 are the first two bilinear forms.
    int form_of[8] = {0, 1, 0, 1, 2, 3, 4, 5};
    for (int i = 0; i < 8; ++i) {
      InvariantReport rep;
      rep.name = names[i];
      rep.values.reserve(traj.states.size());
      for (const Vector& x : traj.states) {
        Vector y = map * x;
        rep.values.push_back(y.dot(forms[form_of[i]] * y));
      }
      rep.max_drift = drift_of(rep.values);
      reports.push_back(std::move(rep));
    }
  }
  return reports;
}

double hopf_check(const Trajectory& traj, const OscillatorSystem& sys) {
  if (traj.states.empty())
    throw StructuralError("great-circle check requires a nonempty trajectory");
  if (traj.dim() != sys.structure.dim)
    throw StructuralError("trajectory and system dimensions disagree");

  const Vector& x0 = traj.states.front();
  Vector rho = block_radii(x0);
  Eigen::Vector3d c;
  for (int a = 0; a < 3; ++a) c(a) = sys.profile.c[a].evaluate_radii(rho);
  if (c.norm() <= 1e-14) return 0.0;
  Matrix L = Matrix::Zero(sys.structure.dim, sys.structure.dim);
  for (int a = 0; a < 3; ++a) L += c(a) * sys.structure.L[a];
  Vector v0 = L * x0;

  double worst = 0.0;
  for (int k = 0; k < rho.size(); ++k) {
    if (rho(k) <= 1e-28) continue;
    Vector u1 = x0.segment(4 * k, 4).normalized();
    Vector w = v0.segment(4 * k, 4);
    w -= w.dot(u1) * u1;
    if (w.norm() <= 1e-14) continue;
    Vector u2 = w.normalized();
    for (const Vector& x : traj.states) {
      Vector b = x.segment(4 * k, 4);
      Vector res = b - b.dot(u1) * u1 - b.dot(u2) * u2;
      worst = std::max(worst, res.norm());
    }
  }
  return worst;
}

}  // namespace hyperflow
