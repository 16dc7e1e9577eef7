#include "hyperflow/flows.hpp"

#include <algorithm>
#include <cmath>

namespace hyperflow {

namespace {

constexpr double kZeroFrequency = 1e-14;

Vector block_radii_of(const Vector& x) {
  Vector rho(x.size() / 4);
  for (int k = 0; k < rho.size(); ++k)
    rho(k) = x.segment(4 * k, 4).squaredNorm();
  return rho;
}

void check_times(const std::vector<double>& times) {
  if (times.empty()) throw StructuralError("time grid must be nonempty");
  for (size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1]))
      throw StructuralError("time grid must be strictly increasing");
}

std::array<double, 3> evaluate_triple(const std::array<ScalarExpression, 3>& c,
                                      const Vector& rho) {
  return {c[0].evaluate_radii(rho), c[1].evaluate_radii(rho),
          c[2].evaluate_radii(rho)};
}

// Block-diagonal generator sum_a w_a L_a of the triple S.
Matrix weighted_generator(const StructureTriple& S,
                          const std::array<double, 3>& w) {
  Matrix L = Matrix::Zero(S.dim, S.dim);
  for (int a = 0; a < 3; ++a) L += w[a] * S.L[a];
  return L;
}

// Rotation cos(nu t) I + sin(nu t)/nu L for L = sum_a w_a L_a with
// nu = |w|; identity when the frequency vanishes.
Matrix uniform_rotation(const StructureTriple& S, const std::array<double, 3>& w,
                        double t) {
  double nu = std::sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2]);
  if (nu <= kZeroFrequency) return Matrix::Identity(S.dim, S.dim);
  return std::cos(nu * t) * Matrix::Identity(S.dim, S.dim) +
         (std::sin(nu * t) / nu) * weighted_generator(S, w);
}

}  // namespace

std::vector<double> sample_times(double t_end, double dt, int stride) {
  if (!(t_end > 0) || !(dt > 0) || stride < 1)
    throw StructuralError("time grid requires t_end > 0, dt > 0, stride >= 1");
  double step = dt * stride;
  std::vector<double> times{0.0};
  for (double t = step; t < t_end - 1e-12 * std::max(1.0, t_end); t += step)
    times.push_back(t);
  times.push_back(t_end);
  return times;
}

Matrix flow_matrix(const Matrix& L, double t, double tol) {
  if (L.rows() != L.cols() || L.rows() % 4 != 0 || L.rows() == 0)
    throw StructuralError("flow generator must be square with dimension a multiple of 4");
  const int d = static_cast<int>(L.rows());
  double nu_sq = L.squaredNorm() / d;
  double defect = max_abs(L * L + nu_sq * Matrix::Identity(d, d));
  if (defect > tol * std::max(1.0, nu_sq))
    throw StructuralError("generator squared is not a negative multiple of the identity");
  double nu = std::sqrt(nu_sq);
  if (nu <= tol)
    throw NumericalError("zero-frequency generator has no normalized rotation");
  return std::cos(nu * t) * Matrix::Identity(d, d) +
         (std::sin(nu * t) / nu) * L;
}

Trajectory closed_form_flow(const OscillatorSystem& sys, const Vector& x0,
                            const std::vector<double>& times) {
  check_times(times);
  if (x0.size() != sys.structure.dim)
    throw StructuralError("initial state dimension mismatch");
  Vector rho = block_radii_of(x0);
  std::array<double, 3> c = evaluate_triple(sys.profile.c, rho);

  Trajectory traj;
  traj.method = FlowMethod::ClosedForm;
  traj.times = times;
  traj.states.reserve(times.size());
  for (double t : times)
    traj.states.push_back(uniform_rotation(sys.structure, c, t) * x0);
  if (times.size() > 1) traj.step = times[1] - times[0];
  return traj;
}

Vector dirac_field(const DiracSystem& sys, const Vector& x) {
  if (x.size() != sys.dim())
    throw StructuralError("state dimension mismatch");
  std::vector<Orientation> pos(sys.blocks, Orientation::Positive);
  std::vector<Orientation> neg(sys.blocks, Orientation::Negative);
  StructureTriple Y = assemble_block_structure(pos);
  StructureTriple Yhat = assemble_block_structure(neg);
  Vector rho = block_radii_of(x);
  std::array<double, 3> c = evaluate_triple(sys.c, rho);
  std::array<double, 3> ch = evaluate_triple(sys.c_hat, rho);
  return weighted_generator(Y, c) * x + weighted_generator(Yhat, ch) * x;
}

Trajectory dirac_flow(const DiracSystem& sys, const Vector& x0,
                      const std::vector<double>& times) {
  check_times(times);
  if (x0.size() != sys.dim())
    throw StructuralError("initial state dimension mismatch");
  std::vector<Orientation> pos(sys.blocks, Orientation::Positive);
  std::vector<Orientation> neg(sys.blocks, Orientation::Negative);
  StructureTriple Y = assemble_block_structure(pos);
  StructureTriple Yhat = assemble_block_structure(neg);
  Vector rho = block_radii_of(x0);
  std::array<double, 3> c = evaluate_triple(sys.c, rho);
  std::array<double, 3> ch = evaluate_triple(sys.c_hat, rho);

  Trajectory traj;
  traj.method = FlowMethod::Dirac;
  traj.times = times;
  traj.states.reserve(times.size());
  for (double t : times)
    traj.states.push_back(uniform_rotation(Y, c, t) *
                          (uniform_rotation(Yhat, ch, t) * x0));
  if (times.size() > 1) traj.step = times[1] - times[0];
  return traj;
}

WalcherReport walcher_check(const DiracSystem& sys, const Vector& x0, double t,
                            double dt) {
  if (!(t > 0) || !(dt > 0))
    throw StructuralError("walcher check requires t > 0 and dt > 0");
  if (x0.size() != sys.dim())
    throw StructuralError("initial state dimension mismatch");
  std::vector<Orientation> pos(sys.blocks, Orientation::Positive);
  std::vector<Orientation> neg(sys.blocks, Orientation::Negative);
  StructureTriple Y = assemble_block_structure(pos);
  StructureTriple Yhat = assemble_block_structure(neg);

  Vector rho0 = block_radii_of(x0);
  std::array<double, 3> c = evaluate_triple(sys.c, rho0);
  std::array<double, 3> ch = evaluate_triple(sys.c_hat, rho0);
  double nu_p = std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]);
  double nu_m = std::sqrt(ch[0] * ch[0] + ch[1] * ch[1] + ch[2] * ch[2]);

  WalcherReport report;
  if (nu_p > kZeroFrequency && nu_m > kZeroFrequency) {
    std::array<double, 3> cw = {c[0] / nu_p, c[1] / nu_p, c[2] / nu_p};
    std::array<double, 3> chw = {ch[0] / nu_m, ch[1] / nu_m, ch[2] / nu_m};
    Matrix Kp = weighted_generator(Y, cw);
    Matrix Km = weighted_generator(Yhat, chw);
    Matrix commutator = Kp * Km - Km * Kp;
    Trajectory samples = dirac_flow(sys, x0, sample_times(t, dt));
    for (const Vector& x : samples.states)
      report.commutator_residual =
          std::max(report.commutator_residual, (commutator * x).norm());
  }

  // One factor flow for the full time t, coefficients read at the issuing
  // point; block radii are conserved, so no sub-stepping is needed.
  auto factor_flow = [&](const StructureTriple& S,
                         const std::array<ScalarExpression, 3>& coeffs,
                         const Vector& x) {
    return Vector(uniform_rotation(S, evaluate_triple(coeffs, block_radii_of(x)), t) * x);
  };

  Vector pm = factor_flow(Yhat, sys.c_hat, factor_flow(Y, sys.c, x0));
  Vector mp = factor_flow(Y, sys.c, factor_flow(Yhat, sys.c_hat, x0));
  report.flow_mismatch = (pm - mp).norm();
  return report;
}

Trajectory integrate_rk4(const VectorField& field, const Vector& x0,
                         double t_end, double dt, int stride) {
  if (!(t_end > 0) || !(dt > 0) || stride < 1)
    throw StructuralError("integration requires t_end > 0, dt > 0, stride >= 1");

  Trajectory traj;
  traj.method = FlowMethod::RK4;
  traj.step = dt;
  traj.times.push_back(0.0);
  traj.states.push_back(x0);

  Vector x = x0;
  double t = 0.0;
  long step_index = 0;
  while (t < t_end - 1e-15 * std::max(1.0, t_end)) {
    double h = std::min(dt, t_end - t);
    Vector k1 = field(x);
    Vector k2 = field(x + 0.5 * h * k1);
    Vector k3 = field(x + 0.5 * h * k2);
    Vector k4 = field(x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t += h;
    ++step_index;
    if (!x.allFinite())
      throw NumericalError("integration diverged at t = " + std::to_string(t));
    bool last = !(t < t_end - 1e-15 * std::max(1.0, t_end));
    if (step_index % stride == 0 || last) {
      traj.times.push_back(t);
      traj.states.push_back(x);
    }
  }
  return traj;
}

Vector asymptotic_field(const ScalarExpression& f0, const FrequencyProfile& P,
                        const Vector& x) {
  if (P.blocks != 1 || x.size() != 4)
    throw StructuralError("the radially driven field lives on one block");
  if (f0.empty() || !f0.radial_only() || f0.blocks() != 1)
    throw StructuralError("the radial drive must be a polynomial in r1");
  StructureTriple Y = standard_triple(Orientation::Positive);
  StructureTriple Yhat = standard_triple(Orientation::Negative);
  Vector rho = block_radii_of(x);
  Vector v = f0.evaluate_radii(rho) * x;
  v += weighted_generator(Y, evaluate_triple(P.c, rho)) * x;
  if (P.c_hat)
    v += weighted_generator(Yhat, evaluate_triple(*P.c_hat, rho)) * x;
  return v;
}

std::vector<RadialZero> stable_zeros(const ScalarExpression& f0, double lo,
                                     double hi) {
  if (!(lo < hi) || lo < 0)
    throw StructuralError("zero search requires 0 <= lo < hi");
  if (f0.empty() || !f0.radial_only() || f0.blocks() != 1)
    throw StructuralError("the radial drive must be a polynomial in r1");
  ScalarExpression df = f0.radial_derivative(0);
  auto value = [&](double rho) {
    Vector r(1);
    r(0) = rho;
    return f0.evaluate_radii(r);
  };
  auto slope = [&](double rho) {
    Vector r(1);
    r(0) = rho;
    return df.evaluate_radii(r);
  };

  const int cells = 2048;
  std::vector<RadialZero> zeros;
  auto push_zero = [&](double rho) {
    for (const RadialZero& z : zeros)
      if (std::abs(z.rho - rho) <= 1e-9 * std::max(1.0, std::abs(rho))) return;
    zeros.push_back({rho, slope(rho) < 0.0});
  };

  double prev_rho = lo;
  double prev_val = value(lo);
  if (prev_val == 0.0) push_zero(lo);
  for (int i = 1; i <= cells; ++i) {
    double rho = lo + (hi - lo) * i / cells;
    double val = value(rho);
    if (val == 0.0) {
      push_zero(rho);
    } else if (prev_val != 0.0 && (prev_val < 0) != (val < 0)) {
      double a = prev_rho, b = rho, fa = prev_val;
      for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, b); ++it) {
        double mid = 0.5 * (a + b);
        double fm = value(mid);
        if (fm == 0.0) {
          a = b = mid;
          break;
        }
        if ((fa < 0) != (fm < 0)) {
          b = mid;
        } else {
          a = mid;
          fa = fm;
        }
      }
      push_zero(0.5 * (a + b));
    }
    prev_rho = rho;
    prev_val = val;
  }
  return zeros;
}

}  // namespace hyperflow
