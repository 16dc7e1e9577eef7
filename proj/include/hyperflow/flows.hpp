#pragma once

#include <array>
#include <functional>
#include <vector>

#include "hyperflow/hamiltonian.hpp"
#include "hyperflow/structures.hpp"
#include "hyperflow/types.hpp"

namespace hyperflow {

struct OscillatorSystem {
  StructureTriple structure;
  FrequencyProfile profile;
};

// Two-sided system on R^{4n}: the first triple drives the standard positive
// blocks, the second the standard negative blocks. Blocks beyond the first
// reuse the four-dimensional construction diagonally.
struct DiracSystem {
  int blocks = 1;
  std::array<ScalarExpression, 3> c;
  std::array<ScalarExpression, 3> c_hat;

  int dim() const { return 4 * blocks; }
};

enum class FlowMethod { ClosedForm, Dirac, RK4 };

struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  FlowMethod method = FlowMethod::ClosedForm;
  double step = 0.0;  // integrator step for RK4, sampling step otherwise

  int dim() const { return states.empty() ? 0 : static_cast<int>(states[0].size()); }
};

struct WalcherReport {
  double commutator_residual = 0.0;  // max entry of the factor commutator
  double flow_mismatch = 0.0;        // factor order swap and full-flow gap
};

struct RadialZero {
  double rho = 0.0;
  bool stable = false;
};

using VectorField = std::function<Vector(const Vector&)>;

// Sampling grid {0, dt*stride, 2*dt*stride, ...} up to and including t_end.
std::vector<double> sample_times(double t_end, double dt, int stride = 1);

// exp(t L) for a skew matrix with L^2 = -nu^2 I, nu read off the Frobenius
// norm: cos(nu t) I + sin(nu t)/nu L. Throws StructuralError when L^2 is not
// a negative multiple of the identity within tol and NumericalError when the
// frequency is below tol.
Matrix flow_matrix(const Matrix& L, double t, double tol = 1e-9);

// Trajectory of the oscillator flow at the given times, strictly increasing.
// Block radii are conserved, so coefficients are frozen at the start point
// and each state is a rotation of x0. A zero frequency holds the state
// constant.
Trajectory closed_form_flow(const OscillatorSystem& sys, const Vector& x0,
                            const std::vector<double>& times);

// Velocity of the two-sided system at x.
Vector dirac_field(const DiracSystem& sys, const Vector& x);

// Closed-form trajectory of the two-sided system: the product of the two
// commuting factor rotations, coefficients frozen at x0.
Trajectory dirac_flow(const DiracSystem& sys, const Vector& x0,
                      const std::vector<double>& times);

// Verifies the factorization property: the normalized factor generators
// commute (residual sampled along the flow at steps of dt) and the two
// factor flows compose to the same point in either order at time t.
WalcherReport walcher_check(const DiracSystem& sys, const Vector& x0, double t,
                            double dt);

// Classical fixed-step fourth-order Runge-Kutta; the final step is shortened
// to land on t_end exactly. Records the initial state, every stride-th step,
// and the final state. Throws NumericalError on non-finite states.
Trajectory integrate_rk4(const VectorField& field, const Vector& x0,
                         double t_end, double dt, int stride = 1);

// Four-dimensional field f0(rho) x + sum_a c_a(rho) Y_a x + sum_a
// c_hat_a(rho) Yhat_a x with a radial drive f0; the profile's optional
// second triple is treated as zero when absent.
Vector asymptotic_field(const ScalarExpression& f0, const FrequencyProfile& P,
                        const Vector& x);

// Zeros of f0 on [lo, hi] located by sign change and bisection; a zero is
// stable when f0 crosses it strictly downward.
std::vector<RadialZero> stable_zeros(const ScalarExpression& f0, double lo,
                                     double hi);

}  // namespace hyperflow
