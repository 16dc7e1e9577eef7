#pragma once

#include <array>
#include <optional>
#include <vector>

#include "hyperflow/expression.hpp"
#include "hyperflow/structures.hpp"
#include "hyperflow/types.hpp"

namespace hyperflow {

// Three polynomial Hamiltonians on R^{4n}.
struct HamiltonianTriple {
  int dim = 0;
  std::array<ScalarExpression, 3> H;
};

// Radial frequency profile of an oscillator: three polynomials in the block
// radii r1..rn, plus an optional second triple driving the opposite-
// orientation structure in the two-sided construction.
struct FrequencyProfile {
  int blocks = 0;
  std::array<ScalarExpression, 3> c;
  std::optional<std::array<ScalarExpression, 3>> c_hat;
  std::vector<Orientation> signature;

  int dim() const { return 4 * blocks; }
};

// Velocity sum_a L_a grad H_a(x) of the Hamiltonian triple through the
// structure triple. Dimensions of H, S, and x must agree.
Vector hh_field(const HamiltonianTriple& H, const StructureTriple& S,
                const Vector& x);

// Oscillator velocity sum_a c_a(rho(x)) L_a x. The structure must match the
// profile's block count and signature.
Vector oscillator_field(const FrequencyProfile& P, const StructureTriple& S,
                        const Vector& x);

// Hamiltonians generating the oscillator field of a profile whose components
// depend only on the total radius: c_a = q_a(r1+...+rn) yields
// H_a = (1/2) * integral of q_a. Throws StructuralError when a component is
// not a polynomial in the total radius.
HamiltonianTriple hamiltonians_from_profile(const FrequencyProfile& P);

}  // namespace hyperflow
