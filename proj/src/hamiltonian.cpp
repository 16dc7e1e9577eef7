#include "hyperflow/hamiltonian.hpp"

namespace hyperflow {

namespace {

void check_profile(const FrequencyProfile& P) {
  if (P.blocks <= 0)
    throw StructuralError("profile must cover at least one block");
  for (const ScalarExpression& c : P.c) {
    if (c.empty()) throw StructuralError("profile component is empty");
    if (c.dim() != P.dim())
      throw StructuralError("profile component dimension mismatch");
    if (!c.radial_only())
      throw StructuralError("profile components must depend only on block radii");
  }
}

}  // namespace

Vector hh_field(const HamiltonianTriple& H, const StructureTriple& S,
                const Vector& x) {
  if (H.dim != S.dim || x.size() != S.dim)
    throw StructuralError("Hamiltonian, structure, and state dimensions must agree");
  Vector v = Vector::Zero(S.dim);
  for (int a = 0; a < 3; ++a) v += S.L[a] * H.H[a].gradient(x);
  return v;
}

Vector oscillator_field(const FrequencyProfile& P, const StructureTriple& S,
                        const Vector& x) {
  check_profile(P);
  if (S.dim != P.dim() || x.size() != S.dim)
    throw StructuralError("profile, structure, and state dimensions must agree");
  if (!S.signature.empty() && S.signature != P.signature &&
      !P.signature.empty())
    throw StructuralError("profile and structure signatures disagree");
  Vector rho(P.blocks);
  for (int k = 0; k < P.blocks; ++k) rho(k) = x.segment(4 * k, 4).squaredNorm();
  Vector v = Vector::Zero(S.dim);
  for (int a = 0; a < 3; ++a) v += P.c[a].evaluate_radii(rho) * (S.L[a] * x);
  return v;
}

HamiltonianTriple hamiltonians_from_profile(const FrequencyProfile& P) {
  check_profile(P);
  HamiltonianTriple H;
  H.dim = P.dim();
  for (int a = 0; a < 3; ++a) {
    std::optional<std::vector<Rational>> q = P.c[a].sum_radial_coefficients();
    if (!q)
      throw StructuralError(
          "profile component is not a polynomial in the total radius; no "
          "polynomial Hamiltonian of this form exists");
    // c_a = q(sigma) with sigma the total radius gives
    // H_a(sigma) = (1/2) sum_j q_j sigma^{j+1} / (j+1).
    std::vector<Rational> h(q->size() + 1, Rational(0));
    for (size_t j = 0; j < q->size(); ++j)
      h[j + 1] = (*q)[j] * Rational(1, 2 * static_cast<long long>(j + 1));
    H.H[a] = ScalarExpression::sum_radial_polynomial(h, P.dim());
  }
  return H;
}

}  // namespace hyperflow
