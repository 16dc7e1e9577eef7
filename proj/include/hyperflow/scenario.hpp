#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hyperflow/hamiltonian.hpp"
#include "hyperflow/types.hpp"

namespace hyperflow {

struct TimeSpec {
  double t_end = 10.0;
  double dt = 1e-3;
  int sample_stride = 1;
};

// A validated scenario file. Expressions are parsed against dim 4n at load
// time; schema violations carry the offending field path.
struct Scenario {
  int n = 0;
  std::vector<Orientation> signature;  // length n
  std::optional<FrequencyProfile> profile;
  std::optional<ScalarExpression> f0;
  std::optional<HamiltonianTriple> hamiltonians;
  std::optional<std::array<Matrix, 3>> structure;  // explicit matrices
  std::vector<Vector> initial_conditions;
  TimeSpec time;
  Vector rho;  // radii at which CLI symmetry evaluates the profile
  int samples = 20;
  std::uint64_t seed = 12345;
  bool radii_output = false;
  bool q_output = false;

  int dim() const { return 4 * n; }
};

Scenario load_scenario(const std::string& path);

}  // namespace hyperflow
