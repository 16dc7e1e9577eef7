#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hyperflow/flows.hpp"
#include "hyperflow/invariants.hpp"
#include "hyperflow/types.hpp"

namespace hyperflow {

// Decimal formatting with 17 significant digits (round-trips IEEE doubles).
std::string format_full(double v);

struct TrajectoryColumns {
  bool radii = false;
  bool q = false;  // Q2, Q3 columns; requires c and dim 4
  std::optional<Eigen::Vector3d> c;
  std::vector<Orientation> signature;
};

// CSV with header t,x1,...,x{4n} and optional rho1..rhon,Q2,Q3 columns.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj,
                          const TrajectoryColumns& columns);

// The same content as a JSON object {"columns": [...], "rows": [[...]]}.
std::string trajectory_json(const Trajectory& traj,
                            const TrajectoryColumns& columns);

}  // namespace hyperflow
