#include "hyperflow/trajectory_io.hpp"

#include <cstdio>

#include <json.hpp>

namespace hyperflow {

namespace {

// Rotation taking the standard negative triple onto the standard positive
// one; the invariant formulas apply in the rotated coordinates.
Matrix q_frame(const std::vector<Orientation>& signature) {
  Matrix g = Matrix::Identity(4, 4);
  if (!signature.empty() && signature.front() == Orientation::Negative) {
    g.setZero();
    g(0, 0) = 1;
    g(1, 2) = 1;
    g(2, 1) = -1;
    g(3, 3) = -1;
  }
  return g;
}

std::vector<std::string> column_names(const Trajectory& traj,
                                      const TrajectoryColumns& columns) {
  const int dim = traj.dim();
  std::vector<std::string> names{"t"};
  for (int i = 0; i < dim; ++i) names.push_back("x" + std::to_string(i + 1));
  if (columns.radii)
    for (int k = 0; k < dim / 4; ++k)
      names.push_back("rho" + std::to_string(k + 1));
  if (columns.q) {
    names.push_back("Q2");
    names.push_back("Q3");
  }
  return names;
}

std::vector<double> row_values(const Trajectory& traj,
                               const TrajectoryColumns& columns, size_t i,
                               const Matrix& frame) {
  const Vector& x = traj.states[i];
  std::vector<double> row{traj.times[i]};
  for (int j = 0; j < x.size(); ++j) row.push_back(x(j));
  if (columns.radii)
    for (int k = 0; k < x.size() / 4; ++k)
      row.push_back(x.segment(4 * k, 4).squaredNorm());
  if (columns.q) {
    Vector y = frame * x;
    QInvariants q = q_invariants(y, *columns.c);
    row.push_back(q.q2);
    row.push_back(q.q3);
  }
  return row;
}

void check_columns(const Trajectory& traj, const TrajectoryColumns& columns) {
  if (traj.states.empty() || traj.times.size() != traj.states.size())
    throw StructuralError("trajectory is empty or inconsistent");
  if (columns.q && (!columns.c || traj.dim() != 4))
    throw StructuralError(
        "Q columns require a four-dimensional system with known coefficients");
}

}  // namespace

std::string format_full(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj,
                          const TrajectoryColumns& columns) {
  check_columns(traj, columns);
  Matrix frame = q_frame(columns.signature);
  std::vector<std::string> names = column_names(traj, columns);
  for (size_t i = 0; i < names.size(); ++i) {
    if (i > 0) out << ',';
    out << names[i];
  }
  out << '\n';
  for (size_t i = 0; i < traj.states.size(); ++i) {
    std::vector<double> row = row_values(traj, columns, i, frame);
    for (size_t j = 0; j < row.size(); ++j) {
      if (j > 0) out << ',';
      out << format_full(row[j]);
    }
    out << '\n';
  }
}

std::string trajectory_json(const Trajectory& traj,
                            const TrajectoryColumns& columns) {
  check_columns(traj, columns);
  Matrix frame = q_frame(columns.signature);
  nlohmann::ordered_json doc;
  doc["columns"] = column_names(traj, columns);
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (size_t i = 0; i < traj.states.size(); ++i)
    rows.push_back(row_values(traj, columns, i, frame));
  doc["rows"] = std::move(rows);
  return doc.dump(2) + "\n";
}

}  // namespace hyperflow
