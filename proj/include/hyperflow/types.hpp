#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace hyperflow {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Orientation of a four-dimensional structure block, fixed by the common
// sign of the Pfaffians of its three generators.
enum class Orientation { Positive, Negative };

inline const char* to_string(Orientation o) {
  return o == Orientation::Positive ? "positive" : "negative";
}

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Ill-formed input: dimension mismatches, invalid structures, malformed
// scenarios. Mapped to CLI exit code 2.
class StructuralError : public Error {
 public:
  explicit StructuralError(const std::string& what) : Error(what) {}
};

// Scenario file violates the schema; carries the offending field path.
class SchemaError : public StructuralError {
 public:
  SchemaError(const std::string& field, const std::string& what)
      : StructuralError("field '" + field + "': " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Expression text rejected by the parser; carries the 0-based offset of the
// offending token in the input.
class ParseError : public Error {
 public:
  ParseError(std::size_t offset, const std::string& what)
      : Error(what + " at offset " + std::to_string(offset)),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Numerical failure: divergence, degeneracy, inconsistent data. Mapped to
// CLI exit code 3.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(what) {}
};

// Levi-Civita symbol on {0,1,2}.
inline int epsilon3(int a, int b, int c) {
  if (a == b || b == c || a == c) return 0;
  if ((a + 1) % 3 == b) return 1;
  return -1;
}

// Entrywise maximum absolute value.
inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace hyperflow
