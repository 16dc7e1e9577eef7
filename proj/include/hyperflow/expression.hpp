#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hyperflow/types.hpp"

namespace hyperflow {

// Exact rational number with overflow-checked arithmetic.
class Rational {
 public:
  Rational() = default;
  Rational(long long num, long long den = 1);

  long long num() const { return num_; }
  long long den() const { return den_; }
  bool is_zero() const { return num_ == 0; }
  double value() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  std::string text() const;

  Rational operator-() const;
  Rational operator+(const Rational& o) const;
  Rational operator-(const Rational& o) const;
  Rational operator*(const Rational& o) const;
  bool operator==(const Rational& o) const {
    return num_ == o.num_ && den_ == o.den_;
  }

 private:
  long long num_ = 0;
  long long den_ = 1;  // > 0, coprime with num_
};

// A polynomial with rational coefficients in the coordinates x1..x{4n} and
// the block radius symbols r1..rn, where rk stands for the squared norm of
// the k-th coordinate block. Immutable after construction; copies share the
// underlying representation.
class ScalarExpression {
 public:
  ScalarExpression() = default;

  // Parses the expression grammar over 4n coordinates. Errors carry the
  // 0-based offset of the offending token.
  static ScalarExpression parse(std::string_view text, int dim);

  // Polynomial sum_j coeffs[j] * (r1+...+rn)^j on R^{4n}.
  static ScalarExpression sum_radial_polynomial(
      const std::vector<Rational>& coeffs, int dim);

  bool empty() const { return impl_ == nullptr; }
  int dim() const;      // 4n
  int blocks() const;   // n

  // Evaluation in the radius form: block radii are computed once from x and
  // substituted for the r symbols.
  double evaluate(const Vector& x) const;

  // Evaluation of the fully expanded coordinate form; agrees with evaluate()
  // to roundoff.
  double evaluate_expanded(const Vector& x) const;

  // Evaluation at given radius values; requires radial_only().
  double evaluate_radii(const Vector& rho) const;

  // Gradient of the expanded form, by exact differentiation.
  Vector gradient(const Vector& x) const;

  // True when no bare coordinate appears (the expression uses only r1..rn).
  bool radial_only() const;

  // Partial derivative with respect to the symbol r{k+1}; requires
  // radial_only().
  ScalarExpression radial_derivative(int k) const;

  // When the expression is a polynomial in the single variable r1+...+rn,
  // returns its coefficients (index = power); otherwise nullopt. Requires
  // radial_only().
  std::optional<std::vector<Rational>> sum_radial_coefficients() const;

  // Canonical text form (terms in a fixed monomial order).
  std::string text() const;

  struct Impl;

 private:
  explicit ScalarExpression(std::shared_ptr<const Impl> impl);
  std::shared_ptr<const Impl> impl_;
};

}  // namespace hyperflow
