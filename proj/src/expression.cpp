#include "hyperflow/expression.hpp"

#include <cctype>
#include <cstdlib>
#include <limits>
#include <map>
#include <numeric>

namespace hyperflow {

namespace {

using Int128 = __int128;

unsigned __int128 gcd128(unsigned __int128 a, unsigned __int128 b) {
  while (b != 0) {
    unsigned __int128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

long long narrow(Int128 v, const char* what) {
  if (v > std::numeric_limits<long long>::max() ||
      v < std::numeric_limits<long long>::min())
    throw NumericalError(std::string("rational overflow in ") + what);
  return static_cast<long long>(v);
}

Rational make_rational(Int128 num, Int128 den, const char* what) {
  if (den == 0) throw NumericalError("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  unsigned __int128 a = num < 0 ? static_cast<unsigned __int128>(-num)
                                : static_cast<unsigned __int128>(num);
  unsigned __int128 g = gcd128(a, static_cast<unsigned __int128>(den));
  if (g > 1) {
    num /= static_cast<Int128>(g);
    den /= static_cast<Int128>(g);
  }
  return Rational(narrow(num, what), narrow(den, what));
}

}  // namespace

Rational::Rational(long long num, long long den) {
  if (den == 0) throw NumericalError("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  long long g = std::gcd(num < 0 ? -num : num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  num_ = num;
  den_ = den;
}

std::string Rational::text() const {
  std::string s = std::to_string(num_);
  if (den_ != 1) s += "/" + std::to_string(den_);
  return s;
}

Rational Rational::operator-() const { return Rational(-num_, den_); }

Rational Rational::operator+(const Rational& o) const {
  return make_rational(
      Int128(num_) * o.den_ + Int128(o.num_) * den_, Int128(den_) * o.den_,
      "addition");
}

Rational Rational::operator-(const Rational& o) const { return *this + (-o); }

Rational Rational::operator*(const Rational& o) const {
  return make_rational(Int128(num_) * o.num_, Int128(den_) * o.den_,
                       "multiplication");
}

namespace {

// Monomial exponents: slots [0, nx) are coordinates, slots [nx, nx+nr) are
// block radius symbols.
using Mono = std::vector<uint16_t>;
using Poly = std::map<Mono, Rational>;

constexpr unsigned kMaxExponent = 512;

void add_term(Poly& p, const Mono& m, const Rational& c) {
  if (c.is_zero()) return;
  auto it = p.find(m);
  if (it == p.end()) {
    p.emplace(m, c);
  } else {
    it->second = it->second + c;
    if (it->second.is_zero()) p.erase(it);
  }
}

Poly add(const Poly& a, const Poly& b) {
  Poly out = a;
  for (const auto& [m, c] : b) add_term(out, m, c);
  return out;
}

Poly mul(const Poly& a, const Poly& b, int slots) {
  Poly out;
  Mono m(slots, 0);
  for (const auto& [ma, ca] : a) {
    for (const auto& [mb, cb] : b) {
      for (int i = 0; i < slots; ++i) {
        unsigned e = unsigned(ma[i]) + unsigned(mb[i]);
        if (e > kMaxExponent)
          throw NumericalError("polynomial degree limit exceeded");
        m[i] = static_cast<uint16_t>(e);
      }
      add_term(out, m, ca * cb);
    }
  }
  return out;
}

Poly constant(const Rational& c, int slots) {
  Poly p;
  add_term(p, Mono(slots, 0), c);
  return p;
}

Poly poly_pow(const Poly& base, unsigned e, int slots) {
  Poly out = constant(Rational(1), slots);
  for (unsigned i = 0; i < e; ++i) out = mul(out, base, slots);
  return out;
}

Poly derivative(const Poly& p, int slot) {
  Poly out;
  for (const auto& [m, c] : p) {
    if (m[slot] == 0) continue;
    Mono d = m;
    d[slot] -= 1;
    add_term(out, d, c * Rational(m[slot]));
  }
  return out;
}

double eval_poly(const Poly& p, const double* values) {
  double sum = 0.0;
  for (const auto& [m, c] : p) {
    double term = c.value();
    for (size_t i = 0; i < m.size(); ++i)
      for (uint16_t e = 0; e < m[i]; ++e) term *= values[i];
    sum += term;
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Lexer and parser for the expression grammar:
//   expr     := term (('+'|'-') term)*
//   term     := factor ('*' factor)*
//   factor   := base ('^' uint)?
//   base     := variable | rational | '(' expr ')'
//   variable := 'x' uint | 'r' uint
//   rational := int ('/' uint)?
// ---------------------------------------------------------------------------

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };

struct Token {
  Tok kind;
  size_t offset;
  unsigned long long value = 0;  // Number
  std::string name;              // Ident
};

std::vector<Token> lex(std::string_view text) {
  std::vector<Token> out;
  size_t i = 0;
  while (i < text.size()) {
    char ch = text[i];
    if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') {
      ++i;
      continue;
    }
    size_t start = i;
    if (std::isdigit(static_cast<unsigned char>(ch))) {
      unsigned long long v = 0;
      while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
        unsigned digit = static_cast<unsigned>(text[i] - '0');
        if (v > (std::numeric_limits<long long>::max() - digit) / 10ULL)
          throw ParseError(start, "integer literal too large");
        v = v * 10 + digit;
        ++i;
      }
      out.push_back({Tok::Number, start, v, {}});
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(ch))) {
      std::string name;
      while (i < text.size() && std::isalpha(static_cast<unsigned char>(text[i])))
        name += text[i++];
      while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])))
        name += text[i++];
      out.push_back({Tok::Ident, start, 0, name});
      continue;
    }
    Tok kind;
    switch (ch) {
      case '+': kind = Tok::Plus; break;
      case '-': kind = Tok::Minus; break;
      case '*': kind = Tok::Star; break;
      case '/': kind = Tok::Slash; break;
      case '^': kind = Tok::Caret; break;
      case '(': kind = Tok::LParen; break;
      case ')': kind = Tok::RParen; break;
      default:
        throw ParseError(start, std::string("unexpected character '") + ch + "'");
    }
    out.push_back({kind, start, 0, {}});
    ++i;
  }
  out.push_back({Tok::End, text.size(), 0, {}});
  return out;
}

struct Node {
  enum Kind { Num, Var, Add, Sub, Mul, Pow } kind;
  size_t a = 0, b = 0;   // child indices
  Rational value;        // Num
  unsigned exponent = 0; // Pow
  std::string name;      // Var
  size_t offset = 0;     // Var (first character)
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  std::vector<Node> run() {
    size_t root = expr();
    if (cur().kind != Tok::End)
      throw ParseError(cur().offset, "unexpected token");
    (void)root;
    return std::move(nodes_);
  }

 private:
  const Token& cur() const { return tokens_[pos_]; }
  const Token& prev() const { return tokens_[pos_ == 0 ? 0 : pos_ - 1]; }
  void advance() { ++pos_; }

  // Offset to report when the current token cannot begin an operand: points
  // at the dangling operator when the input simply ends.
  size_t operand_error_offset() const {
    return cur().kind == Tok::End ? prev().offset : cur().offset;
  }

  size_t make(Node n) {
    nodes_.push_back(std::move(n));
    return nodes_.size() - 1;
  }

  size_t expr() {
    size_t lhs = term();
    while (cur().kind == Tok::Plus || cur().kind == Tok::Minus) {
      Node::Kind kind = cur().kind == Tok::Plus ? Node::Add : Node::Sub;
      advance();
      size_t rhs = term();
      Node n;
      n.kind = kind;
      n.a = lhs;
      n.b = rhs;
      lhs = make(std::move(n));
    }
    return lhs;
  }

  size_t term() {
    size_t lhs = factor();
    while (cur().kind == Tok::Star) {
      advance();
      size_t rhs = factor();
      Node n;
      n.kind = Node::Mul;
      n.a = lhs;
      n.b = rhs;
      lhs = make(std::move(n));
    }
    return lhs;
  }

  size_t factor() {
    size_t operand = base();
    if (cur().kind != Tok::Caret) return operand;
    advance();
    if (cur().kind != Tok::Number)
      throw ParseError(operand_error_offset(),
                       "exponent must be a nonnegative integer");
    unsigned long long e = cur().value;
    if (e > kMaxExponent)
      throw ParseError(cur().offset, "exponent too large");
    advance();
    Node n;
    n.kind = Node::Pow;
    n.a = operand;
    n.exponent = static_cast<unsigned>(e);
    return make(std::move(n));
  }

  size_t base() {
    switch (cur().kind) {
      case Tok::Number:
      case Tok::Minus:
        return rational();
      case Tok::Ident: {
        Node n;
        n.kind = Node::Var;
        n.name = cur().name;
        n.offset = cur().offset;
        advance();
        return make(std::move(n));
      }
      case Tok::LParen: {
        advance();
        size_t inner = expr();
        if (cur().kind != Tok::RParen)
          throw ParseError(cur().offset, "expected ')'");
        advance();
        return inner;
      }
      default:
        throw ParseError(operand_error_offset(),
                         "expected a number, variable, or '('");
    }
  }

  size_t rational() {
    bool negative = false;
    if (cur().kind == Tok::Minus) {
      negative = true;
      advance();
      if (cur().kind != Tok::Number)
        throw ParseError(operand_error_offset(), "expected a number after '-'");
    }
    long long num = static_cast<long long>(cur().value);
    if (negative) num = -num;
    advance();
    long long den = 1;
    if (cur().kind == Tok::Slash) {
      advance();
      if (cur().kind != Tok::Number)
        throw ParseError(operand_error_offset(),
                         "expected an integer denominator");
      if (cur().value == 0)
        throw ParseError(cur().offset, "zero denominator");
      den = static_cast<long long>(cur().value);
      advance();
    }
    Node n;
    n.kind = Node::Num;
    n.value = Rational(num, den);
    return make(std::move(n));
  }

  std::vector<Token> tokens_;
  std::vector<Node> nodes_;
  size_t pos_ = 0;
};

}  // namespace

struct ScalarExpression::Impl {
  int dim = 0;  // 4n
  int n = 0;
  Poly poly;               // radius symbols kept
  Poly expanded;           // coordinates only
  std::vector<Poly> grad;  // d(expanded)/dx_i
  bool radial_only = false;
};

namespace {

int slot_count(int dim) { return dim + dim / 4; }

bool poly_radial_only(const Poly& p, int nx) {
  for (const auto& [m, c] : p) {
    (void)c;
    for (int i = 0; i < nx; ++i)
      if (m[i] != 0) return false;
  }
  return true;
}

// Substitutes each radius symbol by its coordinate block sum of squares.
Poly expand_radii(const Poly& p, int dim) {
  const int n = dim / 4;
  const int slots = slot_count(dim);
  std::vector<Poly> radius(n);
  for (int k = 0; k < n; ++k) {
    Poly q;
    Mono m(slots, 0);
    for (int i = 0; i < 4; ++i) {
      Mono sq = m;
      sq[4 * k + i] = 2;
      add_term(q, sq, Rational(1));
    }
    radius[k] = q;
  }
  Poly out;
  for (const auto& [m, c] : p) {
    Mono xpart(slots, 0);
    for (int i = 0; i < dim; ++i) xpart[i] = m[i];
    Poly term;
    add_term(term, xpart, c);
    for (int k = 0; k < n; ++k)
      if (m[dim + k] > 0)
        term = mul(term, poly_pow(radius[k], m[dim + k], slots), slots);
    out = add(out, term);
  }
  return out;
}

std::shared_ptr<const ScalarExpression::Impl> finish(Poly poly, int dim) {
  auto impl = std::make_shared<ScalarExpression::Impl>();
  impl->dim = dim;
  impl->n = dim / 4;
  impl->radial_only = poly_radial_only(poly, dim);
  impl->expanded = expand_radii(poly, dim);
  impl->poly = std::move(poly);
  impl->grad.reserve(dim);
  for (int i = 0; i < dim; ++i)
    impl->grad.push_back(derivative(impl->expanded, i));
  return impl;
}

Poly lower(const std::vector<Node>& nodes, size_t idx, int dim) {
  const int slots = slot_count(dim);
  const Node& node = nodes[idx];
  switch (node.kind) {
    case Node::Num:
      return constant(node.value, slots);
    case Node::Var: {
      const std::string& name = node.name;
      bool shape_ok = name.size() >= 2 && (name[0] == 'x' || name[0] == 'r') &&
                      name[1] != '0';
      long long index = 0;
      if (shape_ok) {
        for (size_t i = 1; i < name.size(); ++i) {
          if (!std::isdigit(static_cast<unsigned char>(name[i]))) {
            shape_ok = false;
            break;
          }
          index = index * 10 + (name[i] - '0');
          if (index > 1 << 20) break;
        }
      }
      int limit = name.empty() || name[0] != 'r' ? dim : dim / 4;
      if (!shape_ok || index < 1 || index > limit)
        throw ParseError(node.offset, "unknown variable '" + name + "'");
      Mono m(slots, 0);
      m[(name[0] == 'x' ? 0 : dim) + static_cast<int>(index) - 1] = 1;
      Poly p;
      add_term(p, m, Rational(1));
      return p;
    }
    case Node::Add:
      return add(lower(nodes, node.a, dim), lower(nodes, node.b, dim));
    case Node::Sub: {
      Poly rhs = lower(nodes, node.b, dim);
      Poly neg;
      for (const auto& [m, c] : rhs) add_term(neg, m, -c);
      return add(lower(nodes, node.a, dim), neg);
    }
    case Node::Mul:
      return mul(lower(nodes, node.a, dim), lower(nodes, node.b, dim), slots);
    case Node::Pow:
      return poly_pow(lower(nodes, node.a, dim), node.exponent, slots);
  }
  throw StructuralError("unreachable expression node");
}

std::string mono_text(const Mono& m, int dim) {
  std::string out;
  for (size_t i = 0; i < m.size(); ++i) {
    if (m[i] == 0) continue;
    if (!out.empty()) out += "*";
    if (static_cast<int>(i) < dim)
      out += "x" + std::to_string(i + 1);
    else
      out += "r" + std::to_string(i - dim + 1);
    if (m[i] > 1) out += "^" + std::to_string(m[i]);
  }
  return out;
}

}  // namespace

ScalarExpression::ScalarExpression(std::shared_ptr<const Impl> impl)
    : impl_(std::move(impl)) {}

ScalarExpression ScalarExpression::parse(std::string_view text, int dim) {
  if (dim <= 0 || dim % 4 != 0)
    throw StructuralError("expression dimension must be a positive multiple of 4");
  Parser parser(lex(text));
  std::vector<Node> nodes = parser.run();
  if (nodes.empty()) throw ParseError(0, "empty expression");
  return ScalarExpression(finish(lower(nodes, nodes.size() - 1, dim), dim));
}

ScalarExpression ScalarExpression::sum_radial_polynomial(
    const std::vector<Rational>& coeffs, int dim) {
  if (dim <= 0 || dim % 4 != 0)
    throw StructuralError("expression dimension must be a positive multiple of 4");
  const int n = dim / 4;
  const int slots = slot_count(dim);
  Poly sum_r;
  for (int k = 0; k < n; ++k) {
    Mono m(slots, 0);
    m[dim + k] = 1;
    add_term(sum_r, m, Rational(1));
  }
  Poly out;
  Poly power = constant(Rational(1), slots);
  for (size_t j = 0; j < coeffs.size(); ++j) {
    if (j > 0) power = mul(power, sum_r, slots);
    Poly scaled;
    for (const auto& [m, c] : power) add_term(scaled, m, c * coeffs[j]);
    out = add(out, scaled);
  }
  return ScalarExpression(finish(std::move(out), dim));
}

int ScalarExpression::dim() const {
  if (!impl_) throw StructuralError("empty expression");
  return impl_->dim;
}

int ScalarExpression::blocks() const { return dim() / 4; }

double ScalarExpression::evaluate(const Vector& x) const {
  if (!impl_) throw StructuralError("empty expression");
  if (x.size() != impl_->dim)
    throw StructuralError("evaluation point has wrong dimension");
  std::vector<double> values(slot_count(impl_->dim), 0.0);
  for (int i = 0; i < impl_->dim; ++i) values[i] = x(i);
  for (int k = 0; k < impl_->n; ++k)
    values[impl_->dim + k] = x.segment(4 * k, 4).squaredNorm();
  return eval_poly(impl_->poly, values.data());
}

double ScalarExpression::evaluate_expanded(const Vector& x) const {
  if (!impl_) throw StructuralError("empty expression");
  if (x.size() != impl_->dim)
    throw StructuralError("evaluation point has wrong dimension");
  std::vector<double> values(slot_count(impl_->dim), 0.0);
  for (int i = 0; i < impl_->dim; ++i) values[i] = x(i);
  return eval_poly(impl_->expanded, values.data());
}

double ScalarExpression::evaluate_radii(const Vector& rho) const {
  if (!impl_) throw StructuralError("empty expression");
  if (!impl_->radial_only)
    throw StructuralError("expression depends on bare coordinates");
  if (rho.size() != impl_->n)
    throw StructuralError("radius vector has wrong dimension");
  std::vector<double> values(slot_count(impl_->dim), 0.0);
  for (int k = 0; k < impl_->n; ++k) values[impl_->dim + k] = rho(k);
  return eval_poly(impl_->poly, values.data());
}

Vector ScalarExpression::gradient(const Vector& x) const {
  if (!impl_) throw StructuralError("empty expression");
  if (x.size() != impl_->dim)
    throw StructuralError("evaluation point has wrong dimension");
  std::vector<double> values(slot_count(impl_->dim), 0.0);
  for (int i = 0; i < impl_->dim; ++i) values[i] = x(i);
  Vector g(impl_->dim);
  for (int i = 0; i < impl_->dim; ++i)
    g(i) = eval_poly(impl_->grad[i], values.data());
  return g;
}

bool ScalarExpression::radial_only() const {
  if (!impl_) throw StructuralError("empty expression");
  return impl_->radial_only;
}

ScalarExpression ScalarExpression::radial_derivative(int k) const {
  if (!impl_) throw StructuralError("empty expression");
  if (!impl_->radial_only)
    throw StructuralError("expression depends on bare coordinates");
  if (k < 0 || k >= impl_->n)
    throw StructuralError("radius index out of range");
  return ScalarExpression(finish(derivative(impl_->poly, impl_->dim + k),
                                 impl_->dim));
}

std::optional<std::vector<Rational>> ScalarExpression::sum_radial_coefficients()
    const {
  if (!impl_) throw StructuralError("empty expression");
  if (!impl_->radial_only)
    throw StructuralError("expression depends on bare coordinates");
  const int dim = impl_->dim;
  const int n = impl_->n;
  // Candidate univariate coefficients: in sum_j q_j (r1+...+rn)^j the pure
  // power r1^j carries multinomial coefficient 1, so q_j is read directly off
  // the monomials involving only the first radius.
  std::vector<Rational> coeffs;
  for (const auto& [m, c] : impl_->poly) {
    bool pure = true;
    for (int k = 1; k < n; ++k)
      if (m[dim + k] != 0) {
        pure = false;
        break;
      }
    if (!pure) continue;
    unsigned e = m[dim];
    if (coeffs.size() <= e) coeffs.resize(e + 1, Rational(0));
    coeffs[e] = c;
  }
  // The collapse is faithful exactly when the polynomial is symmetric under
  // the substitution r_k -> total radius; rebuild and compare.
  ScalarExpression candidate = sum_radial_polynomial(coeffs, dim);
  if (candidate.impl_->poly.size() != impl_->poly.size()) return std::nullopt;
  auto it = impl_->poly.begin();
  for (const auto& [m, c] : candidate.impl_->poly) {
    if (it->first != m || !(it->second == c)) return std::nullopt;
    ++it;
  }
  while (!coeffs.empty() && coeffs.back().is_zero()) coeffs.pop_back();
  return coeffs;
}

std::string ScalarExpression::text() const {
  if (!impl_) throw StructuralError("empty expression");
  if (impl_->poly.empty()) return "0";
  std::string out;
  for (const auto& [m, c] : impl_->poly) {
    Rational coef = c;
    if (!out.empty()) {
      if (coef.num() < 0) {
        out += " - ";
        coef = -coef;
      } else {
        out += " + ";
      }
    }
    // A leading negative coefficient stays attached to its numeral so the
    // output reparses (the grammar has no unary minus on variables).
    std::string vars = mono_text(m, impl_->dim);
    if (vars.empty()) {
      out += coef.text();
    } else if (coef == Rational(1)) {
      out += vars;
    } else {
      out += coef.text() + "*" + vars;
    }
  }
  return out;
}

}  // namespace hyperflow
