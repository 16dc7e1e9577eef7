#include "hyperflow/scenario.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

namespace hyperflow {

namespace {

using nlohmann::json;

void expect_keys(const json& obj, const std::string& path,
                 const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!allowed.count(key))
      throw SchemaError(path.empty() ? key : path + "." + key,
                        "unknown field");
  }
}

const json* find(const json& obj, const std::string& key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

int require_int(const json& v, const std::string& path) {
  if (!v.is_number_integer())
    throw SchemaError(path, "expected an integer");
  return v.get<int>();
}

double require_number(const json& v, const std::string& path) {
  if (!v.is_number())
    throw SchemaError(path, "expected a number");
  return v.get<double>();
}

std::string require_string(const json& v, const std::string& path) {
  if (!v.is_string())
    throw SchemaError(path, "expected a string");
  return v.get<std::string>();
}

ScalarExpression parse_field(const json& v, const std::string& path, int dim) {
  std::string text = require_string(v, path);
  try {
    return ScalarExpression::parse(text, dim);
  } catch (const ParseError& e) {
    throw SchemaError(path, e.what());
  }
}

std::array<ScalarExpression, 3> parse_triple(const json& v,
                                             const std::string& path,
                                             int dim) {
  if (!v.is_array() || v.size() != 3)
    throw SchemaError(path, "expected an array of 3 expression strings");
  std::array<ScalarExpression, 3> out;
  for (int i = 0; i < 3; ++i)
    out[i] = parse_field(v[i], path + "[" + std::to_string(i) + "]", dim);
  return out;
}

Matrix require_matrix(const json& v, const std::string& path, int rows,
                      int cols) {
  if (!v.is_array() || static_cast<int>(v.size()) != rows)
    throw SchemaError(path, "expected " + std::to_string(rows) + " rows");
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    const json& row = v[i];
    if (!row.is_array() || static_cast<int>(row.size()) != cols)
      throw SchemaError(path + "[" + std::to_string(i) + "]",
                        "expected " + std::to_string(cols) + " numbers");
    for (int j = 0; j < cols; ++j)
      m(i, j) = require_number(row[j], path + "[" + std::to_string(i) + "][" +
                                           std::to_string(j) + "]");
  }
  return m;
}

}  // namespace

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw StructuralError("cannot open scenario file: " + path);
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError("(file)", e.what());
  }
  if (!root.is_object()) throw SchemaError("(file)", "expected a JSON object");

  expect_keys(root, "",
              {"n", "signature", "profile", "hamiltonians", "structure",
               "initial_conditions", "time", "rho", "samples", "seed",
               "outputs"});

  Scenario sc;
  const json* n = find(root, "n");
  if (!n) throw SchemaError("n", "missing required field");
  sc.n = require_int(*n, "n");
  if (sc.n < 1 || sc.n > 64)
    throw SchemaError("n", "block count must be between 1 and 64");
  const int dim = sc.dim();

  sc.signature.assign(sc.n, Orientation::Positive);
  if (const json* sig = find(root, "signature")) {
    if (!sig->is_array() || static_cast<int>(sig->size()) != sc.n)
      throw SchemaError("signature", "expected an array of n orientations");
    for (int k = 0; k < sc.n; ++k) {
      std::string s =
          require_string((*sig)[k], "signature[" + std::to_string(k) + "]");
      if (s == "positive") {
        sc.signature[k] = Orientation::Positive;
      } else if (s == "negative") {
        sc.signature[k] = Orientation::Negative;
      } else {
        throw SchemaError("signature[" + std::to_string(k) + "]",
                          "expected \"positive\" or \"negative\"");
      }
    }
  }

  if (const json* profile = find(root, "profile")) {
    if (!profile->is_object())
      throw SchemaError("profile", "expected an object");
    expect_keys(*profile, "profile", {"c", "c_hat", "f0"});
    const json* c = find(*profile, "c");
    if (!c) throw SchemaError("profile.c", "missing required field");
    FrequencyProfile fp;
    fp.blocks = sc.n;
    fp.signature = sc.signature;
    fp.c = parse_triple(*c, "profile.c", dim);
    for (int a = 0; a < 3; ++a)
      if (!fp.c[a].radial_only())
        throw SchemaError("profile.c[" + std::to_string(a) + "]",
                          "profile components must use only r1..rn");
    if (const json* ch = find(*profile, "c_hat")) {
      fp.c_hat = parse_triple(*ch, "profile.c_hat", dim);
      for (int a = 0; a < 3; ++a)
        if (!(*fp.c_hat)[a].radial_only())
          throw SchemaError("profile.c_hat[" + std::to_string(a) + "]",
                            "profile components must use only r1..rn");
    }
    if (const json* f0 = find(*profile, "f0")) {
      ScalarExpression expr = parse_field(*f0, "profile.f0", dim);
      if (!expr.radial_only())
        throw SchemaError("profile.f0", "the radial drive must use only r1..rn");
      sc.f0 = expr;
    }
    sc.profile = std::move(fp);
  }

  if (const json* h = find(root, "hamiltonians")) {
    HamiltonianTriple triple;
    triple.dim = dim;
    triple.H = parse_triple(*h, "hamiltonians", dim);
    sc.hamiltonians = std::move(triple);
  }

  if (const json* s = find(root, "structure")) {
    if (!s->is_object()) throw SchemaError("structure", "expected an object");
    expect_keys(*s, "structure", {"L1", "L2", "L3"});
    std::array<Matrix, 3> mats;
    for (int a = 0; a < 3; ++a) {
      std::string key = "L" + std::to_string(a + 1);
      const json* m = find(*s, key);
      if (!m) throw SchemaError("structure." + key, "missing required field");
      mats[a] = require_matrix(*m, "structure." + key, dim, dim);
    }
    sc.structure = std::move(mats);
  }

  if (const json* ics = find(root, "initial_conditions")) {
    if (!ics->is_array())
      throw SchemaError("initial_conditions", "expected an array of vectors");
    for (size_t i = 0; i < ics->size(); ++i) {
      const json& entry = (*ics)[i];
      std::string path_i = "initial_conditions[" + std::to_string(i) + "]";
      if (!entry.is_array() || static_cast<int>(entry.size()) != dim)
        throw SchemaError(path_i,
                          "expected " + std::to_string(dim) + " numbers");
      Vector x(dim);
      for (int j = 0; j < dim; ++j)
        x(j) = require_number(entry[j],
                              path_i + "[" + std::to_string(j) + "]");
      sc.initial_conditions.push_back(std::move(x));
    }
  }

  if (const json* time = find(root, "time")) {
    if (!time->is_object()) throw SchemaError("time", "expected an object");
    expect_keys(*time, "time", {"t_end", "dt", "sample_stride"});
    if (const json* t = find(*time, "t_end"))
      sc.time.t_end = require_number(*t, "time.t_end");
    if (const json* t = find(*time, "dt"))
      sc.time.dt = require_number(*t, "time.dt");
    if (const json* t = find(*time, "sample_stride"))
      sc.time.sample_stride = require_int(*t, "time.sample_stride");
    if (!(sc.time.t_end > 0)) throw SchemaError("time.t_end", "must be > 0");
    if (!(sc.time.dt > 0)) throw SchemaError("time.dt", "must be > 0");
    if (sc.time.sample_stride < 1)
      throw SchemaError("time.sample_stride", "must be >= 1");
  }

  sc.rho = Vector::Ones(sc.n);
  if (const json* rho = find(root, "rho")) {
    if (!rho->is_array() || static_cast<int>(rho->size()) != sc.n)
      throw SchemaError("rho", "expected an array of n radii");
    for (int k = 0; k < sc.n; ++k) {
      sc.rho(k) = require_number((*rho)[k], "rho[" + std::to_string(k) + "]");
      if (sc.rho(k) < 0)
        throw SchemaError("rho[" + std::to_string(k) + "]",
                          "radii are nonnegative");
    }
  }

  if (const json* samples = find(root, "samples")) {
    sc.samples = require_int(*samples, "samples");
    if (sc.samples < 1) throw SchemaError("samples", "must be >= 1");
  }

  if (const json* seed = find(root, "seed")) {
    if (!seed->is_number_unsigned())
      throw SchemaError("seed", "expected a nonnegative integer");
    sc.seed = seed->get<std::uint64_t>();
  }

  if (const json* outputs = find(root, "outputs")) {
    if (!outputs->is_array())
      throw SchemaError("outputs", "expected an array of strings");
    for (size_t i = 0; i < outputs->size(); ++i) {
      std::string s =
          require_string((*outputs)[i], "outputs[" + std::to_string(i) + "]");
      if (s == "radii") {
        sc.radii_output = true;
      } else if (s == "q") {
        sc.radii_output = true;
        sc.q_output = true;
      } else {
        throw SchemaError("outputs[" + std::to_string(i) + "]",
                          "expected \"radii\" or \"q\"");
      }
    }
  }

  return sc;
}

}  // namespace hyperflow
