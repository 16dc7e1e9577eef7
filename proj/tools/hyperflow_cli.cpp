#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hyperflow/flows.hpp"
#include "hyperflow/hamiltonian.hpp"
#include "hyperflow/invariants.hpp"
#include "hyperflow/scenario.hpp"
#include "hyperflow/structures.hpp"
#include "hyperflow/symmetry.hpp"
#include "hyperflow/trajectory_io.hpp"

namespace hf = hyperflow;
namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr const char* kUsage =
    "usage: hyperflow <command> --scenario <path> [options]\n"
    "\n"
    "commands:\n"
    "  verify      check the quaternion relations of the structure triple\n"
    "  reduce      rotate each block onto its standard triple\n"
    "  flow        closed-form trajectories of the scenario profile\n"
    "  simulate    fixed-step RK4 of the scenario's vector field\n"
    "  invariants  conserved-quantity drift report along trajectories\n"
    "  symmetry    invariance algebra: dimension, split, closure\n"
    "  detect      test whether the scenario field is an oscillator field\n"
    "\n"
    "options:\n"
    "  --scenario <path>   scenario JSON file (required)\n"
    "  --out <dir>         output directory (default .)\n"
    "  --format csv|json   trajectory artifact format (default csv)\n"
    "  --dt <step>         override scenario time.dt\n"
    "  --t-end <time>      override scenario time.t_end\n"
    "  --tol <tolerance>   override the command's default tolerance\n"
    "  --seed <n>          override the scenario seed (detect samples)\n"
    "\n"
    "environment: HYPERFLOW_LOG=info|debug for progress logging on stderr\n";

enum class LogLevel { Silent = 0, Info = 1, Debug = 2 };

LogLevel log_level() {
  static LogLevel level = [] {
    const char* env = std::getenv("HYPERFLOW_LOG");
    if (env == nullptr) return LogLevel::Silent;
    std::string v(env);
    if (v == "debug") return LogLevel::Debug;
    if (v == "info") return LogLevel::Info;
    return LogLevel::Silent;
  }();
  return level;
}

void log_info(const std::string& msg) {
  if (log_level() >= LogLevel::Info) std::cerr << "[hyperflow] " << msg << "\n";
}

void log_debug(const std::string& msg) {
  if (log_level() >= LogLevel::Debug)
    std::cerr << "[hyperflow] " << msg << "\n";
}

struct Flags {
  std::string scenario;
  std::string out = ".";
  std::string format = "csv";
  std::optional<double> dt;
  std::optional<double> t_end;
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
};

ordered_json matrix_json(const hf::Matrix& m) {
  ordered_json rows = ordered_json::array();
  for (int i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

ordered_json vector_json(const hf::Vector& v) {
  ordered_json out = ordered_json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

void emit_report(const ordered_json& doc, const Flags& flags,
                 const std::string& name) {
  std::string text = doc.dump(2) + "\n";
  fs::create_directories(flags.out);
  fs::path path = fs::path(flags.out) / name;
  std::ofstream out(path);
  if (!out) throw hf::StructuralError("cannot write " + path.string());
  out << text;
  std::cout << text;
}

hf::StructureTriple scenario_triple(const hf::Scenario& sc) {
  if (sc.structure) {
    hf::StructureTriple t;
    t.dim = sc.dim();
    t.L = *sc.structure;
    return t;
  }
  return hf::assemble_block_structure(sc.signature);
}

double offblock_mass(const hf::StructureTriple& t) {
  double worst = 0.0;
  for (const hf::Matrix& L : t.L) {
    hf::Matrix stripped = L;
    for (int k = 0; k < t.dim / 4; ++k)
      stripped.block(4 * k, 4 * k, 4, 4).setZero();
    worst = std::max(worst, hf::max_abs(stripped));
  }
  return worst;
}

hf::StructureTriple block_of(const hf::StructureTriple& t, int k) {
  hf::StructureTriple b;
  b.dim = 4;
  for (int a = 0; a < 3; ++a) b.L[a] = t.L[a].block(4 * k, 4 * k, 4, 4);
  return b;
}

// The scenario's vector field for simulate/detect: exactly one generating
// description must be present.
hf::VectorField scenario_field(const hf::Scenario& sc) {
  if (sc.profile && sc.hamiltonians)
    throw hf::SchemaError("profile",
                          "give either a profile or hamiltonians, not both");
  if (sc.hamiltonians) {
    hf::StructureTriple S = hf::assemble_block_structure(sc.signature);
    hf::HamiltonianTriple H = *sc.hamiltonians;
    return [S, H](const hf::Vector& x) { return hf::hh_field(H, S, x); };
  }
  if (!sc.profile)
    throw hf::SchemaError("profile", "a profile or hamiltonians is required");
  if (sc.f0) {
    if (sc.n != 1)
      throw hf::SchemaError("profile.f0", "the radial drive requires n = 1");
    hf::ScalarExpression f0 = *sc.f0;
    hf::FrequencyProfile P = *sc.profile;
    return [f0, P](const hf::Vector& x) {
      return hf::asymptotic_field(f0, P, x);
    };
  }
  if (sc.profile->c_hat) {
    hf::DiracSystem d{sc.n, sc.profile->c, *sc.profile->c_hat};
    return [d](const hf::Vector& x) { return hf::dirac_field(d, x); };
  }
  hf::StructureTriple S = hf::assemble_block_structure(sc.signature);
  hf::FrequencyProfile P = *sc.profile;
  return [S, P](const hf::Vector& x) { return hf::oscillator_field(P, S, x); };
}

// Closed-form trajectory of the scenario profile (single- or two-sided).
hf::Trajectory closed_trajectory(const hf::Scenario& sc, const hf::Vector& x0,
                                 const std::vector<double>& times) {
  if (sc.profile->c_hat) {
    hf::DiracSystem d{sc.n, sc.profile->c, *sc.profile->c_hat};
    return hf::dirac_flow(d, x0, times);
  }
  hf::OscillatorSystem sys{hf::assemble_block_structure(sc.signature),
                           *sc.profile};
  return hf::closed_form_flow(sys, x0, times);
}

std::optional<Eigen::Vector3d> coefficients_at(const hf::Scenario& sc,
                                               const hf::Vector& x0) {
  if (!sc.profile || sc.n != 1) return std::nullopt;
  hf::Vector rho = hf::block_radii(x0);
  Eigen::Vector3d c;
  for (int a = 0; a < 3; ++a) c(a) = sc.profile->c[a].evaluate_radii(rho);
  return c;
}

hf::TrajectoryColumns columns_for(const hf::Scenario& sc,
                                  const hf::Vector& x0) {
  hf::TrajectoryColumns columns;
  columns.radii = sc.radii_output;
  columns.q = sc.q_output;
  columns.signature = sc.signature;
  if (sc.q_output) {
    std::optional<Eigen::Vector3d> c = coefficients_at(sc, x0);
    if (!c)
      throw hf::SchemaError(
          "outputs", "q columns require n = 1 and a profile");
    columns.c = c;
  }
  return columns;
}

std::string trajectory_name(size_t index, const std::string& format) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "trajectory_%03zu.%s", index,
                format.c_str());
  return buffer;
}

std::vector<std::string> write_trajectories(
    const std::vector<hf::Trajectory>& trajectories, const hf::Scenario& sc,
    const Flags& flags) {
  fs::create_directories(flags.out);
  std::vector<std::string> files;
  for (size_t i = 0; i < trajectories.size(); ++i) {
    hf::TrajectoryColumns columns =
        columns_for(sc, sc.initial_conditions[i]);
    fs::path path = fs::path(flags.out) / trajectory_name(i, flags.format);
    std::ofstream out(path);
    if (!out) throw hf::StructuralError("cannot write " + path.string());
    if (flags.format == "json") {
      out << hf::trajectory_json(trajectories[i], columns);
    } else {
      hf::write_trajectory_csv(out, trajectories[i], columns);
    }
    files.push_back(path.string());
  }
  return files;
}

// Fans a per-initial-condition job out over threads; results keep the
// initial-condition order, so outputs match a sequential run byte for byte.
std::vector<hf::Trajectory> run_batch(
    const std::vector<hf::Vector>& ics,
    const std::function<hf::Trajectory(const hf::Vector&)>& job) {
  std::vector<std::future<hf::Trajectory>> futures;
  futures.reserve(ics.size());
  for (const hf::Vector& x0 : ics)
    futures.push_back(
        std::async(std::launch::async, [&job, x0] { return job(x0); }));
  std::vector<hf::Trajectory> out;
  out.reserve(ics.size());
  for (auto& f : futures) out.push_back(f.get());
  return out;
}

void require_ics(const hf::Scenario& sc) {
  if (sc.initial_conditions.empty())
    throw hf::SchemaError("initial_conditions", "at least one is required");
}

int cmd_verify(const hf::Scenario& sc, const Flags& flags) {
  hf::StructureTriple triple = scenario_triple(sc);
  double tol = flags.tol.value_or(1e-10);
  hf::QuaternionicReport report = hf::verify_quaternionic(triple, tol);

  ordered_json doc;
  doc["command"] = "verify";
  doc["dim"] = triple.dim;
  doc["ok"] = report.ok;
  doc["max_residual"] = report.max_residual;
  double off = offblock_mass(triple);
  doc["block_diagonal"] = off <= tol;
  if (report.ok && off <= tol) {
    ordered_json orientations = ordered_json::array();
    for (int k = 0; k < triple.dim / 4; ++k)
      orientations.push_back(hf::to_string(hf::orientation_of(block_of(triple, k))));
    doc["orientations"] = std::move(orientations);
  }
  emit_report(doc, flags, "verify.json");
  return report.ok ? 0 : 3;
}

int cmd_reduce(const hf::Scenario& sc, const Flags& flags) {
  hf::StructureTriple triple = scenario_triple(sc);
  double tol = flags.tol.value_or(1e-10);
  if (offblock_mass(triple) > tol)
    throw hf::StructuralError(
        "reduction requires a block-diagonal structure triple");

  ordered_json blocks = ordered_json::array();
  for (int k = 0; k < triple.dim / 4; ++k) {
    hf::Reduction red = hf::canonical_reduction(block_of(triple, k));
    ordered_json entry;
    entry["block"] = k + 1;
    entry["orientation"] = hf::to_string(red.orientation);
    entry["residual"] = red.residual;
    entry["rotation"] = matrix_json(red.rotation);
    blocks.push_back(std::move(entry));
  }
  ordered_json doc;
  doc["command"] = "reduce";
  doc["dim"] = triple.dim;
  doc["blocks"] = std::move(blocks);
  emit_report(doc, flags, "reduce.json");
  return 0;
}

int cmd_flow(const hf::Scenario& sc, const Flags& flags) {
  if (!sc.profile)
    throw hf::SchemaError("profile", "required for the closed-form flow");
  if (sc.f0)
    throw hf::SchemaError("profile.f0",
                          "radial drives have no closed form; use simulate");
  require_ics(sc);
  double t_end = flags.t_end.value_or(sc.time.t_end);
  double dt = flags.dt.value_or(sc.time.dt);
  std::vector<double> times =
      hf::sample_times(t_end, dt, sc.time.sample_stride);
  log_info("flow: " + std::to_string(sc.initial_conditions.size()) +
           " initial conditions, " + std::to_string(times.size()) + " samples");

  std::vector<hf::Trajectory> trajectories =
      run_batch(sc.initial_conditions, [&](const hf::Vector& x0) {
        return closed_trajectory(sc, x0, times);
      });
  std::vector<std::string> files = write_trajectories(trajectories, sc, flags);

  ordered_json doc;
  doc["command"] = "flow";
  doc["files"] = files;
  std::cout << doc.dump(2) << "\n";
  return 0;
}

int cmd_simulate(const hf::Scenario& sc, const Flags& flags) {
  require_ics(sc);
  hf::VectorField field = scenario_field(sc);
  double t_end = flags.t_end.value_or(sc.time.t_end);
  double dt = flags.dt.value_or(sc.time.dt);
  log_info("simulate: RK4 dt = " + std::to_string(dt) + " to t = " +
           std::to_string(t_end));

  std::vector<hf::Trajectory> trajectories =
      run_batch(sc.initial_conditions, [&](const hf::Vector& x0) {
        return hf::integrate_rk4(field, x0, t_end, dt, sc.time.sample_stride);
      });
  std::vector<std::string> files = write_trajectories(trajectories, sc, flags);

  ordered_json doc;
  doc["command"] = "simulate";
  doc["files"] = files;
  std::cout << doc.dump(2) << "\n";
  return 0;
}

int cmd_invariants(const hf::Scenario& sc, const Flags& flags) {
  require_ics(sc);
  double t_end = flags.t_end.value_or(sc.time.t_end);
  double dt = flags.dt.value_or(sc.time.dt);

  bool closed = sc.profile && !sc.f0;
  if (sc.profile && sc.hamiltonians)
    throw hf::SchemaError("profile",
                          "give either a profile or hamiltonians, not both");
  std::function<hf::Trajectory(const hf::Vector&)> job;
  if (closed) {
    std::vector<double> times =
        hf::sample_times(t_end, dt, sc.time.sample_stride);
    job = [&sc, times](const hf::Vector& x0) {
      return closed_trajectory(sc, x0, times);
    };
  } else {
    hf::VectorField field = scenario_field(sc);
    int stride = sc.time.sample_stride;
    job = [field, t_end, dt, stride](const hf::Vector& x0) {
      return hf::integrate_rk4(field, x0, t_end, dt, stride);
    };
  }
  std::vector<hf::Trajectory> trajectories =
      run_batch(sc.initial_conditions, job);

  ordered_json entries = ordered_json::array();
  for (size_t i = 0; i < trajectories.size(); ++i) {
    hf::SystemDescriptor descriptor;
    descriptor.signature = sc.signature;
    bool two_sided = sc.profile && sc.profile->c_hat.has_value();
    if (!two_sided && !sc.f0)
      descriptor.c = coefficients_at(sc, sc.initial_conditions[i]);
    std::vector<hf::InvariantReport> reports =
        hf::conservation_report(trajectories[i], descriptor);
    ordered_json list = ordered_json::array();
    for (const hf::InvariantReport& rep : reports) {
      ordered_json entry;
      entry["name"] = rep.name;
      entry["initial"] = rep.values.front();
      entry["max_drift"] = rep.max_drift;
      list.push_back(std::move(entry));
    }
    ordered_json item;
    item["initial_condition"] = i;
    item["method"] = closed ? "closed_form" : "rk4";
    item["reports"] = std::move(list);
    entries.push_back(std::move(item));
  }
  ordered_json doc;
  doc["command"] = "invariants";
  doc["trajectories"] = std::move(entries);
  emit_report(doc, flags, "invariants.json");
  return 0;
}

int cmd_symmetry(const hf::Scenario& sc, const Flags& flags) {
  if (!sc.profile)
    throw hf::SchemaError("profile",
                          "the symmetry solver needs profile coefficients");
  hf::StructureTriple triple = scenario_triple(sc);
  Eigen::Vector3d c;
  for (int a = 0; a < 3; ++a) c(a) = sc.profile->c[a].evaluate_radii(sc.rho);
  double tol = flags.tol.value_or(1e-10);
  log_info("symmetry: dim " + std::to_string(triple.dim));

  hf::LieAlgebraBasis basis = hf::solve_invariance(triple, c, tol);
  hf::SplitComponents split = hf::split_components(basis, c, tol);
  hf::ClosureReport closure = hf::closure_check(basis, tol);

  ordered_json doc;
  doc["command"] = "symmetry";
  doc["dim"] = triple.dim;
  doc["coefficients"] = {c(0), c(1), c(2)};
  doc["dimension"] = basis.basis.size();
  doc["commutant_dimension"] = split.commutant.size();
  ordered_json generator;
  generator["X"] = matrix_json(split.rotation_generator.X);
  generator["J"] = matrix_json(split.rotation_generator.J);
  doc["rotation_generator"] = std::move(generator);
  doc["closure_residual"] = closure.max_residual;
  doc["commutation_residual"] = closure.commutation_residual;
  ordered_json sv;
  sv["smallest_kept"] = basis.smallest_kept;
  sv["largest_discarded"] = basis.largest_discarded;
  if (basis.largest_discarded > 0.0) {
    sv["gap"] = basis.smallest_kept / basis.largest_discarded;
  } else {
    sv["gap"] = nullptr;
  }
  doc["singular_values"] = std::move(sv);
  emit_report(doc, flags, "symmetry.json");
  return 0;
}

int cmd_detect(const hf::Scenario& sc, const Flags& flags) {
  hf::VectorField field = scenario_field(sc);
  hf::StructureTriple S = hf::assemble_block_structure(sc.signature);
  std::uint64_t seed = flags.seed.value_or(sc.seed);

  // Deterministic sampling: uniform radii in [0.5, 1.5), unit block
  // directions from Box-Muller gaussians. Every odd sample reuses the
  // previous sample's radii so equal-radius consistency is exercised across
  // distinct points, not only across the built-in partners.
  std::mt19937_64 rng(seed);
  auto uniform = [&rng] { return (rng() >> 11) * 0x1.0p-53; };
  auto gaussian = [&]() {
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  };
  std::vector<hf::Vector> samples;
  hf::Vector radii(sc.n);
  for (int i = 0; i < sc.samples; ++i) {
    if (i % 2 == 0)
      for (int k = 0; k < sc.n; ++k) radii(k) = 0.5 + uniform();
    hf::Vector x(sc.dim());
    for (int k = 0; k < sc.n; ++k) {
      hf::Vector dir(4);
      do {
        for (int j = 0; j < 4; ++j) dir(j) = gaussian();
      } while (dir.norm() < 1e-6);
      x.segment(4 * k, 4) = std::sqrt(radii(k)) * dir.normalized();
    }
    samples.push_back(std::move(x));
  }
  log_debug("detect: " + std::to_string(samples.size()) + " samples, seed " +
            std::to_string(seed));

  hf::DetectionReport report = hf::detect_oscillator(field, S, samples);

  ordered_json estimates = ordered_json::array();
  for (const hf::ProfileEstimate& est : report.estimates) {
    ordered_json entry;
    entry["block"] = est.block + 1;
    entry["radii"] = vector_json(est.radii);
    entry["c"] = {est.c[0], est.c[1], est.c[2]};
    estimates.push_back(std::move(entry));
  }
  ordered_json doc;
  doc["command"] = "detect";
  doc["oscillator"] = report.oscillator;
  doc["residual"] = report.residual;
  doc["consistency"] = report.consistency;
  doc["equivariance_residual"] = report.equivariance_residual;
  doc["skipped_samples"] = report.skipped_samples;
  doc["samples"] = sc.samples;
  doc["seed"] = seed;
  doc["estimates"] = std::move(estimates);
  emit_report(doc, flags, "detect.json");
  return 0;
}

int dispatch(const std::string& command, const Flags& flags) {
  hf::Scenario sc = hf::load_scenario(flags.scenario);
  if (flags.seed) sc.seed = *flags.seed;
  if (command == "verify") return cmd_verify(sc, flags);
  if (command == "reduce") return cmd_reduce(sc, flags);
  if (command == "flow") return cmd_flow(sc, flags);
  if (command == "simulate") return cmd_simulate(sc, flags);
  if (command == "invariants") return cmd_invariants(sc, flags);
  if (command == "symmetry") return cmd_symmetry(sc, flags);
  if (command == "detect") return cmd_detect(sc, flags);
  return 64;  // unreachable; commands are checked in main
}

void emit_error(const std::string& kind, const std::string& message,
                const std::string& field = "") {
  ordered_json doc;
  doc["error"]["kind"] = kind;
  doc["error"]["message"] = message;
  if (!field.empty()) doc["error"]["field"] = field;
  std::cout << doc.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << kUsage;
    return 64;
  }
  std::string command = argv[1];
  if (command == "-h" || command == "--help" || command == "help") {
    std::cout << kUsage;
    return 0;
  }
  const std::vector<std::string> known{"verify",     "reduce",   "flow",
                                       "simulate",   "invariants",
                                       "symmetry",   "detect"};
  if (std::find(known.begin(), known.end(), command) == known.end()) {
    std::cerr << "unknown command: " << command << "\n\n" << kUsage;
    return 64;
  }

  Flags flags;
  CLI::App app("quaternionic oscillator toolkit");
  app.add_option("--scenario", flags.scenario, "scenario JSON file")
      ->required();
  app.add_option("--out", flags.out, "output directory");
  app.add_option("--format", flags.format, "trajectory format")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--dt", flags.dt, "time step override");
  app.add_option("--t-end", flags.t_end, "end time override");
  app.add_option("--tol", flags.tol, "tolerance override");
  app.add_option("--seed", flags.seed, "sampling seed override");
  try {
    app.parse(argc - 1, argv + 1);
  } catch (const CLI::CallForHelp&) {
    std::cout << kUsage;
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << kUsage;
    return 64;
  }

  try {
    return dispatch(command, flags);
  } catch (const hf::SchemaError& e) {
    emit_error("schema", e.what(), e.field());
    return 2;
  } catch (const hf::ParseError& e) {
    emit_error("parse", e.what());
    return 2;
  } catch (const hf::StructuralError& e) {
    emit_error("structural", e.what());
    return 2;
  } catch (const hf::NumericalError& e) {
    emit_error("numerical", e.what());
    return 3;
  } catch (const std::exception& e) {
    emit_error("internal", e.what());
    return 70;
  }
}
