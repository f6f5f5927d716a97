#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "magatom/core.hpp"
#include "magatom/dynamics.hpp"
#include "magatom/fields.hpp"
#include "magatom/sterngerlach.hpp"

namespace magatom {

// A scenario fully determines a run. It is read from a sectioned
// key = value text file; see README.md for the schema.

enum class InitialKind { Circular, Linear, Explicit };

struct InitialConditions {
  InitialKind kind = InitialKind::Circular;
  double radius = 1.0;  // orbit radius or oscillation amplitude
  Vec3 normal{0, 0, 1};  // L direction (circular) or oscillation axis (linear)
  double phase = 0.0;
  Vec3 R{}, Rdot{};
  Vec3 r{}, rdot{};  // explicit only
  friend bool operator==(const InitialConditions&, const InitialConditions&) = default;
};

struct IntegratorSettings {
  Method method = Method::RK4;
  double step = 0.0;  // 0 selects internal period / 2000
  double tolerance = 1e-10;
  double periods = 10.0;  // run length in internal periods, used when t_end = 0
  double t_end = 0.0;
  // Reduced formulation for simulate-reduced and compare; empty picks the
  // one matching the field kind.
  std::optional<Formulation> reduced;
  friend bool operator==(const IntegratorSettings&, const IntegratorSettings&) = default;
};

struct EnsembleSettings {
  int n_atoms = 1000;
  InternalMotion internal = InternalMotion::Circular;
  double radius = 1.0;
  Orientation orientation = Orientation::Random;
  Vec3 axis{0, 0, 1};
  bool random_phase = true;
  Vec3 beam_velocity{};
  Vec3 jitter{};
  std::uint64_t seed = 1;
  std::optional<Formulation> formulation;  // empty: reduced form for the field
  double flight_time = 100.0;
  int histogram_bins = 20;
  int threads = 0;
  friend bool operator==(const EnsembleSettings&, const EnsembleSettings&) = default;
};

enum class ProbeKind { Sphere, Grid, List };

struct ProbeSettings {
  ProbeKind kind = ProbeKind::Sphere;
  std::optional<Vec3> center;  // empty: the initial center of mass
  std::vector<double> radii{10, 12, 14, 16, 18, 20, 22, 24, 26, 28};
  int per_shell = 3;
  Vec3 lo{-20, -20, -20}, hi{20, 20, 20};
  std::array<int, 3> counts{5, 5, 5};
  std::vector<Vec3> points;
  double validity = 5.0;
  std::optional<double> time;  // fieldmap sample time; empty: first interior sample
  friend bool operator==(const ProbeSettings&, const ProbeSettings&) = default;
};

enum class OutputFormat { Csv, Jsonl };

struct OutputSettings {
  std::string directory = ".";
  std::string prefix = "run";
  OutputFormat format = OutputFormat::Csv;
  int sample_stride = 1;
  bool endpoints = false;  // per-atom endpoint table for ensemble runs
  friend bool operator==(const OutputSettings&, const OutputSettings&) = default;
};

struct Scenario {
  Constants constants = Constants::hydrogen();
  FieldModel field;
  InitialConditions initial;
  IntegratorSettings integrator;
  EnsembleSettings ensemble;
  ProbeSettings probes;
  OutputSettings output;
  friend bool operator==(const Scenario&, const Scenario&) = default;
};

// One `section.key=value` override, applied on top of the file contents.
struct Override {
  std::string section, key, value;
};
// Parses "section.key=value". Throws ValidationError.
Override parse_override(const std::string& text);

// Throws ValidationError naming the line (or override) and the key.
Scenario parse_scenario(const std::string& text, const std::vector<Override>& overrides = {});
Scenario load_scenario(const std::string& path, const std::vector<Override>& overrides = {});

// Writes every value explicitly with shortest round-trip formatting so that
// parse_scenario(serialize_scenario(s)) == s.
std::string serialize_scenario(const Scenario& s);

// Derived run inputs.
ComState initial_state(const Scenario& s);
// Integrator spec for a single trajectory starting at s0.
IntegratorSpec integrator_spec(const Scenario& s, const ComState& s0);
Formulation reduced_formulation(const Scenario& s);
EnsembleSpec ensemble_spec(const Scenario& s);
std::vector<Vec3> probe_points(const Scenario& s);

std::string to_string(InitialKind k);
std::string to_string(ProbeKind k);
std::string to_string(OutputFormat f);

}  // namespace magatom
