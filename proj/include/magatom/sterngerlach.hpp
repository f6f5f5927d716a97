#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "magatom/core.hpp"
#include "magatom/dynamics.hpp"
#include "magatom/fields.hpp"

namespace magatom {

enum class InternalMotion {
  Circular,  // circular orbit of radius a, |L| = mu a^2 omega
  Linear,    // released from rest at distance a along an axis, L = 0
};

enum class Orientation {
  Random,  // L direction (circular) or oscillation axis (linear) uniform on the sphere
  Fixed,   // taken from EnsembleSpec::axis
};

std::string to_string(InternalMotion m);
InternalMotion parse_internal_motion(const std::string& s);
std::string to_string(Orientation o);
Orientation parse_orientation(const std::string& s);

struct EnsembleSpec {
  int n_atoms = 1000;
  InternalMotion internal = InternalMotion::Circular;
  double radius = 1.0;  // orbit radius or oscillation amplitude
  Orientation orientation = Orientation::Random;
  Vec3 axis{0, 0, 1};
  bool random_phase = true;  // circular orbits only
  Vec3 beam_velocity{};
  Vec3 jitter{};  // per-axis standard deviation of the initial CoM position
  std::uint64_t seed = 1;

  Constants constants = Constants::hydrogen();
  FieldModel field;
  Formulation formulation = Formulation::ReducedInhomogeneous;
  // step <= 0 selects the default step (internal period / 2000) per atom;
  // t_end is replaced by flight_time.
  IntegratorSpec integrator;
  double flight_time = 0.0;
  int histogram_bins = 20;
  // 0 = hardware concurrency. Results do not depend on this value.
  int threads = 0;

  // Throws ValidationError.
  void validate() const;
};

// Initial states for every atom, drawn from a generator seeded with
// spec.seed. Identical specs give identical ensembles.
std::vector<ComState> build_ensemble(const EnsembleSpec& spec);

struct AxisStats {
  Vec3 mean;
  Vec3 variance;        // unbiased sample variance
  Vec3 standard_error;  // sqrt(variance / n)
};

struct AtomEndpoint {
  std::size_t index = 0;
  bool ok = false;
  std::string error;
  ComState initial;
  ComState final;
  Vec3 L;  // final internal angular momentum
  Vec3 S;  // final cross-coupling vector
};

struct Histogram {
  Vec3 axis;  // unit vector the final R is projected on
  double lo = 0, hi = 0;
  std::vector<std::size_t> counts;
};

struct DeflectionStats {
  std::size_t n_atoms = 0;
  std::size_t n_failed = 0;
  bool valid = true;  // false when more than 1% of atoms failed
  double flight_time = 0;

  AxisStats final_position;  // statistics of R(t_end)
  AxisStats deflection;      // R(t_end) - R(0) - Rdot(0) t_end
  Vec3 mean_velocity;        // mean Rdot(t_end)
  Histogram histogram;
  std::vector<AtomEndpoint> atoms;
};

// Integrates every atom of the ensemble independently (possibly in
// parallel) and reduces the endpoints in index order with compensated
// summation. Atoms whose integration fails are excluded and counted.
DeflectionStats run_beam(const std::vector<ComState>& ensemble, const EnsembleSpec& spec);
DeflectionStats run_beam(const EnsembleSpec& spec);

// Recomputes the aggregate statistics from stored endpoints.
DeflectionStats summarize(std::vector<AtomEndpoint> atoms, const EnsembleSpec& spec);

struct PositroniumReport {
  double K_L = 0;
  // max over samples of |(e/2 mu c) K_L L|, identically zero for K_L = 0.
  double l_channel_moment = 0;
  DeflectionStats stats;
};

// Equal-mass run of run_beam. Throws ValidationError when m_p != m_e.
PositroniumReport positronium_scenario(const EnsembleSpec& spec);

// Unit vector of the field axis (H0 direction; z when H0 = 0).
Vec3 field_axis(const FieldModel& f);

}  // namespace magatom
