#pragma once

#include <string>
#include <vector>

#include "magatom/core.hpp"
#include "magatom/fields.hpp"

namespace magatom {

// Right-hand sides. Each returns the time derivative packed in the state
// type itself: for ComState {dR/dt, d2R/dt2, dr/dt, d2r/dt2}, and likewise
// for LabState.

// Coulomb attraction plus the Lorentz force of the external field on each
// charge, evaluated in the lab frame. Forces depend on H only, never on A.
LabState direct_derivative(const LabState& s, const PotentialField& p, const Constants& k);
LabState direct_derivative(const LabState& s, const FieldModel& f, const Constants& k);

// Uniform field:
//   M R'' = (e/c) H x r'
//   mu r'' = -e^2 r / r^3 - (e/c) rho' x H,   rho' = R' + K_L r'
// Throws ValidationError for a linear field model.
ComState reduced_uniform_derivative(const ComState& s, const FieldModel& f, const Constants& k);

// Linear field, full center-of-mass equation with H and its gradient taken
// at R:
//   M R'' = (e/c) H x r' + (e/c) [(R'.grad) H] x r - (e/2 mu c) grad[H.(K_L L + 2 S)]
// Relative motion as in the uniform case with H(R).
// Throws ValidationError for a uniform field model.
ComState reduced_inhomogeneous_derivative(const ComState& s, const FieldModel& f, const Constants& k);

// As above without the (e/c) grad(R'.H) x r term:
//   M R'' = (e/c) H x r' - (e/2 mu c) ((K_L L + 2 S).grad) H
ComState simplified_sg_derivative(const ComState& s, const FieldModel& f, const Constants& k);

// The force term omitted by simplified_sg_derivative, (e/c) grad(R'.H) x r.
Vec3 simplified_dropped_force(const ComState& s, const FieldModel& f, const Constants& k);

enum class Formulation { Direct, ReducedUniform, ReducedInhomogeneous, SimplifiedSG };

std::string to_string(Formulation f);
// Accepts direct, reduced-uniform, reduced-inhomogeneous, simplified-sg, and
// `reduced` (uniform or inhomogeneous chosen from the field kind).
Formulation parse_formulation(const std::string& name, const FieldModel& f);
// Reduced form matching the field kind.
Formulation reduced_formulation(const FieldModel& f);

struct System {
  Formulation formulation = Formulation::Direct;
  PotentialField field;
  Constants constants = Constants::hydrogen();

  ComState derivative(const ComState& s) const;
};

enum class Method { RK4, RK45 };

std::string to_string(Method m);
Method parse_method(const std::string& name);

struct IntegratorSpec {
  Method method = Method::RK4;
  // Fixed step for RK4; initial trial step and output base for RK45.
  double step = 0.0;
  // Mixed absolute/relative tolerance for RK45, in (0, 1e-3].
  double tolerance = 1e-10;
  double t_end = 0.0;
  // Samples are recorded every `stride` steps (RK4) or every stride*step
  // time units (RK45).
  int stride = 1;

  // Throws ValidationError on a bad combination.
  void validate() const;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<ComState> states;
  std::vector<DerivedQuantities> monitors;

  std::size_t size() const { return times.size(); }
  const ComState& front() const { return states.front(); }
  const ComState& back() const { return states.back(); }
};

// Integrates from t = 0. Direct systems are stepped in lab coordinates and
// stored in center-of-mass form. Deterministic for identical inputs.
// Throws SingularityError when the charges collide without softening and
// RuntimeError on adaptive step underflow.
Trajectory integrate(const System& sys, const ComState& s0, const IntegratorSpec& spec);

struct CouplingReport {
  std::vector<double> com_kinetic;  // 1/2 M Rdot^2
  std::vector<double> internal;     // 1/2 mu rdot^2 + U(r)
  std::vector<double> total;
  // max_t |x(t) - x(0)| for each series.
  double com_excursion = 0;
  double internal_excursion = 0;
  double total_excursion = 0;
};

CouplingReport monitor_coupling(const Trajectory& tr, const Constants& k);

struct TrajectoryDeviation {
  double rms_R = 0;  // RMS |dR| / scale
  double rms_r = 0;  // RMS |dr| / scale
  double max_R = 0;
  double max_r = 0;
};

// Compares trajectories sampled at identical times. Throws ValidationError
// when the sample times differ.
TrajectoryDeviation compare_trajectories(const Trajectory& a, const Trajectory& b, double scale);

// Period of the osculating Kepler orbit of the relative motion (hard
// Coulomb energy). Throws ValidationError for an unbound orbit.
double kepler_period(const ComState& s, const Constants& k);

// Angular frequency of a circular orbit of radius a under the (possibly
// softened) Coulomb force.
double circular_frequency(double radius, const Constants& k);

// Internal period / 2000.
double default_step(const ComState& s, const Constants& k);
constexpr int kDefaultStepsPerPeriod = 2000;

// Relative motion on a circle of radius a about `normal` (direction of L),
// starting at angle `phase` from a reference axis perpendicular to normal.
ComState circular_orbit(const Constants& k, double radius, const Vec3& normal, double phase,
                        const Vec3& R = {}, const Vec3& Rdot = {});

// Relative motion released from rest at r = amplitude * axis; L = 0 exactly.
ComState linear_oscillation(double amplitude, const Vec3& axis, const Vec3& R = {},
                            const Vec3& Rdot = {});

}  // namespace magatom
