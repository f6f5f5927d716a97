#pragma once

#include <string>
#include <vector>

#include "magatom/core.hpp"
#include "magatom/dynamics.hpp"

namespace magatom {

// Far-field electromagnetic structure of the moving atom, from the
// low-speed, short-distance expansion of the two point-charge potentials
// about the center of mass:
//   A  = A1 + A2
//   A1 = -(e/c) rdot / |x-R|
//   A2 = -(e/c) ((x-R).r / |x-R|^3) (Rdot + K_L rdot)
// None of it is valid inside the atom; observation points must satisfy
// |x - R| > k_valid |r|.

constexpr double kDefaultValidityFactor = 5.0;

struct FieldSample {
  Vec3 x;
  Vec3 A, A1, A2;
  Vec3 H1, H2;
  Vec3 E;         // E_dipole - (1/c) dA/dt; only set by sample_fields
  Vec3 E_dipole;  // field of the dipole p = -e r
};

// Throws ValidityRegionError when |x - R| <= k_valid |r|.
void require_far_field(const ComState& s, const Vec3& x, double k_valid = kDefaultValidityFactor);

// Fills x, A, A1 and A2.
FieldSample far_vector_potential(const ComState& s, const Vec3& x, const Constants& k,
                                 double k_valid = kDefaultValidityFactor);

// Curl of A1: -(e/c) rdot x (x-R) / |x-R|^3. Falls off as |x-R|^-2.
Vec3 field_H1(const ComState& s, const Vec3& x, const Constants& k,
              double k_valid = kDefaultValidityFactor);

// Curl of A2: -(e/c) rho' x [3 (r.u) u - |u|^2 r] / |u|^5 with u = x - R.
Vec3 field_H2(const ComState& s, const Vec3& x, const Constants& k,
              double k_valid = kDefaultValidityFactor);

// The same field written as (1/c) rho' x E_p.
Vec3 field_H2_dipole_form(const ComState& s, const Vec3& x, const Constants& k,
                          double k_valid = kDefaultValidityFactor);

// E_p = [3 (p.u) u - |u|^2 p] / |u|^5 with p = -e r.
Vec3 electric_dipole_field(const ComState& s, const Vec3& x, const Constants& k,
                           double k_valid = kDefaultValidityFactor);

// E = E_p - (1/c) dA/dt at sample time t. dA/dt is a central difference
// over +/- `stencil` samples. Throws ValidationError when t is not an
// interior sample time.
Vec3 electric_field(const Trajectory& tr, const Vec3& x, const Constants& k, double t, int stencil = 1,
                    double k_valid = kDefaultValidityFactor);

// Every field quantity at interior sample `index`.
FieldSample sample_fields(const Trajectory& tr, std::size_t index, const Vec3& x, const Constants& k,
                          double k_valid = kDefaultValidityFactor);

struct MomentEstimate {
  Vec3 mu_avg;  // fitted dipole moment of the time-averaged potential
  Vec3 L_avg;   // time-averaged internal angular momentum
  double g_measured = 0;   // |mu_avg| / |L_avg|, positive when mu_avg is antiparallel to L_avg
  double g_predicted = 0;  // e K_L / (2 mu c)
  Vec3 p;                  // instantaneous electric dipole -e r at the first sample

  double period = 0;
  int n_periods = 0;
  double fit_residual = 0;     // RMS misfit / RMS <A> over all probes
  double discarded_ratio = 0;  // max over probes |<symmetric term>| / |<antisymmetric term>|
  std::vector<std::string> warnings;
};

// e K_L / (2 mu c).
double predicted_gyromagnetic_ratio(const Constants& k);

// Averages far_vector_potential at every probe over the largest whole
// number of internal periods covered by the trajectory and least-squares
// fits <A>(x) = mu x (x-R) / |x-R|^3. The atom must be at rest (Rdot = 0).
// Needs at least 20 probes.
MomentEstimate averaged_moment(const Trajectory& tr, const Constants& k, const std::vector<Vec3>& probes,
                               double k_valid = kDefaultValidityFactor);

constexpr std::size_t kMinMomentProbes = 20;

// `count` points spread quasi-uniformly over a sphere (Fibonacci lattice).
std::vector<Vec3> sphere_probes(const Vec3& center, double radius, std::size_t count);

}  // namespace magatom
