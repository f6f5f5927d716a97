#pragma once

#include <utility>

#include "magatom/fields.hpp"
#include "magatom/vec3.hpp"

namespace magatom {

// Physical constants of a two-charge neutral system: a positive particle of
// mass m_p and charge +e bound to a negative particle of mass m_e and charge
// -e. Gaussian units. `softening` regularizes the Coulomb potential to
// -e^2 / sqrt(r^2 + softening^2); zero means a hard Coulomb core.
class Constants {
 public:
  // Throws ValidationError unless all masses, e and c are positive and
  // softening is non-negative.
  Constants(double m_p, double m_e, double e, double c, double softening = 0.0);

  // Scaled atomic units: m_e = e = 1, c = 137.035999.
  static Constants hydrogen(double softening = 0.0);
  static Constants positronium(double softening = 0.0);

  double m_p() const { return m_p_; }
  double m_e() const { return m_e_; }
  double e() const { return e_; }
  double c() const { return c_; }
  double softening() const { return softening_; }

  double total_mass() const { return total_; }
  double reduced_mass() const { return reduced_; }
  // (m_p - m_e) / M; exactly zero for equal masses.
  double K_L() const { return k_l_; }

  Constants with_softening(double eps) const { return {m_p_, m_e_, e_, c_, eps}; }

  friend bool operator==(const Constants&, const Constants&) = default;

 private:
  double m_p_, m_e_, e_, c_, softening_;
  double total_, reduced_, k_l_;
};

struct LabState {
  Vec3 r_p, v_p, r_e, v_e;
  friend bool operator==(const LabState&, const LabState&) = default;
};

// R, Rdot: center of mass. r = r_e - r_p and its rate.
struct ComState {
  Vec3 R, Rdot, r, rdot;
  friend bool operator==(const ComState&, const ComState&) = default;
};

struct DerivedQuantities {
  Vec3 L;        // mu r x rdot
  Vec3 S;        // mu r x Rdot
  Vec3 rho_dot;  // Rdot + K_L rdot
  double E = 0;  // 1/2 M Rdot^2 + 1/2 mu rdot^2 + U(r)
  double K_L = 0;
};

ComState to_com(const LabState& s, const Constants& k);
LabState to_lab(const ComState& s, const Constants& k);

// Interaction energy -e^2/r (softened when k.softening() > 0). Throws
// SingularityError at r = 0 without softening.
double coulomb_energy(const Vec3& r, const Constants& k);
// Force on the negative particle, -e^2 r / (r^2 + eps^2)^(3/2).
Vec3 coulomb_force(const Vec3& r, const Constants& k);

DerivedQuantities derived_quantities(const ComState& s, const Constants& k);
double energy(const LabState& s, const Constants& k);

struct CanonicalMomenta {
  Vec3 P_R;
  Vec3 p_r;
};

// Momenta of the reduced uniform-field Lagrangian:
//   P_R = M Rdot - (e/c) H x r,  p_r = mu rdot - (e/2c) K_L H x r.
// Throws ValidationError for a non-uniform field.
CanonicalMomenta canonical_momenta(const ComState& s, const FieldModel& f, const Constants& k);

struct LabMomenta {
  Vec3 p_p;  // m_p v_p + (e/c) A(r_p)
  Vec3 p_e;  // m_e v_e - (e/c) A(r_e)
};

// Canonical momenta of the lab-frame Lagrangian for an arbitrary gauge.
LabMomenta lab_canonical_momenta(const LabState& s, const PotentialField& p, const Constants& k);

// The same momenta expressed in center-of-mass variables:
//   P_R = p_p + p_e,  p_r = (m_p p_e - m_e p_p) / M.
CanonicalMomenta com_canonical_momenta(const ComState& s, const PotentialField& p, const Constants& k);

}  // namespace magatom
