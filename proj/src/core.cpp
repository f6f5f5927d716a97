#include "magatom/core.hpp"

#include <cmath>
#include <sstream>

#include "magatom/errors.hpp"

namespace magatom {

namespace {

constexpr double kSpeedOfLightAtomic = 137.035999;
constexpr double kProtonElectronMassRatio = 1836.15267343;

}  // namespace

Constants::Constants(double m_p, double m_e, double e, double c, double softening)
    : m_p_(m_p), m_e_(m_e), e_(e), c_(c), softening_(softening) {
  if (!(m_p > 0.0) || !(m_e > 0.0) || !(e > 0.0) || !(c > 0.0) || !std::isfinite(m_p) ||
      !std::isfinite(m_e) || !std::isfinite(e) || !std::isfinite(c)) {
    std::ostringstream msg;
    msg << "constants must be positive and finite: m_p=" << m_p << " m_e=" << m_e << " e=" << e
        << " c=" << c;
    throw ValidationError(msg.str());
  }
  if (!(softening >= 0.0) || !std::isfinite(softening))
    throw ValidationError("softening must be non-negative");
  total_ = m_p + m_e;
  reduced_ = m_p * m_e / total_;
  k_l_ = (m_p - m_e) / total_;
}

Constants Constants::hydrogen(double softening) {
  return {kProtonElectronMassRatio, 1.0, 1.0, kSpeedOfLightAtomic, softening};
}

Constants Constants::positronium(double softening) {
  return {1.0, 1.0, 1.0, kSpeedOfLightAtomic, softening};
}

ComState to_com(const LabState& s, const Constants& k) {
  const double M = k.total_mass();
  return {(k.m_p() * s.r_p + k.m_e() * s.r_e) / M, (k.m_p() * s.v_p + k.m_e() * s.v_e) / M,
          s.r_e - s.r_p, s.v_e - s.v_p};
}

LabState to_lab(const ComState& s, const Constants& k) {
  const double wp = k.m_e() / k.total_mass();
  const double we = k.m_p() / k.total_mass();
  return {s.R - wp * s.r, s.Rdot - wp * s.rdot, s.R + we * s.r, s.Rdot + we * s.rdot};
}

double coulomb_energy(const Vec3& r, const Constants& k) {
  const double eps = k.softening();
  const double d2 = norm2(r) + eps * eps;
  if (d2 == 0.0) throw SingularityError("coincident charges with hard Coulomb interaction", 0.0);
  return -k.e() * k.e() / std::sqrt(d2);
}

Vec3 coulomb_force(const Vec3& r, const Constants& k) {
  const double eps = k.softening();
  const double d2 = norm2(r) + eps * eps;
  if (d2 == 0.0) throw SingularityError("coincident charges with hard Coulomb interaction", 0.0);
  const double inv = 1.0 / std::sqrt(d2);
  return (-k.e() * k.e() * inv * inv * inv) * r;
}

DerivedQuantities derived_quantities(const ComState& s, const Constants& k) {
  const double mu = k.reduced_mass();
  DerivedQuantities q;
  q.L = mu * cross(s.r, s.rdot);
  q.S = mu * cross(s.r, s.Rdot);
  q.rho_dot = s.Rdot + k.K_L() * s.rdot;
  q.E = 0.5 * k.total_mass() * norm2(s.Rdot) + 0.5 * mu * norm2(s.rdot) + coulomb_energy(s.r, k);
  q.K_L = k.K_L();
  return q;
}

double energy(const LabState& s, const Constants& k) {
  return 0.5 * k.m_p() * norm2(s.v_p) + 0.5 * k.m_e() * norm2(s.v_e) +
         coulomb_energy(s.r_e - s.r_p, k);
}

CanonicalMomenta canonical_momenta(const ComState& s, const FieldModel& f, const Constants& k) {
  if (!f.is_uniform())
    throw ValidationError("canonical_momenta is defined for the uniform field model only");
  const Vec3 hxr = cross(f.H0(), s.r);
  const double ec = k.e() / k.c();
  return {k.total_mass() * s.Rdot - ec * hxr, k.reduced_mass() * s.rdot - 0.5 * ec * k.K_L() * hxr};
}

LabMomenta lab_canonical_momenta(const LabState& s, const PotentialField& p, const Constants& k) {
  const double ec = k.e() / k.c();
  return {k.m_p() * s.v_p + ec * p.A(s.r_p), k.m_e() * s.v_e - ec * p.A(s.r_e)};
}

CanonicalMomenta com_canonical_momenta(const ComState& s, const PotentialField& p, const Constants& k) {
  const LabMomenta lab = lab_canonical_momenta(to_lab(s, k), p, k);
  return {lab.p_p + lab.p_e, (k.m_p() * lab.p_e - k.m_e() * lab.p_p) / k.total_mass()};
}

}  // namespace magatom
