#include <doctest.h>

#include <random>

#include "magatom/core.hpp"
#include "magatom/dynamics.hpp"
#include "magatom/errors.hpp"
#include "oracles.hpp"

using namespace magatom;

namespace {

double rel(const Vec3& a, const Vec3& b) { return norm(a - b) / std::max(1.0, norm(b)); }

LabState random_lab(std::mt19937_64& rng) {
  return {oracle::random_vec(rng, 3), oracle::random_vec(rng, 1), oracle::random_vec(rng, 3),
          oracle::random_vec(rng, 1)};
}

}  // namespace

TEST_CASE("constants derive M, mu and K_L") {
  const Constants k(3.0, 1.0, 1.0, 10.0);
  CHECK(k.total_mass() == 4.0);
  CHECK(k.reduced_mass() == doctest::Approx(0.75));
  CHECK(k.K_L() == doctest::Approx(0.5));
  CHECK(Constants::positronium().K_L() == 0.0);
  CHECK(Constants(1e12, 1.0, 1.0, 1.0).K_L() == doctest::Approx(1.0).epsilon(1e-11));
  CHECK(Constants::hydrogen().c() == 137.035999);
}

TEST_CASE("constants reject non-physical values") {
  CHECK_THROWS_AS(Constants(0.0, 1.0, 1.0, 1.0), ValidationError);
  CHECK_THROWS_AS(Constants(1.0, -1.0, 1.0, 1.0), ValidationError);
  CHECK_THROWS_AS(Constants(1.0, 1.0, 0.0, 1.0), ValidationError);
  CHECK_THROWS_AS(Constants(1.0, 1.0, 1.0, 0.0), ValidationError);
  CHECK_THROWS_AS(Constants(1.0, 1.0, 1.0, 1.0, -0.1), ValidationError);
}

TEST_CASE("to_com on hand-computed states") {
  const Constants eq(1.0, 1.0, 1.0, 1.0);
  const ComState a = to_com({{1, 0, 0}, {}, {-1, 0, 0}, {}}, eq);
  CHECK(a.R == Vec3{0, 0, 0});
  CHECK(a.r == Vec3{-2, 0, 0});

  const Constants w(3.0, 1.0, 1.0, 1.0);
  const ComState b = to_com({{0, 0, 0}, {}, {4, 0, 0}, {}}, w);
  CHECK(b.R == Vec3{1, 0, 0});
  CHECK(b.r == Vec3{4, 0, 0});
}

TEST_CASE("to_lab on hand-computed states") {
  const Constants eq(1.0, 1.0, 1.0, 1.0);
  const LabState a = to_lab({{}, {}, {1, 0, 0}, {}}, eq);
  CHECK(a.r_p == Vec3{-0.5, 0, 0});
  CHECK(a.r_e == Vec3{0.5, 0, 0});
  const LabState b = to_lab({{1, 2, 3}, {}, {}, {}}, Constants::hydrogen());
  CHECK(b.r_p == Vec3{1, 2, 3});
  CHECK(b.r_e == Vec3{1, 2, 3});
}

TEST_CASE("frame transforms round-trip and keep momentum bookkeeping") {
  std::mt19937_64 rng(3);
  for (const Constants& k : {Constants::hydrogen(), Constants::positronium(), Constants(7.3, 2.1, 1.0, 50.0)}) {
    for (int i = 0; i < 200; ++i) {
      const LabState s = random_lab(rng);
      const LabState back = to_lab(to_com(s, k), k);
      CHECK(rel(back.r_p, s.r_p) <= 1e-14);
      CHECK(rel(back.v_p, s.v_p) <= 1e-14);
      CHECK(rel(back.r_e, s.r_e) <= 1e-14);
      CHECK(rel(back.v_e, s.v_e) <= 1e-14);

      const ComState c{oracle::random_vec(rng, 3), oracle::random_vec(rng, 1), oracle::random_vec(rng, 2),
                       oracle::random_vec(rng, 1)};
      const ComState cb = to_com(to_lab(c, k), k);
      CHECK(rel(cb.R, c.R) <= 1e-14);
      CHECK(rel(cb.r, c.r) <= 1e-14);
      CHECK(rel(cb.Rdot, c.Rdot) <= 1e-14);
      CHECK(rel(cb.rdot, c.rdot) <= 1e-14);

      const ComState cs = to_com(s, k);
      const Vec3 p = k.m_p() * s.v_p + k.m_e() * s.v_e;
      CHECK(rel(k.total_mass() * cs.Rdot, p) <= 1e-14);
    }
  }
}

TEST_CASE("derived quantities") {
  const Constants k = Constants::hydrogen();
  SUBCASE("parallel motion has no angular momentum") {
    const DerivedQuantities d = derived_quantities({{}, {}, {1, 2, 3}, {2, 4, 6}}, k);
    CHECK(d.L == Vec3{0, 0, 0});
    CHECK(d.S == Vec3{0, 0, 0});
  }
  SUBCASE("static pair at unit distance") {
    CHECK(derived_quantities({{}, {}, {1, 0, 0}, {}}, k).E == -1.0);
  }
  SUBCASE("circular orbit angular momentum") {
    const double a = 1.7;
    const double w = std::sqrt(k.e() * k.e() / (k.reduced_mass() * a * a * a));
    const ComState s = circular_orbit(k, a, {1, 1, 0}, 0.3);
    CHECK(norm(derived_quantities(s, k).L) == doctest::Approx(k.reduced_mass() * a * a * w).epsilon(1e-13));
  }
  SUBCASE("definitions of S and rho_dot") {
    const ComState s{{}, {0.1, 0.2, 0.3}, {1, -1, 0.5}, {0.3, 0.1, -0.2}};
    const DerivedQuantities d = derived_quantities(s, k);
    CHECK(rel(d.S, k.reduced_mass() * cross(s.r, s.Rdot)) <= 1e-15);
    CHECK(rel(d.rho_dot, s.Rdot + k.K_L() * s.rdot) <= 1e-15);
    CHECK(d.K_L == k.K_L());
  }
  SUBCASE("hard core is singular at r = 0") {
    CHECK_THROWS_AS(derived_quantities({{}, {}, {}, {1, 0, 0}}, k), SingularityError);
    CHECK(derived_quantities({{}, {}, {}, {}}, k.with_softening(0.5)).E == doctest::Approx(-2.0));
  }
}

TEST_CASE("center-of-mass energy equals lab-frame energy") {
  std::mt19937_64 rng(5);
  for (const Constants& k : {Constants::hydrogen(), Constants::positronium(0.1)}) {
    for (int i = 0; i < 200; ++i) {
      const LabState s = random_lab(rng);
      const Vec3 r = s.r_e - s.r_p;
      const double eps = k.softening();
      const double lab = 0.5 * k.m_p() * norm2(s.v_p) + 0.5 * k.m_e() * norm2(s.v_e) -
                         k.e() * k.e() / std::sqrt(norm2(r) + eps * eps);
      const double com = derived_quantities(to_com(s, k), k).E;
      CHECK(std::fabs(com - lab) <= 1e-13 * std::max(std::fabs(lab), 1.0));
      CHECK(energy(s, k) == doctest::Approx(lab).epsilon(1e-13));
    }
  }
}

TEST_CASE("canonical momenta of the uniform-field reduction") {
  const Constants k = Constants::hydrogen();
  const ComState s{{0.3, 0.1, 0}, {0.01, 0.02, -0.03}, {1, 0.5, -0.2}, {0.2, -0.7, 0.1}};
  SUBCASE("field-free limit") {
    const CanonicalMomenta m = canonical_momenta(s, FieldModel::uniform({}), k);
    CHECK(rel(m.P_R, k.total_mass() * s.Rdot) <= 1e-15);
    CHECK(rel(m.p_r, k.reduced_mass() * s.rdot) <= 1e-15);
  }
  SUBCASE("equal masses drop the relative term") {
    const Constants ps = Constants::positronium();
    const CanonicalMomenta m = canonical_momenta(s, FieldModel::uniform({1, 2, 3}), ps);
    CHECK(rel(m.p_r, ps.reduced_mass() * s.rdot) <= 1e-15);
  }
  SUBCASE("cross product by hand") {
    const CanonicalMomenta m = canonical_momenta({{}, {}, {1, 0, 0}, {}}, FieldModel::uniform({0, 0, 1}), k);
    CHECK(m.P_R.x == 0.0);
    CHECK(m.P_R.y == doctest::Approx(-k.e() / k.c()));
    CHECK(m.P_R.z == 0.0);
  }
  SUBCASE("linear field rejected") {
    CHECK_THROWS_AS(canonical_momenta(s, FieldModel::stern_gerlach(1, 0.1), k), ValidationError);
  }
}

TEST_CASE("lab canonical momenta match the reduced form up to the dropped total derivative") {
  // The lab Lagrangian equals the reduced one minus d/dt F with
  // F = (e/2c) H.(R x r); momenta therefore differ by -grad F.
  const Constants k = Constants::hydrogen();
  const Vec3 H{0.4, -1.2, 2.0};
  const FieldModel f = FieldModel::uniform(H);
  std::mt19937_64 rng(11);
  for (int i = 0; i < 50; ++i) {
    const ComState s{oracle::random_vec(rng, 2), oracle::random_vec(rng, 0.1), oracle::random_vec(rng, 1),
                     oracle::random_vec(rng, 1)};
    const CanonicalMomenta lab = com_canonical_momenta(s, PotentialField(f), k);
    const CanonicalMomenta red = canonical_momenta(s, f, k);
    const double ec = k.e() / (2.0 * k.c());
    const Vec3 dF_dR = ec * cross(s.r, H);
    const Vec3 dF_dr = ec * cross(H, s.R);
    CHECK(rel(red.P_R - lab.P_R, dF_dR) <= 1e-12);
    CHECK(rel(red.p_r - lab.p_r, dF_dr) <= 1e-12);
  }
}
