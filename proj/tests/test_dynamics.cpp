#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "magatom/dynamics.hpp"
#include "magatom/errors.hpp"
#include "oracles.hpp"

using namespace magatom;

namespace {

constexpr double kPi = std::numbers::pi;

double circular_period(const Constants& k, double a) { return 2.0 * kPi / circular_frequency(a, k); }

IntegratorSpec rk4(double step, double t_end, int stride = 1) {
  IntegratorSpec s;
  s.step = step;
  s.t_end = t_end;
  s.stride = stride;
  return s;
}

System direct(const FieldModel& f, const Constants& k) { return {Formulation::Direct, PotentialField(f), k}; }
System reduced(Formulation form, const FieldModel& f, const Constants& k) { return {form, PotentialField(f), k}; }

double state_distance(const ComState& a, const ComState& b) {
  return std::sqrt(norm2(a.R - b.R) + norm2(a.Rdot - b.Rdot) + norm2(a.r - b.r) + norm2(a.rdot - b.rdot));
}

}  // namespace

TEST_CASE("direct derivative: charges at rest feel only Coulomb attraction") {
  const Constants k = Constants::hydrogen();
  const LabState s{{0, 0, 0}, {}, {1.2, -0.4, 0.3}, {}};
  const LabState d = direct_derivative(s, FieldModel::stern_gerlach(5, 0.3), k);
  CHECK(d.r_p == s.v_p);
  CHECK(d.r_e == s.v_e);
  CHECK(norm(cross(d.v_p, d.v_e)) <= 1e-15 * norm(d.v_p) * norm(d.v_e));
  CHECK(dot(d.v_p, d.v_e) < 0.0);
  CHECK(norm(d.v_p) / norm(d.v_e) == doctest::Approx(k.m_e() / k.m_p()).epsilon(1e-14));
  // Proton is pulled toward the electron.
  CHECK(dot(d.v_p, s.r_e - s.r_p) > 0.0);
}

TEST_CASE("direct derivative: Lorentz force signs") {
  const Constants k(2.0, 1.0, 1.0, 10.0, 0.0);
  const FieldModel f = FieldModel::uniform({0, 0, 3});
  // Far apart so Coulomb is negligible against the magnetic term.
  const LabState s{{0, 0, 0}, {1, 0, 0}, {1e6, 0, 0}, {1, 0, 0}};
  const LabState d = direct_derivative(s, f, k);
  const Vec3 magnetic = (k.e() / k.c()) * cross(Vec3{1, 0, 0}, Vec3{0, 0, 3});
  CHECK(norm(k.m_p() * d.v_p - magnetic) <= 1e-10);
  CHECK(norm(k.m_e() * d.v_e + magnetic) <= 1e-10);
}

TEST_CASE("zero-field circular orbit closes after one analytic period") {
  const Constants k = Constants::hydrogen();
  const double a = 1.0;
  const double T = circular_period(k, a);
  const ComState s0 = circular_orbit(k, a, {0.2, 0.4, 1}, 1.1);
  const Trajectory tr = integrate(direct(FieldModel::uniform({}), k), s0, rk4(T / 2000, T));
  CHECK(tr.times.back() == doctest::Approx(T));
  CHECK(norm(tr.back().r - s0.r) <= 1e-8 * a);

  // Mid-orbit against the rigid rotation in closed form.
  const std::size_t mid = tr.size() / 3;
  const Vec3 expect = oracle::rotate(s0.r, derived_quantities(s0, k).L, tr.times[mid] * circular_frequency(a, k));
  CHECK(norm(tr.states[mid].r - expect) <= 1e-8 * a);
}

TEST_CASE("equal masses moving along the field axis keep the center of mass at rest") {
  const Constants k = Constants::positronium(0.05);
  const LabState lab{{0, 0, 0.5}, {0, 0, 0.1}, {0, 0, -0.5}, {0, 0, -0.1}};
  const ComState s0 = to_com(lab, k);
  const double T = kepler_period(s0, k);
  const Trajectory tr = integrate(direct(FieldModel::uniform({0, 0, 2}), k), s0, rk4(T / 2000, 5 * T, 100));
  for (const ComState& s : tr.states) {
    CHECK(norm(s.R) <= 1e-15);
    CHECK(norm(s.Rdot) <= 1e-15);
  }
}

TEST_CASE("pseudo-momentum M Rdot - (e/c) H x r is conserved in a uniform field") {
  const Constants k = Constants::hydrogen();
  const Vec3 H{0.3, -1, 20};
  const ComState s0 = circular_orbit(k, 1.0, {0.3, 0.5, 1}, 0.7, {}, {0, 0.01, 0});
  const double T = kepler_period(s0, k);
  const Trajectory tr = integrate(direct(FieldModel::uniform(H), k), s0, rk4(T / 2000, 3 * T, 50));
  const double ec = k.e() / k.c();
  const Vec3 P0 = k.total_mass() * s0.Rdot - ec * cross(H, s0.r);
  for (const ComState& s : tr.states) CHECK(norm(k.total_mass() * s.Rdot - ec * cross(H, s.r) - P0) <= 1e-10 * norm(P0));
}

TEST_CASE("reduced uniform right-hand side") {
  const Constants k = Constants::hydrogen();
  const FieldModel f = FieldModel::uniform({0.5, 1, 3});
  SUBCASE("frozen relative motion gives no CoM force") {
    const ComState d = reduced_uniform_derivative({{}, {0.1, 0, 0}, {1, 0, 0}, {}}, f, k);
    CHECK(d.Rdot == Vec3{});
  }
  SUBCASE("field-free limit is Kepler motion") {
    const ComState s{{}, {0.1, 0.2, 0}, {1, 2, 0.5}, {0.3, -0.2, 0.1}};
    const ComState d = reduced_uniform_derivative(s, FieldModel::uniform({}), k);
    CHECK(d.Rdot == Vec3{});
    CHECK(norm(k.reduced_mass() * d.rdot - coulomb_force(s.r, k)) <= 1e-15);
  }
  SUBCASE("displayed equations by hand") {
    const ComState s{{1, 2, 3}, {0.1, 0.2, 0}, {1, 2, 0.5}, {0.3, -0.2, 0.1}};
    const ComState d = reduced_uniform_derivative(s, f, k);
    const double ec = k.e() / k.c();
    const Vec3 H = f.H0();
    const Vec3 rho = s.Rdot + k.K_L() * s.rdot;
    const double r3 = std::pow(norm(s.r), 3);
    CHECK(norm(k.total_mass() * d.Rdot - ec * cross(H, s.rdot)) <= 1e-15);
    CHECK(norm(k.reduced_mass() * d.rdot - (-1.0 / r3 * s.r - ec * cross(rho, H))) <= 1e-14);
    CHECK(d.R == s.Rdot);
    CHECK(d.r == s.rdot);
  }
  SUBCASE("linear field rejected") {
    CHECK_THROWS_AS(reduced_uniform_derivative({{}, {}, {1, 0, 0}, {}}, FieldModel::stern_gerlach(1, 1), k),
                    ValidationError);
  }
}

TEST_CASE("reduced inhomogeneous right-hand side") {
  const Constants k = Constants::hydrogen();
  const ComState s{{0.2, -0.1, 0.4}, {0.01, 0.02, -0.005}, {0.6, -0.7, 0.3}, {0.5, 0.4, -0.9}};
  SUBCASE("zero gradient matches the uniform form") {
    const Vec3 H{0.1, 0.2, 4};
    const ComState a = reduced_inhomogeneous_derivative(s, FieldModel::linear(H, Mat3::zero()), k);
    const ComState b = reduced_uniform_derivative(s, FieldModel::uniform(H), k);
    CHECK(norm(a.Rdot - b.Rdot) <= 1e-15 * std::max(1.0, norm(b.Rdot)));
    CHECK(norm(a.rdot - b.rdot) <= 1e-15 * norm(b.rdot));
  }
  SUBCASE("point particle feels no force") {
    const ComState d = reduced_inhomogeneous_derivative({{1, 2, 3}, {0.1, 0, 0}, {}, {}}, FieldModel::stern_gerlach(3, 1), k.with_softening(0.1));
    CHECK(d.Rdot == Vec3{});
  }
  SUBCASE("displayed CoM equation by hand") {
    const FieldModel f = FieldModel::stern_gerlach(3, 0.4);
    const Mat3 G = f.gradient();
    const Vec3 H = evaluate_field(f, s.R);
    const double ec = k.e() / k.c();
    const DerivedQuantities q = derived_quantities(s, k);
    const Vec3 J = k.K_L() * q.L + 2.0 * q.S;
    const Vec3 force = ec * cross(H, s.rdot) + ec * cross(G * s.Rdot, s.r) -
                       (k.e() / (2 * k.reduced_mass() * k.c())) * (G.transposed() * J);
    const ComState d = reduced_inhomogeneous_derivative(s, f, k);
    CHECK(norm(k.total_mass() * d.Rdot - force) <= 1e-14 * norm(force));
    const Vec3 rel = coulomb_force(s.r, k) - ec * cross(q.rho_dot, H);
    CHECK(norm(k.reduced_mass() * d.rdot - rel) <= 1e-14 * norm(rel));
  }
  SUBCASE("uniform field rejected") {
    CHECK_THROWS_AS(reduced_inhomogeneous_derivative(s, FieldModel::uniform({0, 0, 1}), k), ValidationError);
  }
}

TEST_CASE("simplified Stern-Gerlach right-hand side") {
  const Constants k = Constants::hydrogen(0.1);
  const FieldModel f = FieldModel::stern_gerlach(2, 0.5);
  SUBCASE("no internal motion and no cross-coupling") {
    const ComState d = simplified_sg_derivative({{}, {}, {0.3, 0.2, 0.1}, {}}, f, k);
    CHECK(d.Rdot == Vec3{});
  }
  SUBCASE("equal masses leave only the S channel") {
    const Constants ps = Constants::positronium();
    const ComState s{{}, {0.02, 0.03, 0}, {0.5, 0.2, 0.4}, {0, 0, 0}};
    const ComState d = simplified_sg_derivative(s, f, ps);
    const Vec3 S = derived_quantities(s, ps).S;
    const Vec3 expect = -(ps.e() / (ps.reduced_mass() * ps.c())) * (f.gradient() * S);
    CHECK(norm(ps.total_mass() * d.Rdot - expect) <= 1e-15 * norm(expect));
  }
  SUBCASE("differs from the full form by exactly the dropped term") {
    std::mt19937_64 rng(29);
    for (int i = 0; i < 100; ++i) {
      ComState s{oracle::random_vec(rng, 1), oracle::random_vec(rng, 0.05), oracle::random_vec(rng, 1),
                 oracle::random_vec(rng, 1)};
      s.Rdot.z = 0.0;  // beam perpendicular to H
      const ComState full = reduced_inhomogeneous_derivative(s, f, k);
      const ComState simp = simplified_sg_derivative(s, f, k);
      const Vec3 dropped = simplified_dropped_force(s, f, k);
      const Vec3 grad_RdotH = f.gradient().transposed() * s.Rdot;
      CHECK(norm(dropped - (k.e() / k.c()) * cross(grad_RdotH, s.r)) <= 1e-15);
      CHECK(norm(k.total_mass() * (full.Rdot - simp.Rdot) - dropped) <= 1e-13 * std::max(1e-3, norm(dropped)));
      CHECK(norm(full.rdot - simp.rdot) == 0.0);
    }
  }
}

TEST_CASE("reduced uniform integration matches the direct oracle") {
  const Constants k = Constants::hydrogen();
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 3; ++trial) {
    const FieldModel f = FieldModel::uniform({0, 0, 10.0 * (trial + 1)});
    ComState s0 = circular_orbit(k, 1.0, oracle::random_unit(rng), 0.3 * trial, {}, oracle::random_vec(rng, 0.01));
    s0.rdot *= 0.9;  // eccentric
    const double T = kepler_period(s0, k);
    const IntegratorSpec spec = rk4(T / 2000, 10 * T, 10);
    const Trajectory a = integrate(direct(f, k), s0, spec);
    const Trajectory b = integrate(reduced(Formulation::ReducedUniform, f, k), s0, spec);
    const TrajectoryDeviation d = compare_trajectories(a, b, norm(s0.r));
    CHECK(d.rms_R <= 1e-9);
    CHECK(d.rms_r <= 1e-9);
  }
}

TEST_CASE("compare_trajectories requires matched sample times") {
  const Constants k = Constants::hydrogen();
  const ComState s0 = circular_orbit(k, 1, {0, 0, 1}, 0);
  const Trajectory a = integrate(direct(FieldModel::uniform({}), k), s0, rk4(0.01, 1));
  const Trajectory b = integrate(direct(FieldModel::uniform({}), k), s0, rk4(0.02, 1));
  CHECK_THROWS_AS(compare_trajectories(a, b, 1.0), ValidationError);
  CHECK(compare_trajectories(a, a, 1.0).rms_r == 0.0);
}

TEST_CASE("RK4 end-state error converges at fourth order") {
  const Constants k = Constants::hydrogen();
  const double a = 1.0;
  const double T = circular_period(k, a);
  const ComState s0 = circular_orbit(k, a, {0, 0, 1}, 0);
  const ComState exact{{}, {}, oracle::rotate(s0.r, {0, 0, 1}, 2 * kPi * 2), oracle::rotate(s0.rdot, {0, 0, 1}, 2 * kPi * 2)};
  std::vector<double> h, err;
  for (int n : {400, 800, 1600}) {
    const Trajectory tr = integrate(direct(FieldModel::uniform({}), k), s0, rk4(T / n, 2 * T, n * 2));
    h.push_back(T / n);
    err.push_back(state_distance(tr.back(), exact));
  }
  const double order = oracle::loglog_slope(h, err);
  MESSAGE("fitted order " << order);
  CHECK(order == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("zero-field invariants") {
  const Constants k = Constants::hydrogen();
  const ComState s0 = circular_orbit(k, 1.0, {1, -1, 2}, 0.2, {}, {0.001, 0, 0});
  const double T = kepler_period(s0, k);
  const Trajectory tr = integrate(direct(FieldModel::uniform({}), k), s0, rk4(T / 2000, 20 * T, 100));
  const DerivedQuantities q0 = tr.monitors.front();
  double dE = 0, dL = 0;
  for (const DerivedQuantities& q : tr.monitors) {
    dE = std::max(dE, std::fabs(q.E - q0.E) / std::fabs(q0.E));
    dL = std::max(dL, norm(q.L - q0.L) / norm(q0.L));
  }
  CHECK(dE <= 1e-10);
  CHECK(dL <= 1e-10);
  const CouplingReport c = monitor_coupling(tr, k);
  CHECK(c.com_excursion <= 1e-15);
}

TEST_CASE("time reversal recovers the initial state") {
  const Constants k = Constants::hydrogen();
  ComState s0 = circular_orbit(k, 1.0, {0.1, 0.2, 1}, 0.5, {}, {0.003, 0, 0});
  s0.rdot *= 0.85;
  const double T = kepler_period(s0, k);
  const Trajectory fwd = integrate(direct(FieldModel::uniform({}), k), s0, rk4(T / 2000, 5 * T, 10000));
  ComState back = fwd.back();
  back.Rdot = -back.Rdot;
  back.rdot = -back.rdot;
  const Trajectory rev = integrate(direct(FieldModel::uniform({}), k), back, rk4(T / 2000, 5 * T, 10000));
  ComState end = rev.back();
  end.Rdot = -end.Rdot;
  end.rdot = -end.rdot;
  CHECK(state_distance(end, s0) <= 1e-8 * std::sqrt(norm2(s0.r) + norm2(s0.rdot)));
}

TEST_CASE("adaptive RK45 tracks the analytic orbit") {
  const Constants k = Constants::hydrogen();
  const double T = circular_period(k, 1.0);
  const ComState s0 = circular_orbit(k, 1.0, {0, 0, 1}, 0);
  IntegratorSpec spec;
  spec.method = Method::RK45;
  spec.step = T / 100;
  spec.tolerance = 1e-11;
  spec.t_end = 3 * T;
  const Trajectory tr = integrate(direct(FieldModel::uniform({}), k), s0, spec);
  CHECK(tr.times.back() == doctest::Approx(3 * T));
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const Vec3 expect = oracle::rotate(s0.r, {0, 0, 1}, tr.times[i] * circular_frequency(1.0, k));
    CHECK(norm(tr.states[i].r - expect) <= 1e-7);
  }
  for (std::size_t i = 1; i < tr.size(); ++i) CHECK(tr.times[i] > tr.times[i - 1]);
}

TEST_CASE("head-on collision without softening is reported with its time") {
  const Constants k = Constants::hydrogen();
  const ComState s0 = linear_oscillation(1.0, {0, 0, 1});
  // Radial free fall from rest reaches r = 0 after half the period of the
  // degenerate orbit with semi-major axis a/2.
  const double t_fall = 0.5 * 2 * kPi * std::sqrt(k.reduced_mass() * std::pow(0.5, 3));
  try {
    integrate(direct(FieldModel::uniform({}), k), s0, rk4(t_fall / 2000, 2 * t_fall));
    FAIL("expected a singularity");
  } catch (const SingularityError& e) {
    CHECK(e.time() == doctest::Approx(t_fall).epsilon(0.01));
  }
  // Softened, the same orbit passes through the origin.
  const Constants soft = k.with_softening(0.05);
  const Trajectory tr = integrate(direct(FieldModel::uniform({}), soft), s0, rk4(t_fall / 20000, 4 * t_fall, 100));
  CHECK(norm(derived_quantities(tr.back(), soft).L) == 0.0);
}

TEST_CASE("direct trajectories do not depend on the gauge") {
  const Constants k = Constants::hydrogen();
  const FieldModel f = FieldModel::stern_gerlach(5, 0.2);
  const ComState s0 = circular_orbit(k, 1, {0.3, 0.4, 1}, 0.1, {}, {0, 0.01, 0});
  const IntegratorSpec spec = rk4(kepler_period(s0, k) / 2000, 2 * kepler_period(s0, k));
  const Trajectory a = integrate(direct(f, k), s0, spec);
  Mat3 Q = Mat3::diag(0.2, -0.5, 0.7);
  Q(0, 2) = Q(2, 0) = 0.3;
  const PotentialField g = gauge_transform(gauge_transform(f, GaugeFunction::linear({1, 2, 3})), GaugeFunction::quadratic(Q));
  const Trajectory b = integrate(System{Formulation::Direct, g, k}, s0, spec);
  CHECK(a.states == b.states);
}

TEST_CASE("integration is deterministic") {
  const Constants k = Constants::hydrogen();
  const FieldModel f = FieldModel::stern_gerlach(5, 0.2);
  const ComState s0 = circular_orbit(k, 1, {0.3, 0.4, 1}, 0.1, {}, {0, 0.01, 0});
  const IntegratorSpec spec = rk4(0.003, 3);
  const System sys = reduced(Formulation::ReducedInhomogeneous, f, k);
  CHECK(integrate(sys, s0, spec).states == integrate(sys, s0, spec).states);
}

TEST_CASE("energy channels exchange in a uniform field") {
  const Constants k = Constants::hydrogen();
  const ComState s0 = circular_orbit(k, 1.0, {0.3, 0.5, 1}, 0.7);
  const double T = kepler_period(s0, k);
  const Trajectory tr = integrate(reduced(Formulation::ReducedUniform, FieldModel::uniform({0, 0, 40}), k), s0,
                                  rk4(T / 2000, 3 * T, 10));
  const CouplingReport c = monitor_coupling(tr, k);
  CHECK(c.com_excursion > 0.0);
  CHECK(c.total_excursion <= 1e-9 * std::fabs(c.total.front()));
  CHECK(c.total_excursion <= 1e-6 * std::max(c.com_excursion, c.internal_excursion));
}

TEST_CASE("Kepler period follows the three-halves law") {
  const Constants k = Constants::hydrogen();
  const double T1 = kepler_period(circular_orbit(k, 1.0, {0, 0, 1}, 0), k);
  const double T2 = kepler_period(circular_orbit(k, 4.0, {0, 0, 1}, 0), k);
  CHECK(T2 / T1 == doctest::Approx(8.0).epsilon(1e-12));
  CHECK(T1 == doctest::Approx(circular_period(k, 1.0)).epsilon(1e-12));
  ComState unbound = circular_orbit(k, 1.0, {0, 0, 1}, 0);
  unbound.rdot *= 2.0;
  CHECK_THROWS_AS(kepler_period(unbound, k), ValidationError);
  CHECK(default_step(circular_orbit(k, 1.0, {0, 0, 1}, 0), k) == doctest::Approx(T1 / 2000));
}

TEST_CASE("integrator spec and formulation parsing") {
  IntegratorSpec s;
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s.step = 0.1;
  s.t_end = 1;
  CHECK_NOTHROW(s.validate());
  s.method = Method::RK45;
  s.tolerance = 1e-2;
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s.tolerance = 1e-8;
  s.stride = 0;
  CHECK_THROWS_AS(s.validate(), ValidationError);

  CHECK(parse_formulation("reduced", FieldModel::uniform({})) == Formulation::ReducedUniform);
  CHECK(parse_formulation("reduced", FieldModel::stern_gerlach(1, 1)) == Formulation::ReducedInhomogeneous);
  CHECK(parse_formulation("simplified-sg", FieldModel::uniform({})) == Formulation::SimplifiedSG);
  CHECK_THROWS_AS(parse_formulation("nope", FieldModel::uniform({})), ValidationError);
  CHECK(parse_method("rk45") == Method::RK45);
  CHECK_THROWS_AS(parse_method("euler"), ValidationError);
}
