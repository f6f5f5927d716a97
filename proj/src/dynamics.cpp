#include "magatom/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "magatom/errors.hpp"

namespace magatom {

LabState direct_derivative(const LabState& s, const PotentialField& p, const Constants& k) {
  const double ec = k.e() / k.c();
  const Vec3 on_e = coulomb_force(s.r_e - s.r_p, k);
  const Vec3 a_p = (-on_e + ec * cross(s.v_p, p.H(s.r_p))) / k.m_p();
  const Vec3 a_e = (on_e - ec * cross(s.v_e, p.H(s.r_e))) / k.m_e();
  return {s.v_p, a_p, s.v_e, a_e};
}

LabState direct_derivative(const LabState& s, const FieldModel& f, const Constants& k) {
  return direct_derivative(s, PotentialField(f), k);
}

namespace {

Vec3 relative_acceleration(const ComState& s, const Vec3& H, const Constants& k) {
  const Vec3 rho_dot = s.Rdot + k.K_L() * s.rdot;
  return (coulomb_force(s.r, k) - (k.e() / k.c()) * cross(rho_dot, H)) / k.reduced_mass();
}

// -(e / 2 mu c) grad_R [H(R) . (K_L L + 2 S)] with L, S held fixed.
Vec3 moment_gradient_force(const ComState& s, const Mat3& G, const Constants& k) {
  const double mu = k.reduced_mass();
  const Vec3 L = mu * cross(s.r, s.rdot);
  const Vec3 S = mu * cross(s.r, s.Rdot);
  return (-k.e() / (2.0 * mu * k.c())) * (G.transposed() * (k.K_L() * L + 2.0 * S));
}

void require_linear(const FieldModel& f, const char* who) {
  if (!f.is_linear())
    throw ValidationError(std::string(who) +
                          " requires a linear field model; use reduced_uniform_derivative");
}

}  // namespace

ComState reduced_uniform_derivative(const ComState& s, const FieldModel& f, const Constants& k) {
  if (!f.is_uniform())
    throw ValidationError("reduced_uniform_derivative requires a uniform field model");
  const Vec3& H = f.H0();
  const Vec3 Rddot = ((k.e() / k.c()) / k.total_mass()) * cross(H, s.rdot);
  return {s.Rdot, Rddot, s.rdot, relative_acceleration(s, H, k)};
}

ComState reduced_inhomogeneous_derivative(const ComState& s, const FieldModel& f, const Constants& k) {
  require_linear(f, "reduced_inhomogeneous_derivative");
  const double ec = k.e() / k.c();
  const Vec3 H = evaluate_field(f, s.R);
  const Mat3 G = f.gradient();
  const Vec3 force =
      ec * cross(H, s.rdot) + ec * cross(G * s.Rdot, s.r) + moment_gradient_force(s, G, k);
  return {s.Rdot, force / k.total_mass(), s.rdot, relative_acceleration(s, H, k)};
}

ComState simplified_sg_derivative(const ComState& s, const FieldModel& f, const Constants& k) {
  require_linear(f, "simplified_sg_derivative");
  const double mu = k.reduced_mass();
  const Vec3 H = evaluate_field(f, s.R);
  const Mat3 G = f.gradient();
  const Vec3 moment = k.K_L() * mu * cross(s.r, s.rdot) + 2.0 * mu * cross(s.r, s.Rdot);
  const Vec3 force =
      (k.e() / k.c()) * cross(H, s.rdot) - (k.e() / (2.0 * mu * k.c())) * (G * moment);
  return {s.Rdot, force / k.total_mass(), s.rdot, relative_acceleration(s, H, k)};
}

Vec3 simplified_dropped_force(const ComState& s, const FieldModel& f, const Constants& k) {
  return (k.e() / k.c()) * cross(f.gradient().transposed() * s.Rdot, s.r);
}

std::string to_string(Formulation f) {
  switch (f) {
    case Formulation::Direct: return "direct";
    case Formulation::ReducedUniform: return "reduced-uniform";
    case Formulation::ReducedInhomogeneous: return "reduced-inhomogeneous";
    case Formulation::SimplifiedSG: return "simplified-sg";
  }
  return "unknown";
}

Formulation reduced_formulation(const FieldModel& f) {
  return f.is_uniform() ? Formulation::ReducedUniform : Formulation::ReducedInhomogeneous;
}

Formulation parse_formulation(const std::string& name, const FieldModel& f) {
  if (name == "direct") return Formulation::Direct;
  if (name == "reduced") return reduced_formulation(f);
  if (name == "reduced-uniform") return Formulation::ReducedUniform;
  if (name == "reduced-inhomogeneous") return Formulation::ReducedInhomogeneous;
  if (name == "simplified-sg") return Formulation::SimplifiedSG;
  throw ValidationError("unknown formulation '" + name + "'");
}

ComState System::derivative(const ComState& s) const {
  switch (formulation) {
    case Formulation::Direct: {
      const LabState d = direct_derivative(to_lab(s, constants), field, constants);
      return to_com(d, constants);
    }
    case Formulation::ReducedUniform: return reduced_uniform_derivative(s, field.field(), constants);
    case Formulation::ReducedInhomogeneous:
      return reduced_inhomogeneous_derivative(s, field.field(), constants);
    case Formulation::SimplifiedSG: return simplified_sg_derivative(s, field.field(), constants);
  }
  return {};
}

std::string to_string(Method m) { return m == Method::RK4 ? "rk4" : "rk45"; }

Method parse_method(const std::string& name) {
  if (name == "rk4") return Method::RK4;
  if (name == "rk45") return Method::RK45;
  throw ValidationError("unknown integration method '" + name + "' (expected rk4 or rk45)");
}

void IntegratorSpec::validate() const {
  if (!(step > 0.0) || !std::isfinite(step)) throw ValidationError("integrator step must be > 0");
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ValidationError("integrator t_end must be > 0");
  if (stride < 1) throw ValidationError("integrator stride must be >= 1");
  if (method == Method::RK45 && !(tolerance > 0.0 && tolerance <= 1e-3))
    throw ValidationError("rk45 tolerance must lie in (0, 1e-3]");
}

namespace {

LabState axpy(const LabState& s, double h, const LabState& d) {
  return {s.r_p + h * d.r_p, s.v_p + h * d.v_p, s.r_e + h * d.r_e, s.v_e + h * d.v_e};
}

ComState axpy(const ComState& s, double h, const ComState& d) {
  return {s.R + h * d.R, s.Rdot + h * d.Rdot, s.r + h * d.r, s.rdot + h * d.rdot};
}

template <class S>
S lincomb(const S& s, double h, std::initializer_list<std::pair<double, const S*>> terms) {
  S out = s;
  for (const auto& [w, d] : terms)
    if (w != 0.0) out = axpy(out, h * w, *d);
  return out;
}

Vec3 separation(const LabState& s) { return s.r_e - s.r_p; }

// Largest energy change per step, relative to the sum of the energy
// magnitudes at t = 0, before a hard-core step is treated as a collision.
constexpr double kMaxStepEnergyJump = 1e-2;

double total_energy(const LabState& s, const Constants& k) { return energy(s, k); }
double total_energy(const ComState& s, const Constants& k) { return derived_quantities(s, k).E; }

double energy_magnitude(const LabState& s, const Constants& k) {
  return 0.5 * k.m_p() * norm2(s.v_p) + 0.5 * k.m_e() * norm2(s.v_e) + std::fabs(coulomb_energy(s.r_e - s.r_p, k));
}
double energy_magnitude(const ComState& s, const Constants& k) { return energy_magnitude(to_lab(s, k), k); }
Vec3 separation(const ComState& s) { return s.r; }

std::array<double, 12> flatten(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return {a.x, a.y, a.z, b.x, b.y, b.z, c.x, c.y, c.z, d.x, d.y, d.z};
}
std::array<double, 12> flatten(const LabState& s) { return flatten(s.r_p, s.v_p, s.r_e, s.v_e); }
std::array<double, 12> flatten(const ComState& s) { return flatten(s.R, s.Rdot, s.r, s.rdot); }

// Shared integration driver over either state representation.
template <class S, class Deriv, class Store>
void run_integration(const S& s0, const Deriv& deriv, const IntegratorSpec& spec,
                     const Constants& k, const Store& store) {
  const double sep0 = norm(separation(s0));
  const bool hard_core = k.softening() == 0.0;
  if (hard_core && sep0 == 0.0)
    throw SingularityError("initial state has coincident charges and no softening", 0.0);
  const double min_sep = 1e-9 * sep0;

  auto check = [&](const S& s, double t) {
    const Vec3 r = separation(s);
    bool bad = false;
    for (double v : flatten(s)) bad = bad || !std::isfinite(v);
    if (bad || (hard_core && norm(r) < min_sep)) {
      std::ostringstream msg;
      msg << "singular configuration at t=" << t << ": separation " << r << " (|r|=" << norm(r)
          << ")";
      throw SingularityError(msg.str(), t);
    }
  };

  // With a hard core a single step can jump across r = 0 without ever
  // landing near it. Catch that from the chord of the step and from the
  // energy jump it leaves behind (static magnetic fields do no work).
  const double energy_scale = energy_magnitude(s0, k);
  double e_prev = total_energy(s0, k);
  auto check_step = [&](const S& a, const S& b, double ta, double tb) {
    check(b, tb);
    if (!hard_core) return;
    const Vec3 ra = separation(a), d = separation(b) - ra;
    const double dd = norm2(d);
    const double w = dd > 0.0 ? std::clamp(-dot(ra, d) / dd, 0.0, 1.0) : 0.0;
    const double closest = norm(ra + w * d);
    const double e_new = total_energy(b, k);
    const bool jump = std::fabs(e_new - e_prev) > kMaxStepEnergyJump * energy_scale;
    e_prev = e_new;
    if (closest < min_sep || jump) {
      const double tc = ta + w * (tb - ta);
      std::ostringstream msg;
      msg << "charges collide near t=" << tc << " (closest approach " << closest
          << " along the step" << (jump ? ", energy not conserved across the step" : "") << ")";
      throw SingularityError(msg.str(), tc);
    }
  };
  auto eval = [&](const S& s, double t) {
    try {
      return deriv(s);
    } catch (const SingularityError&) {
      std::ostringstream msg;
      msg << "singular configuration at t=" << t << ": separation " << separation(s);
      throw SingularityError(msg.str(), t);
    }
  };

  store(0.0, s0);

  if (spec.method == Method::RK4) {
    const double h = spec.step;
    long long n = std::llround(spec.t_end / h);
    if (std::fabs(n * h - spec.t_end) > 1e-9 * spec.t_end) n = static_cast<long long>(std::ceil(spec.t_end / h));
    S s = s0;
    for (long long i = 0; i < n; ++i) {
      const double t = i * h;
      const double hi = (i + 1 == n) ? spec.t_end - t : h;
      const S k1 = eval(s, t);
      const S k2 = eval(axpy(s, 0.5 * hi, k1), t + 0.5 * hi);
      const S k3 = eval(axpy(s, 0.5 * hi, k2), t + 0.5 * hi);
      const S k4 = eval(axpy(s, hi, k3), t + hi);
      const S prev = s;
      s = lincomb(s, hi / 6.0, {{1.0, &k1}, {2.0, &k2}, {2.0, &k3}, {1.0, &k4}});
      const double tn = (i + 1 == n) ? spec.t_end : (i + 1) * h;
      check_step(prev, s, t, tn);
      if ((i + 1) % spec.stride == 0 || i + 1 == n) store(tn, s);
    }
    return;
  }

  // Dormand-Prince 5(4) with FSAL.
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                   b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                   e6 = 22.0 / 525, e7 = -1.0 / 40;

  const double out_dt = spec.stride * spec.step;
  const double tol = spec.tolerance;
  double t = 0.0;
  double h = spec.step;
  S s = s0;
  S k1 = eval(s, t);
  long long next_sample = 1;
  while (t < spec.t_end) {
    const double t_target = std::min(spec.t_end, next_sample * out_dt);
    const double hi = std::min(h, t_target - t);
    if (hi < 1e-14 * std::max(1.0, std::fabs(t))) {
      std::ostringstream msg;
      msg << "adaptive step underflow at t=" << t << " (h=" << hi << ")";
      throw RuntimeError(msg.str());
    }
    const S k2 = eval(lincomb(s, hi, {{a21, &k1}}), t + c2 * hi);
    const S k3 = eval(lincomb(s, hi, {{a31, &k1}, {a32, &k2}}), t + c3 * hi);
    const S k4 = eval(lincomb(s, hi, {{a41, &k1}, {a42, &k2}, {a43, &k3}}), t + c4 * hi);
    const S k5 = eval(lincomb(s, hi, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}), t + c5 * hi);
    const S k6 =
        eval(lincomb(s, hi, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}), t + hi);
    const S s_new = lincomb(s, hi, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    const S k7 = eval(s_new, t + hi);
    const S err = lincomb(S{}, hi, {{e1, &k1}, {e3, &k3}, {e4, &k4}, {e5, &k5}, {e6, &k6}, {e7, &k7}});

    const auto y0 = flatten(s), y1 = flatten(s_new), ye = flatten(err);
    double acc = 0.0;
    for (int i = 0; i < 12; ++i) {
      const double sc = tol + tol * std::max(std::fabs(y0[i]), std::fabs(y1[i]));
      const double q = ye[i] / sc;
      acc += q * q;
    }
    const double err_norm = std::sqrt(acc / 12.0);
    if (!std::isfinite(err_norm)) check(s_new, t + hi);

    if (err_norm <= 1.0) {
      const double t_prev = t;
      t = (hi == t_target - t) ? t_target : t + hi;
      check_step(s, s_new, t_prev, t);
      s = s_new;
      k1 = k7;
      if (t == t_target) {
        store(t, s);
        ++next_sample;
      }
    }
    const double fac = err_norm == 0.0 ? 5.0 : 0.9 * std::pow(err_norm, -0.2);
    h = hi * std::clamp(fac, 0.2, 5.0);
  }
}

}  // namespace

Trajectory integrate(const System& sys, const ComState& s0, const IntegratorSpec& spec) {
  spec.validate();
  const Constants& k = sys.constants;
  Trajectory tr;
  auto push = [&](double t, const ComState& s) {
    tr.times.push_back(t);
    tr.states.push_back(s);
    tr.monitors.push_back(derived_quantities(s, k));
  };

  if (sys.formulation == Formulation::Direct) {
    auto deriv = [&](const LabState& s) { return direct_derivative(s, sys.field, k); };
    run_integration(to_lab(s0, k), deriv, spec, k,
                    [&](double t, const LabState& s) { push(t, to_com(s, k)); });
  } else {
    auto deriv = [&](const ComState& s) { return sys.derivative(s); };
    run_integration(s0, deriv, spec, k, push);
  }
  return tr;
}

CouplingReport monitor_coupling(const Trajectory& tr, const Constants& k) {
  CouplingReport rep;
  const std::size_t n = tr.size();
  rep.com_kinetic.reserve(n);
  rep.internal.reserve(n);
  rep.total.reserve(n);
  for (const ComState& s : tr.states) {
    const double kin = 0.5 * k.total_mass() * norm2(s.Rdot);
    const double internal = 0.5 * k.reduced_mass() * norm2(s.rdot) + coulomb_energy(s.r, k);
    rep.com_kinetic.push_back(kin);
    rep.internal.push_back(internal);
    rep.total.push_back(kin + internal);
  }
  auto excursion = [](const std::vector<double>& v) {
    double worst = 0.0;
    for (double x : v) worst = std::max(worst, std::fabs(x - v.front()));
    return worst;
  };
  if (n > 0) {
    rep.com_excursion = excursion(rep.com_kinetic);
    rep.internal_excursion = excursion(rep.internal);
    rep.total_excursion = excursion(rep.total);
  }
  return rep;
}

TrajectoryDeviation compare_trajectories(const Trajectory& a, const Trajectory& b, double scale) {
  if (a.size() != b.size() || a.size() == 0)
    throw ValidationError("trajectories must have the same, non-zero number of samples");
  if (!(scale > 0.0)) throw ValidationError("comparison scale must be positive");
  TrajectoryDeviation d;
  double sR = 0.0, sr = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::fabs(a.times[i] - b.times[i]) > 1e-12 * std::max(1.0, std::fabs(a.times[i])))
      throw ValidationError("trajectories are sampled at different times");
    const double dR = norm(a.states[i].R - b.states[i].R) / scale;
    const double dr = norm(a.states[i].r - b.states[i].r) / scale;
    sR += dR * dR;
    sr += dr * dr;
    d.max_R = std::max(d.max_R, dR);
    d.max_r = std::max(d.max_r, dr);
  }
  d.rms_R = std::sqrt(sR / a.size());
  d.rms_r = std::sqrt(sr / a.size());
  return d;
}

double kepler_period(const ComState& s, const Constants& k) {
  const double e2 = k.e() * k.e();
  const double mu = k.reduced_mass();
  const double r = norm(s.r);
  if (r == 0.0) throw ValidationError("cannot estimate an orbital period at r = 0");
  const double energy = 0.5 * mu * norm2(s.rdot) - e2 / r;
  if (!(energy < 0.0)) throw ValidationError("relative motion is unbound; no internal period");
  const double semi_major = e2 / (2.0 * -energy);
  return 2.0 * std::numbers::pi * std::sqrt(mu * semi_major * semi_major * semi_major / e2);
}

double circular_frequency(double radius, const Constants& k) {
  const double eps = k.softening();
  const double d2 = radius * radius + eps * eps;
  return std::sqrt(k.e() * k.e() / (k.reduced_mass() * d2 * std::sqrt(d2)));
}

double default_step(const ComState& s, const Constants& k) {
  return kepler_period(s, k) / kDefaultStepsPerPeriod;
}

namespace {

// Unit vector perpendicular to n (n need not be normalized).
Vec3 perpendicular(const Vec3& n) {
  const Vec3 trial = std::fabs(n.x) < 0.9 * norm(n) ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  const Vec3 u = cross(n, trial);
  return u / norm(u);
}

}  // namespace

ComState circular_orbit(const Constants& k, double radius, const Vec3& normal, double phase,
                        const Vec3& R, const Vec3& Rdot) {
  if (!(radius > 0.0)) throw ValidationError("orbit radius must be positive");
  const double nn = norm(normal);
  if (!(nn > 0.0)) throw ValidationError("orbit normal must be non-zero");
  const Vec3 n = normal / nn;
  const Vec3 u = perpendicular(n);
  const Vec3 v = cross(n, u);
  const double w = circular_frequency(radius, k);
  const double c = std::cos(phase), s = std::sin(phase);
  return {R, Rdot, radius * (c * u + s * v), (radius * w) * (-s * u + c * v)};
}

ComState linear_oscillation(double amplitude, const Vec3& axis, const Vec3& R, const Vec3& Rdot) {
  if (!(amplitude > 0.0)) throw ValidationError("oscillation amplitude must be positive");
  const double n = norm(axis);
  if (!(n > 0.0)) throw ValidationError("oscillation axis must be non-zero");
  return {R, Rdot, (amplitude / n) * axis, Vec3{}};
}

}  // namespace magatom
