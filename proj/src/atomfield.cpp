#include "magatom/atomfield.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include "magatom/errors.hpp"

namespace magatom {

void require_far_field(const ComState& s, const Vec3& x, double k_valid) {
  const double d = norm(x - s.R);
  const double a = norm(s.r);
  if (!(d > k_valid * a)) {
    std::ostringstream os;
    os << "observation point " << x << " lies at distance " << d << " from the center of mass, inside the "
       << "validity radius " << k_valid << " * |r| = " << k_valid * a;
    throw ValidityRegionError(os.str());
  }
}

FieldSample far_vector_potential(const ComState& s, const Vec3& x, const Constants& k, double k_valid) {
  require_far_field(s, x, k_valid);
  const Vec3 u = x - s.R;
  const double d = norm(u);
  const double ec = k.e() / k.c();
  const Vec3 rho_dot = s.Rdot + k.K_L() * s.rdot;
  FieldSample f;
  f.x = x;
  f.A1 = (-ec / d) * s.rdot;
  f.A2 = (-ec * dot(u, s.r) / (d * d * d)) * rho_dot;
  f.A = f.A1 + f.A2;
  return f;
}

Vec3 field_H1(const ComState& s, const Vec3& x, const Constants& k, double k_valid) {
  require_far_field(s, x, k_valid);
  const Vec3 u = x - s.R;
  const double d = norm(u);
  return (-k.e() / (k.c() * d * d * d)) * cross(s.rdot, u);
}

Vec3 field_H2(const ComState& s, const Vec3& x, const Constants& k, double k_valid) {
  require_far_field(s, x, k_valid);
  const Vec3 u = x - s.R;
  const double d2 = norm2(u);
  const double d5 = d2 * d2 * std::sqrt(d2);
  const Vec3 rho_dot = s.Rdot + k.K_L() * s.rdot;
  const Vec3 w = 3.0 * dot(s.r, u) * u - d2 * s.r;
  return (-k.e() / (k.c() * d5)) * cross(rho_dot, w);
}

Vec3 electric_dipole_field(const ComState& s, const Vec3& x, const Constants& k, double k_valid) {
  require_far_field(s, x, k_valid);
  const Vec3 u = x - s.R;
  const double d2 = norm2(u);
  const double d5 = d2 * d2 * std::sqrt(d2);
  const Vec3 p = -k.e() * s.r;
  return (1.0 / d5) * (3.0 * dot(p, u) * u - d2 * p);
}

Vec3 field_H2_dipole_form(const ComState& s, const Vec3& x, const Constants& k, double k_valid) {
  const Vec3 rho_dot = s.Rdot + k.K_L() * s.rdot;
  return (1.0 / k.c()) * cross(rho_dot, electric_dipole_field(s, x, k, k_valid));
}

namespace {

std::size_t sample_index(const Trajectory& tr, double t) {
  if (tr.size() == 0) throw ValidationError("empty trajectory");
  const auto it = std::lower_bound(tr.times.begin(), tr.times.end(), t);
  const double tol = 1e-9 * std::max(1.0, std::fabs(t));
  std::size_t best = tr.size();
  if (it != tr.times.end() && std::fabs(*it - t) <= tol) best = static_cast<std::size_t>(it - tr.times.begin());
  if (it != tr.times.begin() && std::fabs(*(it - 1) - t) <= tol)
    best = static_cast<std::size_t>(it - 1 - tr.times.begin());
  if (best == tr.size()) {
    std::ostringstream os;
    os << "time " << t << " is not a sample time of the trajectory [" << tr.times.front() << ", "
       << tr.times.back() << "]";
    throw ValidationError(os.str());
  }
  return best;
}

Vec3 vector_potential_rate(const Trajectory& tr, std::size_t i, const Vec3& x, const Constants& k, int stencil,
                           double k_valid) {
  if (stencil < 1) throw ValidationError("differencing stencil must be >= 1");
  const auto s = static_cast<std::size_t>(stencil);
  if (i < s || i + s >= tr.size()) {
    std::ostringstream os;
    os << "time " << tr.times[i] << " is not interior: a stencil of " << stencil
       << " samples on each side is needed for dA/dt";
    throw ValidationError(os.str());
  }
  const Vec3 a_plus = far_vector_potential(tr.states[i + s], x, k, k_valid).A;
  const Vec3 a_minus = far_vector_potential(tr.states[i - s], x, k, k_valid).A;
  return (1.0 / (tr.times[i + s] - tr.times[i - s])) * (a_plus - a_minus);
}

}  // namespace

Vec3 electric_field(const Trajectory& tr, const Vec3& x, const Constants& k, double t, int stencil,
                    double k_valid) {
  const std::size_t i = sample_index(tr, t);
  const Vec3 dA = vector_potential_rate(tr, i, x, k, stencil, k_valid);
  return electric_dipole_field(tr.states[i], x, k, k_valid) - (1.0 / k.c()) * dA;
}

FieldSample sample_fields(const Trajectory& tr, std::size_t index, const Vec3& x, const Constants& k,
                          double k_valid) {
  if (index >= tr.size()) throw ValidationError("sample index out of range");
  const ComState& s = tr.states[index];
  FieldSample f = far_vector_potential(s, x, k, k_valid);
  f.H1 = field_H1(s, x, k, k_valid);
  f.H2 = field_H2(s, x, k, k_valid);
  f.E_dipole = electric_dipole_field(s, x, k, k_valid);
  f.E = f.E_dipole - (1.0 / k.c()) * vector_potential_rate(tr, index, x, k, 1, k_valid);
  return f;
}

double predicted_gyromagnetic_ratio(const Constants& k) {
  return k.e() * k.K_L() / (2.0 * k.reduced_mass() * k.c());
}

namespace {

// Internal period: analytic for a circular initial orbit, otherwise the
// mean spacing of upward zero crossings of the dominant component of r.
double internal_period(const Trajectory& tr, const Constants& k) {
  const ComState& s0 = tr.front();
  const double a = norm(s0.r);
  const double v = norm(s0.rdot);
  if (a > 0.0 && v > 0.0) {
    const double omega = circular_frequency(a, k);
    const bool tangential = std::fabs(dot(s0.r, s0.rdot)) <= 1e-10 * a * v;
    if (tangential && std::fabs(v / (a * omega) - 1.0) <= 1e-10) return 2.0 * std::numbers::pi / omega;
  }

  int comp = 0;
  double amp = 0.0;
  for (int c = 0; c < 3; ++c) {
    double m = 0.0;
    for (const ComState& s : tr.states) m = std::max(m, std::fabs(s.r[c]));
    if (m > amp) amp = m, comp = c;
  }
  std::vector<double> crossings;
  for (std::size_t i = 1; i < tr.size(); ++i) {
    const double y0 = tr.states[i - 1].r[comp], y1 = tr.states[i].r[comp];
    if (y0 < 0.0 && y1 >= 0.0)
      crossings.push_back(tr.times[i - 1] + (tr.times[i] - tr.times[i - 1]) * (-y0 / (y1 - y0)));
  }
  if (crossings.size() < 2)
    throw ValidationError("trajectory does not cover a full internal period (fewer than two zero crossings)");
  return (crossings.back() - crossings.front()) / static_cast<double>(crossings.size() - 1);
}

// Trapezoid average of f over [t0, t0 + span], interpolating linearly at
// the end of the window.
template <class F>
Vec3 window_average(const Trajectory& tr, double span, F&& f) {
  const double t0 = tr.times.front();
  const double t_end = t0 + span;
  Vec3 acc{};
  Vec3 prev = f(0);
  for (std::size_t i = 1; i < tr.size(); ++i) {
    const double ta = tr.times[i - 1], tb = tr.times[i];
    if (ta >= t_end) break;
    const Vec3 cur = f(i);
    if (tb <= t_end) {
      acc += (0.5 * (tb - ta)) * (prev + cur);
    } else {
      const double w = (t_end - ta) / (tb - ta);
      const Vec3 mid = prev + w * (cur - prev);
      acc += (0.5 * (t_end - ta)) * (prev + mid);
      break;
    }
    prev = cur;
  }
  return (1.0 / span) * acc;
}

// Solves the 3x3 system m x = b by Cramer's rule.
Vec3 solve3(const Mat3& m, const Vec3& b) {
  auto det = [](const Vec3& c0, const Vec3& c1, const Vec3& c2) { return dot(c0, cross(c1, c2)); };
  const Vec3 c0{m(0, 0), m(1, 0), m(2, 0)};
  const Vec3 c1{m(0, 1), m(1, 1), m(2, 1)};
  const Vec3 c2{m(0, 2), m(1, 2), m(2, 2)};
  const double d = det(c0, c1, c2);
  if (!(std::fabs(d) > 0.0)) throw ValidationError("moment fit is singular; probes must not be collinear");
  return {det(b, c1, c2) / d, det(c0, b, c2) / d, det(c0, c1, b) / d};
}

}  // namespace

MomentEstimate averaged_moment(const Trajectory& tr, const Constants& k, const std::vector<Vec3>& probes,
                               double k_valid) {
  if (probes.size() < kMinMomentProbes) {
    std::ostringstream os;
    os << "moment fit needs at least " << kMinMomentProbes << " probes, got " << probes.size();
    throw ValidationError(os.str());
  }
  if (tr.size() < 3) throw ValidationError("trajectory too short for time averaging");
  double vmax = 0.0, Vmax = 0.0;
  for (const ComState& s : tr.states) {
    vmax = std::max(vmax, norm(s.rdot));
    Vmax = std::max(Vmax, norm(s.Rdot));
  }
  if (Vmax > 1e-9 * vmax)
    throw ValidationError("moment averaging requires the atom at rest (Rdot = 0 along the trajectory)");

  MomentEstimate est;
  est.g_predicted = predicted_gyromagnetic_ratio(k);
  est.p = -k.e() * tr.front().r;
  est.period = internal_period(tr, k);
  const double duration = tr.times.back() - tr.times.front();
  const double covered = duration / est.period;
  est.n_periods = static_cast<int>(std::floor(covered * (1.0 + 1e-12)));
  if (est.n_periods < 1) throw ValidationError("trajectory covers less than one internal period");
  if (covered - est.n_periods > 1e-6) {
    std::ostringstream os;
    os << "trajectory covers " << covered << " internal periods; averaging over the first " << est.n_periods;
    est.warnings.push_back(os.str());
  }
  const double span = est.n_periods * est.period;

  for (const Vec3& x : probes)
    for (const ComState& s : tr.states) require_far_field(s, x, k_valid);

  est.L_avg = window_average(tr, span, [&](std::size_t i) { return tr.monitors[i].L; });

  // Fit <A>(x) = mu x u / d^3 = K(u) mu with K(u) = -[u]_x / d^3.
  Mat3 normal = Mat3::zero();
  Vec3 rhs{};
  std::vector<Vec3> averages;
  averages.reserve(probes.size());
  auto kernel = [](const Vec3& u) {
    const double d3 = std::pow(norm(u), 3);
    Mat3 m = Mat3::zero();
    m(0, 1) = u.z / d3;
    m(0, 2) = -u.y / d3;
    m(1, 0) = -u.z / d3;
    m(1, 2) = u.x / d3;
    m(2, 0) = u.y / d3;
    m(2, 1) = -u.x / d3;
    return m;
  };
  const Vec3 R0 = tr.front().R;
  for (const Vec3& x : probes) {
    const Vec3 avg = window_average(tr, span, [&](std::size_t i) { return far_vector_potential(tr.states[i], x, k, k_valid).A; });
    averages.push_back(avg);
    const Mat3 K = kernel(x - R0);
    const Mat3 Kt = K.transposed();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int l = 0; l < 3; ++l) normal(i, j) += Kt(i, l) * K(l, j);
    rhs += Kt * avg;

    // u_j r_j rdot_i split into its antisymmetric part (1/2) u x (rdot x r)
    // and the total derivative (1/2) d[(u.r) r]/dt.
    const Vec3 kept = window_average(tr, span, [&](std::size_t i) {
      const ComState& s = tr.states[i];
      return 0.5 * cross(x - s.R, cross(s.rdot, s.r));
    });
    const Vec3 discarded = window_average(tr, span, [&](std::size_t i) {
      const ComState& s = tr.states[i];
      const Vec3 u = x - s.R;
      return 0.5 * (dot(u, s.r) * s.rdot + dot(u, s.rdot) * s.r);
    });
    if (norm(kept) > 0.0) est.discarded_ratio = std::max(est.discarded_ratio, norm(discarded) / norm(kept));
  }
  est.mu_avg = solve3(normal, rhs);

  double misfit = 0.0, scale = 0.0;
  for (std::size_t p = 0; p < probes.size(); ++p) {
    misfit += norm2(averages[p] - kernel(probes[p] - R0) * est.mu_avg);
    scale += norm2(averages[p]);
  }
  est.fit_residual = scale > 0.0 ? std::sqrt(misfit / scale) : 0.0;

  const double l = norm(est.L_avg);
  if (l > 0.0) {
    const double sign = dot(est.mu_avg, est.L_avg) <= 0.0 ? 1.0 : -1.0;
    est.g_measured = sign * norm(est.mu_avg) / l;
  }
  return est;
}

std::vector<Vec3> sphere_probes(const Vec3& center, double radius, std::size_t count) {
  std::vector<Vec3> pts;
  pts.reserve(count);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (std::size_t i = 0; i < count; ++i) {
    const double z = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(count);
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * static_cast<double>(i);
    pts.push_back(center + radius * Vec3{rho * std::cos(phi), rho * std::sin(phi), z});
  }
  return pts;
}

}  // namespace magatom
