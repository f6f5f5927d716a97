#include "magatom/sterngerlach.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <thread>

#include "magatom/errors.hpp"

namespace magatom {

std::string to_string(InternalMotion m) { return m == InternalMotion::Circular ? "circular" : "linear"; }

InternalMotion parse_internal_motion(const std::string& s) {
  if (s == "circular") return InternalMotion::Circular;
  if (s == "linear") return InternalMotion::Linear;
  throw ValidationError("unknown internal motion '" + s + "' (expected circular or linear)");
}

std::string to_string(Orientation o) { return o == Orientation::Random ? "random" : "fixed"; }

Orientation parse_orientation(const std::string& s) {
  if (s == "random") return Orientation::Random;
  if (s == "fixed") return Orientation::Fixed;
  throw ValidationError("unknown orientation '" + s + "' (expected random or fixed)");
}

void EnsembleSpec::validate() const {
  if (n_atoms < 1) throw ValidationError("ensemble needs n_atoms >= 1");
  if (!(radius > 0.0)) throw ValidationError("ensemble radius must be positive");
  if (orientation == Orientation::Fixed && !(norm(axis) > 0.0))
    throw ValidationError("fixed orientation needs a non-zero axis");
  if (!(jitter.x >= 0.0 && jitter.y >= 0.0 && jitter.z >= 0.0))
    throw ValidationError("position jitter must be non-negative");
  if (!(flight_time > 0.0)) throw ValidationError("flight time must be positive");
  if (histogram_bins < 1) throw ValidationError("histogram needs at least one bin");
  if (formulation == Formulation::ReducedUniform && !field.is_uniform())
    throw ValidationError("reduced-uniform formulation needs a uniform field");
  if ((formulation == Formulation::ReducedInhomogeneous || formulation == Formulation::SimplifiedSG) &&
      !field.is_linear())
    throw ValidationError(to_string(formulation) + " formulation needs a linear field");
  if (internal == InternalMotion::Linear && constants.softening() == 0.0)
    throw ValidationError("linear internal oscillation passes through r = 0 and needs softening > 0");
}

std::vector<ComState> build_ensemble(const EnsembleSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);

  auto direction = [&]() {
    if (spec.orientation == Orientation::Fixed) return spec.axis / norm(spec.axis);
    Vec3 d;
    do {
      d = {normal(rng), normal(rng), normal(rng)};
    } while (norm(d) < 1e-12);
    return d / norm(d);
  };

  std::vector<ComState> atoms;
  atoms.reserve(spec.n_atoms);
  for (int i = 0; i < spec.n_atoms; ++i) {
    const Vec3 n = direction();
    const double phase = spec.random_phase ? angle(rng) : 0.0;
    const Vec3 R0{spec.jitter.x * normal(rng), spec.jitter.y * normal(rng), spec.jitter.z * normal(rng)};
    if (spec.internal == InternalMotion::Circular)
      atoms.push_back(circular_orbit(spec.constants, spec.radius, n, phase, R0, spec.beam_velocity));
    else
      atoms.push_back(linear_oscillation(spec.radius, n, R0, spec.beam_velocity));
  }
  return atoms;
}

Vec3 field_axis(const FieldModel& f) {
  const double h = norm(f.H0());
  return h > 0.0 ? f.H0() / h : Vec3{0, 0, 1};
}

namespace {

// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0, comp_ = 0.0;
};

AxisStats axis_stats(const std::vector<Vec3>& xs) {
  AxisStats st;
  const double n = static_cast<double>(xs.size());
  if (xs.empty()) return st;
  for (int c = 0; c < 3; ++c) {
    CompensatedSum s;
    for (const Vec3& x : xs) s.add(x[c]);
    const double mean = s.value() / n;
    CompensatedSum q;
    for (const Vec3& x : xs) q.add((x[c] - mean) * (x[c] - mean));
    const double var = xs.size() > 1 ? q.value() / (n - 1.0) : 0.0;
    st.mean[c] = mean;
    st.variance[c] = var;
    st.standard_error[c] = std::sqrt(var / n);
  }
  return st;
}

IntegratorSpec atom_integrator(const EnsembleSpec& spec, const ComState& s0) {
  IntegratorSpec is = spec.integrator;
  if (!(is.step > 0.0)) is.step = default_step(s0, spec.constants);
  is.t_end = spec.flight_time;
  // Only the endpoint is needed; the final step is always sampled.
  const double steps = std::ceil(is.t_end / is.step);
  is.stride = steps >= std::numeric_limits<int>::max() ? std::numeric_limits<int>::max()
                                                       : std::max(1, static_cast<int>(steps));
  return is;
}

AtomEndpoint run_atom(std::size_t index, const ComState& s0, const EnsembleSpec& spec) {
  AtomEndpoint out;
  out.index = index;
  out.initial = s0;
  try {
    const System sys{spec.formulation, PotentialField(spec.field), spec.constants};
    const Trajectory tr = integrate(sys, s0, atom_integrator(spec, s0));
    out.final = tr.back();
    out.L = tr.monitors.back().L;
    out.S = tr.monitors.back().S;
    out.ok = true;
  } catch (const std::exception& ex) {
    out.ok = false;
    out.error = ex.what();
  }
  return out;
}

}  // namespace

DeflectionStats summarize(std::vector<AtomEndpoint> atoms, const EnsembleSpec& spec) {
  DeflectionStats st;
  st.n_atoms = atoms.size();
  st.flight_time = spec.flight_time;
  std::vector<Vec3> finals, deflections, velocities;
  for (const AtomEndpoint& a : atoms) {
    if (!a.ok) {
      ++st.n_failed;
      continue;
    }
    finals.push_back(a.final.R);
    deflections.push_back(a.final.R - a.initial.R - spec.flight_time * a.initial.Rdot);
    velocities.push_back(a.final.Rdot);
  }
  st.valid = st.n_failed * 100 <= st.n_atoms;
  st.final_position = axis_stats(finals);
  st.deflection = axis_stats(deflections);
  st.mean_velocity = axis_stats(velocities).mean;

  Histogram& h = st.histogram;
  h.axis = field_axis(spec.field);
  h.counts.assign(spec.histogram_bins, 0);
  if (!finals.empty()) {
    std::vector<double> proj;
    proj.reserve(finals.size());
    for (const Vec3& x : finals) proj.push_back(dot(x, h.axis));
    const auto [mn, mx] = std::minmax_element(proj.begin(), proj.end());
    h.lo = *mn;
    h.hi = *mx;
    const double width = (h.hi - h.lo) / spec.histogram_bins;
    for (double p : proj) {
      std::size_t bin = width > 0.0 ? static_cast<std::size_t>((p - h.lo) / width) : 0;
      h.counts[std::min<std::size_t>(bin, spec.histogram_bins - 1)]++;
    }
  }
  st.atoms = std::move(atoms);
  return st;
}

DeflectionStats run_beam(const std::vector<ComState>& ensemble, const EnsembleSpec& spec) {
  spec.validate();
  std::vector<AtomEndpoint> results(ensemble.size());
  unsigned n_threads = spec.threads > 0 ? static_cast<unsigned>(spec.threads)
                                        : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads, std::max<std::size_t>(1, ensemble.size()));

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < ensemble.size(); i = next++) results[i] = run_atom(i, ensemble[i], spec);
  };
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  return summarize(std::move(results), spec);
}

DeflectionStats run_beam(const EnsembleSpec& spec) { return run_beam(build_ensemble(spec), spec); }

PositroniumReport positronium_scenario(const EnsembleSpec& spec) {
  if (spec.constants.m_p() != spec.constants.m_e())
    throw ValidationError("positronium scenario requires m_p == m_e");
  PositroniumReport rep;
  rep.K_L = spec.constants.K_L();
  rep.stats = run_beam(spec);
  const double coef = spec.constants.e() / (2.0 * spec.constants.reduced_mass() * spec.constants.c());
  for (const AtomEndpoint& a : rep.stats.atoms) {
    if (!a.ok) continue;
    const double L0 = norm(derived_quantities(a.initial, spec.constants).L);
    rep.l_channel_moment = std::max({rep.l_channel_moment, std::fabs(coef * rep.K_L) * L0,
                                     std::fabs(coef * rep.K_L) * norm(a.L)});
  }
  return rep;
}

}  // namespace magatom
