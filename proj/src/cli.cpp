#include "magatom/cli.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "magatom/atomfield.hpp"
#include "magatom/errors.hpp"

namespace magatom::cli {

namespace fs = std::filesystem;

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"simulate-direct", "simulate-reduced", "compare",
                                              "ensemble",        "fieldmap",         "moment"};
  return names;
}

std::string to_string(Command c) { return command_names()[static_cast<std::size_t>(c)]; }

Command parse_command(const std::string& name) {
  const auto& names = command_names();
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<Command>(i);
  throw ValidationError("unknown subcommand '" + name + "'");
}

int exit_code_for_current_exception() {
  try {
    throw;
  } catch (const ValidationError&) {
    return kValidationFailure;
  } catch (...) {
    return kRuntimeFailure;
  }
}

namespace {

std::string num(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::string vec(const Vec3& v) { return num(v.x) + " " + num(v.y) + " " + num(v.z); }

std::string units_line(const Constants& k) {
  return "units: Gaussian, m_e = " + num(k.m_e()) + ", m_p = " + num(k.m_p()) + ", e = " + num(k.e()) +
         ", c = " + num(k.c()) + "; energy in e^2 per unit length";
}

// Files are written under a staging name and renamed on commit. Anything
// not committed is deleted when the set goes out of scope.
class Artifacts {
 public:
  Artifacts(const OutputSettings& o) : dir_(o.directory), prefix_(o.prefix) {}
  ~Artifacts() { discard(); }

  std::ostream& open(const std::string& suffix) {
    fs::create_directories(dir_);
    Item item;
    item.final = dir_ / (prefix_ + "-" + suffix);
    item.staging = item.final;
    item.staging += ".partial";
    item.stream = std::make_unique<std::ofstream>(item.staging);
    if (!*item.stream) throw RuntimeError("cannot write " + item.staging.string());
    items_.push_back(std::move(item));
    return *items_.back().stream;
  }

  std::vector<std::string> commit() {
    std::vector<std::string> names;
    for (Item& it : items_) {
      it.stream->close();
      if (!*it.stream) throw RuntimeError("write failed for " + it.final.string());
      fs::rename(it.staging, it.final);
      names.push_back(it.final.string());
    }
    items_.clear();
    return names;
  }

  void discard() noexcept {
    for (Item& it : items_) {
      it.stream.reset();
      std::error_code ec;
      fs::remove(it.staging, ec);
    }
    items_.clear();
  }

  fs::path path(const std::string& suffix) const { return dir_ / (prefix_ + "-" + suffix); }

 private:
  struct Item {
    fs::path final, staging;
    std::unique_ptr<std::ofstream> stream;
  };
  fs::path dir_;
  std::string prefix_;
  std::vector<Item> items_;
};

// CSV with a comment header naming units and columns, or JSON lines whose
// first record carries the same schema.
class Table {
 public:
  Table(std::ostream& os, OutputFormat fmt, const std::string& description, std::vector<std::string> columns)
      : os_(os), fmt_(fmt), columns_(std::move(columns)) {
    if (fmt_ == OutputFormat::Csv) {
      os_ << "# " << description << "\n";
      for (std::size_t i = 0; i < columns_.size(); ++i) os_ << (i ? "," : "") << columns_[i];
      os_ << "\n";
    } else {
      nlohmann::ordered_json head;
      head["schema"] = description;
      head["columns"] = columns_;
      os_ << head.dump() << "\n";
    }
  }

  void row(const std::vector<double>& values) {
    if (fmt_ == OutputFormat::Csv) {
      for (std::size_t i = 0; i < values.size(); ++i) os_ << (i ? "," : "") << num(values[i]);
      os_ << "\n";
    } else {
      os_ << "{";
      for (std::size_t i = 0; i < values.size(); ++i)
        os_ << (i ? "," : "") << '"' << columns_[i] << "\":" << num(values[i]);
      os_ << "}\n";
    }
  }

 private:
  std::ostream& os_;
  OutputFormat fmt_;
  std::vector<std::string> columns_;
};

std::string ext(const OutputSettings& o) { return o.format == OutputFormat::Csv ? "csv" : "jsonl"; }

void push(std::vector<double>& row, const Vec3& v) {
  row.push_back(v.x);
  row.push_back(v.y);
  row.push_back(v.z);
}

std::vector<std::string> vec_columns(const std::string& name) { return {name + "_x", name + "_y", name + "_z"}; }

void write_trajectory(std::ostream& os, const Scenario& s, const Trajectory& tr, Formulation f) {
  std::vector<std::string> cols{"t"};
  for (const char* n : {"R", "Rdot", "r", "rdot"})
    for (auto& c : vec_columns(n)) cols.push_back(c);
  cols.push_back("E");
  for (const char* n : {"L", "S"})
    for (auto& c : vec_columns(n)) cols.push_back(c);
  Table t(os, s.output.format, "trajectory, formulation " + to_string(f) + "; " + units_line(s.constants), cols);
  for (std::size_t i = 0; i < tr.size(); ++i) {
    std::vector<double> row{tr.times[i]};
    const ComState& st = tr.states[i];
    push(row, st.R);
    push(row, st.Rdot);
    push(row, st.r);
    push(row, st.rdot);
    row.push_back(tr.monitors[i].E);
    push(row, tr.monitors[i].L);
    push(row, tr.monitors[i].S);
    t.row(row);
  }
}

// Plain "key = value" report.
class Report {
 public:
  explicit Report(std::ostream& os) : os_(os) {}
  void comment(const std::string& text) { os_ << "# " << text << "\n"; }
  void kv(const std::string& key, const std::string& value) { os_ << key << " = " << value << "\n"; }
  void kv(const std::string& key, double value) { kv(key, num(value)); }
  void kv(const std::string& key, const Vec3& value) { kv(key, vec(value)); }
  void kv(const std::string& key, bool value) { kv(key, std::string(value ? "true" : "false")); }
  void kv_int(const std::string& key, long long value) { kv(key, std::to_string(value)); }

 private:
  std::ostream& os_;
};

Trajectory simulate(const Scenario& s, Formulation f) {
  const ComState s0 = initial_state(s);
  const System sys{f, PotentialField(s.field), s.constants};
  return integrate(sys, s0, integrator_spec(s, s0));
}

double relative_drift(const Trajectory& tr) {
  const double e0 = tr.monitors.front().E;
  double m = 0.0;
  for (const auto& d : tr.monitors) m = std::max(m, std::fabs(d.E - e0));
  return e0 != 0.0 ? m / std::fabs(e0) : m;
}

void cmd_simulate(const Scenario& s, Formulation f, Artifacts& art, std::ostream& log) {
  const Trajectory tr = simulate(s, f);
  write_trajectory(art.open((f == Formulation::Direct ? "direct." : "reduced.") + ext(s.output)), s, tr, f);
  log << to_string(f) << ": " << tr.size() << " samples to t = " << tr.times.back()
      << ", max relative energy excursion " << relative_drift(tr) << "\n";
}

void cmd_compare(const Scenario& s, Artifacts& art, std::ostream& log) {
  const Formulation red = reduced_formulation(s);
  const Trajectory a = simulate(s, Formulation::Direct);
  const Trajectory b = simulate(s, red);
  write_trajectory(art.open("direct." + ext(s.output)), s, a, Formulation::Direct);
  write_trajectory(art.open("reduced." + ext(s.output)), s, b, red);
  const double scale = norm(initial_state(s).r);
  const TrajectoryDeviation dev = compare_trajectories(a, b, scale);

  Report r(art.open("compare.txt"));
  r.comment("direct vs reduced deviation; lengths relative to |r(0)|");
  r.kv("reduced_formulation", to_string(red));
  r.kv("field", std::string(s.field.is_uniform() ? "uniform" : "linear"));
  r.kv_int("samples", static_cast<long long>(a.size()));
  r.kv("t_end", a.times.back());
  r.kv("scale", scale);
  r.kv("rms_R", dev.rms_R);
  r.kv("rms_r", dev.rms_r);
  r.kv("max_R", dev.max_R);
  r.kv("max_r", dev.max_r);
  r.kv("nonuniformity", nonuniformity(s.field, scale));
  if (red == Formulation::SimplifiedSG) {
    double dropped = 0;
    for (const ComState& st : b.states) dropped = std::max(dropped, norm(simplified_dropped_force(st, s.field, s.constants)));
    r.kv("dropped_force_max", dropped);
  }
  if (s.field.is_uniform() && red == Formulation::ReducedUniform) {
    const bool ok = std::max(dev.rms_R, dev.rms_r) <= kUniformCompareThreshold;
    r.kv("threshold", kUniformCompareThreshold);
    r.kv("within_threshold", ok);
  } else {
    r.kv("threshold", std::string("none (linear field: reduced form is approximate)"));
  }
  log << "compare: rms_R " << dev.rms_R << ", rms_r " << dev.rms_r << " (relative to |r0| = " << scale << ")\n";
}

void axis_report(Report& r, const std::string& name, const AxisStats& a) {
  r.kv(name + ".mean", a.mean);
  r.kv(name + ".variance", a.variance);
  r.kv(name + ".standard_error", a.standard_error);
}

bool cmd_ensemble(const Scenario& s, Artifacts& art, std::ostream& log) {
  const EnsembleSpec spec = ensemble_spec(s);
  const DeflectionStats st = run_beam(spec);

  Report r(art.open("ensemble.txt"));
  r.comment("ensemble deflection statistics; " + units_line(s.constants));
  r.kv("formulation", to_string(spec.formulation));
  r.kv("internal", to_string(spec.internal));
  r.kv("orientation", to_string(spec.orientation));
  r.kv("seed", std::to_string(spec.seed));
  r.kv("K_L", s.constants.K_L());
  r.kv_int("n_atoms", static_cast<long long>(st.n_atoms));
  r.kv_int("n_failed", static_cast<long long>(st.n_failed));
  r.kv("valid", st.valid);
  r.kv("flight_time", st.flight_time);
  axis_report(r, "final_position", st.final_position);
  axis_report(r, "deflection", st.deflection);
  r.kv("mean_velocity", st.mean_velocity);
  const Vec3 ax = st.histogram.axis;
  const double along = dot(st.final_position.mean, ax);
  double se = 0.0;
  for (int c = 0; c < 3; ++c) se += std::pow(ax[c] * st.final_position.standard_error[c], 2);
  se = std::sqrt(se);
  r.kv("field_axis", ax);
  r.kv("field_axis.mean", along);
  r.kv("field_axis.standard_error", se);
  r.kv("field_axis.significance", se > 0.0 ? along / se : 0.0);
  r.kv("histogram.lo", st.histogram.lo);
  r.kv("histogram.hi", st.histogram.hi);
  std::string counts;
  for (std::size_t c : st.histogram.counts) counts += (counts.empty() ? "" : " ") + std::to_string(c);
  r.kv("histogram.counts", counts);
  for (const AtomEndpoint& a : st.atoms)
    if (!a.ok) r.kv("failed." + std::to_string(a.index), a.error);

  if (s.output.endpoints) {
    std::vector<std::string> cols{"index", "ok"};
    for (const char* n : {"R0", "Rdot0", "R", "Rdot", "L", "S"})
      for (auto& c : vec_columns(n)) cols.push_back(c);
    Table t(art.open("endpoints." + ext(s.output)), s.output.format,
            "per-atom endpoints at t = " + num(st.flight_time) + "; " + units_line(s.constants), cols);
    for (const AtomEndpoint& a : st.atoms) {
      std::vector<double> row{static_cast<double>(a.index), a.ok ? 1.0 : 0.0};
      push(row, a.initial.R);
      push(row, a.initial.Rdot);
      push(row, a.final.R);
      push(row, a.final.Rdot);
      push(row, a.L);
      push(row, a.S);
      t.row(row);
    }
  }
  log << "ensemble: " << st.n_atoms << " atoms, " << st.n_failed << " failed; mean along field axis " << along
      << " (" << (se > 0.0 ? along / se : 0.0) << " standard errors)\n";
  return st.valid;
}

std::size_t sample_at(const Trajectory& tr, std::optional<double> time) {
  if (tr.size() < 3) throw ValidationError("trajectory too short for a field map (needs an interior sample)");
  if (!time) return 1;
  for (std::size_t i = 0; i < tr.size(); ++i)
    if (std::fabs(tr.times[i] - *time) <= 1e-9 * std::max(1.0, std::fabs(*time))) return i;
  throw ValidationError("probes.time = " + num(*time) + " is not a sample time of the trajectory");
}

void cmd_fieldmap(const Scenario& s, Artifacts& art, std::ostream& log) {
  const std::vector<Vec3> probes = probe_points(s);
  const ComState s0 = initial_state(s);
  for (const Vec3& x : probes) require_far_field(s0, x, s.probes.validity);
  const Trajectory tr = simulate(s, reduced_formulation(s));
  const std::size_t idx = sample_at(tr, s.probes.time);

  std::vector<std::string> cols;
  for (const char* n : {"x", "A", "A1", "A2", "H1", "H2", "E", "Ep"})
    for (auto& c : vec_columns(n)) cols.push_back(c);
  cols[0] = "x", cols[1] = "y", cols[2] = "z";
  Table t(art.open("fieldmap." + ext(s.output)), s.output.format,
          "far-field map at t = " + num(tr.times[idx]) + ", R = " + vec(tr.states[idx].R) + "; " +
              units_line(s.constants),
          cols);
  for (const Vec3& x : probes) {
    const FieldSample f = sample_fields(tr, idx, x, s.constants, s.probes.validity);
    std::vector<double> row;
    for (const Vec3& v : {f.x, f.A, f.A1, f.A2, f.H1, f.H2, f.E, f.E_dipole}) push(row, v);
    t.row(row);
  }
  log << "fieldmap: " << probes.size() << " points at t = " << tr.times[idx] << "\n";
}

void cmd_moment(const Scenario& s, Artifacts& art, std::ostream& log) {
  const std::vector<Vec3> probes = probe_points(s);
  const Trajectory tr = simulate(s, reduced_formulation(s));
  const MomentEstimate m = averaged_moment(tr, s.constants, probes, s.probes.validity);

  Report r(art.open("moment.txt"));
  r.comment("time-averaged magnetic moment; " + units_line(s.constants));
  r.kv_int("probes", static_cast<long long>(probes.size()));
  r.kv("period", m.period);
  r.kv_int("n_periods", m.n_periods);
  r.kv("mu_avg", m.mu_avg);
  r.kv("L_avg", m.L_avg);
  r.kv("g_measured", m.g_measured);
  r.kv("g_predicted", m.g_predicted);
  r.kv("relative_error", m.g_predicted != 0.0 ? m.g_measured / m.g_predicted - 1.0 : 0.0);
  r.kv("p", m.p);
  r.kv("fit_residual", m.fit_residual);
  r.kv("discarded_ratio", m.discarded_ratio);
  for (std::size_t i = 0; i < m.warnings.size(); ++i) r.kv("warning." + std::to_string(i), m.warnings[i]);
  for (const std::string& w : m.warnings) log << "warning: " << w << "\n";
  log << "moment: g_measured " << m.g_measured << ", g_predicted " << m.g_predicted << "\n";
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

RunResult run(Command command, const Scenario& scenario, std::ostream& log) {
  RunResult result;
  Artifacts art(scenario.output);
  try {
    bool valid = true;
    switch (command) {
      case Command::SimulateDirect: cmd_simulate(scenario, Formulation::Direct, art, log); break;
      case Command::SimulateReduced: cmd_simulate(scenario, reduced_formulation(scenario), art, log); break;
      case Command::Compare: cmd_compare(scenario, art, log); break;
      case Command::Ensemble: valid = cmd_ensemble(scenario, art, log); break;
      case Command::Fieldmap: cmd_fieldmap(scenario, art, log); break;
      case Command::Moment: cmd_moment(scenario, art, log); break;
    }
    result.outputs = art.commit();
    if (!valid) {
      result.exit_code = kRuntimeFailure;
      result.message = "more than 1% of the atoms failed; the report is marked valid = false";
    }
  } catch (const std::exception& ex) {
    art.discard();
    result.exit_code = exit_code_for_current_exception();
    result.message = ex.what();
  }

  nlohmann::ordered_json manifest;
  manifest["software"] = kSoftwareName;
  manifest["version"] = kVersion;
  manifest["command"] = to_string(command);
  manifest["timestamp"] = utc_timestamp();
  manifest["status"] = result.exit_code == kSuccess ? "ok" : "failed";
  manifest["exit_code"] = result.exit_code;
  if (!result.message.empty()) manifest["error"] = result.message;
  manifest["outputs"] = result.outputs;
  manifest["scenario"] = serialize_scenario(scenario);
  try {
    const fs::path path = art.path(to_string(command) + "-manifest.json");
    fs::create_directories(path.parent_path());
    std::ofstream os(path);
    os << manifest.dump(2) << "\n";
    if (!os) throw RuntimeError("cannot write manifest " + path.string());
    result.outputs.push_back(path.string());
  } catch (const std::exception& ex) {
    if (result.exit_code == kSuccess) {
      result.exit_code = kRuntimeFailure;
      result.message = ex.what();
    }
  }
  return result;
}

}  // namespace magatom::cli
