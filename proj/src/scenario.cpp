#include "magatom/scenario.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "magatom/atomfield.hpp"
#include "magatom/errors.hpp"

namespace magatom {

std::string to_string(InitialKind k) {
  switch (k) {
    case InitialKind::Circular: return "circular";
    case InitialKind::Linear: return "linear";
    case InitialKind::Explicit: return "explicit";
  }
  return "?";
}

std::string to_string(ProbeKind k) {
  switch (k) {
    case ProbeKind::Sphere: return "sphere";
    case ProbeKind::Grid: return "grid";
    case ProbeKind::List: return "list";
  }
  return "?";
}

std::string to_string(OutputFormat f) { return f == OutputFormat::Csv ? "csv" : "jsonl"; }

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"constants", {"preset", "m_p", "m_e", "e", "c", "softening"}},
      {"field", {"kind", "H0", "G", "h", "g"}},
      {"initial", {"kind", "radius", "normal", "phase", "R", "Rdot", "r", "rdot"}},
      {"integrator", {"method", "step", "tolerance", "periods", "t_end", "reduced"}},
      {"ensemble",
       {"n_atoms", "internal", "radius", "orientation", "axis", "random_phase", "beam_velocity", "jitter", "seed",
        "formulation", "flight_time", "histogram_bins", "threads"}},
      {"probes", {"kind", "center", "radii", "per_shell", "lo", "hi", "counts", "points", "validity", "time"}},
      {"output", {"directory", "prefix", "format", "sample_stride", "endpoints"}},
  };
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

struct Entry {
  std::string value;
  std::string origin;  // "line N" or "override"
};

using Entries = std::map<std::pair<std::string, std::string>, Entry>;

[[noreturn]] void fail(const std::string& origin, const std::string& section, const std::string& key,
                       const std::string& msg) {
  std::string where = origin;
  if (!section.empty()) where += (where.empty() ? "" : ", ") + ("[" + section + "]" + (key.empty() ? "" : " " + key));
  throw ValidationError(where + ": " + msg);
}

double to_double(const std::string& tok) {
  double v = 0.0;
  const char* end = tok.data() + tok.size();
  const auto [p, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || p != end || !std::isfinite(v)) throw ValidationError("'" + tok + "' is not a finite number");
  return v;
}

std::vector<std::string> tokens(const std::string& text) {
  std::string t = text;
  for (char& ch : t)
    if (ch == ',') ch = ' ';
  std::istringstream is(t);
  std::vector<std::string> out;
  for (std::string w; is >> w;) out.push_back(w);
  return out;
}

std::vector<double> numbers(const std::string& text) {
  std::vector<double> out;
  for (const std::string& w : tokens(text)) out.push_back(to_double(w));
  return out;
}

Vec3 to_vec(const std::string& text) {
  const auto v = numbers(text);
  if (v.size() != 3) throw ValidationError("expected 3 numbers, got " + std::to_string(v.size()));
  return {v[0], v[1], v[2]};
}

Mat3 to_mat(const std::string& text) {
  const auto v = numbers(text);
  if (v.size() != 9) throw ValidationError("expected 9 numbers (row-major 3x3), got " + std::to_string(v.size()));
  Mat3 m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = v[3 * i + j];
  return m;
}

long long to_integer(const std::string& text) {
  const std::string t = trim(text);
  long long v = 0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size()) throw ValidationError("'" + t + "' is not an integer");
  return v;
}

std::uint64_t to_seed(const std::string& text) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size()) throw ValidationError("'" + t + "' is not an unsigned integer");
  return v;
}

bool to_bool(const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "yes" || t == "1") return true;
  if (t == "false" || t == "no" || t == "0") return false;
  throw ValidationError("'" + t + "' is not a boolean (true/false)");
}

// Reads and validates the entries of one section.
class Section {
 public:
  Section(const Entries& entries, std::string name) : entries_(entries), name_(std::move(name)) {}

  bool has(const std::string& key) const { return entries_.count({name_, key}) > 0; }

  std::string origin(const std::string& key) const {
    const auto it = entries_.find({name_, key});
    return it == entries_.end() ? "" : it->second.origin;
  }

  template <class F>
  auto get(const std::string& key, F&& convert) const {
    const auto it = entries_.find({name_, key});
    if (it == entries_.end()) fail("", name_, key, "missing required key");
    try {
      return convert(it->second.value);
    } catch (const ValidationError& ex) {
      fail(it->second.origin, name_, key, ex.what());
    }
  }

  template <class T, class F>
  void read(const std::string& key, T& target, F&& convert) const {
    if (has(key)) target = get(key, convert);
  }

  // Runs `check` and attributes any ValidationError to `key`.
  template <class F>
  void check(const std::string& key, F&& fn) const {
    try {
      fn();
    } catch (const ValidationError& ex) {
      fail(origin(key), name_, key, ex.what());
    }
  }

  const std::string& name() const { return name_; }

 private:
  const Entries& entries_;
  std::string name_;
};

Entries collect(const std::string& text, const std::vector<Override>& overrides) {
  Entries entries;
  std::istringstream in(text);
  std::string raw, section;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string origin = "line " + std::to_string(lineno);
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(origin, "", "", "malformed section header '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      if (!schema().count(section)) fail(origin, "", "", "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(origin, section, "", "expected 'key = value', got '" + line + "'");
    if (section.empty()) fail(origin, "", "", "key outside of any section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!schema().at(section).count(key)) fail(origin, section, key, "unknown key");
    if (entries.count({section, key})) fail(origin, section, key, "duplicate key");
    entries[{section, key}] = {value, origin};
  }
  for (const Override& o : overrides) {
    const std::string origin = "override " + o.section + "." + o.key;
    if (!schema().count(o.section)) fail(origin, "", "", "unknown section [" + o.section + "]");
    if (!schema().at(o.section).count(o.key)) fail(origin, o.section, o.key, "unknown key");
    entries[{o.section, o.key}] = {o.value, origin};
  }
  return entries;
}

std::optional<Formulation> to_formulation(const std::string& text, const FieldModel& f) {
  const std::string t = trim(text);
  if (t == "auto") return std::nullopt;
  return parse_formulation(t, f);
}

void check_formulation(Formulation form, const FieldModel& f) {
  if (form == Formulation::ReducedUniform && !f.is_uniform())
    throw ValidationError("reduced-uniform needs a uniform field");
  if ((form == Formulation::ReducedInhomogeneous || form == Formulation::SimplifiedSG) && !f.is_linear())
    throw ValidationError(to_string(form) + " needs a linear field");
}

}  // namespace

Override parse_override(const std::string& text) {
  const auto eq = text.find('=');
  const auto dot_pos = text.find('.');
  if (eq == std::string::npos || dot_pos == std::string::npos || dot_pos > eq)
    throw ValidationError("override '" + text + "' must look like section.key=value");
  return {trim(text.substr(0, dot_pos)), trim(text.substr(dot_pos + 1, eq - dot_pos - 1)), trim(text.substr(eq + 1))};
}

Scenario parse_scenario(const std::string& text, const std::vector<Override>& overrides) {
  const Entries entries = collect(text, overrides);
  Scenario s;
  auto str = [](const std::string& v) { return trim(v); };
  auto num = [](const std::string& v) { return to_double(trim(v)); };
  auto integer = [](const std::string& v) {
    const long long x = to_integer(v);
    if (x < -2147483647LL || x > 2147483647LL) throw ValidationError("integer out of range");
    return static_cast<int>(x);
  };

  // [constants]
  const Section con(entries, "constants");
  {
    const std::string preset = con.get("preset", str);
    double m_p = 0, m_e = 0, e = 0, c = 0, eps = 0;
    if (preset == "hydrogen" || preset == "positronium") {
      const Constants base = preset == "hydrogen" ? Constants::hydrogen() : Constants::positronium();
      m_p = base.m_p(), m_e = base.m_e(), e = base.e(), c = base.c();
    } else if (preset == "custom") {
      m_p = con.get("m_p", num), m_e = con.get("m_e", num), e = con.get("e", num), c = con.get("c", num);
    } else {
      con.check("preset", [&] { throw ValidationError("unknown preset '" + preset + "' (hydrogen, positronium, custom)"); });
    }
    con.read("m_p", m_p, num);
    con.read("m_e", m_e, num);
    con.read("e", e, num);
    con.read("c", c, num);
    con.read("softening", eps, num);
    con.check("preset", [&] { s.constants = Constants(m_p, m_e, e, c, eps); });
  }

  // [field]
  const Section fld(entries, "field");
  {
    const std::string kind = fld.get("kind", str);
    Vec3 H0{};
    fld.read("H0", H0, to_vec);
    if (kind == "uniform") {
      s.field = FieldModel::uniform(H0);
    } else if (kind == "linear") {
      const Mat3 G = fld.get("G", to_mat);
      fld.check("G", [&] { s.field = FieldModel::linear(H0, G); });
    } else if (kind == "stern-gerlach") {
      const double h = fld.get("h", num), g = fld.get("g", num);
      fld.check("g", [&] { s.field = FieldModel::stern_gerlach(h, g); });
    } else {
      fld.check("kind", [&] { throw ValidationError("unknown field kind '" + kind + "' (uniform, linear, stern-gerlach)"); });
    }
  }

  // [initial]
  const Section ini(entries, "initial");
  {
    InitialConditions& ic = s.initial;
    const std::string kind = ini.get("kind", str);
    if (kind == "circular") ic.kind = InitialKind::Circular;
    else if (kind == "linear") ic.kind = InitialKind::Linear;
    else if (kind == "explicit") ic.kind = InitialKind::Explicit;
    else ini.check("kind", [&] { throw ValidationError("unknown initial kind '" + kind + "' (circular, linear, explicit)"); });
    ini.read("radius", ic.radius, num);
    ini.read("normal", ic.normal, to_vec);
    ini.read("phase", ic.phase, num);
    ini.read("R", ic.R, to_vec);
    ini.read("Rdot", ic.Rdot, to_vec);
    if (ic.kind == InitialKind::Explicit) {
      ic.r = ini.get("r", to_vec);
      ic.rdot = ini.get("rdot", to_vec);
      ini.check("r", [&] { if (!(norm(ic.r) > 0.0)) throw ValidationError("r must be non-zero"); });
    } else {
      ini.read("r", ic.r, to_vec);
      ini.read("rdot", ic.rdot, to_vec);
      ini.check("radius", [&] { if (!(ic.radius > 0.0)) throw ValidationError("radius must be positive"); });
      ini.check("normal", [&] { if (!(norm(ic.normal) > 0.0)) throw ValidationError("normal must be non-zero"); });
    }
  }

  // [integrator]
  const Section itg(entries, "integrator");
  {
    IntegratorSettings& is = s.integrator;
    itg.read("method", is.method, [](const std::string& v) { return parse_method(trim(v)); });
    itg.read("step", is.step, num);
    itg.read("tolerance", is.tolerance, num);
    itg.read("periods", is.periods, num);
    itg.read("t_end", is.t_end, num);
    itg.read("reduced", is.reduced, [&](const std::string& v) { return to_formulation(v, s.field); });
    itg.check("step", [&] { if (!(is.step >= 0.0)) throw ValidationError("step must be >= 0 (0 = default)"); });
    itg.check("tolerance", [&] {
      if (!(is.tolerance > 0.0 && is.tolerance <= 1e-3)) throw ValidationError("tolerance must lie in (0, 1e-3]");
    });
    itg.check("t_end", [&] { if (!(is.t_end >= 0.0)) throw ValidationError("t_end must be >= 0 (0 = use periods)"); });
    itg.check("periods", [&] {
      if (is.t_end == 0.0 && !(is.periods > 0.0)) throw ValidationError("periods must be positive when t_end = 0");
    });
    itg.check("reduced", [&] {
      if (!is.reduced) return;
      if (*is.reduced == Formulation::Direct) throw ValidationError("the reduced formulation cannot be direct");
      check_formulation(*is.reduced, s.field);
    });
  }

  // [ensemble]
  const Section ens(entries, "ensemble");
  {
    EnsembleSettings& es = s.ensemble;
    ens.read("n_atoms", es.n_atoms, integer);
    ens.read("internal", es.internal, [](const std::string& v) { return parse_internal_motion(trim(v)); });
    ens.read("radius", es.radius, num);
    ens.read("orientation", es.orientation, [](const std::string& v) { return parse_orientation(trim(v)); });
    ens.read("axis", es.axis, to_vec);
    ens.read("random_phase", es.random_phase, to_bool);
    ens.read("beam_velocity", es.beam_velocity, to_vec);
    ens.read("jitter", es.jitter, to_vec);
    ens.read("seed", es.seed, to_seed);
    ens.read("formulation", es.formulation, [&](const std::string& v) { return to_formulation(v, s.field); });
    ens.read("flight_time", es.flight_time, num);
    ens.read("histogram_bins", es.histogram_bins, integer);
    ens.read("threads", es.threads, integer);
    ens.check("threads", [&] { if (es.threads < 0) throw ValidationError("threads must be >= 0 (0 = all cores)"); });
    ens.check("formulation", [&] { if (es.formulation) check_formulation(*es.formulation, s.field); });
  }

  // A straight-line internal oscillation passes through r = 0; without an
  // explicit softening it gets 0.05 times its amplitude.
  if (!con.has("softening")) {
    double amplitude = 0.0;
    if (s.ensemble.internal == InternalMotion::Linear) amplitude = s.ensemble.radius;
    else if (s.initial.kind == InitialKind::Linear) amplitude = s.initial.radius;
    if (amplitude > 0.0) s.constants = s.constants.with_softening(0.05 * amplitude);
  }
  ens.check("n_atoms", [&] { ensemble_spec(s).validate(); });

  // [probes]
  const Section prb(entries, "probes");
  {
    ProbeSettings& ps = s.probes;
    prb.read("kind", ps.kind, [](const std::string& v) {
      const std::string t = trim(v);
      if (t == "sphere") return ProbeKind::Sphere;
      if (t == "grid") return ProbeKind::Grid;
      if (t == "list") return ProbeKind::List;
      throw ValidationError("unknown probe kind '" + t + "' (sphere, grid, list)");
    });
    prb.read("center", ps.center, [](const std::string& v) -> std::optional<Vec3> {
      if (trim(v) == "auto") return std::nullopt;
      return to_vec(v);
    });
    prb.read("radii", ps.radii, numbers);
    prb.read("per_shell", ps.per_shell, integer);
    prb.read("lo", ps.lo, to_vec);
    prb.read("hi", ps.hi, to_vec);
    prb.read("counts", ps.counts, [](const std::string& v) {
      const auto t = tokens(v);
      if (t.size() != 3) throw ValidationError("expected 3 integers");
      std::array<int, 3> c{};
      for (int i = 0; i < 3; ++i) c[i] = static_cast<int>(to_integer(t[i]));
      return c;
    });
    prb.read("points", ps.points, [](const std::string& v) {
      std::vector<Vec3> pts;
      std::istringstream is(v);
      for (std::string part; std::getline(is, part, ';');)
        if (!trim(part).empty()) pts.push_back(to_vec(part));
      return pts;
    });
    prb.read("validity", ps.validity, num);
    prb.read("time", ps.time, [](const std::string& v) -> std::optional<double> {
      if (trim(v) == "auto") return std::nullopt;
      return to_double(trim(v));
    });
    prb.check("radii", [&] {
      for (double r : ps.radii)
        if (!(r > 0.0)) throw ValidationError("probe radii must be positive");
    });
    prb.check("per_shell", [&] { if (ps.per_shell < 1) throw ValidationError("per_shell must be >= 1"); });
    prb.check("counts", [&] {
      for (int i = 0; i < 3; ++i) {
        if (ps.counts[i] < 1) throw ValidationError("grid counts must be >= 1");
        if (ps.counts[i] > 1 && !(ps.hi[i] > ps.lo[i])) throw ValidationError("grid needs hi > lo on every axis with count > 1");
      }
    });
    prb.check("validity", [&] { if (!(ps.validity > 0.0)) throw ValidationError("validity factor must be positive"); });
    prb.check("points", [&] {
      if (ps.kind == ProbeKind::List && ps.points.empty()) throw ValidationError("list probes need at least one point");
    });
  }

  // [output]
  const Section out(entries, "output");
  {
    OutputSettings& os = s.output;
    out.read("directory", os.directory, str);
    out.read("prefix", os.prefix, str);
    out.read("format", os.format, [](const std::string& v) {
      const std::string t = trim(v);
      if (t == "csv") return OutputFormat::Csv;
      if (t == "jsonl") return OutputFormat::Jsonl;
      throw ValidationError("unknown output format '" + t + "' (csv, jsonl)");
    });
    out.read("sample_stride", os.sample_stride, integer);
    out.read("endpoints", os.endpoints, to_bool);
    out.check("sample_stride", [&] { if (os.sample_stride < 1) throw ValidationError("sample_stride must be >= 1"); });
    out.check("prefix", [&] {
      if (os.prefix.empty() || os.prefix.find('/') != std::string::npos)
        throw ValidationError("prefix must be a non-empty file name without '/'");
    });
    out.check("directory", [&] { if (os.directory.empty()) throw ValidationError("directory must not be empty"); });
  }
  return s;
}

Scenario load_scenario(const std::string& path, const std::vector<Override>& overrides) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read scenario file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_scenario(text.str(), overrides);
  } catch (const ValidationError& ex) {
    throw ValidationError(path + ": " + ex.what());
  }
}

namespace {

std::string fmt(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::string fmt(const Vec3& v) { return fmt(v.x) + " " + fmt(v.y) + " " + fmt(v.z); }

std::string fmt(const Mat3& m) {
  std::string s;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s += (s.empty() ? "" : " ") + fmt(m(i, j));
  return s;
}

std::string fmt(std::optional<Formulation> f) { return f ? to_string(*f) : "auto"; }

}  // namespace

std::string serialize_scenario(const Scenario& s) {
  std::ostringstream os;
  const Constants& k = s.constants;
  os << "[constants]\npreset = custom\n"
     << "m_p = " << fmt(k.m_p()) << "\nm_e = " << fmt(k.m_e()) << "\ne = " << fmt(k.e()) << "\nc = " << fmt(k.c())
     << "\nsoftening = " << fmt(k.softening()) << "\n\n";

  os << "[field]\n";
  if (s.field.is_uniform())
    os << "kind = uniform\nH0 = " << fmt(s.field.H0()) << "\n\n";
  else
    os << "kind = linear\nH0 = " << fmt(s.field.H0()) << "\nG = " << fmt(s.field.gradient()) << "\n\n";

  const InitialConditions& ic = s.initial;
  os << "[initial]\nkind = " << to_string(ic.kind) << "\nradius = " << fmt(ic.radius) << "\nnormal = " << fmt(ic.normal)
     << "\nphase = " << fmt(ic.phase) << "\nR = " << fmt(ic.R) << "\nRdot = " << fmt(ic.Rdot) << "\nr = " << fmt(ic.r)
     << "\nrdot = " << fmt(ic.rdot) << "\n\n";

  const IntegratorSettings& is = s.integrator;
  os << "[integrator]\nmethod = " << to_string(is.method) << "\nstep = " << fmt(is.step)
     << "\ntolerance = " << fmt(is.tolerance) << "\nperiods = " << fmt(is.periods) << "\nt_end = " << fmt(is.t_end)
     << "\nreduced = " << fmt(is.reduced) << "\n\n";

  const EnsembleSettings& es = s.ensemble;
  os << "[ensemble]\nn_atoms = " << es.n_atoms << "\ninternal = " << to_string(es.internal)
     << "\nradius = " << fmt(es.radius) << "\norientation = " << to_string(es.orientation)
     << "\naxis = " << fmt(es.axis) << "\nrandom_phase = " << (es.random_phase ? "true" : "false")
     << "\nbeam_velocity = " << fmt(es.beam_velocity) << "\njitter = " << fmt(es.jitter) << "\nseed = " << es.seed
     << "\nformulation = " << fmt(es.formulation) << "\nflight_time = " << fmt(es.flight_time)
     << "\nhistogram_bins = " << es.histogram_bins << "\nthreads = " << es.threads << "\n\n";

  const ProbeSettings& ps = s.probes;
  os << "[probes]\nkind = " << to_string(ps.kind) << "\ncenter = " << (ps.center ? fmt(*ps.center) : "auto")
     << "\nradii =";
  for (double r : ps.radii) os << ' ' << fmt(r);
  os << "\nper_shell = " << ps.per_shell << "\nlo = " << fmt(ps.lo) << "\nhi = " << fmt(ps.hi) << "\ncounts = "
     << ps.counts[0] << ' ' << ps.counts[1] << ' ' << ps.counts[2] << "\npoints =";
  for (std::size_t i = 0; i < ps.points.size(); ++i) os << (i ? "; " : " ") << fmt(ps.points[i]);
  os << "\nvalidity = " << fmt(ps.validity) << "\ntime = " << (ps.time ? fmt(*ps.time) : "auto") << "\n\n";

  const OutputSettings& o = s.output;
  os << "[output]\ndirectory = " << o.directory << "\nprefix = " << o.prefix << "\nformat = " << to_string(o.format)
     << "\nsample_stride = " << o.sample_stride << "\nendpoints = " << (o.endpoints ? "true" : "false") << "\n";
  return os.str();
}

ComState initial_state(const Scenario& s) {
  const InitialConditions& ic = s.initial;
  switch (ic.kind) {
    case InitialKind::Circular: return circular_orbit(s.constants, ic.radius, ic.normal, ic.phase, ic.R, ic.Rdot);
    case InitialKind::Linear: return linear_oscillation(ic.radius, ic.normal, ic.R, ic.Rdot);
    case InitialKind::Explicit: return {ic.R, ic.Rdot, ic.r, ic.rdot};
  }
  return {};
}

IntegratorSpec integrator_spec(const Scenario& s, const ComState& s0) {
  IntegratorSpec spec;
  spec.method = s.integrator.method;
  spec.tolerance = s.integrator.tolerance;
  spec.stride = s.output.sample_stride;
  spec.step = s.integrator.step > 0.0 ? s.integrator.step : default_step(s0, s.constants);
  spec.t_end = s.integrator.t_end > 0.0 ? s.integrator.t_end : s.integrator.periods * kepler_period(s0, s.constants);
  spec.validate();
  return spec;
}

Formulation reduced_formulation(const Scenario& s) {
  return s.integrator.reduced ? *s.integrator.reduced : reduced_formulation(s.field);
}

EnsembleSpec ensemble_spec(const Scenario& s) {
  const EnsembleSettings& es = s.ensemble;
  EnsembleSpec spec;
  spec.n_atoms = es.n_atoms;
  spec.internal = es.internal;
  spec.radius = es.radius;
  spec.orientation = es.orientation;
  spec.axis = es.axis;
  spec.random_phase = es.random_phase;
  spec.beam_velocity = es.beam_velocity;
  spec.jitter = es.jitter;
  spec.seed = es.seed;
  spec.constants = s.constants;
  spec.field = s.field;
  spec.formulation = es.formulation ? *es.formulation : reduced_formulation(s.field);
  spec.integrator.method = s.integrator.method;
  spec.integrator.step = s.integrator.step;
  spec.integrator.tolerance = s.integrator.tolerance;
  spec.flight_time = es.flight_time;
  spec.histogram_bins = es.histogram_bins;
  spec.threads = es.threads;
  return spec;
}

std::vector<Vec3> probe_points(const Scenario& s) {
  const ProbeSettings& ps = s.probes;
  std::vector<Vec3> pts;
  switch (ps.kind) {
    case ProbeKind::Sphere: {
      const Vec3 c = ps.center ? *ps.center : s.initial.R;
      for (double r : ps.radii) {
        const auto shell = sphere_probes(c, r, static_cast<std::size_t>(ps.per_shell));
        pts.insert(pts.end(), shell.begin(), shell.end());
      }
      break;
    }
    case ProbeKind::Grid: {
      auto coord = [&](int axis, int i) {
        return ps.counts[axis] == 1 ? ps.lo[axis]
                                    : ps.lo[axis] + (ps.hi[axis] - ps.lo[axis]) * i / (ps.counts[axis] - 1);
      };
      for (int i = 0; i < ps.counts[0]; ++i)
        for (int j = 0; j < ps.counts[1]; ++j)
          for (int l = 0; l < ps.counts[2]; ++l) pts.push_back({coord(0, i), coord(1, j), coord(2, l)});
      break;
    }
    case ProbeKind::List: pts = ps.points; break;
  }
  return pts;
}

}  // namespace magatom
