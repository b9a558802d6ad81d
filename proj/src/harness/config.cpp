#include "weaklab/harness/config.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>

#include "weaklab/common/errors.hpp"
#include "weaklab/qgrid/operator.hpp"

namespace weaklab::harness {

using nlohmann::json;

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

namespace {

// Typed reads from one JSON object. Every problem is appended to `errs`;
// unknown keys are reported together with the closest allowed one.
class Section {
 public:
  Section(const json& obj, std::string path, std::vector<std::string>& errs)
      : obj_(obj), path_(std::move(path)), errs_(errs) {}

  void allow(std::initializer_list<const char*> keys) {
    for (const char* k : keys) allowed_.emplace_back(k);
  }

  void check_unknown() const {
    if (!obj_.is_object()) return;
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (std::find(allowed_.begin(), allowed_.end(), it.key()) != allowed_.end()) continue;
      std::string best;
      std::size_t dist = std::string::npos;
      for (const auto& k : allowed_) {
        const std::size_t d = edit_distance(it.key(), k);
        if (d < dist) dist = d, best = k;
      }
      std::string msg = "unknown key '" + name(it.key()) + "'";
      if (!best.empty()) msg += " (nearest valid key: '" + best + "')";
      errs_.push_back(msg);
    }
  }

  bool has(const char* key) const { return obj_.is_object() && obj_.contains(key); }

  double number(const char* key, double def) const {
    if (!has(key)) return def;
    const auto& v = obj_.at(key);
    if (!v.is_number()) {
      errs_.push_back(name(key) + ": expected a number");
      return def;
    }
    return v.get<double>();
  }

  std::optional<double> optional_number(const char* key) const {
    if (!has(key)) return std::nullopt;
    return number(key, 0.0);
  }

  std::uint64_t count(const char* key, std::uint64_t def) const {
    if (!has(key)) return def;
    const auto& v = obj_.at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    errs_.push_back(name(key) + ": expected a non-negative integer");
    return def;
  }

  std::string text(const char* key, std::string def) const {
    if (!has(key)) return def;
    const auto& v = obj_.at(key);
    if (!v.is_string()) {
      errs_.push_back(name(key) + ": expected a string");
      return def;
    }
    return v.get<std::string>();
  }

  bool flag(const char* key, bool def) const {
    if (!has(key)) return def;
    const auto& v = obj_.at(key);
    if (!v.is_boolean()) {
      errs_.push_back(name(key) + ": expected true or false");
      return def;
    }
    return v.get<bool>();
  }

  Section child(const char* key) const {
    static const json empty = json::object();
    if (!has(key)) return Section(empty, name(key), errs_);
    const auto& v = obj_.at(key);
    if (!v.is_object()) {
      errs_.push_back(name(key) + ": expected an object");
      return Section(empty, name(key), errs_);
    }
    return Section(v, name(key), errs_);
  }

  const json& raw() const { return obj_; }
  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  const json& obj_;
  std::string path_;
  std::vector<std::string>& errs_;
  std::vector<std::string> allowed_;
};

void require(bool ok, const std::string& msg, std::vector<std::string>& errs) {
  if (!ok) errs.push_back(msg);
}

bool finite(double v) { return std::isfinite(v); }

void one_of(const std::string& v, std::initializer_list<const char*> options, const std::string& field,
            std::vector<std::string>& errs) {
  for (const char* o : options)
    if (v == o) return;
  std::string list;
  for (const char* o : options) list += (list.empty() ? "" : ", ") + std::string(o);
  errs.push_back(field + ": '" + v + "' is not one of " + list);
}

void semantic_checks(const ScenarioConfig& c, std::vector<std::string>& e) {
  require(c.units.hbar > 0 && finite(c.units.hbar), "units.hbar: must be positive", e);
  require(c.units.mass > 0 && finite(c.units.mass), "units.mass: must be positive", e);
  require(finite(c.units.charge), "units.charge: must be finite", e);

  require(finite(c.grid.x_min) && finite(c.grid.x_max) && c.grid.x_max > c.grid.x_min,
          "grid.x_max: must exceed grid.x_min", e);
  require(c.grid.n >= 4, "grid.n: at least 4 points", e);
  one_of(c.grid.kinetic, {"spectral", "stencil"}, "grid.kinetic", e);

  const auto& p = c.potential;
  one_of(p.kind, {"free", "barrier", "harmonic"}, "potential.kind", e);
  if (p.kind == "barrier") {
    require(finite(p.height), "potential.height: must be finite", e);
    require(p.right > p.left, "potential.right: must exceed potential.left", e);
  }
  if (p.kind == "harmonic") require(p.omega > 0 && finite(p.omega), "potential.omega: must be positive", e);
  if (p.drive) {
    require(finite(p.drive->amplitude) && finite(p.drive->omega) && finite(p.drive->phase),
            "potential.drive: parameters must be finite", e);
    if (p.drive->t_off) require(*p.drive->t_off > p.drive->t_on, "potential.drive.t_off: must exceed t_on", e);
  }

  const auto& s = c.initial_state;
  one_of(s.kind, {"gaussian", "eigenstate", "superposition"}, "initial_state.kind", e);
  if (s.kind == "gaussian") require(s.sigma0 > 0 && finite(s.sigma0), "initial_state.sigma0: must be positive", e);
  if (s.kind == "superposition") {
    require(!s.components.empty(), "initial_state.components: at least one component", e);
    double w = 0;
    for (const auto& comp : s.components) w += comp.re * comp.re + comp.im * comp.im;
    require(w > 0, "initial_state.components: all amplitudes are zero", e);
  }

  const auto& pr = c.propagator;
  one_of(pr.method, {"split_operator", "crank_nicolson"}, "propagator.method", e);
  require(pr.dt > 0 && finite(pr.dt), "propagator.dt: must be positive", e);
  require(pr.steps_per_output >= 1, "propagator.steps_per_output: at least 1", e);
  require(pr.duration > 0 && finite(pr.duration), "propagator.duration: must be positive", e);

  require(c.ensemble.N >= 1, "ensemble.N: at least 1", e);

  const auto& t = c.task;
  if (std::find(task_names().begin(), task_names().end(), t.name) == task_names().end()) {
    std::string list;
    for (const auto& n : task_names()) list += (list.empty() ? "" : ", ") + n;
    e.push_back("task.name: '" + t.name + "' is not one of " + list);
  }
  if (t.name == "trajectories") require(t.trajectories.substeps >= 1, "task.substeps: at least 1", e);
  if (t.name == "weakvalue") {
    one_of(t.weakvalue.op, {"momentum", "position", "energy", "window"}, "task.operator", e);
    if (t.weakvalue.op == "window") require(t.weakvalue.b > t.weakvalue.a, "task.b: must exceed task.a", e);
    require(t.weakvalue.time >= 0 && t.weakvalue.time <= pr.duration, "task.time: must lie in [0, duration]", e);
  }
  if (t.name == "work") {
    const double t2 = t.work.t2.value_or(pr.duration);
    require(t.work.t1 >= 0, "task.t1: must be non-negative", e);
    require(t2 > t.work.t1, "task.t2: must exceed task.t1", e);
    require(t2 <= pr.duration * (1 + 1e-12), "task.t2: must not exceed propagator.duration", e);
  }
  if (t.name == "dwell") {
    require(t.dwell.b > t.dwell.a, "task.b: must exceed task.a", e);
    one_of(t.dwell.horizon_policy, {"require_exit", "truncate"}, "task.horizon_policy", e);
  }
  if (t.name == "psd") {
    require(t.psd.length > 0, "task.length: must be positive", e);
    require(t.psd.max_lag >= 1, "task.max_lag: at least 1", e);
    require(t.psd.t_start >= 0 && t.psd.t_start < pr.duration, "task.t_start: must lie in [0, duration)", e);
  }
  if (t.name == "measure") {
    const auto& m = t.measure;
    one_of(m.S, {"position", "momentum", "energy"}, "task.S", e);
    one_of(m.G, {"position", "momentum", "energy"}, "task.G", e);
    one_of(m.mode, {"exact", "monte_carlo"}, "task.mode", e);
    require(m.lambda >= 0 && finite(m.lambda), "task.lambda: must be non-negative", e);
    require(m.sigma > 0 && finite(m.sigma), "task.sigma: must be positive", e);
    require(m.tau >= 0 && finite(m.tau), "task.tau: must be non-negative", e);
  }
  if (t.name == "validate") {
    for (int id : t.validate.criteria) require(id >= 1 && id <= 12, "task.criteria: ids run from 1 to 12", e);
    for (const auto& [k, v] : t.validate.tolerance_scale) {
      int id = 0;
      const bool ok = std::sscanf(k.c_str(), "%d", &id) == 1 && std::to_string(id) == k && id >= 1 && id <= 12;
      require(ok, "task.tolerance_scale: key '" + k + "' is not a criterion id", e);
      require(v >= 0 && finite(v), "task.tolerance_scale." + k + ": must be non-negative", e);
    }
  }
}

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& ex) {
    throw ConfigError(std::string("config is not valid JSON: ") + ex.what());
  }
  std::vector<std::string> errs;
  if (!root.is_object()) throw ConfigError("config must be a JSON object");

  ScenarioConfig c;
  Section top(root, "", errs);
  top.allow({"units", "grid", "potential", "initial_state", "propagator", "ensemble", "task"});
  top.check_unknown();

  {
    auto s = top.child("units");
    s.allow({"hbar", "mass", "charge"});
    s.check_unknown();
    c.units.hbar = s.number("hbar", c.units.hbar);
    c.units.mass = s.number("mass", c.units.mass);
    c.units.charge = s.number("charge", c.units.charge);
  }
  {
    auto s = top.child("grid");
    s.allow({"x_min", "x_max", "n", "kinetic"});
    s.check_unknown();
    c.grid.x_min = s.number("x_min", c.grid.x_min);
    c.grid.x_max = s.number("x_max", c.grid.x_max);
    c.grid.n = s.count("n", c.grid.n);
    c.grid.kinetic = s.text("kinetic", c.grid.kinetic);
  }
  {
    auto s = top.child("potential");
    auto& p = c.potential;
    p.kind = s.text("kind", p.kind);
    if (p.kind == "barrier")
      s.allow({"kind", "height", "left", "right", "drive"});
    else if (p.kind == "harmonic")
      s.allow({"kind", "omega", "center", "drive"});
    else
      s.allow({"kind", "drive"});
    s.check_unknown();
    p.height = s.number("height", p.height);
    p.left = s.number("left", p.left);
    p.right = s.number("right", p.right);
    p.omega = s.number("omega", p.omega);
    p.center = s.number("center", p.center);
    if (s.has("drive")) {
      auto d = s.child("drive");
      d.allow({"amplitude", "omega", "phase", "t_on", "t_off"});
      d.check_unknown();
      DriveSpec ds;
      ds.amplitude = d.number("amplitude", ds.amplitude);
      ds.omega = d.number("omega", ds.omega);
      ds.phase = d.number("phase", ds.phase);
      ds.t_on = d.number("t_on", ds.t_on);
      ds.t_off = d.optional_number("t_off");
      p.drive = ds;
    }
  }
  {
    auto s = top.child("initial_state");
    auto& st = c.initial_state;
    st.kind = s.text("kind", st.kind);
    if (st.kind == "eigenstate")
      s.allow({"kind", "index"});
    else if (st.kind == "superposition")
      s.allow({"kind", "components"});
    else
      s.allow({"kind", "x0", "sigma0", "k0"});
    s.check_unknown();
    st.x0 = s.number("x0", st.x0);
    st.sigma0 = s.number("sigma0", st.sigma0);
    st.k0 = s.number("k0", st.k0);
    st.index = s.count("index", st.index);
    if (s.has("components")) {
      const auto& arr = s.raw().at("components");
      if (!arr.is_array()) {
        errs.push_back("initial_state.components: expected an array");
      } else {
        for (std::size_t i = 0; i < arr.size(); ++i) {
          if (!arr[i].is_object()) {
            errs.push_back("initial_state.components[" + std::to_string(i) + "]: expected an object");
            continue;
          }
          Section cs(arr[i], "initial_state.components[" + std::to_string(i) + "]", errs);
          cs.allow({"index", "re", "im"});
          cs.check_unknown();
          Component comp;
          comp.index = cs.count("index", 0);
          comp.re = cs.number("re", 0.0);
          comp.im = cs.number("im", 0.0);
          st.components.push_back(comp);
        }
      }
    }
  }
  {
    auto s = top.child("propagator");
    s.allow({"method", "dt", "steps_per_output", "duration"});
    s.check_unknown();
    auto& p = c.propagator;
    p.method = s.text("method", p.method);
    p.dt = s.number("dt", p.dt);
    p.steps_per_output = s.count("steps_per_output", p.steps_per_output);
    p.duration = s.number("duration", p.duration);
  }
  {
    auto s = top.child("ensemble");
    s.allow({"N", "seed"});
    s.check_unknown();
    c.ensemble.N = s.count("N", c.ensemble.N);
    c.ensemble.seed = s.count("seed", c.ensemble.seed);
  }
  {
    auto s = top.child("task");
    auto& t = c.task;
    t.name = s.text("name", t.name);
    if (t.name == "trajectories") {
      s.allow({"name", "substeps"});
      t.trajectories.substeps = s.count("substeps", t.trajectories.substeps);
    } else if (t.name == "weakvalue") {
      s.allow({"name", "operator", "a", "b", "time"});
      t.weakvalue.op = s.text("operator", t.weakvalue.op);
      t.weakvalue.a = s.number("a", t.weakvalue.a);
      t.weakvalue.b = s.number("b", t.weakvalue.b);
      t.weakvalue.time = s.number("time", t.weakvalue.time);
    } else if (t.name == "work") {
      s.allow({"name", "t1", "t2"});
      t.work.t1 = s.number("t1", t.work.t1);
      t.work.t2 = s.optional_number("t2");
    } else if (t.name == "dwell") {
      s.allow({"name", "a", "b", "horizon_policy"});
      t.dwell.a = s.number("a", t.dwell.a);
      t.dwell.b = s.number("b", t.dwell.b);
      t.dwell.horizon_policy = s.text("horizon_policy", t.dwell.horizon_policy);
    } else if (t.name == "psd") {
      s.allow({"name", "length", "max_lag", "hann", "t_start"});
      t.psd.length = s.number("length", t.psd.length);
      t.psd.max_lag = s.count("max_lag", t.psd.max_lag);
      t.psd.hann = s.flag("hann", t.psd.hann);
      t.psd.t_start = s.number("t_start", t.psd.t_start);
    } else if (t.name == "measure") {
      s.allow({"name", "S", "G", "lambda", "sigma", "tau", "post_selection", "mode"});
      auto& m = t.measure;
      m.S = s.text("S", m.S);
      m.G = s.text("G", m.G);
      m.lambda = s.number("lambda", m.lambda);
      m.sigma = s.number("sigma", m.sigma);
      m.tau = s.number("tau", m.tau);
      m.post_selection = s.number("post_selection", m.post_selection);
      m.mode = s.text("mode", m.mode);
    } else if (t.name == "validate") {
      s.allow({"name", "criteria", "tolerance_scale"});
      if (s.has("criteria")) {
        const auto& arr = s.raw().at("criteria");
        if (!arr.is_array()) {
          errs.push_back("task.criteria: expected an array of integers");
        } else {
          for (const auto& v : arr) {
            if (v.is_number_integer())
              t.validate.criteria.push_back(v.get<int>());
            else
              errs.push_back("task.criteria: expected an array of integers");
          }
        }
      }
      if (s.has("tolerance_scale")) {
        auto ts = s.child("tolerance_scale");
        if (ts.raw().is_object())
          for (auto it = ts.raw().begin(); it != ts.raw().end(); ++it)
            t.validate.tolerance_scale[it.key()] = ts.number(it.key().c_str(), 1.0);
      }
    } else {
      s.allow({"name"});
    }
    s.check_unknown();
  }

  semantic_checks(c, errs);
  if (!errs.empty()) throw ConfigError(errs);
  return c;
}

void validate(const ScenarioConfig& cfg) {
  std::vector<std::string> errs;
  semantic_checks(cfg, errs);
  if (!errs.empty()) throw ConfigError(errs);
}

std::string serialize(const ScenarioConfig& c) {
  json j;
  j["units"] = {{"hbar", c.units.hbar}, {"mass", c.units.mass}, {"charge", c.units.charge}};
  j["grid"] = {{"x_min", c.grid.x_min}, {"x_max", c.grid.x_max}, {"n", c.grid.n}, {"kinetic", c.grid.kinetic}};

  json p = {{"kind", c.potential.kind}};
  if (c.potential.kind == "barrier") {
    p["height"] = c.potential.height;
    p["left"] = c.potential.left;
    p["right"] = c.potential.right;
  } else if (c.potential.kind == "harmonic") {
    p["omega"] = c.potential.omega;
    p["center"] = c.potential.center;
  }
  if (c.potential.drive) {
    const auto& d = *c.potential.drive;
    json dj = {{"amplitude", d.amplitude}, {"omega", d.omega}, {"phase", d.phase}, {"t_on", d.t_on}};
    if (d.t_off) dj["t_off"] = *d.t_off;
    p["drive"] = dj;
  }
  j["potential"] = p;

  const auto& s = c.initial_state;
  json st = {{"kind", s.kind}};
  if (s.kind == "gaussian") {
    st["x0"] = s.x0;
    st["sigma0"] = s.sigma0;
    st["k0"] = s.k0;
  } else if (s.kind == "eigenstate") {
    st["index"] = s.index;
  } else {
    json arr = json::array();
    for (const auto& comp : s.components) arr.push_back({{"index", comp.index}, {"re", comp.re}, {"im", comp.im}});
    st["components"] = arr;
  }
  j["initial_state"] = st;

  j["propagator"] = {{"method", c.propagator.method},
                     {"dt", c.propagator.dt},
                     {"steps_per_output", c.propagator.steps_per_output},
                     {"duration", c.propagator.duration}};
  j["ensemble"] = {{"N", c.ensemble.N}, {"seed", c.ensemble.seed}};

  const auto& t = c.task;
  json tj = {{"name", t.name}};
  if (t.name == "trajectories") {
    tj["substeps"] = t.trajectories.substeps;
  } else if (t.name == "weakvalue") {
    tj["operator"] = t.weakvalue.op;
    if (t.weakvalue.op == "window") {
      tj["a"] = t.weakvalue.a;
      tj["b"] = t.weakvalue.b;
    }
    tj["time"] = t.weakvalue.time;
  } else if (t.name == "work") {
    tj["t1"] = t.work.t1;
    tj["t2"] = t.work.t2.value_or(c.propagator.duration);
  } else if (t.name == "dwell") {
    tj["a"] = t.dwell.a;
    tj["b"] = t.dwell.b;
    tj["horizon_policy"] = t.dwell.horizon_policy;
  } else if (t.name == "psd") {
    tj["length"] = t.psd.length;
    tj["max_lag"] = t.psd.max_lag;
    tj["hann"] = t.psd.hann;
    tj["t_start"] = t.psd.t_start;
  } else if (t.name == "measure") {
    const auto& m = t.measure;
    tj.update({{"S", m.S},
               {"G", m.G},
               {"lambda", m.lambda},
               {"sigma", m.sigma},
               {"tau", m.tau},
               {"post_selection", m.post_selection},
               {"mode", m.mode}});
  } else if (t.name == "validate") {
    std::vector<int> ids = t.validate.criteria;
    std::sort(ids.begin(), ids.end());
    tj["criteria"] = ids;
    tj["tolerance_scale"] = json::object();
    for (const auto& [k, v] : t.validate.tolerance_scale) tj["tolerance_scale"][k] = v;
  }
  j["task"] = tj;
  return j.dump(2) + "\n";
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string config_hash(const ScenarioConfig& cfg) { return sha256_hex(serialize(cfg)); }

qgrid::Physics make_physics(const ScenarioConfig& c) {
  return {c.units.hbar, c.units.mass, c.units.charge,
          c.grid.kinetic == "stencil" ? qgrid::KineticScheme::stencil : qgrid::KineticScheme::spectral};
}

qgrid::Grid1D make_grid(const ScenarioConfig& c) { return qgrid::Grid1D(c.grid.x_min, c.grid.x_max, c.grid.n); }

qgrid::PotentialModel make_potential(const ScenarioConfig& c) {
  const auto& p = c.potential;
  qgrid::PotentialModel m;
  if (p.kind == "barrier")
    m = qgrid::PotentialModel::barrier(p.height, p.left, p.right);
  else if (p.kind == "harmonic")
    m = qgrid::PotentialModel::harmonic(p.omega, p.center);
  if (p.drive) {
    qgrid::DriveField d;
    d.amplitude = p.drive->amplitude;
    d.omega = p.drive->omega;
    d.phase = p.drive->phase;
    d.t_on = p.drive->t_on;
    if (p.drive->t_off) d.t_off = *p.drive->t_off;
    m = m.with_drive(d);
  }
  return m;
}

qgrid::PropagatorConfig make_propagator_config(const ScenarioConfig& c) {
  return {c.propagator.dt,
          c.propagator.method == "crank_nicolson" ? qgrid::Method::crank_nicolson : qgrid::Method::split_operator,
          c.propagator.steps_per_output};
}

qgrid::WaveFunction make_initial_state(const ScenarioConfig& c) {
  const auto g = make_grid(c);
  const auto& s = c.initial_state;
  if (s.kind == "gaussian") return qgrid::gaussian_packet(g, s.x0, s.sigma0, s.k0);

  std::size_t top = s.index;
  for (const auto& comp : s.components) top = std::max(top, comp.index);
  const auto H = qgrid::build_hamiltonian(g, make_potential(c), 0.0, make_physics(c), false);
  const auto sp = H.decompose(top + 1);
  if (s.kind == "eigenstate") return qgrid::WaveFunction(g, sp.eigenvector(s.index));
  CVec v(g.n(), 0.0);
  for (const auto& comp : s.components) {
    const CVec e = sp.eigenvector(comp.index);
    for (std::size_t j = 0; j < g.n(); ++j) v[j] += cplx(comp.re, comp.im) * e[j];
  }
  qgrid::WaveFunction w(g, std::move(v));
  w.normalize();
  return w;
}

}  // namespace weaklab::harness
