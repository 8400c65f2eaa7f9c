#include "libra/scenario.hpp"

#include "libra/builtin_systems.hpp"
#include "libra/io.hpp"
#include "libra/linalg.hpp"
#include "libra/linsys.hpp"
#include "libra/orbits.hpp"
#include "libra/reduced.hpp"
#include "libra/sympmat.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <random>
#include <regex>
#include <set>
#include <thread>

namespace libra {

const char* const kVersion = "0.1.0";

using nlohmann::json;

std::string to_string(TaskKind k) {
  switch (k) {
    case TaskKind::Flow: return "Flow";
    case TaskKind::FindChords: return "FindChords";
    case TaskKind::ClassifyOrbit: return "ClassifyOrbit";
    case TaskKind::ReturnMap: return "ReturnMap";
    case TaskKind::CheckReversibility: return "CheckReversibility";
    case TaskKind::LinsysCheck: return "LinsysCheck";
    case TaskKind::MatrixLab: return "MatrixLab";
  }
  return "unknown";
}

std::string to_string(ItemStatus s) {
  switch (s) {
    case ItemStatus::Ok: return "ok";
    case ItemStatus::Inconclusive: return "inconclusive";
    case ItemStatus::Error: return "error";
  }
  return "unknown";
}

int RunReport::exit_code() const {
  bool inconclusive = false;
  for (const auto& it : items) {
    if (it.status == ItemStatus::Error) return 1;
    if (it.status == ItemStatus::Inconclusive) inconclusive = true;
  }
  return inconclusive ? 2 : 0;
}

std::uint64_t item_seed(std::uint64_t seed, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

namespace {

// ---------------------------------------------------------------- parsing

enum class KeyType { Number, Integer, Bool, String, NumberArray };

struct KeySpec {
  const char* name;
  KeyType type;
};

const std::map<TaskKind, std::vector<KeySpec>>& task_keys() {
  static const std::map<TaskKind, std::vector<KeySpec>> keys{
      {TaskKind::Flow,
       {{"x0", KeyType::NumberArray}, {"duration", KeyType::Number}, {"samples", KeyType::Integer}}},
      {TaskKind::FindChords,
       {{"lo", KeyType::NumberArray},
        {"hi", KeyType::NumberArray},
        {"per_dim", KeyType::Integer},
        {"t_max", KeyType::Number}}},
      {TaskKind::ClassifyOrbit,
       {{"x0", KeyType::NumberArray},
        {"period_guess", KeyType::Number},
        {"energy_target", KeyType::Number},
        {"samples", KeyType::Integer}}},
      {TaskKind::ReturnMap,
       {{"x0", KeyType::NumberArray},
        {"period_guess", KeyType::Number},
        {"energy_target", KeyType::Number},
        {"anchor_time", KeyType::Number},
        {"block_samples", KeyType::Integer}}},
      {TaskKind::CheckReversibility,
       {{"x0", KeyType::NumberArray},
        {"period_guess", KeyType::Number},
        {"energy_target", KeyType::Number},
        {"cocycle_grid", KeyType::Integer},
        {"point_times", KeyType::NumberArray}}},
      {TaskKind::LinsysCheck,
       {{"d", KeyType::Integer},
        {"pairs", KeyType::Integer},
        {"bumps", KeyType::Integer},
        {"alpha", KeyType::Number},
        {"horizon", KeyType::Number},
        {"n_max", KeyType::Integer},
        {"agreement_tol", KeyType::Number},
        {"m_tol", KeyType::Number},
        {"violators", KeyType::Bool},
        {"violation_strength", KeyType::Number},
        {"violation_floor", KeyType::Number}}},
      {TaskKind::MatrixLab,
       {{"d", KeyType::Integer},
        {"samples", KeyType::Integer},
        {"involution", KeyType::String},
        {"max_fraction", KeyType::Number},
        {"residual_tol", KeyType::Number}}},
  };
  return keys;
}

bool needs_system(TaskKind k) { return k != TaskKind::LinsysCheck && k != TaskKind::MatrixLab; }

std::optional<TaskKind> parse_kind(const std::string& s) {
  for (TaskKind k : {TaskKind::Flow, TaskKind::FindChords, TaskKind::ClassifyOrbit, TaskKind::ReturnMap,
                     TaskKind::CheckReversibility, TaskKind::LinsysCheck, TaskKind::MatrixLab})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

bool has_type(const json& v, KeyType t) {
  switch (t) {
    case KeyType::Number: return v.is_number();
    case KeyType::Integer: return v.is_number_integer();
    case KeyType::Bool: return v.is_boolean();
    case KeyType::String: return v.is_string();
    case KeyType::NumberArray:
      return v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); });
  }
  return false;
}

const char* type_name(KeyType t) {
  switch (t) {
    case KeyType::Number: return "a number";
    case KeyType::Integer: return "an integer";
    case KeyType::Bool: return "a boolean";
    case KeyType::String: return "a string";
    case KeyType::NumberArray: return "an array of numbers";
  }
  return "?";
}

struct TolField {
  const char* name;
  double Tolerances::*d = nullptr;
  int Tolerances::*i = nullptr;
};

const std::vector<TolField>& tol_fields() {
  static const std::vector<TolField> f{
      {"symplectic_tol", &Tolerances::symplectic_tol},
      {"gap_tol", &Tolerances::gap_tol},
      {"root_tol", &Tolerances::root_tol},
      {"k_max", nullptr, &Tolerances::k_max},
      {"gamma_tol", &Tolerances::gamma_tol},
      {"gamma_event_tol", &Tolerances::gamma_event_tol},
      {"energy_drift_tol", &Tolerances::energy_drift_tol},
      {"newton_tol", &Tolerances::newton_tol},
      {"transv_tol", &Tolerances::transv_tol},
      {"velocity_floor", &Tolerances::velocity_floor},
      {"k_div", nullptr, &Tolerances::k_div},
      {"integrator_rtol", &Tolerances::integrator_rtol},
      {"integrator_atol", &Tolerances::integrator_atol},
      {"construction_tol", &Tolerances::construction_tol},
      {"decision_tol", &Tolerances::decision_tol},
      {"closure_tol", &Tolerances::closure_tol},
      {"minimality_tol", &Tolerances::minimality_tol},
      {"chord_tol", &Tolerances::chord_tol},
      {"reversibility_tol", &Tolerances::reversibility_tol},
  };
  return f;
}

std::string join(const std::vector<std::string>& v, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
  return out;
}

void parse_tolerances(const json& j, Tolerances& tol, std::vector<std::string>& errs) {
  if (!j.is_object()) {
    errs.push_back("tolerances: must be an object");
    return;
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    auto f = std::find_if(tol_fields().begin(), tol_fields().end(),
                          [&](const TolField& t) { return it.key() == t.name; });
    std::string where = "tolerances." + it.key();
    if (f == tol_fields().end()) {
      errs.push_back(where + ": unknown key");
      continue;
    }
    if (f->i) {
      if (!it->is_number_integer()) errs.push_back(where + ": must be an integer");
      else if (it->get<int>() < 1) errs.push_back(where + ": must be at least 1");
      else tol.*(f->i) = it->get<int>();
    } else {
      if (!it->is_number()) errs.push_back(where + ": must be a number");
      else if (!(it->get<double>() > 0)) errs.push_back(where + ": must be positive");
      else tol.*(f->d) = it->get<double>();
    }
  }
}

std::optional<SystemSpec> parse_system(const json& j, const std::string& where,
                                       std::vector<std::string>& errs) {
  if (!j.is_object()) {
    errs.push_back(where + ": must be an object with 'kind' and optional 'params'");
    return std::nullopt;
  }
  SystemSpec s;
  bool ok = true;
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "kind" && it.key() != "params") {
      errs.push_back(where + "." + it.key() + ": unknown key");
      ok = false;
    }
  if (!j.contains("kind") || !j["kind"].is_string()) {
    errs.push_back(where + ".kind: required string");
    return std::nullopt;
  }
  s.kind = j["kind"].get<std::string>();
  if (j.contains("params")) {
    if (!j["params"].is_object()) {
      errs.push_back(where + ".params: must be an object of numbers");
      ok = false;
    } else {
      for (auto it = j["params"].begin(); it != j["params"].end(); ++it) {
        if (!it->is_number()) {
          errs.push_back(where + ".params." + it.key() + ": must be a number");
          ok = false;
        } else {
          s.params[it.key()] = it->get<double>();
        }
      }
    }
  }
  try {
    make_builtin(s.kind, s.params);
  } catch (const Error& e) {
    errs.push_back(where + ": " + e.what());
    ok = false;
  }
  if (!ok) return std::nullopt;
  return s;
}

TaskSpec parse_task(const json& j, std::size_t index, const std::optional<SystemSpec>& default_system,
                    std::vector<std::string>& errs) {
  std::string where = "tasks[" + std::to_string(index) + "]";
  TaskSpec t;
  if (!j.is_object()) {
    errs.push_back(where + ": must be an object");
    return t;
  }
  if (!j.contains("task") || !j["task"].is_string()) {
    errs.push_back(where + ".task: required, one of Flow, FindChords, ClassifyOrbit, ReturnMap, "
                           "CheckReversibility, LinsysCheck, MatrixLab");
    return t;
  }
  auto kind = parse_kind(j["task"].get<std::string>());
  if (!kind) {
    errs.push_back(where + ".task: unknown task '" + j["task"].get<std::string>() + "'");
    return t;
  }
  t.kind = *kind;
  std::string lower = to_string(t.kind);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  t.id = "t" + std::to_string(index) + "_" + lower;
  if (j.contains("id")) {
    static const std::regex ok_id("[A-Za-z0-9_-]+");
    if (!j["id"].is_string() || !std::regex_match(j["id"].get<std::string>(), ok_id))
      errs.push_back(where + ".id: must be a non-empty string of letters, digits, '_' or '-'");
    else
      t.id = j["id"].get<std::string>();
  }

  const auto& keys = task_keys().at(t.kind);
  t.options = json::object();
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    if (k == "task" || k == "id" || k == "system") continue;
    auto spec = std::find_if(keys.begin(), keys.end(), [&](const KeySpec& s) { return k == s.name; });
    if (spec == keys.end()) {
      errs.push_back(where + "." + k + ": unknown key for " + to_string(t.kind));
      continue;
    }
    if (!has_type(*it, spec->type)) {
      errs.push_back(where + "." + k + ": must be " + type_name(spec->type));
      continue;
    }
    if (spec->type == KeyType::Integer && it->get<long long>() < 1) {
      errs.push_back(where + "." + k + ": must be at least 1");
      continue;
    }
    if (spec->type == KeyType::Number && k != "anchor_time" && k != "energy_target" &&
        !(it->get<double>() > 0)) {
      errs.push_back(where + "." + k + ": must be positive");
      continue;
    }
    t.options[k] = *it;
  }

  if (needs_system(t.kind)) {
    if (j.contains("system")) t.system = parse_system(j["system"], where + ".system", errs);
    else if (default_system) t.system = default_system;
    else errs.push_back(where + ".system: required for " + to_string(t.kind));
    if (t.system && t.options.contains("x0")) {
      int n = make_builtin(t.system->kind, t.system->params).n();
      if (static_cast<int>(t.options["x0"].size()) != 2 * n)
        errs.push_back(where + ".x0: must have " + std::to_string(2 * n) + " entries for system '" +
                       t.system->kind + "'");
    }
    if (t.system && t.kind == TaskKind::FindChords) {
      int n = make_builtin(t.system->kind, t.system->params).n();
      for (const char* k : {"lo", "hi"})
        if (t.options.contains(k) && static_cast<int>(t.options[k].size()) != n)
          errs.push_back(where + "." + k + ": must have " + std::to_string(n) + " entries");
    }
  } else if (j.contains("system")) {
    errs.push_back(where + ".system: not used by " + to_string(t.kind));
  }
  if (t.kind == TaskKind::MatrixLab && t.options.contains("involution")) {
    std::string r = t.options["involution"];
    if (r != "R0" && r != "R1") errs.push_back(where + ".involution: must be 'R0' or 'R1'");
  }
  if (t.kind == TaskKind::LinsysCheck && t.options.value("d", 2) > 3)
    errs.push_back(where + ".d: at most 3");
  if (t.kind == TaskKind::MatrixLab && t.options.value("d", 1) > 3)
    errs.push_back(where + ".d: at most 3");
  return t;
}

}  // namespace

ScenarioConfig parse_scenario(const json& doc) {
  std::vector<std::string> errs;
  ScenarioConfig c;
  c.source = doc;
  if (!doc.is_object()) throw ConfigError("invalid config: top level must be an object");

  static const std::set<std::string> top{"name", "seed", "output", "tolerances", "system", "tasks"};
  for (auto it = doc.begin(); it != doc.end(); ++it)
    if (!top.count(it.key())) errs.push_back(it.key() + ": unknown key");

  if (doc.contains("name")) {
    if (doc["name"].is_string()) c.name = doc["name"];
    else errs.push_back("name: must be a string");
  }
  if (doc.contains("seed")) {
    if (doc["seed"].is_number_unsigned()) c.seed = doc["seed"].get<std::uint64_t>();
    else errs.push_back("seed: must be a non-negative integer");
  }
  if (doc.contains("output")) {
    if (doc["output"].is_string()) c.output_dir = doc["output"];
    else errs.push_back("output: must be a string");
  }
  if (doc.contains("tolerances")) parse_tolerances(doc["tolerances"], c.tol, errs);

  std::optional<SystemSpec> default_system;
  if (doc.contains("system")) default_system = parse_system(doc["system"], "system", errs);

  if (!doc.contains("tasks") || !doc["tasks"].is_array()) {
    errs.push_back("tasks: required array of task objects");
  } else if (doc["tasks"].empty()) {
    errs.push_back("tasks: empty task list, nothing to run");
  } else {
    std::set<std::string> ids;
    for (std::size_t i = 0; i < doc["tasks"].size(); ++i) {
      TaskSpec t = parse_task(doc["tasks"][i], i, default_system, errs);
      if (!ids.insert(t.id).second) errs.push_back("tasks[" + std::to_string(i) + "].id: duplicate '" + t.id + "'");
      c.tasks.push_back(std::move(t));
    }
  }

  if (!errs.empty()) throw ConfigError("invalid config:\n  " + join(errs, "\n  "));
  return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file " + path.string());
  json doc;
  try {
    doc = json::parse(f);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_scenario(doc);
}

json builtin_catalog() {
  json out = json::array();
  for (const auto& b : list_builtin_systems()) {
    json params = json::array();
    for (const auto& p : b.parameters)
      params.push_back({{"name", p.name}, {"default", p.default_value}, {"description", p.description}});
    auto [x0, T] = recommended_seed(b.name);
    out.push_back({{"name", b.name},
                   {"description", b.description},
                   {"reversible", b.reversible},
                   {"dimension", make_builtin(b.name).n()},
                   {"parameters", params},
                   {"recommended_seed", b.recommended_seed},
                   {"seed_point", std::vector<double>(x0.data(), x0.data() + x0.size())},
                   {"period_guess", T}});
  }
  return out;
}

// ---------------------------------------------------------------- running

namespace {

struct Ctx {
  const TaskSpec& task;
  const Tolerances& tol;
  std::uint64_t seed;
  const RunOptions& opt;
  ItemResult& res;

  std::filesystem::path file(const std::string& suffix) {
    std::string name = task.id + "_" + suffix;
    res.artifacts.push_back(name);
    return opt.out_dir / name;
  }
  bool svg() const { return opt.plots == PlotMode::Svg; }
  void row(const std::string& q, double v, double tol, const std::string& verdict) {
    res.rows.push_back({q, v, tol, verdict});
  }
  void judged(const std::string& q, double v, double tol) { row(q, v, tol, v <= tol ? "pass" : "fail"); }
  template <class T>
  T get(const char* key, T def) const {
    return task.options.value(key, def);
  }
};

Vec to_vec(const json& a) {
  Vec v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v(i) = a[i].get<double>();
  return v;
}

System make_system(const Ctx& c) { return make_builtin(c.task.system->kind, c.task.system->params); }

PeriodicOrbit acquire_orbit(const Ctx& c) {
  System sys = make_system(c);
  auto [x0, T] = recommended_seed(c.task.system->kind, c.task.system->params);
  if (c.task.options.contains("x0")) x0 = to_vec(c.task.options["x0"]);
  T = c.get("period_guess", T);
  return find_periodic_orbit(sys, x0, T, c.tol, c.get("energy_target", 0.0));
}

void orbit_rows(Ctx& c, const PeriodicOrbit& o) {
  c.row("period", o.period, c.tol.closure_tol, "info");
  c.judged("closure_residual", o.closure_residual, c.tol.closure_tol);
  c.row("minimal_period", o.minimal ? 1.0 : 0.0, c.tol.minimality_tol, o.minimal ? "pass" : "fail");
}

void write_orbit(Ctx& c, const PeriodicOrbit& o, int samples) {
  orbit_table(o.sys, o.segment, samples).write(c.file("orbit.csv"));
  if (c.svg() && o.sys.n() >= 2) {
    PlotSeries s{"q", {}, {}};
    for (int k = 0; k <= 400; ++k) {
      Vec x = o.segment.state(o.period * k / 400);
      s.x.push_back(x(0));
      s.y.push_back(x(1));
    }
    write_svg_lines(c.file("orbit.svg"), c.task.id + ": projected orbit", "q1", "q2", {s});
  }
}

void run_flow(Ctx& c) {
  System sys = make_system(c);
  auto [x0, T] = recommended_seed(c.task.system->kind, c.task.system->params);
  if (c.task.options.contains("x0")) x0 = to_vec(c.task.options["x0"]);
  double duration = c.get("duration", T);
  OrbitSegment seg = flow(sys, x0, duration, c.tol);
  orbit_table(sys, seg, c.get("samples", 201)).write(c.file("flow.csv"));
  double scale = std::max(1.0, std::abs(seg.energy()));
  c.row("energy", seg.energy(), c.tol.energy_drift_tol * scale, "info");
  c.judged("energy_drift", seg.max_energy_drift(), c.tol.energy_drift_tol * scale);
  if (c.svg()) {
    std::vector<PlotSeries> s;
    for (int i = 0; i < sys.n(); ++i) s.push_back({"q" + std::to_string(i + 1), {}, {}});
    for (int k = 0; k <= 400; ++k) {
      double t = duration * k / 400;
      Vec x = seg.state(t);
      for (int i = 0; i < sys.n(); ++i) {
        s[i].x.push_back(t);
        s[i].y.push_back(x(i));
      }
    }
    write_svg_lines(c.file("flow.svg"), c.task.id + ": configuration", "t", "q", s);
  }
}

void run_find_chords(Ctx& c) {
  System sys = make_system(c);
  const int n = sys.n();
  Gamma0Grid grid;
  grid.lo = c.task.options.contains("lo") ? to_vec(c.task.options["lo"]) : Vec(Vec::Constant(n, -2.0));
  grid.hi = c.task.options.contains("hi") ? to_vec(c.task.options["hi"]) : Vec(Vec::Constant(n, 2.0));
  grid.per_dim = c.get("per_dim", 8);
  auto chords = find_chords(sys, c.get("t_max", 6.0), grid, c.tol, 1);

  std::vector<std::string> h{"index"};
  for (int i = 0; i < n; ++i) h.push_back("q_start" + std::to_string(i + 1));
  h.push_back("duration");
  for (int i = 0; i < n; ++i) h.push_back("q_end" + std::to_string(i + 1));
  for (const char* s : {"minimal", "verified", "transverse", "sigma_min", "transv_tol", "start_residual",
                        "end_residual", "chord_tol"})
    h.push_back(s);
  CsvTable t(h);
  int transverse = 0, minimal = 0;
  for (std::size_t i = 0; i < chords.size(); ++i) {
    const Chord& ch = chords[i];
    auto [ok, sig] = chord_transversality(sys, ch, c.tol);
    transverse += ok;
    minimal += ch.minimal;
    t.row() << i << ch.start.q << ch.duration << ch.end.q << ch.minimal << ch.verified << ok << sig
            << c.tol.transv_tol << ch.start_residual << ch.end_residual << c.tol.chord_tol;
  }
  t.write(c.file("chords.csv"));
  c.row("chords", static_cast<double>(chords.size()), c.tol.chord_tol, "info");
  c.row("minimal_chords", minimal, c.tol.gamma_event_tol, "info");
  c.row("transverse_chords", transverse, c.tol.transv_tol, "info");
}

void run_classify(Ctx& c) {
  PeriodicOrbit o = acquire_orbit(c);
  orbit_rows(c, o);
  write_orbit(c, o, c.get("samples", 401));
  OrbitClassification cl = classify_orbit(o, c.tol);

  std::string times;
  for (double t : cl.degenerate_times) times += (times.empty() ? "" : ";") + format_number(t);
  CsvTable t({"kind", "period", "closure_residual", "minimal", "turning_times", "self_intersections",
              "revisited_fraction", "gamma_tol", "diagnostics"});
  t.row() << to_string(cl.kind) << o.period << o.closure_residual << o.minimal << times
          << cl.self_intersection_times.size() << cl.revisited_fraction << c.tol.gamma_tol
          << join(cl.diagnostics, "; ");
  t.write(c.file("classification.csv"));
  c.row("classification", static_cast<double>(cl.degenerate_times.size()), c.tol.gamma_tol, to_string(cl.kind));

  if (cl.kind == OrbitKind::Inconclusive) {
    c.res.status = ItemStatus::Inconclusive;
    c.res.message = join(cl.diagnostics, "; ");
    return;
  }
  if (cl.kind == OrbitKind::RoundTrip && cl.degenerate_times.size() == 2) {
    TimeSymmetry sig = time_symmetry_sigma(o, cl.degenerate_times[0], cl.degenerate_times[1], c.tol);
    c.row("turning_time_gap", circle_diff(sig.nu1, sig.nu0, o.period), c.tol.decision_tol, "info");
    c.judged("sigma_fixed_point_residual", sig.fixed_point_residual, c.tol.decision_tol);
    c.judged("sigma_derivative_residual", sig.derivative_residual, c.tol.decision_tol);
    c.judged("sigma_projection_residual", sig.max_projection_residual, c.tol.decision_tol);
    CsvTable st({"t", "sigma", "sigma_prime"});
    PlotSeries ps{"sigma", {}, {}};
    for (int k = 0; k <= 200; ++k) {
      double tt = o.period * k / 200;
      double s = sig(tt);
      st.row() << tt << s << sig.derivative(tt);
      ps.x.push_back(tt);
      ps.y.push_back(s);
    }
    st.write(c.file("sigma.csv"));
    if (c.svg()) write_svg_lines(c.file("sigma.svg"), c.task.id + ": time symmetry", "t", "sigma(t)", {ps});
  }
}

void run_return_map(Ctx& c) {
  PeriodicOrbit o = acquire_orbit(c);
  orbit_rows(c, o);
  ReturnMap rm = c.task.options.contains("anchor_time")
                     ? reduced_return_map(o, c.task.options["anchor_time"].get<double>(), c.tol)
                     : reduced_return_map(o, c.tol);
  c.row("anchor_time", rm.anchor_time, c.tol.velocity_floor, "info");
  c.judged("symplectic_residual", rm.symplectic_residual, c.tol.construction_tol);
  c.judged("reciprocal_pairing_residual", reciprocal_pairing_residual(rm.matrix), c.tol.construction_tol);
  write_matrix_csv(c.file("return_map.csv"), rm.matrix);

  CVec ev = eigenvalues(rm.matrix);
  std::vector<std::pair<double, double>> sorted;
  for (Eigen::Index i = 0; i < ev.size(); ++i) sorted.push_back({ev(i).real(), ev(i).imag()});
  std::sort(sorted.begin(), sorted.end());
  CsvTable et({"re", "im", "modulus", "argument"});
  std::vector<std::complex<double>> zs;
  for (auto [re, im] : sorted) {
    std::complex<double> z(re, im);
    zs.push_back(z);
    et.row() << re << im << std::abs(z) << std::arg(z);
  }
  et.write(c.file("eigenvalues.csv"));
  UpsilonVerdict uv = classify_upsilon(rm.matrix, c.tol);
  upsilon_table(uv, c.tol.root_tol, c.tol.gap_tol).write(c.file("upsilon.csv"));
  c.row("in_upsilon", uv.in_upsilon ? 1.0 : 0.0, c.tol.root_tol, "info");
  if (c.svg()) write_svg_spectrum(c.file("spectrum.svg"), c.task.id + ": return map spectrum", zs);

  // block curves of the reduced equation across the anchor's monotone branch
  SectionFrame f = build_section(o, rm.anchor_time, c.tol);
  auto br = monotone_branch(f, o, c.tol);
  OrbitProjection proj(o);
  double w = br.second - br.first;
  double r0 = f.r(proj.state(br.first + 0.1 * w)), r1 = f.r(proj.state(br.second - 0.1 * w));
  TransitionMap tm = transition_map(f, o, r0, r1, c.tol, c.get("block_samples", 41));
  const int d = f.d();
  std::vector<std::string> h{"r", "tau_prime"};
  for (const char* b : {"A", "B", "C"})
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) h.push_back(std::string(b) + std::to_string(i + 1) + std::to_string(j + 1));
  CsvTable bt(h);
  std::vector<PlotSeries> ps;
  for (const char* b : {"A", "B", "C"}) ps.push_back({std::string(b) + "11", {}, {}});
  for (std::size_t k = 0; k < tm.r_samples.size(); ++k) {
    const auto& hb = tm.blocks[k];
    auto row = bt.row();
    row << tm.r_samples[k] << tm.tau_prime[k];
    for (const Mat* m : {&hb.A, &hb.B, &hb.C}) row << Vec(m->transpose().reshaped());
    for (int i = 0; i < 3; ++i) ps[i].x.push_back(tm.r_samples[k]);
    ps[0].y.push_back(hb.A(0, 0));
    ps[1].y.push_back(hb.B(0, 0));
    ps[2].y.push_back(hb.C(0, 0));
  }
  bt.write(c.file("blocks.csv"));
  c.row("min_B_eigenvalue", tm.min_B_eigenvalue, c.tol.construction_tol,
        tm.min_B_eigenvalue > 0 ? "pass" : "fail");
  if (c.svg()) write_svg_lines(c.file("blocks.svg"), c.task.id + ": reduced blocks", "r", "entry", ps);
}

void run_reversibility(Ctx& c) {
  PeriodicOrbit o = acquire_orbit(c);
  orbit_rows(c, o);
  OrbitVerdict v = check_reversible_orbit(o, c.tol, c.get("cocycle_grid", 4));
  c.row("nu0", v.nu0, v.tol, "info");
  c.row("nu1", v.nu1, v.tol, "info");
  c.row("half_period_gap", v.half_period_gap, c.tol.decision_tol, "info");
  c.judged("identity_residual", v.identity_residual, v.tol);
  c.judged("antisymplectic_residual_nu0", v.antisymplectic_residual[0], v.tol);
  c.judged("antisymplectic_residual_nu1", v.antisymplectic_residual[1], v.tol);
  c.row("antisymplectic_limit_nu0", v.antisymplectic_limit[0], v.tol, "info");
  c.row("antisymplectic_limit_nu1", v.antisymplectic_limit[1], v.tol, "info");
  c.row("cocycle_residual", v.cocycle_residual, v.tol, "info");
  c.row("cocycle_identity", v.cocycle_identity, v.tol, "info");
  c.row("reversible", v.reversible ? 1.0 : 0.0, v.tol,
        v.inconclusive ? "inconclusive" : (v.reversible ? "pass" : "fail"));

  if (c.task.options.contains("point_times")) {
    int k = 0;
    for (const auto& tj : c.task.options["point_times"]) {
      PointVerdict p = check_reversible_point(o, tj.get<double>(), c.tol);
      std::string pre = "point" + std::to_string(k++) + "_";
      c.row(pre + "time", p.t, p.tol, "info");
      for (int i = 0; i < 3; ++i) c.judged(pre + "condition" + std::to_string(i + 1), p.residual[i], p.tol);
    }
  }

  CsvTable t({"quantity", "value", "tol", "verdict"});
  for (const auto& r : c.res.rows) t.row() << r.quantity << r.value << r.tol << r.verdict;
  t.write(c.file("verdict.csv"));
  if (v.inconclusive) {
    c.res.status = ItemStatus::Inconclusive;
    c.res.message = join(v.diagnostics, "; ");
  }
}

void run_linsys(Ctx& c) {
  const int d = c.get("d", 2), pairs = c.get("pairs", 5), bumps = c.get("bumps", 50), n_max = c.get("n_max", 4);
  const double alpha = c.get("alpha", 1.7), T = c.get("horizon", 3.0);
  const double agree_tol = c.get("agreement_tol", 1e-6), m_tol = c.get("m_tol", 1e-5);

  CsvTable t({"pair", "d", "alpha", "condition1", "condition2", "condition3", "condition_tol", "agreement",
              "agreement_tol", "m_defect", "m_tol"});
  double worst_agree = 0, worst_m = 0;
  int passed = 0;
  std::vector<double> times;
  for (int k = 0; k < 5; ++k) times.push_back(T * (0.1 + 0.2 * k));
  std::optional<LinearSystemPair> first;
  for (int i = 0; i < pairs; ++i) {
    std::mt19937_64 rng(item_seed(c.seed, i));
    Curve L = random_hamiltonian_curve(d, T, rng);
    Curve a = random_positive_scalar(T, rng);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    Mat G(d, d);
    for (int r = 0; r < d; ++r)
      for (int s = 0; s < d; ++s) G(r, s) = U(rng);
    Mat s0 = -(0.2 * Mat::Identity(d, d) + 0.1 * G * G.transpose() / d);
    LinearSystemPair p = build_conjugate_pair(L, a, alpha, s0, c.tol);
    if (!first) first = p;
    ThreeConditions tc = check_three_conditions(p, c.tol);
    double agree = projection_agreement(p, random_bump_ensemble(d, T, bumps, item_seed(c.seed, 1000 + i)));
    double m = 0;
    auto A = m_sequence(p.L, p.a, n_max, times), B = m_sequence(p.Lt, p.at, n_max, times);
    for (std::size_t n = 0; n < A.size(); ++n)
      for (std::size_t k = 0; k < times.size(); ++k)
        m = std::max(m, max_abs(p.a.scalar(times[k]) * upper_right(A[n][k]) -
                                p.at.scalar(times[k]) * upper_right(B[n][k])));
    t.row() << i << d << alpha << tc.residual[0] << tc.residual[1] << tc.residual[2] << tc.tol << agree
            << agree_tol << m << m_tol;
    worst_agree = std::max(worst_agree, agree);
    worst_m = std::max(worst_m, m);
    passed += tc.all();
  }
  t.write(c.file("pairs.csv"));
  c.row("pairs_meeting_conditions", passed, c.tol.decision_tol, passed == pairs ? "pass" : "fail");
  c.judged("max_agreement", worst_agree, agree_tol);
  c.judged("max_m_defect", worst_m, m_tol);

  if (c.get("violators", true) && first) {
    const double strength = c.get("violation_strength", 0.5), floor = c.get("violation_floor", 1e-3);
    auto ens = random_bump_ensemble(d, T, std::min(bumps, 5), item_seed(c.seed, 2000));
    CsvTable vt({"violation", "condition1", "condition2", "condition3", "condition_tol", "agreement",
                 "violation_floor"});
    for (Violation w : {Violation::ScaleRatio, Violation::MomentumBlock, Violation::PositionBlock}) {
      LinearSystemPair p = violate(*first, w, strength);
      ThreeConditions tc = check_three_conditions(p, c.tol);
      double agree = projection_agreement(p, ens);
      vt.row() << to_string(w) << tc.residual[0] << tc.residual[1] << tc.residual[2] << tc.tol << agree << floor;
      c.row("violator_" + to_string(w), agree, floor, agree > floor ? "pass" : "fail");
    }
    vt.write(c.file("violators.csv"));
  }
}

void run_matrix_lab(Ctx& c) {
  const int d = c.get("d", 1), samples = c.get("samples", 1000);
  const double max_fraction = c.get("max_fraction", 0.01), res_tol = c.get("residual_tol", 1e-8);
  Mat R = c.get<std::string>("involution", "R0") == "R1" ? R1(d) : R0(d);
  std::mt19937_64 rng(c.seed);
  CsvTable t({"sample", "in_upsilon", "reason", "order", "min_root_distance", "min_eigenvalue_gap",
              "reversibility_residual", "symplectic_residual", "root_tol", "gap_tol"});
  int hits = 0;
  double worst_rev = 0, worst_sym = 0;
  std::vector<std::complex<double>> cloud;
  for (int k = 0; k < samples; ++k) {
    Mat M = random_r_reversible(R, rng);
    UpsilonVerdict v = classify_upsilon(M, c.tol);
    double rr = reversibility_residual(R, M), sr = symplectic_residual(M);
    hits += v.in_upsilon;
    worst_rev = std::max(worst_rev, rr);
    worst_sym = std::max(worst_sym, sr);
    t.row() << k << v.in_upsilon << to_string(v.reason) << v.order << v.min_root_distance << v.min_eigenvalue_gap
            << rr << sr << c.tol.root_tol << c.tol.gap_tol;
    if (c.svg() && k < 200) {
      CVec ev = eigenvalues(M);
      for (Eigen::Index i = 0; i < ev.size(); ++i) cloud.push_back(ev(i));
    }
  }
  t.write(c.file("samples.csv"));
  c.judged("upsilon_fraction", static_cast<double>(hits) / samples, max_fraction);
  c.judged("max_reversibility_residual", worst_rev, res_tol);
  c.row("max_symplectic_residual", worst_sym, c.tol.symplectic_tol, "info");
  int dim = static_cast<int>(tangent_basis_A2d(R, c.tol.symplectic_tol).size());
  c.row("tangent_dimension_A2d", dim, 0.0, dim == d * (d + 1) ? "pass" : "fail");
  if (c.svg()) write_svg_spectrum(c.file("spectrum.svg"), c.task.id + ": reversible spectra", cloud);
}

ItemResult run_item(const TaskSpec& task, const Tolerances& tol, std::uint64_t seed, const RunOptions& opt) {
  ItemResult res;
  res.id = task.id;
  res.kind = task.kind;
  Ctx c{task, tol, seed, opt, res};
  try {
    switch (task.kind) {
      case TaskKind::Flow: run_flow(c); break;
      case TaskKind::FindChords: run_find_chords(c); break;
      case TaskKind::ClassifyOrbit: run_classify(c); break;
      case TaskKind::ReturnMap: run_return_map(c); break;
      case TaskKind::CheckReversibility: run_reversibility(c); break;
      case TaskKind::LinsysCheck: run_linsys(c); break;
      case TaskKind::MatrixLab: run_matrix_lab(c); break;
    }
  } catch (const std::exception& e) {
    res.status = ItemStatus::Error;
    res.message = e.what();
  }
  return res;
}

}  // namespace

RunReport run_scenario(const ScenarioConfig& config, const RunOptions& opt) {
  config.tol.validate();
  auto start = std::chrono::steady_clock::now();
  std::filesystem::create_directories(opt.out_dir);

  RunReport rep;
  rep.scenario = config.name;
  rep.version = kVersion;
  rep.items.resize(config.tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < config.tasks.size();)
      rep.items[i] = run_item(config.tasks[i], config.tol, item_seed(config.seed, i), opt);
  };
  const int jobs = std::max(1, std::min<int>(opt.jobs, static_cast<int>(config.tasks.size())));
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  rep.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  CsvTable t({"item", "task", "status", "quantity", "value", "tol", "verdict"});
  for (const auto& it : rep.items) {
    for (const auto& r : it.rows)
      t.row() << it.id << to_string(it.kind) << to_string(it.status) << r.quantity << r.value << r.tol << r.verdict;
    if (it.status != ItemStatus::Ok)
      t.row() << it.id << to_string(it.kind) << to_string(it.status) << "message" << 0.0 << 0.0 << it.message;
  }
  t.write(opt.out_dir / "report.csv");

  json items = json::array();
  for (const auto& it : rep.items)
    items.push_back({{"id", it.id},
                     {"task", to_string(it.kind)},
                     {"status", to_string(it.status)},
                     {"message", it.message},
                     {"artifacts", it.artifacts}});
  json run{{"scenario", config.source},
           {"seed", config.seed},
           {"items", items},
           {"exit_code", rep.exit_code()},
           {"wall_clock_seconds", rep.wall_clock_seconds},
           {"version", rep.version}};
  std::ofstream(opt.out_dir / "run.json") << run.dump(2) << '\n';
  return rep;
}

}  // namespace libra
