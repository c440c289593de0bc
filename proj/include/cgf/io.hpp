#pragma once

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "cgf/flows.hpp"
#include "cgf/geometry.hpp"

namespace cgf::io {

using json = nlohmann::json;

inline constexpr int kFormatVersion = 1;

struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// numbers: shortest decimal that parses back to the same double

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const char* b = s.data();
  const char* e = b + s.size();
  const auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e) throw ScenarioError("not a number: '" + s + "'");
  return v;
}

// ---------------------------------------------------------------------------
// models

struct ModelSpec {
  std::string name;
  std::map<std::string, double> params;
  std::vector<GHCenter> centers;  // gibbons_hawking only
};

inline double param(const ModelSpec& m, const std::string& k, double dflt) {
  const auto it = m.params.find(k);
  return it == m.params.end() ? dflt : it->second;
}

inline ModelPtr make_model(const ModelSpec& m) {
  if (m.name == "flat4") return make_flat4();
  if (m.name == "half_plane") return make_half_plane();
  if (m.name == "taub_nut") return make_taub_nut(param(m, "m", 1.0));
  if (m.name == "eguchi_hanson") return make_eguchi_hanson(param(m, "alpha", 1.0));
  if (m.name == "cp2") return make_cp2();
  if (m.name == "gibbons_hawking") return make_gibbons_hawking(param(m, "eps", 1.0), m.centers);
  throw ScenarioError("unknown model '" + m.name + "'");
}

// ---------------------------------------------------------------------------
// scenarios

struct Scenario {
  std::string name;
  ModelSpec model;
  FlowSpec flow;
  CGState init;
  bool a_from_c = false;  // initial a completed from the Lorentz level set c
  bool frame = false;     // initial u, a given in orthonormal-frame components
  double s0 = 0.0, s1 = 10.0;
  IntegratorConfig cfg;
  double drift_tol = 1e-7;
  std::vector<std::string> reports;
  json compare = json::object();
};

inline FlowKind flow_kind_from(const std::string& s) {
  if (s == "conformal") return FlowKind::Conformal;
  if (s == "lorentz") return FlowKind::Lorentz;
  if (s == "geodesic") return FlowKind::Geodesic;
  if (s == "magnetic") return FlowKind::Magnetic;
  throw ScenarioError("unknown flow kind '" + s + "'");
}

namespace detail {

inline Vec vec_from(const json& j, const std::string& what) {
  if (!j.is_array()) throw ScenarioError(what + " must be an array of numbers");
  Vec v(static_cast<int>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ScenarioError(what + " must be an array of numbers");
    v[static_cast<int>(i)] = j[i].get<double>();
  }
  return v;
}

inline Vec3 vec3_from(const json& j, const std::string& what) {
  const Vec v = vec_from(j, what);
  if (v.size() != 3) throw ScenarioError(what + " must have three entries");
  return {v[0], v[1], v[2]};
}

inline json to_array(const Vec& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

}  // namespace detail

// structural parse; no model evaluation
inline Scenario parse_scenario(const json& j) {
  try {
    Scenario sc;
    if (!j.is_object()) throw ScenarioError("scenario must be a JSON object");
    sc.name = j.value("name", "");
    const json& m = j.at("model");
    sc.model.name = m.at("name").get<std::string>();
    if (m.contains("params"))
      for (const auto& [k, v] : m.at("params").items()) sc.model.params[k] = v.get<double>();
    if (m.contains("centers"))
      for (const auto& c : m.at("centers")) sc.model.centers.push_back({detail::vec3_from(c.at("position"), "centre"), c.value("weight", 1.0)});

    const json& f = j.at("flow");
    sc.flow.kind = flow_kind_from(f.at("kind").get<std::string>());
    if (f.contains("c")) sc.flow.c = detail::vec3_from(f.at("c"), "flow.c");
    sc.flow.B = f.value("B", 0.0);

    const json& in = j.at("initial");
    sc.init.x = detail::vec_from(in.at("x"), "initial.x");
    sc.init.u = detail::vec_from(in.at("u"), "initial.u");
    sc.frame = in.value("frame", false);
    if (in.contains("a")) {
      sc.init.a = detail::vec_from(in.at("a"), "initial.a");
    } else if (in.contains("c")) {
      sc.a_from_c = true;
      if (sc.flow.kind == FlowKind::Conformal) sc.flow.c = detail::vec3_from(in.at("c"), "initial.c");
    } else {
      sc.init.a = Vec::Zero(sc.init.x.size());
    }
    if (sc.init.u.size() != sc.init.x.size() || (sc.init.a.size() != 0 && sc.init.a.size() != sc.init.x.size()))
      throw ScenarioError("initial x, u, a must have equal length");

    if (j.contains("span")) {
      const Vec s = detail::vec_from(j.at("span"), "span");
      if (s.size() != 2) throw ScenarioError("span must be [s0, s1]");
      sc.s0 = s[0];
      sc.s1 = s[1];
    }
    if (j.contains("integrator")) {
      const json& c = j.at("integrator");
      sc.cfg.rel_tol = c.value("rel_tol", sc.cfg.rel_tol);
      sc.cfg.abs_tol = c.value("abs_tol", sc.cfg.abs_tol);
      sc.cfg.sample_ds = c.value("sample_ds", sc.cfg.sample_ds);
      sc.cfg.renormalize = c.value("renormalize", sc.cfg.renormalize);
      if (c.contains("max_step")) sc.cfg.max_step = c.at("max_step").get<double>();
      sc.cfg.max_steps = c.value("max_steps", sc.cfg.max_steps);
    }
    sc.drift_tol = j.value("drift_tol", sc.drift_tol);
    if (j.contains("reports")) sc.reports = j.at("reports").get<std::vector<std::string>>();
    if (j.contains("compare")) sc.compare = j.at("compare");
    return sc;
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("malformed scenario: ") + e.what());
  }
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ScenarioError("malformed JSON in '" + path + "': " + e.what());
  }
  return parse_scenario(j);
}

inline json to_json(const Scenario& sc) {
  json j;
  j["name"] = sc.name;
  j["model"] = {{"name", sc.model.name}, {"params", sc.model.params}};
  if (!sc.model.centers.empty()) {
    json cs = json::array();
    for (const auto& c : sc.model.centers) cs.push_back({{"position", {c.position.x(), c.position.y(), c.position.z()}}, {"weight", c.weight}});
    j["model"]["centers"] = cs;
  }
  j["flow"] = {{"kind", to_string(sc.flow.kind)}};
  if (sc.flow.kind == FlowKind::Lorentz) j["flow"]["c"] = {sc.flow.c.x(), sc.flow.c.y(), sc.flow.c.z()};
  if (sc.flow.kind == FlowKind::Magnetic) j["flow"]["B"] = sc.flow.B;
  j["initial"] = {{"x", detail::to_array(sc.init.x)}, {"u", detail::to_array(sc.init.u)}};
  if (sc.init.a.size() > 0) j["initial"]["a"] = detail::to_array(sc.init.a);
  if (sc.frame) j["initial"]["frame"] = true;
  j["span"] = {sc.s0, sc.s1};
  j["integrator"] = {{"rel_tol", sc.cfg.rel_tol}, {"abs_tol", sc.cfg.abs_tol}, {"sample_ds", sc.cfg.sample_ds},
                     {"renormalize", sc.cfg.renormalize}, {"max_steps", sc.cfg.max_steps}};
  j["drift_tol"] = sc.drift_tol;
  j["reports"] = sc.reports;
  if (!sc.compare.empty()) j["compare"] = sc.compare;
  return j;
}

// checks the point, g(u,u) = 1 and g(u,a) = 0, completing a from c when requested
inline void complete_initial(const Model& M, Scenario& sc, double tol = 1e-8) {
  const int n = M.dim();
  if (sc.init.x.size() != n) throw ScenarioError("initial.x has " + std::to_string(sc.init.x.size()) + " entries, model needs " + std::to_string(n));
  M.check(sc.init.x);
  if (sc.frame) {
    const Mat Ei = M.coframe_at(sc.init.x).inverse();
    sc.init.u = Ei * sc.init.u;
    if (sc.init.a.size() == n) sc.init.a = Ei * sc.init.a;
    sc.frame = false;
  }
  if (sc.a_from_c) {
    sc.init.a = acceleration_from_c(M, sc.init.x, sc.init.u, sc.flow.c);
    sc.a_from_c = false;
  }
  if (sc.flow.kind == FlowKind::Lorentz) sc.init.a = acceleration_from_c(M, sc.init.x, sc.init.u, sc.flow.c);
  if (sc.flow.kind == FlowKind::Magnetic) sc.init.a = sc.flow.B * halfplane_J(sc.init.u);
  if (sc.flow.kind == FlowKind::Geodesic) sc.init.a = Vec::Zero(n);
  const Mat g = metric_at(M, sc.init.x);
  const double nu = sc.init.u.dot(g * sc.init.u) - 1.0, ua = sc.init.u.dot(g * sc.init.a);
  if (std::abs(nu) > tol) throw ScenarioError("initial u is not unit: g(u,u) - 1 = " + format_double(nu));
  if (std::abs(ua) > tol) throw ScenarioError("initial a is not orthogonal to u: g(u,a) = " + format_double(ua));
}

// ---------------------------------------------------------------------------
// trajectories

inline std::vector<std::string> trajectory_columns(int n, const std::vector<std::string>& inv) {
  std::vector<std::string> cols{"s"};
  for (const char* p : {"x", "u", "a"})
    for (int i = 0; i < n; ++i) cols.push_back(p + std::to_string(i));
  cols.push_back("norm_residual");
  cols.push_back("orth_residual");
  for (const auto& s : inv) cols.push_back("inv:" + s);
  return cols;
}

inline std::vector<double> sample_row(const Sample& s) {
  std::vector<double> r{s.s};
  for (const Vec* v : {&s.state.x, &s.state.u, &s.state.a}) r.insert(r.end(), v->data(), v->data() + v->size());
  r.push_back(s.norm_residual);
  r.push_back(s.orth_residual);
  r.insert(r.end(), s.invariants.begin(), s.invariants.end());
  return r;
}

inline json trajectory_meta(const Trajectory& tr) {
  return {{"kind", to_string(tr.kind)}, {"status", to_string(tr.status)}, {"steps", tr.steps}, {"rejected", tr.rejected},
          {"c", {tr.c.x(), tr.c.y(), tr.c.z()}}, {"B", tr.B}, {"message", tr.message}};
}

inline IntegrationStatus status_from(const std::string& s) {
  for (auto st : {IntegrationStatus::Completed, IntegrationStatus::ChartExit, IntegrationStatus::StepUnderflow, IntegrationStatus::MaxSteps})
    if (s == to_string(st)) return st;
  throw ScenarioError("unknown status '" + s + "'");
}

inline void apply_meta(Trajectory& tr, const json& m) {
  tr.kind = flow_kind_from(m.at("kind").get<std::string>());
  tr.status = status_from(m.at("status").get<std::string>());
  tr.steps = m.at("steps").get<long>();
  tr.rejected = m.at("rejected").get<long>();
  tr.c = detail::vec3_from(m.at("c"), "c");
  tr.B = m.at("B").get<double>();
  tr.message = m.value("message", "");
}

// first line: "# cgflow-trajectory v1 <meta json>", second line: column names
inline void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
  const int n = tr.samples.empty() ? 0 : static_cast<int>(tr.samples.front().state.x.size());
  os << "# cgflow-trajectory v" << kFormatVersion << " " << trajectory_meta(tr).dump() << "\n";
  const auto cols = trajectory_columns(n, tr.invariant_names);
  for (size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << "\n";
  for (const auto& s : tr.samples) {
    const auto r = sample_row(s);
    for (size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_double(r[i]);
    os << "\n";
  }
}

inline Trajectory read_trajectory_csv(std::istream& is) {
  std::string line;
  const std::string tag = "# cgflow-trajectory v";
  if (!std::getline(is, line) || line.rfind(tag, 0) != 0) throw ScenarioError("missing trajectory header comment");
  const size_t sp = line.find(' ', tag.size());
  if (sp == std::string::npos) throw ScenarioError("truncated trajectory header");
  if (std::stoi(line.substr(tag.size(), sp - tag.size())) != kFormatVersion) throw ScenarioError("unsupported trajectory version");
  Trajectory tr;
  try {
    apply_meta(tr, json::parse(line.substr(sp + 1)));
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("bad trajectory metadata: ") + e.what());
  }
  if (!std::getline(is, line)) throw ScenarioError("missing column header");
  std::vector<std::string> cols;
  {
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(c);
  }
  int n = 0;
  while (std::find(cols.begin(), cols.end(), "x" + std::to_string(n)) != cols.end()) ++n;
  for (const auto& c : cols)
    if (c.rfind("inv:", 0) == 0) tr.invariant_names.push_back(c.substr(4));
  if (cols != trajectory_columns(n, tr.invariant_names)) throw ScenarioError("unexpected column layout");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> r;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) r.push_back(parse_double(c));
    if (r.size() != cols.size()) throw ScenarioError("row has " + std::to_string(r.size()) + " fields, expected " + std::to_string(cols.size()));
    Sample s;
    s.s = r[0];
    s.state.x = Eigen::Map<Vec>(r.data() + 1, n);
    s.state.u = Eigen::Map<Vec>(r.data() + 1 + n, n);
    s.state.a = Eigen::Map<Vec>(r.data() + 1 + 2 * n, n);
    s.norm_residual = r[1 + 3 * n];
    s.orth_residual = r[2 + 3 * n];
    s.invariants.assign(r.begin() + 3 + 3 * n, r.end());
    tr.samples.push_back(std::move(s));
  }
  return tr;
}

inline json trajectory_to_json(const Trajectory& tr) {
  const int n = tr.samples.empty() ? 0 : static_cast<int>(tr.samples.front().state.x.size());
  json rows = json::array();
  for (const auto& s : tr.samples) rows.push_back(sample_row(s));
  return {{"format", "cgflow-trajectory"}, {"version", kFormatVersion}, {"meta", trajectory_meta(tr)},
          {"columns", trajectory_columns(n, tr.invariant_names)}, {"rows", rows}};
}

inline Trajectory trajectory_from_json(const json& j) {
  try {
    if (j.at("format") != "cgflow-trajectory" || j.at("version") != kFormatVersion) throw ScenarioError("not a v1 trajectory");
    Trajectory tr;
    apply_meta(tr, j.at("meta"));
    const auto cols = j.at("columns").get<std::vector<std::string>>();
    int n = 0;
    while (std::find(cols.begin(), cols.end(), "x" + std::to_string(n)) != cols.end()) ++n;
    for (const auto& c : cols)
      if (c.rfind("inv:", 0) == 0) tr.invariant_names.push_back(c.substr(4));
    for (const auto& row : j.at("rows")) {
      const auto r = row.get<std::vector<double>>();
      if (r.size() != cols.size()) throw ScenarioError("row length mismatch");
      Sample s;
      s.s = r[0];
      s.state.x = Eigen::Map<const Vec>(r.data() + 1, n);
      s.state.u = Eigen::Map<const Vec>(r.data() + 1 + n, n);
      s.state.a = Eigen::Map<const Vec>(r.data() + 1 + 2 * n, n);
      s.norm_residual = r[1 + 3 * n];
      s.orth_residual = r[2 + 3 * n];
      s.invariants.assign(r.begin() + 3 + 3 * n, r.end());
      tr.samples.push_back(std::move(s));
    }
    return tr;
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("malformed trajectory JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// reports

inline json invariant_report(const Trajectory& tr) {
  json rep;
  rep["format"] = "cgflow-report";
  rep["version"] = kFormatVersion;
  rep["flow"] = to_string(tr.kind);
  rep["status"] = to_string(tr.status);
  rep["samples"] = tr.samples.size();
  if (!tr.samples.empty()) rep["s_range"] = {tr.samples.front().s, tr.samples.back().s};
  double mn = 0.0, mo = 0.0;
  for (const auto& s : tr.samples) {
    mn = std::max(mn, std::abs(s.norm_residual));
    mo = std::max(mo, std::abs(s.orth_residual));
  }
  rep["max_norm_residual"] = mn;
  rep["max_orth_residual"] = mo;
  json inv = json::array();
  for (size_t i = 0; i < tr.invariant_names.size(); ++i) {
    const double v0 = tr.samples.empty() ? 0.0 : tr.samples.front().invariants[i];
    const double v1 = tr.samples.empty() ? 0.0 : tr.samples.back().invariants[i];
    inv.push_back({{"name", tr.invariant_names[i]}, {"initial", v0}, {"final", v1}, {"max_drift", tr.max_drift(i)}});
  }
  rep["invariants"] = inv;
  return rep;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw ScenarioError("cannot write '" + path + "'");
  out << content;
}

}  // namespace cgf::io
