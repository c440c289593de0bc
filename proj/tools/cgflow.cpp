#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <thread>

#include "CLI11.hpp"
#include "cgf/cp2.hpp"
#include "cgf/eguchi_hanson.hpp"
#include "cgf/io.hpp"
#include "cgf/killing.hpp"
#include "cgf/sampling.hpp"
#include "cgf/taubnut.hpp"

namespace fs = std::filesystem;
using namespace cgf;
using io::json;

namespace {

enum Exit { kOk = 0, kInput = 1, kDrift = 2, kDomain = 3 };

struct Options {
  std::vector<std::string> scenarios;
  std::string out = "cgflow_out";
  std::optional<double> rel_tol, abs_tol, span;
  std::string format = "csv";
};

std::mutex g_io;

void emit(const json& j) {
  std::lock_guard<std::mutex> lk(g_io);
  std::cout << j.dump(2) << std::endl;
}

void fail(const std::string& msg) {
  std::lock_guard<std::mutex> lk(g_io);
  std::cerr << "cgflow: " << msg << std::endl;
}

// run f and map exceptions onto exit codes
template <class F>
int guarded(F&& f) {
  try {
    return f();
  } catch (const io::ScenarioError& e) {
    fail(e.what());
    return kInput;
  } catch (const UnsupportedError& e) {
    fail(e.what());
    return kInput;
  } catch (const DomainError& e) {
    fail(std::string("domain error: ") + e.what());
    return kDomain;
  } catch (const json::exception& e) {
    fail(std::string("malformed input: ") + e.what());
    return kInput;
  } catch (const std::exception& e) {
    fail(std::string("numerical failure: ") + e.what());
    return kDrift;
  }
}

int threads_cap() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("FLOWS_THREADS")) {
    try {
      n = std::stoi(env);
    } catch (...) {
      fail("ignoring FLOWS_THREADS='" + std::string(env) + "'");
    }
  }
  return std::max(1, n);
}

io::Scenario prepare(const std::string& path, const Options& o) {
  io::Scenario sc = io::load_scenario(path);
  if (sc.name.empty()) sc.name = fs::path(path).stem().string();
  if (o.rel_tol) sc.cfg.rel_tol = *o.rel_tol;
  if (o.abs_tol) sc.cfg.abs_tol = *o.abs_tol;
  if (o.span) sc.s1 = sc.s0 + *o.span;
  return sc;
}

fs::path out_dir(const Options& o, const io::Scenario& sc) {
  const fs::path d = fs::path(o.out) / sc.name;
  fs::create_directories(d);
  return d;
}

// Lorentz level set of the scenario: given for Lorentz flows, read off the acceleration otherwise
Vec3 level_set(const Model& M, const io::Scenario& sc) {
  if (sc.flow.kind == FlowKind::Lorentz) return sc.flow.c;
  return c_from_acceleration(M, sc.init.x, sc.init.u, sc.init.a);
}

std::vector<Monitor> build_monitors(const Model& M, const io::Scenario& sc) {
  std::vector<Monitor> mons;
  for (const auto& r : sc.reports) {
    if (r == "a2") {
      mons.push_back(accel_norm_monitor());
    } else if (r == "taub_nut_integrals") {
      const auto* T = dynamic_cast<const TaubNUT*>(&M);
      if (!T) throw io::ScenarioError("report taub_nut_integrals needs the taub_nut model");
      const Vec3 c = level_set(M, sc);
      if (std::hypot(c.x(), c.y()) > 1e-10) throw io::ScenarioError("taub_nut_integrals needs c = (0, 0, e)");
      const double e = c.z();
      for (const auto& I : taubnut_integral_set(T->m()))
        mons.push_back({I.name, [f = I.f, e](const Model& Mo, const CGState& s) { return f(phase_point(Mo, s.x, s.u, e)); }});
    } else if (r == "taub_nut_cky") {
      const auto* T = dynamic_cast<const TaubNUT*>(&M);
      if (!T) throw io::ScenarioError("report taub_nut_cky needs the taub_nut model");
      for (auto m : {cky_monitor(taubnut_cky_Y(*T)), cky_monitor(taubnut_cky_W(*T))}) {
        m.first = "cky_" + m.first;
        mons.push_back(m);
      }
    } else if (r == "cp2_integrals") {
      if (M.kind() != ModelKind::CP2) throw io::ScenarioError("report cp2_integrals needs the cp2 model");
      mons.push_back({"C_Y", [](const Model& Mo, const CGState& s) { return cp2_first_integrals(static_cast<const CP2&>(Mo), s).C_Y; }});
      mons.push_back({"C_K", [](const Model& Mo, const CGState& s) { return cp2_first_integrals(static_cast<const CP2&>(Mo), s).C_K; }});
    } else if (r == "eh_momenta") {
      if (M.kind() != ModelKind::EguchiHanson) throw io::ScenarioError("report eh_momenta needs the eguchi_hanson model");
      const Vec3 c = level_set(M, sc);
      for (int i = 0; i < 3; ++i)
        mons.push_back({"p" + std::to_string(i + 1), [c, i](const Model& Mo, const CGState& s) {
                          return right_invariant_momenta(static_cast<const EguchiHanson&>(Mo), s.x, s.u, c)[i];
                        }});
    } else {
      throw io::ScenarioError("unknown report '" + r + "'");
    }
  }
  return mons;
}

// flat circles: deviation from the closed form and closure after one period
json flat_extras(const Model& M, const io::Scenario& sc, const Trajectory& tr) {
  double dev = 0.0;
  for (const auto& s : tr.samples)
    dev = std::max(dev, (s.state.x - flat_circle(sc.init.x, sc.init.u, sc.init.a, s.s - sc.s0)).norm());
  json j{{"closed_form_deviation", dev}};
  const double k = sc.init.a.norm();
  if (k > 0) {
    IntegratorConfig cfg = sc.cfg;
    cfg.sample_ds = 0.0;
    const auto one = integrate(M, {FlowKind::Conformal}, sc.init, 0.0, 2 * kPi / k, cfg);
    j["period"] = 2 * kPi / k;
    j["closure_error"] = (one.samples.back().state.x - sc.init.x).norm();
  }
  return j;
}

// hyperbolic magnetic orbits: predicted regime and the Euclidean circle through the samples;
// a circle of geodesic curvature B centred at height 1 has Euclidean radius 1/B
json halfplane_extras(const io::Scenario& sc, const Trajectory& tr) {
  const auto cls = halfplane_classify(sc.flow.B);
  std::vector<Eigen::Vector2d> pts;
  double ymin = std::numeric_limits<double>::infinity();
  for (const auto& s : tr.samples) {
    pts.emplace_back(s.state.x[0], s.state.x[1]);
    ymin = std::min(ymin, s.state.x[1]);
  }
  const auto fit = fit_circle(pts);
  std::string numeric = "closed";
  if (fit.yc - fit.radius < -1e-6) numeric = "open_unbounded";
  else if (std::abs(fit.yc - fit.radius) <= 1e-6) numeric = "horocircle";
  return {{"regime", to_string(cls.regime)},
          {"predicted_radius", cls.radius},
          {"numeric_regime", numeric},
          {"curvature", fit.yc / fit.radius},
          {"fit", {{"xc", fit.xc}, {"yc", fit.yc}, {"radius", fit.radius}, {"rms", fit.rms}}},
          {"min_y", ymin}};
}

int run_integrate(const std::string& path, const Options& o, bool write_trajectory) {
  return guarded([&] {
    io::Scenario sc = prepare(path, o);
    const ModelPtr M = io::make_model(sc.model);
    io::complete_initial(*M, sc);
    const auto mons = build_monitors(*M, sc);
    const Trajectory tr = integrate(*M, sc.flow, sc.init, sc.s0, sc.s1, sc.cfg, mons);
    json rep = io::invariant_report(tr);
    rep["scenario"] = sc.name;
    rep["model"] = M->name();
    if (M->kind() == ModelKind::Flat4 && sc.flow.kind == FlowKind::Conformal) rep["flat_circle"] = flat_extras(*M, sc, tr);
    if (M->kind() == ModelKind::HalfPlane && sc.flow.kind == FlowKind::Magnetic) rep["half_plane"] = halfplane_extras(sc, tr);
    bool exceeded = tr.status == IntegrationStatus::StepUnderflow || tr.status == IntegrationStatus::MaxSteps;
    for (const auto& inv : rep["invariants"]) exceeded = exceeded || inv["max_drift"].get<double>() > sc.drift_tol;
    exceeded = exceeded || rep["max_norm_residual"].get<double>() > sc.drift_tol || rep["max_orth_residual"].get<double>() > sc.drift_tol;
    rep["drift_tol"] = sc.drift_tol;
    rep["drift_exceeded"] = exceeded;
    if (write_trajectory) {
      const fs::path d = out_dir(o, sc);
      if (o.format == "json") {
        io::write_file((d / "trajectory.json").string(), io::trajectory_to_json(tr).dump() + "\n");
      } else {
        std::ofstream f(d / "trajectory.csv");
        io::write_trajectory_csv(f, tr);
      }
      io::write_file((d / "report.json").string(), rep.dump(2) + "\n");
    }
    emit(rep);
    return exceeded ? kDrift : kOk;
  });
}

int run_batch(const Options& o, bool write_trajectory) {
  if (o.scenarios.empty()) {
    fail("no --scenario given");
    return kInput;
  }
  const int nt = std::min<int>(threads_cap(), static_cast<int>(o.scenarios.size()));
  std::vector<int> codes(o.scenarios.size(), kOk);
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < nt; ++t)
    pool.emplace_back([&] {
      for (size_t i; (i = next++) < o.scenarios.size();) codes[i] = run_integrate(o.scenarios[i], o, write_trajectory);
    });
  for (auto& t : pool) t.join();
  int worst = kOk;
  for (int c : codes)
    if (c == kInput || (c > worst && worst != kInput)) worst = c;
  return worst;
}

// ---------------------------------------------------------------------------
// compare

double wrapped(double d, double period) { return std::remainder(d, period); }

json compare_flat(const Model& M, const io::Scenario& sc) {
  if (M.kind() != ModelKind::Flat4 || sc.flow.kind != FlowKind::Conformal)
    throw io::ScenarioError("compare flat needs a conformal flat4 scenario");
  const auto tr = integrate(M, sc.flow, sc.init, sc.s0, sc.s1, sc.cfg);
  double dev = 0.0;
  for (const auto& s : tr.samples)
    dev = std::max(dev, (s.state.x - flat_circle(sc.init.x, sc.init.u, sc.init.a, s.s - sc.s0)).norm());
  return {{"samples", tr.samples.size()}, {"max_deviation", dev}};
}

json compare_cp2(const Model& M, const io::Scenario& sc) {
  if (M.kind() != ModelKind::CP2) throw io::ScenarioError("compare cp2_const_r needs the cp2 model");
  const json& p = sc.compare;
  const auto k = make_cp2_constants(p.value("r", 2.0), p.value("gamma", 0.3), p.value("c1", 0.0), p.value("c2", 0.0),
                                    p.value("c3", 2.0), p.value("c4", 0.0));
  const CP2ConstantRCircle C(k, p.value("theta0", 1.0), p.value("psi0", 0.0));
  const CP2& cp = static_cast<const CP2&>(M);
  IntegratorConfig cfg = sc.cfg;
  if (!(cfg.sample_ds > 0)) cfg.sample_ds = 0.25;
  const double span = sc.s1 - sc.s0;
  const auto tr = integrate(M, {FlowKind::Conformal}, CP2ConstantRCircle::chart_state(cp, C.at(0.0)), 0.0, span, cfg);
  double dev = 0.0, chart = 0.0;
  for (const auto& s : tr.samples) {
    const auto q = C.at(s.s);
    Vec d = s.state.x - q.x;
    d[2] = wrapped(d[2], 2 * kPi);
    d[3] = wrapped(d[3], 2 * kPi);
    dev = std::max(dev, d.cwiseAbs().maxCoeff());
    chart = std::max(chart, cp2_chart_residual(cp, C, s.s));
  }
  return {{"samples", tr.samples.size()}, {"max_deviation", dev}, {"max_chart_residual", chart},
          {"constants", {{"r", k.r}, {"gamma", k.gamma}, {"B", k.B}, {"C_Y", k.C_Y}, {"C_K", k.C_K}, {"killing", k.killing}}}};
}

json compare_eh(const Model& M, const io::Scenario& sc) {
  if (M.kind() != ModelKind::EguchiHanson || sc.flow.kind != FlowKind::Lorentz)
    throw io::ScenarioError("compare eh_orbit needs a lorentz eguchi_hanson scenario");
  const auto& E = static_cast<const EguchiHanson&>(M);
  const Vec uf = M.coframe_at(sc.init.x) * sc.init.u;
  if (std::abs(uf[3]) > 1e-10) throw io::ScenarioError("compare eh_orbit needs u tangent to the SO(3) orbit (u4 = 0)");
  const Vec3 y0(uf[0], uf[1], uf[2]), c = sc.flow.c;
  const double r = sc.init.x[0], R = eh_R(r, E.alpha());
  const auto K = eh_orbit_constants(E.alpha(), r, y0, c);
  if (K.C2() == 0.0) throw io::ScenarioError("compare eh_orbit needs c1^2 + c2^2 > 0");
  IntegratorConfig cfg = sc.cfg;
  if (!(cfg.sample_ds > 0)) cfg.sample_ds = 0.25;
  const auto sol = integrate_ode([R, c](double, const Vec& y, Vec& dy) { dy = orbit_ode_rhs(Vec3(y[0], y[1], y[2]), R, c); },
                                 Vec(y0), sc.s0, sc.s1, cfg, {}, {});
  const EHOrbitQuadrature Q(K, orbit_h(y0, R, c), R * orbit_ode_rhs(y0, R, c)[2]);
  double hdev = 0.0, ydev = 0.0;
  int skipped = 0;
  for (size_t i = 0; i < sol.s.size(); ++i) {
    const Vec3 y(sol.y[i][0], sol.y[i][1], sol.y[i][2]);
    const auto [h, hd] = Q.at(sol.s[i] - sc.s0);
    hdev = std::max(hdev, std::abs(h - orbit_h(y, R, c)));
    if (std::abs(h) < 1e-3) {
      ++skipped;
      continue;
    }
    ydev = std::max(ydev, (orbit_from_h(K, h, hd) - y).norm());
  }
  return {{"samples", sol.s.size()}, {"max_deviation", std::max(hdev, ydev)}, {"max_h_deviation", hdev},
          {"max_u_deviation", ydev}, {"skipped_near_h0", skipped}, {"period", Q.period()},
          {"h_range", {Q.h_min(), Q.h_max()}}};
}

json compare_tn(const Model& M, const io::Scenario& sc) {
  const auto* T = dynamic_cast<const TaubNUT*>(&M);
  if (!T || sc.flow.kind != FlowKind::Lorentz) throw io::ScenarioError("compare tn_quadrature needs a lorentz taub_nut scenario");
  if (std::hypot(sc.flow.c.x(), sc.flow.c.y()) > 1e-12) throw io::ScenarioError("compare tn_quadrature needs c = (0, 0, e)");
  IntegratorConfig cfg = sc.cfg;
  if (!(cfg.sample_ds > 0)) cfg.sample_ds = 0.01;
  const auto tr = integrate(M, sc.flow, sc.init, sc.s0, sc.s1, cfg);
  const auto ex = extract_constants(*T, tr, sc.flow.c.z());
  const double hj = hj_residual(tr, ex.consts).max();
  double mismatch = 0.0;
  int segments = 0;
  for (auto [i0, i1] : monotone_segments(tr)) {
    if (i1 - i0 < 20) continue;
    const auto p0 = to_parabolic(tr.samples[i0 + 2].state.x), p1 = to_parabolic(tr.samples[i1 - 2].state.x);
    mismatch = std::max(mismatch, unparam_quadrature(p0.eta, p1.eta, p0.xi, p1.xi, ex.consts).mismatch());
    ++segments;
  }
  return {{"samples", tr.samples.size()}, {"hj_residual", hj}, {"quadrature_mismatch", mismatch}, {"segments", segments},
          {"max_deviation", std::max(hj, mismatch)}, {"Q_eta", ex.consts.Q}, {"Q_xi", ex.Q_xi}, {"E", ex.consts.E},
          {"J", ex.consts.J}, {"axis_warning", ex.axis_warning}};
}

int run_compare(const Options& o, const std::string& kind) {
  return guarded([&] {
    if (o.scenarios.size() != 1) throw io::ScenarioError("compare takes exactly one --scenario");
    io::Scenario sc = prepare(o.scenarios.front(), o);
    const ModelPtr M = io::make_model(sc.model);
    if (kind != "cp2_const_r") io::complete_initial(*M, sc);
    json rep;
    if (kind == "flat") rep = compare_flat(*M, sc);
    else if (kind == "cp2_const_r") rep = compare_cp2(*M, sc);
    else if (kind == "eh_orbit") rep = compare_eh(*M, sc);
    else if (kind == "tn_quadrature") rep = compare_tn(*M, sc);
    else throw io::ScenarioError("unknown closed form '" + kind + "'");
    const double tol = sc.compare.value("tol", 1e-6);
    rep["closed_form"] = kind;
    rep["scenario"] = sc.name;
    rep["tol"] = tol;
    rep["within_tol"] = rep["max_deviation"].get<double>() < tol;
    io::write_file((out_dir(o, sc) / ("compare_" + kind + ".json")).string(), rep.dump(2) + "\n");
    emit(rep);
    return rep["within_tol"].get<bool>() ? kOk : kDrift;
  });
}

int run_invariants(const Options& o, const std::string& trajectory) {
  if (trajectory.empty()) return run_batch(o, false);
  return guarded([&] {
    Trajectory tr;
    if (fs::path(trajectory).extension() == ".json") {
      std::ifstream f(trajectory);
      if (!f) throw io::ScenarioError("cannot open '" + trajectory + "'");
      tr = io::trajectory_from_json(json::parse(f));
    } else {
      std::ifstream f(trajectory);
      if (!f) throw io::ScenarioError("cannot open '" + trajectory + "'");
      tr = io::read_trajectory_csv(f);
    }
    emit(io::invariant_report(tr));
    return kOk;
  });
}

// ---------------------------------------------------------------------------
// classification and Killing checks

int run_classify(double tau, double A) {
  return guarded([&] {
    const auto c = roots_from_tau_a(tau, A);
    json rep{{"tau", c.tau}, {"A", c.A}, {"roots", c.roots}, {"triple", c.triple}, {"r2", c.r2}, {"gamma2", c.gamma2}, {"gammas", c.gammas}};
    json back = json::array();
    for (double g : c.gammas) {
      const auto [A1, CK] = cp2_forward(c.r2, g);
      back.push_back({{"gamma", g}, {"A", A1}, {"tau", CK / std::sqrt(A1)}});
    }
    rep["round_trip"] = back;
    emit(rep);
    return kOk;
  });
}

io::ModelSpec model_spec(const std::string& name, const std::vector<std::string>& params) {
  io::ModelSpec m{name, {}, {}};
  for (const auto& kv : params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw io::ScenarioError("--param expects key=value, got '" + kv + "'");
    m.params[kv.substr(0, eq)] = io::parse_double(kv.substr(eq + 1));
  }
  return m;
}

KillingField resolve_field(const Model& M, const std::string& name) {
  for (const auto& K : M.killing_fields())
    if (K.name == name) return K;
  const auto coords = M.coord_names();
  for (int i = 0; i < M.dim(); ++i)
    if (name == "d" + coords[i]) return {name, [i, n = M.dim()](const Vec&) { Vec k = Vec::Zero(n); k[i] = 1.0; return k; }};
  throw io::ScenarioError("unknown vector field '" + name + "' on " + M.name());
}

int run_killing(const std::string& model, const std::vector<std::string>& params, std::vector<std::string> fields,
                int npts, unsigned seed) {
  return guarded([&] {
    const ModelPtr M = io::make_model(model_spec(model, params));
    if (fields.empty())
      for (const auto& K : M->killing_fields()) fields.push_back(K.name);
    std::mt19937 rng(seed);
    std::vector<Vec> pts;
    for (int i = 0; i < npts; ++i) pts.push_back(sample_point(*M, rng));
    json out = json::array();
    for (const auto& name : fields) {
      const KillingField K = resolve_field(*M, name);
      double mn = std::numeric_limits<double>::infinity(), mx = 0.0, sum = 0.0;
      int used = 0, null = 0;
      for (const auto& x : pts) {
        try {
          const double c = killing_cg_criterion(*M, K, x);
          mn = std::min(mn, c);
          mx = std::max(mx, c);
          sum += c;
          ++used;
        } catch (const NullKillingError&) {
          ++null;
        }
      }
      json j{{"field", name}, {"killing_residual", killing_residual(*M, K, pts)},
             {"criterion", {{"min", used ? mn : 0.0}, {"max", mx}, {"mean", used ? sum / used : 0.0}, {"points", used}, {"null_points", null}}}};
      if (M->hyperkahler()) j["triholomorphic_residual"] = triholomorphic_residual(*M, K, pts);
      out.push_back(j);
    }
    emit({{"model", M->name()}, {"seed", seed}, {"fields", out}});
    return kOk;
  });
}

int run_gh(const std::string& model, const std::vector<std::string>& params, int npts, unsigned seed, double rho_min,
           double rho_max, double zmax) {
  return guarded([&] {
    const auto spec = model_spec(model, params);
    GibbonsHawking G = [&] {
      if (model == "flat") return GibbonsHawking(1.0, {});
      if (model == "taub_nut") return GibbonsHawking::taub_nut(io::param(spec, "m", 1.0));
      if (model == "eguchi_hanson") return GibbonsHawking::eguchi_hanson(io::param(spec, "alpha", 1.0));
      throw io::ScenarioError("gh-check models: flat, taub_nut, eguchi_hanson");
    }();
    if (!(rho_min > 0 && rho_max > rho_min && zmax > 0)) throw io::ScenarioError("bad sample box");
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<Vec3> p3;
    std::vector<Vec> p4;
    for (int i = 0; i < npts; ++i) {
      const double rho = rho_min + (rho_max - rho_min) * U(rng), ph = 2 * kPi * U(rng);
      const Vec3 p(rho * std::cos(ph), rho * std::sin(ph), zmax * (2 * U(rng) - 1));
      p3.push_back(p);
      Vec x(4);
      x << p, 3 * U(rng);
      p4.push_back(x);
    }
    const auto mono = gh_check(G, p3);
    const auto mm = moment_map_residual(G, p4);
    const KillingField tau = G.killing_fields()[0];
    double sd = 0.0;
    for (const auto& x : p4) sd = std::max(sd, self_dual_part(G, tau, x));
    for (const auto& w : mono.warnings) fail("warning: " + w);
    emit({{"model", model},
          {"seed", seed},
          {"monopole", {{"residual", mono.residual}, {"checked", mono.checked}, {"skipped", mono.warnings.size()}}},
          {"moment_map", {{"residual", mm.residual}, {"scale", mm.scale}, {"points", mm.points}}},
          {"dtau_self_dual_part", sd},
          {"dtau_triholomorphic_residual", triholomorphic_residual(G, tau, p4)}});
    return kOk;
  });
}

void add_common(CLI::App* sub, Options& o, bool many) {
  if (many)
    sub->add_option("--scenario", o.scenarios, "scenario JSON file(s)")->required()->check(CLI::ExistingFile);
  else
    sub->add_option("--scenario", o.scenarios, "scenario JSON file")->required()->expected(1)->check(CLI::ExistingFile);
  sub->add_option("--out", o.out, "output directory");
  sub->add_option("--rel-tol", o.rel_tol, "relative tolerance");
  sub->add_option("--abs-tol", o.abs_tol, "absolute tolerance");
  sub->add_option("--span", o.span, "arclength span (overrides the scenario)");
  sub->add_option("--format", o.format, "trajectory format")->check(CLI::IsMember({"csv", "json"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cgflow: conformal geodesic flows on gravitational instantons"};
  app.require_subcommand(1);
  Options o;

  auto* integ = app.add_subcommand("integrate", "integrate scenario(s); writes trajectory and report");
  add_common(integ, o, true);

  std::string closed;
  auto* cmp = app.add_subcommand("compare", "compare a numerical trajectory with a closed form");
  add_common(cmp, o, false);
  cmp->add_option("--closed-form", closed, "flat | cp2_const_r | eh_orbit | tn_quadrature")
      ->required()
      ->check(CLI::IsMember({"flat", "cp2_const_r", "eh_orbit", "tn_quadrature"}));

  std::string trajectory;
  auto* inv = app.add_subcommand("invariants", "invariant report for scenario(s) or an exported trajectory");
  inv->add_option("--scenario", o.scenarios, "scenario JSON file(s)")->check(CLI::ExistingFile);
  inv->add_option("--trajectory", trajectory, "exported trajectory (.csv or .json)")->check(CLI::ExistingFile);
  inv->add_option("--rel-tol", o.rel_tol, "relative tolerance");
  inv->add_option("--abs-tol", o.abs_tol, "absolute tolerance");
  inv->add_option("--span", o.span, "arclength span");

  double tau = 0.0, A = 0.0;
  auto* cls = app.add_subcommand("cp2-classify", "constant-r CP2 circle from (tau, |a|^2)");
  cls->add_option("--tau", tau, "complex torsion, |tau| < 1")->required();
  cls->add_option("--A", A, "|a|^2 > 0")->required();

  std::string model;
  std::vector<std::string> params, fields;
  int npts = 50;
  unsigned seed = 1;
  auto* kc = app.add_subcommand("killing-check", "Killing residuals and the conformal-geodesic criterion");
  kc->add_option("--model", model, "model name")->required();
  kc->add_option("--param", params, "model parameter key=value");
  kc->add_option("--field", fields, "vector field name (declared Killing field or d<coordinate>)");
  kc->add_option("--points", npts, "number of random points");
  kc->add_option("--seed", seed, "random seed");

  double rho_min = 0.3, rho_max = 2.0, zmax = 2.0;
  auto* gh = app.add_subcommand("gh-check", "monopole equation and moment maps of a Gibbons-Hawking metric");
  gh->add_option("--model", model, "flat | taub_nut | eguchi_hanson")->required();
  gh->add_option("--param", params, "model parameter key=value (m, alpha)");
  gh->add_option("--points", npts, "number of random points");
  gh->add_option("--seed", seed, "random seed");
  gh->add_option("--rho-min", rho_min, "inner radius of the sample shell around the axis");
  gh->add_option("--rho-max", rho_max, "outer radius of the sample shell");
  gh->add_option("--z-max", zmax, "half height of the sample shell");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInput;
  }

  if (integ->parsed()) return run_batch(o, true);
  if (cmp->parsed()) return run_compare(o, closed);
  if (inv->parsed()) {
    if (o.scenarios.empty() == trajectory.empty()) {
      fail("invariants needs exactly one of --scenario or --trajectory");
      return kInput;
    }
    return run_invariants(o, trajectory);
  }
  if (cls->parsed()) return run_classify(tau, A);
  if (kc->parsed()) return run_killing(model, params, fields, npts, seed);
  if (gh->parsed()) return run_gh(model, params, npts, seed, rho_min, rho_max, zmax);
  return kInput;
}
