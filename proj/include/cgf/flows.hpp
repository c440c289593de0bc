#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "cgf/geometry.hpp"
#include "cgf/integrator.hpp"

namespace cgf {

struct CGState {
  Vec x, u, a;
};

struct LorentzState {
  Vec x, u;
  Vec3 c = Vec3::Zero();
  double e() const { return c.norm(); }
};

enum class FlowKind { Conformal, Lorentz, Geodesic, Magnetic };

inline const char* to_string(FlowKind k) {
  switch (k) {
    case FlowKind::Conformal: return "conformal";
    case FlowKind::Lorentz: return "lorentz";
    case FlowKind::Geodesic: return "geodesic";
    case FlowKind::Magnetic: return "magnetic";
  }
  return "unknown";
}

inline double norm2(const Model& M, const Vec& x, const Vec& v) { return v.dot(metric_at(M, x) * v); }

// d/ds (x, u, a) for the third-order flow. Returns packed derivative.
inline Vec conformal_rhs(const Model& M, const CGState& st) {
  if (M.kind() == ModelKind::HalfPlane)
    throw UnsupportedError("conformal_rhs: the half-plane is handled as a magnetic flow");
  const int n = M.dim();
  auto [g, dg] = metric_jet(M, st.x);
  const Christoffel G = christoffel_from(g, dg);
  const double lam = M.schouten_coefficient();
  const double a2 = st.a.dot(g * st.a);
  // L = lam g: nabla_u a = -(|a|^2 + lam |u|^2) u + lam u
  const double uu = st.u.dot(g * st.u);
  const Vec nabla_a = -(a2 + lam * uu) * st.u + lam * st.u;
  Vec out(3 * n);
  out.segment(0, n) = st.u;
  out.segment(n, n) = st.a - contract(G, st.u, st.u);
  out.segment(2 * n, n) = nabla_a - contract(G, st.u, st.a);
  return out;
}

// a from the level-set constants: frame vector part c x u - u4 c, fourth component u.c
inline Vec acceleration_from_c_frame(const Vec& uf, const Vec3& c) {
  const Vec3 u3 = uf.head<3>();
  Vec af(4);
  af.head<3>() = c.cross(u3) - uf[3] * c;
  af[3] = u3.dot(c);
  return af;
}

inline Vec acceleration_from_c(const Model& M, const Vec& x, const Vec& u, const Vec3& c) {
  if (!M.hyperkahler()) throw UnsupportedError("acceleration_from_c: " + M.name() + " is not hyper-Kahler");
  const Mat E = M.coframe_at(x);
  return E.inverse() * acceleration_from_c_frame(E * u, c);
}

// c with a = -(c.Omega) u; exact when a is orthogonal to the unit vector u
inline Vec3 c_from_acceleration(const Model& M, const Vec& x, const Vec& u, const Vec& a) {
  if (!M.hyperkahler()) throw UnsupportedError("c_from_acceleration: " + M.name() + " is not hyper-Kahler");
  const Mat E = M.coframe_at(x);
  const Vec uf = E * u, af = E * a;
  Vec3 c;
  for (int i = 0; i < 3; ++i) c[i] = acceleration_from_c_frame(uf, Vec3::Unit(i)).dot(af) / uf.squaredNorm();
  return c;
}

// d/ds (x, u) for the reduced second-order flow
inline Vec lorentz_rhs(const Model& M, const LorentzState& st) {
  if (!M.hyperkahler()) throw UnsupportedError("lorentz_rhs: " + M.name() + " is not hyper-Kahler");
  const int n = M.dim();
  const Christoffel G = christoffel_at(M, st.x);
  Vec out(2 * n);
  out.head(n) = st.u;
  out.tail(n) = acceleration_from_c(M, st.x, st.u, st.c) - contract(G, st.u, st.u);
  return out;
}

inline Vec geodesic_rhs(const Model& M, const Vec& x, const Vec& u) {
  const int n = M.dim();
  Vec out(2 * n);
  out.head(n) = u;
  out.tail(n) = -contract(christoffel_at(M, x), u, u);
  return out;
}

// J with g(v, J w) = vol(v, w) in the half-plane, chart components
inline Vec halfplane_J(const Vec& w) {
  Vec j(2);
  j << w[1], -w[0];
  return j;
}

// nabla_u u = B J(u) on the hyperbolic half-plane
inline Vec magnetic_rhs(const Model& M, const Vec& x, const Vec& u, double B) {
  if (M.kind() != ModelKind::HalfPlane) throw UnsupportedError("magnetic_rhs: half-plane only");
  Vec out(4);
  out.head(2) = u;
  out.tail(2) = B * halfplane_J(u) - contract(christoffel_at(M, x), u, u);
  return out;
}

// ---------------------------------------------------------------------------
// trajectories

using Monitor = std::pair<std::string, std::function<double(const Model&, const CGState&)>>;

struct Sample {
  double s = 0.0;
  CGState state;
  std::vector<double> invariants;
  double norm_residual = 0.0;   // g(u,u) - 1
  double orth_residual = 0.0;   // g(u,a)
};

struct Trajectory {
  FlowKind kind = FlowKind::Conformal;
  std::vector<std::string> invariant_names;
  std::vector<Sample> samples;
  IntegrationStatus status = IntegrationStatus::Completed;
  std::string message;
  long steps = 0;
  long rejected = 0;
  Vec3 c = Vec3::Zero();  // Lorentz level set
  double B = 0.0;         // magnetic strength

  double max_drift(size_t i) const {
    double mx = 0.0;
    for (const auto& s : samples) mx = std::max(mx, std::abs(s.invariants[i] - samples.front().invariants[i]));
    return mx;
  }
  double mean(size_t i) const {
    double acc = 0.0;
    for (const auto& s : samples) acc += s.invariants[i];
    return samples.empty() ? 0.0 : acc / samples.size();
  }
};

struct FlowSpec {
  FlowKind kind = FlowKind::Conformal;
  Vec3 c = Vec3::Zero();  // Lorentz
  double B = 0.0;         // Magnetic
};

inline OdeRhs make_rhs(const Model& M, const FlowSpec& spec) {
  const int n = M.dim();
  switch (spec.kind) {
    case FlowKind::Conformal:
      return [&M, n](double, const Vec& y, Vec& dy) {
        M.check(y.head(n));
        dy = conformal_rhs(M, {y.segment(0, n), y.segment(n, n), y.segment(2 * n, n)});
      };
    case FlowKind::Lorentz:
      return [&M, n, c = spec.c](double, const Vec& y, Vec& dy) {
        M.check(y.head(n));
        dy = lorentz_rhs(M, {y.head(n), y.tail(n), c});
      };
    case FlowKind::Geodesic:
      return [&M, n](double, const Vec& y, Vec& dy) {
        M.check(y.head(n));
        dy = geodesic_rhs(M, y.head(n), y.tail(n));
      };
    case FlowKind::Magnetic:
      return [&M, B = spec.B](double, const Vec& y, Vec& dy) {
        M.check(y.head(2));
        dy = magnetic_rhs(M, y.head(2), y.tail(2), B);
      };
  }
  throw UnsupportedError("unknown flow kind");
}

inline CGState unpack_state(const Model& M, const FlowSpec& spec, const Vec& y) {
  const int n = M.dim();
  CGState st{y.head(n), y.segment(n, n), Vec::Zero(n)};
  switch (spec.kind) {
    case FlowKind::Conformal: st.a = y.segment(2 * n, n); break;
    case FlowKind::Lorentz: st.a = acceleration_from_c(M, st.x, st.u, spec.c); break;
    case FlowKind::Geodesic: break;
    case FlowKind::Magnetic: st.a = spec.B * halfplane_J(st.u); break;
  }
  return st;
}

inline Vec pack_state(const FlowSpec& spec, const CGState& st) {
  const int n = static_cast<int>(st.x.size());
  Vec y(spec.kind == FlowKind::Conformal ? 3 * n : 2 * n);
  y.head(n) = st.x;
  y.segment(n, n) = st.u;
  if (spec.kind == FlowKind::Conformal) y.segment(2 * n, n) = st.a;
  return y;
}

// rescale u to unit norm and remove the u-component of a
inline void project_constraints(const Model& M, const FlowSpec& spec, Vec& y) {
  const int n = M.dim();
  if (!M.valid(y.head(n))) return;
  const Mat g = metric_at(M, y.head(n));
  Vec u = y.segment(n, n);
  u /= std::sqrt(u.dot(g * u));
  y.segment(n, n) = u;
  if (spec.kind == FlowKind::Conformal) {
    Vec a = y.segment(2 * n, n);
    a -= a.dot(g * u) * u;
    y.segment(2 * n, n) = a;
  }
}

inline Trajectory integrate(const Model& M, const FlowSpec& spec, const CGState& init, double s0, double s1,
                            const IntegratorConfig& cfg, const std::vector<Monitor>& monitors = {}) {
  const int n = M.dim();
  M.check(init.x);
  Trajectory tr;
  tr.kind = spec.kind;
  tr.c = spec.c;
  tr.B = spec.B;
  for (const auto& m : monitors) tr.invariant_names.push_back(m.first);
  const OdeRhs f = make_rhs(M, spec);
  const OdeSolution sol = integrate_ode(
      f, pack_state(spec, init), s0, s1, cfg, [&M, n](const Vec& y) { return M.valid(y.head(n)); },
      [&M, &spec](Vec& y) { project_constraints(M, spec, y); });
  tr.status = sol.status;
  tr.message = sol.message;
  tr.steps = sol.steps;
  tr.rejected = sol.rejected;
  tr.samples.reserve(sol.s.size());
  for (size_t i = 0; i < sol.s.size(); ++i) {
    Sample smp;
    smp.s = sol.s[i];
    smp.state = unpack_state(M, spec, sol.y[i]);
    const Mat g = metric_at(M, smp.state.x);
    smp.norm_residual = smp.state.u.dot(g * smp.state.u) - 1.0;
    smp.orth_residual = smp.state.u.dot(g * smp.state.a);
    for (const auto& m : monitors) smp.invariants.push_back(m.second(M, smp.state));
    tr.samples.push_back(std::move(smp));
  }
  return tr;
}

inline Monitor accel_norm_monitor() {
  return {"a2", [](const Model& M, const CGState& st) { return norm2(M, st.x, st.a); }};
}

// ---------------------------------------------------------------------------
// closed forms

inline Vec flat_circle(const Vec& x0, const Vec& v0, const Vec& a0, double s) {
  const double k = a0.norm();
  if (k == 0.0) return x0 + s * v0;
  return x0 + v0 * (std::sin(k * s) / k) + a0 * ((1.0 - std::cos(k * s)) / (k * k));
}

enum class HalfPlaneRegime { OpenUnbounded, Horocircle, Closed };

inline const char* to_string(HalfPlaneRegime r) {
  switch (r) {
    case HalfPlaneRegime::OpenUnbounded: return "open_unbounded";
    case HalfPlaneRegime::Horocircle: return "horocircle";
    case HalfPlaneRegime::Closed: return "closed";
  }
  return "unknown";
}

struct HalfPlaneClass {
  HalfPlaneRegime regime;
  double radius = 0.0;  // 1/B for closed orbits
  double Q = 0.0;       // F(u, a) = B^2
};

inline HalfPlaneClass halfplane_classify(double B) {
  if (!(B > 0.0)) throw DomainError("halfplane_classify: B must be positive");
  HalfPlaneClass c{HalfPlaneRegime::Closed, 0.0, B * B};
  if (B < 1.0) c.regime = HalfPlaneRegime::OpenUnbounded;
  else if (B == 1.0) c.regime = HalfPlaneRegime::Horocircle;
  else c.radius = 1.0 / B;
  return c;
}

// Euclidean circle through sampled points (algebraic least squares): centre (xc, yc), radius
struct CircleFit {
  double xc = 0.0, yc = 0.0, radius = 0.0, rms = 0.0;
};

inline CircleFit fit_circle(const std::vector<Eigen::Vector2d>& pts) {
  const int N = static_cast<int>(pts.size());
  Mat A(N, 3);
  Vec b(N);
  for (int i = 0; i < N; ++i) {
    A(i, 0) = 2 * pts[i].x();
    A(i, 1) = 2 * pts[i].y();
    A(i, 2) = 1.0;
    b[i] = pts[i].squaredNorm();
  }
  const Vec sol = A.colPivHouseholderQr().solve(b);
  CircleFit c;
  c.xc = sol[0];
  c.yc = sol[1];
  c.radius = std::sqrt(sol[2] + c.xc * c.xc + c.yc * c.yc);
  double acc = 0.0;
  for (const auto& p : pts) {
    const double d = (p - Eigen::Vector2d(c.xc, c.yc)).norm() - c.radius;
    acc += d * d;
  }
  c.rms = std::sqrt(acc / N);
  return c;
}

// Initial data whose orbit is the Euclidean circle of centre (x0, 1) and radius 1/B:
// start at its leftmost point moving up, so a = B J(u) points at the centre.
inline CGState halfplane_initial(double B, double x0 = 0.0) {
  CGState st;
  st.x.resize(2);
  st.u.resize(2);
  st.x << x0 - 1.0 / B, 1.0;
  st.u << 0.0, 1.0;
  st.a = B * halfplane_J(st.u);
  return st;
}

}  // namespace cgf
