#pragma once

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "cgf/flows.hpp"
#include "cgf/geometry.hpp"
#include "cgf/taubnut.hpp"

namespace cgf {

inline double eh_f(double r, double alpha) {
  const double k = alpha / r;
  return std::sqrt(1.0 - k * k * k * k);
}

// coefficient of u2 u3 in the frame system
inline double eh_R(double r, double alpha) {
  const double k = alpha / r;
  return 2.0 * k * k * k * k / (r * eh_f(r, alpha));
}

// ---------------------------------------------------------------------------
// frame Lorentz system; state (r, theta, phi, psi, u1, u2, u3, u4)

inline Vec eh_frame_rhs(double alpha, const Vec& y, const Vec3& c) {
  const double r = y[0], th = y[1], ps = y[3];
  if (!(r > alpha)) throw DomainError("eh_frame_rhs: r must exceed alpha");
  const double st = std::sin(th);
  if (std::abs(st) < kThetaEps) throw DomainError("eh_frame_rhs: theta at a pole");
  const double k4 = std::pow(alpha / r, 4), f = std::sqrt(1 - k4), R = 2 * k4 / (r * f);
  const double u1 = y[4], u2 = y[5], u3 = y[6], u4 = y[7];
  Vec d(8);
  d[0] = f * u4;
  d[1] = 2.0 / r * (std::cos(ps) * u1 - std::sin(ps) * u2);
  d[2] = 2.0 / (r * st) * (std::sin(ps) * u1 + std::cos(ps) * u2);
  d[3] = 2.0 * u3 / (r * f) - std::cos(th) * d[2];
  d[4] = R * u2 * u3 - f / r * u1 * u4 + c[1] * u3 - c[2] * u2 - c[0] * u4;
  d[5] = -R * u1 * u3 - f / r * u2 * u4 + c[2] * u1 - c[0] * u3 - c[1] * u4;
  d[6] = -(1 + k4) / (r * f) * u3 * u4 + c[0] * u2 - c[1] * u1 - c[2] * u4;
  d[7] = f / r * (1 - u4 * u4) + R * u3 * u3 + c[0] * u1 + c[1] * u2 + c[2] * u3;
  return d;
}

inline Vec eh_frame_state(const EguchiHanson& M, const Vec& x, const Vec& u) {
  Vec y(8);
  y.head(4) = x;
  y.tail(4) = M.coframe_at(x) * u;
  return y;
}

inline std::pair<Vec, Vec> eh_chart_state(const EguchiHanson& M, const Vec& y) {
  const Vec x = y.head(4);
  return {x, frame_at(M, x) * y.tail(4)};
}

// Phi with d Phi = sum c^i Omega^i, chart components
inline Vec eh_potential(const EguchiHanson& M, const Vec& x, const Vec3& c) {
  const Mat E = M.coframe_at(x);
  const double r = x[0], f = eh_f(r, M.alpha());
  return (-0.5 * (c[0] * r * f * E.row(0) + c[1] * r * f * E.row(1) + c[2] * r / f * E.row(2))).transpose();
}

// Sign of Phi in the conserved momenta. The reduced flow uses a = -(c.Omega) u and d Phi = c.Omega,
// so the conserved combination is R.(u - Phi).
inline constexpr double kEHKappa = -1.0;

// p_i = R_i^a (u_a + kappa Phi_a) for the right-invariant fields R1, R2, R3
inline Vec3 right_invariant_momenta(const EguchiHanson& M, const Vec& x, const Vec& u, const Vec3& c,
                                    double kappa = kEHKappa) {
  const Vec w = metric_at(M, x) * u + kappa * eh_potential(M, x, c);
  const auto R = su2_right_fields();
  return {R[0].at(x).dot(w), R[1].at(x).dot(w), R[2].at(x).dot(w)};
}

// frame components (u1, u2, u3) from the momenta
inline Vec3 eh_velocity_from_momenta(double alpha, const Vec& x, const Vec3& p, const Vec3& c, double kappa = kEHKappa) {
  const double r = x[0], th = x[1], ph = x[2], ps = x[3], f = eh_f(r, alpha);
  const double st = std::sin(th), ct = std::cos(th), sf = std::sin(ph), cf = std::cos(ph), sp = std::sin(ps),
               cp = std::cos(ps);
  Vec3 u;
  u[0] = 0.5 * kappa * c[0] * r * f +
         2.0 / r * (p[0] * (-sf * cp - ct * cf * sp) + p[1] * (cf * cp - ct * sf * sp) + p[2] * st * sp);
  u[1] = 0.5 * kappa * c[1] * r * f +
         2.0 / r * (p[0] * (sf * sp - ct * cf * cp) + p[1] * (-cf * sp - ct * sf * cp) + p[2] * st * cp);
  u[2] = 0.5 * kappa * c[2] * r / f + 2.0 / (r * f) * (p[0] * cf * st + p[1] * sf * st + p[2] * ct);
  return u;
}

// (phi', theta', psi') on an orbit of constant r
inline Vec3 angular_rhs(double alpha, double r, const Vec3& ang, const Vec3& p, const Vec3& c, double kappa = kEHKappa) {
  const double ph = ang[0], th = ang[1], ps = ang[2];
  const double st = std::sin(th);
  if (std::abs(st) < kThetaEps) throw DomainError("angular_rhs: theta at a pole");
  const double ct = std::cos(th), f = eh_f(r, alpha), r2 = r * r;
  const double S = p[0] * std::cos(ph) + p[1] * std::sin(ph);
  const double cs = c[0] * std::sin(ps) + c[1] * std::cos(ps);
  Vec3 d;
  d[0] = 4.0 / r2 * (p[2] - ct / st * S) + kappa * f * cs / st;
  d[1] = 4.0 / r2 * (p[1] * std::cos(ph) - p[0] * std::sin(ph)) + kappa * f * (c[0] * std::cos(ps) - c[1] * std::sin(ps));
  d[2] = kappa * (c[2] / (f * f) - f * ct / st * cs) + 4.0 / (r2 * f * f) * (st * S + p[2] * ct) -
         4.0 / r2 * (p[2] * ct - ct * ct / st * S);
  return d;
}

// ---------------------------------------------------------------------------
// orbits of constant r: (alpha, beta, gamma) = (u1, u2, u3)

inline Vec3 orbit_ode_rhs(const Vec3& y, double R, const Vec3& c) {
  return {R * y[1] * y[2] + c[1] * y[2] - c[2] * y[1], -R * y[0] * y[2] + c[2] * y[0] - c[0] * y[2],
          c[0] * y[1] - c[1] * y[0]};
}

// first three derivatives along the quadratic vector field
inline std::array<Vec3, 3> orbit_derivatives(const Vec3& y, double R, const Vec3& c) {
  Eigen::Matrix3d D;
  D << 0, R * y[2] - c[2], R * y[1] + c[1],
      -R * y[2] + c[2], 0, -R * y[0] - c[0],
      -c[1], c[0], 0;
  auto D2 = [R](const Vec3& v, const Vec3& w) {
    return Vec3(R * (v[1] * w[2] + v[2] * w[1]), -R * (v[0] * w[2] + v[2] * w[0]), 0.0);
  };
  const Vec3 y1 = orbit_ode_rhs(y, R, c);
  const Vec3 y2 = D * y1;
  const Vec3 y3 = D * y2 + D2(y1, y1);
  return {y1, y2, y3};
}

struct EHOrbitConstants {
  Vec3 c = Vec3::Zero();
  double r = 0.0, R = 0.0;
  double m0 = 0.0, m1 = 0.0, m2 = 0.0, m3 = 0.0;
  Vec3 p = Vec3::Zero();
  double C2() const { return c[0] * c[0] + c[1] * c[1]; }
};

inline double orbit_h(const Vec3& y, double R, const Vec3& c) { return R * y[2] - c[2]; }

inline EHOrbitConstants eh_orbit_constants(double alpha, double r, const Vec3& y, const Vec3& c) {
  EHOrbitConstants k;
  k.c = c;
  k.r = r;
  k.R = eh_R(r, alpha);
  const double C2 = k.C2();
  const double h = orbit_h(y, k.R, c);
  const double hd = k.R * (c[0] * y[1] - c[1] * y[0]);
  k.m0 = c[2] * C2;
  k.m1 = 0.5 * (h * h - 2 * C2 - 2 * k.R * (c[0] * y[0] + c[1] * y[1]));
  k.m2 = (4 * hd * hd + std::pow(h, 4) - 4 * k.m1 * h * h + 8 * k.m0 * h) / 4;
  return k;
}

inline double h_radicand(double h, double m0, double m1, double m2) {
  return -std::pow(h, 4) + 4 * m1 * h * h - 8 * m0 * h + 4 * m2;
}

// h h''' - (h'' - h^3 + m0) h'
inline double h_ode_residual(double h, double h1, double h2, double h3, double m0) {
  return h * h3 - (h2 - h * h * h + m0) * h1;
}

// 2 int dh / sqrt(-h^4 + 4 m1 h^2 - 8 m0 h + 4 m2), signed
inline double h_quadrature(double h0, double h1, double m0, double m1, double m2, double tol = 0.0) {
  return 2.0 * inverse_sqrt_quadrature([&](double h) { return h_radicand(h, m0, m1, m2); }, h0, h1, "h_quadrature", tol);
}

// h(s) by inverting the quadrature between the turning points that bracket h(0)
class EHOrbitQuadrature {
 public:
  EHOrbitQuadrature(const EHOrbitConstants& k, double h0, double hdot0) : k_(k) {
    auto P = [&](double h) { return h_radicand(h, k.m0, k.m1, k.m2); };
    if (P(h0) < -1e-12) throw DomainError("EHOrbitQuadrature: h(0) outside the allowed region");
    lo_ = turning(h0, -1.0, P);
    hi_ = turning(h0, 1.0, P);
    // rounding noise of the radicand next to the turning points
    tol_ = 1e-12 * std::max({1.0, std::abs(k.m0), std::abs(k.m1), std::abs(k.m2)});
    half_ = h_quadrature(lo_, hi_, k.m0, k.m1, k.m2, tol_);
    const double t0 = h_quadrature(lo_, std::clamp(h0, lo_, hi_), k.m0, k.m1, k.m2, tol_);
    phase0_ = hdot0 >= 0 ? t0 : 2 * half_ - t0;
    k_.m3 = -phase0_;
  }
  const EHOrbitConstants& constants() const { return k_; }
  double period() const { return 2 * half_; }
  double h_min() const { return lo_; }
  double h_max() const { return hi_; }

  // h and its first derivative at arclength s
  std::pair<double, double> at(double s) const {
    double ph = std::fmod(phase0_ + s, 2 * half_);
    if (ph < 0) ph += 2 * half_;
    const bool rising = ph <= half_;
    const double target = rising ? ph : 2 * half_ - ph;
    double a = lo_, b = hi_, h = lo_ + (hi_ - lo_) * target / half_;
    for (int it = 0; it < 200; ++it) {
      const double g = h_quadrature(lo_, h, k_.m0, k_.m1, k_.m2, tol_) - target;
      if (g > 0) b = h; else a = h;
      const double P = h_radicand(h, k_.m0, k_.m1, k_.m2);
      double hn = P > 0 ? h - g * std::sqrt(P) / 2 : 0.5 * (a + b);
      if (!(hn > a && hn < b)) hn = 0.5 * (a + b);
      if (std::abs(hn - h) < 1e-15 * std::max(1.0, std::abs(h)) || b - a < 1e-15) {
        h = hn;
        break;
      }
      h = hn;
    }
    const double hd = std::sqrt(std::max(0.0, h_radicand(h, k_.m0, k_.m1, k_.m2))) / 2;
    return {h, rising ? hd : -hd};
  }

 private:
  template <class F>
  double turning(double h0, double dir, const F& P) {
    double step = 0.01 * std::max(1.0, std::abs(h0));
    double a = h0, b = h0 + dir * step;
    while (P(b) > 0) {
      a = b;
      step *= 2;
      b = h0 + dir * step;
      if (step > 1e8) throw NumericError("EHOrbitQuadrature: no turning point");
    }
    for (int i = 0; i < 200 && std::abs(b - a) > 1e-15 * std::max(1.0, std::abs(a)); ++i) {
      const double mid = 0.5 * (a + b);
      if (P(mid) > 0) a = mid; else b = mid;
    }
    return a;
  }

  EHOrbitConstants k_;
  double lo_ = 0, hi_ = 0, half_ = 0, phase0_ = 0, tol_ = 0;
};

// (alpha, beta, gamma) from h and h' through the quadrature
inline Vec3 orbit_from_h(const EHOrbitConstants& k, double h, double hd) {
  const double C2 = k.C2();
  if (C2 == 0.0) throw DomainError("orbit_from_h: c1 = c2 = 0 is degenerate; integrate the orbit system directly");
  const double R = k.R, c1 = k.c[0], c2 = k.c[1];
  const double g = (h + k.c[2]) / R, gd = hd / R;
  const double hdd = (-4 * h * h * h + 8 * k.m1 * h - 8 * k.m0) / 8;
  const double gdd = hdd / R;
  return {-c1 * gdd / (C2 * h) - c2 * gd / C2 - c1 * g / h, -c2 * gdd / (C2 * h) + c1 * gd / C2 - c2 * g / h, g};
}

struct StarStarResidual {
  double unit = 0.0, linear = 0.0;
};

// the unit-norm and linear relation on an orbit, with h = R gamma - c3
inline StarStarResidual starstar_residual(const Vec3& u, const EHOrbitConstants& k) {
  const double C2 = k.C2();
  if (C2 == 0.0) throw DomainError("starstar_residual: c1 = c2 = 0 leaves h undefined");
  const double h = k.R * u[2] - k.c[2];
  return {std::abs(u.squaredNorm() - 1.0),
          std::abs(k.c[0] * u[0] + k.c[1] * u[1] - (h * h - 2 * C2 - 2 * k.m1) / (2 * k.R))};
}

// the relations as printed, for comparison
inline StarStarResidual starstar_residual_printed(const Vec3& u, double alpha, const EHOrbitConstants& k) {
  const double C2 = k.C2();
  if (C2 == 0.0) throw DomainError("starstar_residual_printed: c1 = c2 = 0 leaves h undefined");
  const double r = k.r, f = eh_f(r, alpha);
  const double h = (1 - f * f) / (f * r) * u[2] + k.m0 / C2;
  return {std::abs(u.squaredNorm() - 1.0),
          std::abs(k.c[0] * u[0] + k.c[1] * u[1] - r * f / (2 * (1 - f * f)) * (h * h - 2 * C2 - 2 * k.m1))};
}

// residual of the four frame equations for a curve on r = const (u4 = 0): (tangential max, radial)
inline std::pair<double, double> eh_orbit_frame_residual(double alpha, double r, const Vec3& u, const Vec3& du,
                                                         const Vec3& c) {
  Vec y(8);
  y << r, 1.0, 0.0, 0.0, u[0], u[1], u[2], 0.0;
  const Vec d = eh_frame_rhs(alpha, y, c);
  const double tang = std::max({std::abs(du[0] - d[4]), std::abs(du[1] - d[5]), std::abs(du[2] - d[6])});
  return {tang, std::abs(d[7])};
}

// constant-u solutions on r = const: (alpha, beta) = t (c1, c2) with gamma fixed
struct EHConfinedOrbit {
  Vec3 c = Vec3::Zero();
  Vec3 u0 = Vec3::Zero();
  double omega = 0.0;  // rotation rate of (alpha, beta); zero for constant u
};

inline EHConfinedOrbit eh_constant_u_orbit(double alpha, double r, double gamma, double angle) {
  if (!(std::abs(gamma) < 1)) throw DomainError("eh_constant_u_orbit: need |gamma| < 1");
  const double f = eh_f(r, alpha), R = eh_R(r, alpha);
  const double t = -1.0 / (f / r + 2 * R * gamma * gamma);
  const double C = std::sqrt(1 - gamma * gamma) / std::abs(t);
  EHConfinedOrbit o;
  o.c = Vec3(C * std::cos(angle), C * std::sin(angle), R * gamma + gamma / t);
  o.u0 = Vec3(t * o.c[0], t * o.c[1], gamma);
  return o;
}

// c1 = c2 = 0: (alpha, beta) rotates at rate R gamma - c3
inline EHConfinedOrbit eh_rotating_orbit(double alpha, double r, double gamma, double phase) {
  if (gamma == 0.0 || !(std::abs(gamma) <= 1)) throw DomainError("eh_rotating_orbit: need 0 < |gamma| <= 1");
  const double f = eh_f(r, alpha), R = eh_R(r, alpha);
  EHConfinedOrbit o;
  o.c = Vec3(0, 0, -(f / r + R * gamma * gamma) / gamma);
  const double A = std::sqrt(1 - gamma * gamma);
  o.u0 = Vec3(A * std::sin(phase), A * std::cos(phase), gamma);
  o.omega = R * gamma - o.c[2];
  return o;
}

// ---------------------------------------------------------------------------
// prolate spheroidal separation on the two-centre form, centres (0, 0, -+alpha)

struct ProlatePoint {
  double zeta = 0.0, lambda = 0.0, phi = 0.0, tau = 0.0;
};

inline ProlatePoint to_prolate(double alpha, const Vec& x) {
  const double r1 = std::hypot(x[0], x[1], x[2] + alpha), r2 = std::hypot(x[0], x[1], x[2] - alpha);
  return {(r1 + r2) / (2 * alpha), (r1 - r2) / (2 * alpha), std::atan2(x[1], x[0]), x[3]};
}

inline Vec from_prolate(double alpha, const ProlatePoint& p) {
  const double rho = alpha * std::sqrt((p.zeta * p.zeta - 1) * (1 - p.lambda * p.lambda));
  Vec x(4);
  x << rho * std::cos(p.phi), rho * std::sin(p.phi), alpha * p.zeta * p.lambda, p.tau;
  return x;
}

inline double prolate_V(double alpha, double zeta, double lambda) {
  return 2 * zeta / (alpha * (zeta * zeta - lambda * lambda));
}

inline double prolate_Omega(double zeta, double lambda) {
  return 2 * lambda * (zeta * zeta - 1) / (zeta * zeta - lambda * lambda);
}

// Phi = -2 alpha zeta dphi - alpha zeta lambda dtau with d Phi = -Omega^3, chart (x, y, z, tau)
inline Vec prolate_potential(double alpha, const Vec& x) {
  const ProlatePoint p = to_prolate(alpha, x);
  const double rho2 = x[0] * x[0] + x[1] * x[1];
  Vec A = Vec::Zero(4);
  const double a_phi = -2 * alpha * p.zeta;
  A[0] = -a_phi * x[1] / rho2;
  A[1] = a_phi * x[0] / rho2;
  A[3] = -alpha * p.zeta * p.lambda;
  return A;
}

struct ProlateConstants {
  double E = 0.0, J = 0.0, Qs = 0.0, e = 0.0;
};

struct ProlateBranches {
  double zeta = 0.0;    // (zeta^2-1) P_zeta^2 - Z(zeta) = Qs
  double lambda = 0.0;  // (1-lambda^2) P_lambda^2 - L(lambda) = -Qs
};

inline ProlateBranches prolate_branches(double alpha, const Vec& x, const Vec& u, double E, double J, double e,
                                        double mu = 1.0) {
  const Vec3 p1(0, 0, -alpha), p2(0, 0, alpha);
  const Vec3 X = x.head<3>(), U = u.head<3>();
  const double r1 = (X - p1).norm(), r2 = (X - p2).norm();
  const double dr1 = (X - p1).dot(U) / r1, dr2 = (X - p2).dot(U) / r2;
  const double z = (r1 + r2) / (2 * alpha), l = (r1 - r2) / (2 * alpha);
  const double dz = (dr1 + dr2) / (2 * alpha), dl = (dr1 - dr2) / (2 * alpha);
  const double Pz = 2 * alpha * z * dz / (z * z - 1), Pl = 2 * alpha * z * dl / (1 - l * l);
  const double z2 = z * z, l2 = l * l;
  const double Zf = -(4 * E * E * (z2 - 1) + J * J * z2 + 4 * J * alpha * e * z2 * z + 4 * alpha * alpha * e * e * z2 * z2 -
                      2 * alpha * mu * mu * z2 * z + 2 * alpha * mu * mu * z) /
                    (z2 - 1);
  const double Lf = l * (4 * E * E * l - 4 * E * J + J * J * l) / (l2 - 1);
  return {(z2 - 1) * Pz * Pz - Zf, (1 - l2) * Pl * Pl - Lf};
}

inline ProlateConstants prolate_constants(const GibbonsHawking& M, double alpha, const Vec& x, const Vec& u, double e) {
  const Mat g = metric_at(M, x);
  const Vec gu = g * u;
  const Vec A = prolate_potential(alpha, x);
  Vec dphi = Vec::Zero(4);
  dphi[0] = -x[1];
  dphi[1] = x[0];
  ProlateConstants k;
  k.e = e;
  k.E = gu[3] + e * A[3];
  k.J = gu.dot(dphi) + e * A.dot(dphi);
  k.Qs = prolate_branches(alpha, x, u, k.E, k.J, e).zeta;
  return k;
}

// max over samples of the two separated branches with a single constant
inline double eh_hj_residual(double alpha, const Trajectory& tr, const ProlateConstants& k) {
  double mx = 0.0;
  for (const auto& s : tr.samples) {
    const ProlatePoint p = to_prolate(alpha, s.state.x);
    if (!(p.zeta > 1) || !(std::abs(p.lambda) < 1)) throw DomainError("eh_hj_residual: point outside zeta > 1, |lambda| < 1");
    const auto b = prolate_branches(alpha, s.state.x, s.state.u, k.E, k.J, k.e);
    mx = std::max({mx, std::abs(b.zeta - k.Qs), std::abs(b.lambda + k.Qs)});
  }
  return mx;
}

}  // namespace cgf
