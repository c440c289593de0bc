#pragma once

#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "cgf/flows.hpp"
#include "cgf/geometry.hpp"
#include "cgf/invariants.hpp"

namespace cgf {

// ---------------------------------------------------------------------------
// tetrad components and first integrals

struct CP2Frame {
  Vec u, a;  // (alpha, beta, gamma, delta) and (a1, a2, a3, a4)
};

inline CP2Frame cp2_frame(const CP2& M, const CGState& st) {
  const Mat E = M.coframe_at(st.x);
  return {E * st.u, E * st.a};
}

struct CP2Integrals {
  double C_Y = 0.0, C_K = 0.0;
};

inline CP2Integrals cp2_integrals_frame(double r, const Vec& u, const Vec& a) {
  const double q = r * r / (r * r + 1);
  return {q * (u[0] * a[1] - u[1] * a[0] + u[2] * a[3] - u[3] * a[2]) + 2 * r / (r * r + 1) * u[2],
          u[0] * a[1] - u[1] * a[0] - u[2] * a[3] + u[3] * a[2]};
}

inline CP2Integrals cp2_first_integrals(const CP2& M, const CGState& st) {
  const CP2Frame f = cp2_frame(M, st);
  return cp2_integrals_frame(st.x[0], f.u, f.a);
}

// Kahler form e12 - e34 and the CKY r^2/(1+r^2)(e12 + e34) with K = 2r/(1+r^2) e3, chart components
inline CKYData cp2_kahler_cky(const CP2& M) {
  return {"kahler", [&M](const Vec& x) {
            Mat w = Mat::Zero(4, 4);
            w(0, 1) = 1; w(1, 0) = -1; w(2, 3) = -1; w(3, 2) = 1;
            return form_to_chart(M.coframe_at(x), w);
          }, {}};
}

inline CKYData cp2_psi_cky(const CP2& M) {
  return {"C_Y",
          [&M](const Vec& x) {
            const double r = x[0];
            Mat w = Mat::Zero(4, 4);
            w(0, 1) = 1; w(1, 0) = -1; w(2, 3) = 1; w(3, 2) = -1;
            return form_to_chart(M.coframe_at(x), r * r / (1 + r * r) * w);
          },
          [&M](const Vec& x) {
            const double r = x[0];
            return Vec(2 * r / (1 + r * r) * M.coframe_at(x).row(2).transpose());
          }};
}

// tau = g(J(u), a/|a|) with J(u)_b = omega_ab u^a for the Kahler form omega
inline double torsion(const CP2& M, const CGState& st) {
  const CP2Frame f = cp2_frame(M, st);
  const double an = f.a.norm();
  if (!(an > 0.0)) throw DomainError("torsion: |a| = 0 (geodesic), torsion undefined");
  return (f.u[0] * f.a[1] - f.u[1] * f.a[0] - f.u[2] * f.a[3] + f.u[3] * f.a[2]) / an;
}

// residual of the tetrad system: a from (u, u') and a' from (u, a)
inline double cp2_tetrad_residual(double r, const Vec& u, const Vec& du, const Vec& a, const Vec& da) {
  const double al = u[0], be = u[1], ga = u[2], de = u[3];
  const double A2 = a.squaredNorm();
  Vec ra(4), rd(4);
  ra[0] = du[0] + 2 * r * be * ga + al * de / r;
  ra[1] = du[1] - 2 * r * ga * al + be * de / r;
  ra[2] = du[2] - r * ga * de + ga * de / r;
  ra[3] = du[3] + r * ga * ga - (1 - de * de) / r;
  rd[0] = (be * a[2] - al * a[3] - ga * a[1]) / r - 2 * r * ga * a[1] - A2 * al;
  rd[1] = (ga * a[0] - be * a[3] - al * a[2]) / r + 2 * r * ga * a[0] - A2 * be;
  rd[2] = (al * a[1] - ga * a[3] - be * a[0]) / r + r * ga * a[3] - A2 * ga;
  rd[3] = (al * a[0] + be * a[1] + ga * a[2]) / r - r * ga * a[2] - A2 * de;
  return std::max((ra - a).cwiseAbs().maxCoeff(), (rd - da).cwiseAbs().maxCoeff());
}

// ---------------------------------------------------------------------------
// circles on r = const

struct CP2Constants {
  double r = 1.0, gamma = 0.0, B = 0.0;
  double c1 = 0.0, c2 = 0.0, c3 = 2.0, c4 = 0.0;
  double C_Y = 0.0, C_K = 0.0;
  double P = 0.0, Q = 0.0, kappa = 0.0;
  bool killing = false;  // gamma = +-1: trajectory of d/dpsi
};

// |a|^2 and C_K of the constant-r circle with given B
inline std::pair<double, double> cp2_circle_invariants(double r, double gamma, double B) {
  const double g2 = gamma * gamma;
  const double A = B * B * (1 - g2) + 4 * r * gamma * B * (1 - g2) + r * r * g2 * (4 - 3 * g2) - 2 * g2 + 1 / (r * r);
  const double CK = -(B + 2 * r * gamma) * (1 - g2) - gamma * (r * g2 - 1 / r);
  return {A, CK};
}

// the other constant-r branch, gamma^2 r^2 + gamma r B + 1 = 0; it has tau^2 = 1
inline double cp2_unit_torsion_B(double r, double gamma) {
  if (gamma == 0.0) throw DomainError("cp2_unit_torsion_B: gamma must be nonzero");
  return -gamma * r - 1 / (gamma * r);
}

// B from the first integrals
inline double cp2_B_from_integrals(double r, double gamma, double C_Y, double C_K) {
  if (std::abs(gamma) >= 1) throw DomainError("cp2_B_from_integrals: need |gamma| < 1");
  return (4 * r * r * r * (gamma * gamma * gamma - gamma) - r * r * (C_K + C_Y) + 2 * r * gamma - C_Y) /
         (2 * r * r * (1 - gamma * gamma));
}

// real roots in (-1, 1) of 2 (r gamma)^3 = r^2 (C_Y - C_K) + C_Y
inline std::vector<double> cp2_gamma_roots(double r, double C_Y, double C_K) {
  const double g = std::cbrt((r * r * (C_Y - C_K) + C_Y) / (2 * r * r * r));
  return std::abs(g) < 1 ? std::vector<double>{g} : std::vector<double>{};
}

inline CP2Constants make_cp2_constants(double r, double gamma, double c1 = 0.0, double c2 = 0.0, double c3 = 2.0,
                                       double c4 = 0.0) {
  if (!(r > 0)) throw DomainError("make_cp2_constants: r must be positive");
  if (!(std::abs(gamma) <= 1)) throw DomainError("make_cp2_constants: need |gamma| <= 1");
  CP2Constants k;
  k.r = r;
  k.gamma = gamma;
  k.c1 = c1;
  k.c2 = c2;
  k.c3 = c3;
  k.c4 = c4;
  k.killing = std::abs(gamma) == 1.0;
  k.B = k.killing ? 0.0 : -3 * gamma * r;
  k.Q = k.B + 2 * (1 + r * r) / r * gamma;
  k.P = 2 * std::sqrt((1 + r * r) * (1 - gamma * gamma)) / r;
  k.kappa = std::hypot(k.P, k.Q);
  Vec u(4), a(4);
  const double s = std::sqrt(1 - gamma * gamma);
  u << s * std::sin(c1), s * std::cos(c1), gamma, 0.0;
  a << (k.B + 2 * r * gamma) * u[1], -(k.B + 2 * r * gamma) * u[0], 0.0, r * gamma * gamma - 1 / r;
  const auto I = cp2_integrals_frame(r, u, a);
  k.C_Y = I.C_Y;
  k.C_K = I.C_K;
  return k;
}

struct CP2CirclePoint {
  double s = 0.0;
  Vec x;      // (r, theta, phi, psi)
  Vec u, a;   // tetrad components
  Vec du, da; // their arclength derivatives
  double chi = 0.0, chi_dot = 0.0, chi_ddot = 0.0;
};

// chi' P^2 cos^3 - 2 cos chi'^2 + 3 Q cos chi' - cos (P^2 + Q^2) + sin chi'' with chi' the derivative
inline double chi_ode_residual(double chi, double chid, double chidd, double P, double Q) {
  const double c = std::cos(chi);
  return P * P * c * c * c - 2 * c * chid * chid + 3 * Q * c * chid - c * (P * P + Q * Q) + std::sin(chi) * chidd;
}

class CP2ConstantRCircle {
 public:
  explicit CP2ConstantRCircle(CP2Constants k, double theta0 = 1.0, double psi0 = 0.0)
      : k_(k), theta0_(theta0), psi0_(psi0) {}
  const CP2Constants& constants() const { return k_; }

  // principal-branch chi = atan2(D, N) in (-pi, pi]
  CP2CirclePoint at(double s) const {
    CP2CirclePoint p;
    p.s = s;
    const double r = k_.r, g = k_.gamma;
    p.u.resize(4);
    p.a.resize(4);
    p.du.resize(4);
    p.da.resize(4);
    if (k_.killing) {
      p.x.resize(4);
      p.x << r, theta0_, k_.c4, psi0_ + 2 * (1 + r * r) / r * g * s;
      p.u << 0, 0, g, 0;
      p.a << 0, 0, 0, (r * r - 1) / r;
      p.du.setZero();
      p.da.setZero();
      return p;
    }
    const double sg = std::sqrt(1 - g * g), ph = k_.B * s + k_.c1, w = k_.B + 2 * r * g;
    p.u << sg * std::sin(ph), sg * std::cos(ph), g, 0;
    p.du << k_.B * p.u[1], -k_.B * p.u[0], 0, 0;
    p.a << w * p.u[1], -w * p.u[0], 0, r * g * g - 1 / r;
    p.da << w * p.du[1], -w * p.du[0], 0, 0;
    chi_terms(s, p.chi, p.chi_dot, p.chi_ddot);
    const double th = theta_of(p.chi, p.chi_dot);
    p.x.resize(4);
    p.x << r, th, k_.c4 + phi_integral(0.0, s), p.chi - ph;
    return p;
  }

  // samples on [0, s1] with chi unwrapped continuously and phi accumulated per step
  std::vector<CP2CirclePoint> sample(double s1, double ds) const {
    std::vector<CP2CirclePoint> out;
    const int n = std::max(1, static_cast<int>(std::ceil(s1 / ds)));
    double shift = 0.0, phi = k_.c4;
    for (int i = 0; i <= n; ++i) {
      const double s = s1 * i / n;
      CP2CirclePoint p = at_no_phi(s);
      if (!out.empty()) {
        const double prev = out.back().chi;
        p.chi += shift;
        while (p.chi - prev > kPi) { p.chi -= 2 * kPi; shift -= 2 * kPi; }
        while (p.chi - prev < -kPi) { p.chi += 2 * kPi; shift += 2 * kPi; }
        if (!k_.killing) {
          phi += phi_integral(out.back().s, s);
          p.x[3] = p.chi - k_.B * s - k_.c1;
        }
      }
      if (!k_.killing) p.x[2] = phi;
      out.push_back(std::move(p));
    }
    return out;
  }

  // chart derivative of the closed-form position, from theta(chi, chi'), the phi integrand and psi = chi - B s - c1
  Vec x_dot(const CP2CirclePoint& p) const {
    Vec v = Vec::Zero(4);
    if (k_.killing) {
      v[3] = 2 * (1 + k_.r * k_.r) / k_.r * k_.gamma;
      return v;
    }
    const double sc = std::sin(p.chi), cc = std::cos(p.chi), Ps = k_.P * sc;
    const double z = (k_.Q - p.chi_dot) / Ps;
    const double zd = (-p.chi_ddot * Ps - (k_.Q - p.chi_dot) * k_.P * cc * p.chi_dot) / (Ps * Ps);
    v[1] = -zd / (1 + z * z);
    v[2] = Ps / std::sin(p.x[1]);
    v[3] = p.chi_dot - k_.B;
    return v;
  }

  // frame-to-chart velocity and acceleration at a sample
  static CGState chart_state(const CP2& M, const CP2CirclePoint& p) {
    const Mat F = frame_at(M, p.x);
    return {p.x, F * p.u, F * p.a};
  }

 private:
  CP2CirclePoint at_no_phi(double s) const {
    if (k_.killing) return at(s);
    CP2CirclePoint p;
    p.s = s;
    const double r = k_.r, g = k_.gamma;
    const double sg = std::sqrt(1 - g * g), ph = k_.B * s + k_.c1, w = k_.B + 2 * r * g;
    p.u.resize(4);
    p.a.resize(4);
    p.du.resize(4);
    p.da.resize(4);
    p.u << sg * std::sin(ph), sg * std::cos(ph), g, 0;
    p.du << k_.B * p.u[1], -k_.B * p.u[0], 0, 0;
    p.a << w * p.u[1], -w * p.u[0], 0, r * g * g - 1 / r;
    p.da << w * p.du[1], -w * p.du[0], 0, 0;
    chi_terms(s, p.chi, p.chi_dot, p.chi_ddot);
    p.x.resize(4);
    p.x << r, theta_of(p.chi, p.chi_dot), 0.0, p.chi - ph;
    return p;
  }

  void chi_terms(double s, double& chi, double& chid, double& chidd) const {
    const double K = k_.kappa, Q = k_.Q, c2 = k_.c2, c3 = k_.c3;
    const double sn = std::sin(K * s), cs = std::cos(K * s);
    const double N = K * (c2 * cs - sn), D = Q * (c3 + c2 * sn + cs);
    const double Nd = K * K * (-c2 * sn - cs), Dd = Q * K * (c2 * cs - sn);
    const double S = N * N + D * D;
    if (!(S > 0)) throw NumericError("constant_r_solution: chi undefined (N = D = 0)");
    const double n1 = Nd * D - N * Dd, n1d = -K * K * Q * c3 * N;
    chi = std::atan2(D, N);
    chid = -n1 / S;
    chidd = -(n1d * S - n1 * 2 * (N * Nd + D * Dd)) / (S * S);
  }

  double theta_of(double chi, double chid) const {
    const double sc = std::sin(chi);
    if (std::abs(sc) < kThetaEps) throw DomainError("constant_r_solution: sin(chi) = 0, theta undefined");
    return kPi / 2 - std::atan((k_.Q - chid) / (k_.P * sc));
  }

  double phi_integral(double s0, double s1) const {
    if (s0 == s1) return 0.0;
    auto f = [this](double s) {
      double chi, chid, chidd;
      chi_terms(s, chi, chid, chidd);
      return k_.P * std::sin(chi) / std::sin(theta_of(chi, chid));
    };
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, s0, s1, 15, 1e-14);
  }

  CP2Constants k_;
  double theta0_, psi0_;
};

// (theta', phi', chi') of the reduced angular system; used as a consistency oracle
inline Vec3 cp2_angular_rhs(const CP2Constants& k, double theta, double chi) {
  return {k.P * std::cos(chi), k.P * std::sin(chi) / std::sin(theta), k.Q - k.P * std::cos(theta) / std::sin(theta) * std::sin(chi)};
}

// max |d/ds (x, u, a) - conformal_rhs| at s; x' is the closed-form derivative and the frame
// field is differenced along it, so the check stays well conditioned near theta = 0, pi
inline double cp2_chart_residual(const CP2& M, const CP2ConstantRCircle& C, double s, double h = 1e-5) {
  const auto p = C.at(s);
  const CGState st = CP2ConstantRCircle::chart_state(M, p);
  const Vec xd = C.x_dot(p);
  const Mat dF = (frame_at(M, p.x - 2 * h * xd) - 8 * frame_at(M, p.x - h * xd) + 8 * frame_at(M, p.x + h * xd) -
                  frame_at(M, p.x + 2 * h * xd)) / (12 * h);
  const Mat F = frame_at(M, p.x);
  Vec dy(12);
  dy << xd, dF * p.u + F * p.du, dF * p.a + F * p.da;
  return (dy - conformal_rhs(M, st)).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// the cubic in X = r^2 and the (tau, |a|^2) classification

inline double cubic_F(double X, double A, double CK2) {
  return X * X * X * (A - CK2) - X * X * (1 + 2 * A + 4 * A * A - 6 * CK2) +
         X * (2 + 5 * A + 4 * A * A + 4 * A * A * A - 12 * CK2) - (1 + 4 * A + 4 * A * A - 8 * CK2);
}

inline double cubic_F_prime(double X, double A, double CK2) {
  return 3 * X * X * (A - CK2) - 2 * X * (1 + 2 * A + 4 * A * A - 6 * CK2) + (2 + 5 * A + 4 * A * A + 4 * A * A * A - 12 * CK2);
}

// forward map (r, gamma) -> (|a|^2, C_K) on the B = -3 gamma r branch
inline std::pair<double, double> cp2_forward(double r2, double gamma) {
  const double g2 = gamma * gamma, r = std::sqrt(r2);
  return {g2 * r2 - 2 * g2 + 1 / r2, gamma / r * (1 + r2 - 2 * g2 * r2)};
}

// 1 - tau^2 from (r, gamma)
inline double cp2_one_minus_tau2(double r, double gamma) {
  const double g2 = gamma * gamma, r2 = r * r;
  return (1 - g2) * std::pow(1 - 2 * r2 * g2, 2) / ((1 - g2) + g2 * std::pow(r2 - 1, 2));
}

struct CP2Classification {
  double tau = 0.0, A = 0.0;
  std::vector<double> roots;   // r^2 roots of the cubic (empty in the A = 1/2 case)
  bool triple = false;         // A = 1/2: r^2 = 2
  double r2 = 0.0, gamma2 = 0.0;
  std::vector<double> gammas;  // signed gamma values reproducing tau
};

namespace detail {

// bracketed bisection with Newton acceleration
inline double cubic_root(double a, double b, double A, double CK2) {
  double fa = cubic_F(a, A, CK2), fb = cubic_F(b, A, CK2);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if (fa * fb > 0)
    throw NumericError("roots_from_tau_a: no sign change on [" + std::to_string(a) + ", " + std::to_string(b) +
                       "], F = " + std::to_string(fa) + ", " + std::to_string(fb));
  double x = 0.5 * (a + b);
  for (int it = 0; it < 300; ++it) {
    const double f = cubic_F(x, A, CK2);
    if (f == 0.0) return x;
    if ((f < 0) == (fa < 0)) { a = x; fa = f; } else b = x;
    const double d = cubic_F_prime(x, A, CK2);
    double xn = d != 0.0 ? x - f / d : 0.5 * (a + b);
    if (!(xn > a && xn < b)) xn = 0.5 * (a + b);
    if (std::abs(xn - x) <= 4e-16 * std::max(1.0, std::abs(x))) return xn;
    x = xn;
  }
  return x;
}

inline double cubic_root_above(double a, double A, double CK2) {
  double b = 2 * std::max(1.0, a);
  while (cubic_F(b, A, CK2) <= 0) {
    b *= 2;
    if (b > 1e300) throw NumericError("roots_from_tau_a: no root above " + std::to_string(a));
  }
  return cubic_root(a, b, A, CK2);
}

}  // namespace detail

inline CP2Classification roots_from_tau_a(double tau, double A) {
  if (!(std::abs(tau) < 1)) throw DomainError("roots_from_tau_a: need |tau| < 1; tau = +-1 is the d/dpsi branch");
  if (!(A > 0)) throw DomainError("roots_from_tau_a: need |a|^2 > 0");
  CP2Classification c;
  c.tau = tau;
  c.A = A;
  if (std::abs(A - 0.5) < 1e-14) {
    // tau = gamma (3 - 4 gamma^2): three roots in (-1, 1)
    c.triple = true;
    c.r2 = 2.0;
    const double t = std::acos(-tau) / 3.0;
    for (int k = 0; k < 3; ++k) c.gammas.push_back(std::cos(t - 2 * kPi * k / 3));
    std::sort(c.gammas.begin(), c.gammas.end());
    c.gamma2 = c.gammas.back() * c.gammas.back();
    return c;
  }
  const double CK2 = tau * tau * A;
  if (2 * A - 1 < 0) {
    c.roots = {detail::cubic_root(0.0, 1 + 2 * A, A, CK2), detail::cubic_root(1 + 2 * A, 2.0, A, CK2),
               detail::cubic_root_above(1 / A, A, CK2)};
  } else {
    c.roots = {detail::cubic_root(0.0, 1 / A, A, CK2), detail::cubic_root(2.0, 1 + 2 * A, A, CK2),
               detail::cubic_root_above(1 + 2 * A, A, CK2)};
  }
  c.r2 = *std::max_element(c.roots.begin(), c.roots.end());
  c.gamma2 = (c.r2 * A - 1) / (c.r2 * (c.r2 - 2));
  if (!(c.gamma2 >= -1e-14 && c.gamma2 < 1))
    throw NumericError("roots_from_tau_a: gamma^2 = " + std::to_string(c.gamma2) + " outside [0, 1)");
  c.gamma2 = std::max(0.0, c.gamma2);
  // C_K = tau |a| fixes the sign of gamma
  const double g = std::sqrt(c.gamma2);
  const double lin = 1 + c.r2 - 2 * c.gamma2 * c.r2;
  const double sgn = (tau >= 0 ? 1.0 : -1.0) * (lin >= 0 ? 1.0 : -1.0);
  c.gammas = {sgn * g};
  return c;
}

}  // namespace cgf
