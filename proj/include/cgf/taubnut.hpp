#pragma once

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "cgf/flows.hpp"
#include "cgf/geometry.hpp"
#include "cgf/invariants.hpp"

namespace cgf {

struct ParabolicPoint {
  double eta = 0.0, xi = 0.0, phi = 0.0, psi = 0.0;
};

inline ParabolicPoint to_parabolic(const Vec& x) {
  if (!(x[0] > 0.0)) throw DomainError("to_parabolic: r must be positive");
  const double ct = std::cos(x[1]);
  return {x[0] * (1 + ct), x[0] * (1 - ct), x[2], x[3]};
}

inline Vec from_parabolic(const ParabolicPoint& p) {
  Vec x(4);
  const double r = 0.5 * (p.eta + p.xi);
  x << r, std::atan2(std::sqrt(p.eta * p.xi), 0.5 * (p.eta - p.xi)), p.phi, p.psi;
  return x;
}

// d eta/ds, d xi/ds from chart velocity
inline std::pair<double, double> parabolic_rates(const Vec& x, const Vec& u) {
  const double st = std::sin(x[1]), ct = std::cos(x[1]);
  return {u[0] * (1 + ct) - x[0] * st * u[1], u[0] * (1 - ct) + x[0] * st * u[1]};
}

// ---------------------------------------------------------------------------
// Killing-Yano and conformal Killing-Yano forms, chart (r, theta, phi, psi)

// Y = r^3/m d(V (dpsi + m cos dphi)) = -r dr ^ s - r^2 (r+m) sin dtheta ^ dphi
inline Mat taubnut_Y(const Vec& x, double m) {
  const double r = x[0], st = std::sin(x[1]), ct = std::cos(x[1]);
  Mat Y = Mat::Zero(4, 4);
  Y(0, 3) = -r;
  Y(0, 2) = -r * m * ct;
  Y(1, 2) = -r * r * (r + m) * st;
  return Y - Y.transpose();
}

// g(d/dpsi, .)
inline Vec taubnut_K(const TaubNUT& M, const Vec& x) { return metric_at(M, x).row(3).transpose(); }

inline CKYData taubnut_cky_Y(const TaubNUT& M) {
  const double m = M.m();
  return {"Y", [m](const Vec& x) { return taubnut_Y(x, m); }, [&M](const Vec& x) { return taubnut_K(M, x); }};
}

inline CKYData taubnut_cky_W(const TaubNUT& M) {
  const double m = M.m();
  return {"W", [m](const Vec& x) { return taubnut_W(x, m); }, [&M](const Vec& x) { return taubnut_K(M, x); }};
}

// Killing-Yano form Y - W
inline Mat taubnut_Z(const Vec& x, double m) { return taubnut_Y(x, m) - taubnut_W(x, m); }

// (dpsi + m cos dphi) ^ dr + (2r+m)(r+m) r s1 ^ s2, as printed
inline Mat taubnut_Z_printed(const Vec& x, double m) {
  const double r = x[0], st = std::sin(x[1]), ct = std::cos(x[1]);
  Mat Z = Mat::Zero(4, 4);
  Z(3, 0) = 1.0;
  Z(2, 0) = m * ct;
  Z(1, 2) = (2 * r + m) * (r + m) * r * st;
  return Z - Z.transpose();
}

inline CKYData taubnut_ky_Z(double m) { return {"Z", [m](const Vec& x) { return taubnut_Z(x, m); }, {}}; }

// left-invariant one-forms on SU(2) in chart (r, theta, phi, psi)
inline std::array<Vec, 3> sigma_oneforms(const Vec& x) {
  double s[3][4];
  detail::sigma_forms(x[1], x[3], s[0], s[1], s[2]);
  std::array<Vec, 3> out;
  for (int i = 0; i < 3; ++i) out[i] = Eigen::Map<const Eigen::Vector4d>(s[i]);
  return out;
}

inline Mat wedge1(const Vec& a, const Vec& b) { return a * b.transpose() - b * a.transpose(); }

// max over i of |d sigma_i + sigma_j ^ sigma_k|
inline double sigma_structure_residual(const Vec& x) {
  double mx = 0.0;
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3, k = (i + 2) % 3;
    const Mat d = fd::exterior_d1([i](const Vec& y) { return sigma_oneforms(y)[i]; }, x);
    const auto s = sigma_oneforms(x);
    mx = std::max(mx, (d + wedge1(s[j], s[k])).cwiseAbs().maxCoeff());
  }
  return mx;
}

// ---------------------------------------------------------------------------
// Hamilton-Jacobi separation with charge

struct SeparationConstants {
  double E = 0.0, J = 0.0, Q = 0.0;
  double mu = 1.0;
  double e = 0.0;
  double m = 1.0;
};

struct TurningPointError : DomainError {
  double radicand;
  TurningPointError(const std::string& w, double v) : DomainError(w), radicand(v) {}
};

// coefficients u0..u4 for the charge convention of the separated equation
inline std::array<double, 5> quartic_coeffs(double E, double Q, const SeparationConstants& c) {
  const double J = c.J, m = c.m, e = c.e, mu2 = c.mu * c.mu;
  return {-4 * (J + E * m) * (J + E * m), 4 * (Q + m * (mu2 - 2 * J * e - 2 * E * E)),
          4 * (mu2 - m * m * e * e - E * E - J * e - 3 * E * m * e), -4 * e * (E + m * e), -e * e};
}

// coefficient list as printed (charge of opposite sign)
inline std::array<double, 5> quartic_coeffs_printed(double E, double Q, const SeparationConstants& c) {
  const double J = c.J, m = c.m, e = c.e, mu2 = c.mu * c.mu;
  return {-4 * (J + E * m) * (J + E * m), 4 * (Q + m * (mu2 + 2 * J * e - 2 * E * E)),
          4 * (mu2 - m * m * e * e - E * E + J * e + 3 * E * m * e), 4 * e * (E - m * e), -e * e};
}

inline double quartic_radicand(double x, double E, double Q, const SeparationConstants& c) {
  const auto u = quartic_coeffs(E, Q, c);
  return (((u[4] * x + u[3]) * x + u[2]) * x + u[1]) * x + u[0];
}

inline double quartic_U(double x, double E, double Q, const SeparationConstants& c) {
  const double R = quartic_radicand(x, E, Q, c);
  if (R < 0.0) throw TurningPointError("quartic_U: negative radicand " + std::to_string(R) + " at x=" + std::to_string(x), R);
  return std::sqrt(R);
}

struct ExtractedConstants {
  SeparationConstants consts;
  double Q_xi = 0.0;  // -Q from the xi branch
  bool axis_warning = false;
};

inline ExtractedConstants extract_constants(const TaubNUT& M, const Trajectory& tr, double e) {
  if (tr.samples.empty()) throw DomainError("extract_constants: empty trajectory");
  const auto& st = tr.samples.front().state;
  const PhasePoint pp = phase_point(M, st.x, st.u, e);
  const auto I = taubnut_integrals(pp, M.m());
  ExtractedConstants out;
  out.consts.E = I.K;
  out.consts.J = I.L;
  out.consts.e = e;
  out.consts.m = M.m();
  const ParabolicPoint p = to_parabolic(st.x);
  const auto [deta, dxi] = parabolic_rates(st.x, st.u);
  const double D = p.eta + p.xi + 2 * M.m();
  out.consts.Q = (std::pow(deta * D, 2) - quartic_radicand(p.eta, out.consts.E, 0.0, out.consts)) / (4 * p.eta);
  out.Q_xi = (std::pow(dxi * D, 2) - quartic_radicand(p.xi, -out.consts.E, 0.0, out.consts)) / (4 * p.xi);
  for (const auto& s : tr.samples) {
    const ParabolicPoint q = to_parabolic(s.state.x);
    if (q.eta < 1e-6 || q.xi < 1e-6) out.axis_warning = true;
  }
  return out;
}

struct HJResidual {
  double eta = 0.0, xi = 0.0;
  double max() const { return std::max(eta, xi); }
};

// |eta' (eta+xi+2m) - sign U(eta, E, Q)| and the xi analogue with (-E, -Q)
inline HJResidual hj_residual(const Trajectory& tr, const SeparationConstants& c) {
  HJResidual res;
  double sig_eta = 0.0, sig_xi = 0.0;
  double prev_eta = 0.0, prev_xi = 0.0;
  for (const auto& s : tr.samples) {
    const ParabolicPoint p = to_parabolic(s.state.x);
    const auto [deta, dxi] = parabolic_rates(s.state.x, s.state.u);
    const double D = p.eta + p.xi + 2 * c.m;
    if (sig_eta == 0.0) sig_eta = deta >= 0 ? 1.0 : -1.0;
    if (sig_xi == 0.0) sig_xi = dxi >= 0 ? 1.0 : -1.0;
    if (prev_eta != 0.0 && deta * prev_eta < 0.0) sig_eta = -sig_eta;
    if (prev_xi != 0.0 && dxi * prev_xi < 0.0) sig_xi = -sig_xi;
    if (deta != 0.0) prev_eta = deta;
    if (dxi != 0.0) prev_xi = dxi;
    const double Ue = std::sqrt(std::max(0.0, quartic_radicand(p.eta, c.E, c.Q, c)));
    const double Ux = std::sqrt(std::max(0.0, quartic_radicand(p.xi, -c.E, -c.Q, c)));
    res.eta = std::max(res.eta, std::abs(deta * D - sig_eta * Ue));
    res.xi = std::max(res.xi, std::abs(dxi * D - sig_xi * Ux));
  }
  return res;
}

// signed integral of 1/sqrt(radicand) over [a, b]; the radicand must stay above -tol inside
template <class Radicand>
double inverse_sqrt_quadrature(const Radicand& rad, double a, double b, const char* who, double tol = 0.0) {
  if (a == b) return 0.0;
  const double lo = std::min(a, b), hi = std::max(a, b);
  constexpr int kProbe = 64;
  for (int i = 1; i < kProbe; ++i) {
    const double x = lo + (hi - lo) * i / kProbe;
    if (rad(x) < -tol) throw TurningPointError(std::string(who) + ": radicand changes sign inside the range; split at the turning point", rad(x));
  }
  boost::math::quadrature::tanh_sinh<double> ts;
  auto f = [&](double x) {
    const double v = rad(x);
    return v > 0.0 ? 1.0 / std::sqrt(v) : 0.0;
  };
  const double I = ts.integrate(f, lo, hi, 1e-12);
  return b > a ? I : -I;
}

struct QuadraturePair {
  double eta_integral = 0.0, xi_integral = 0.0;
  double mismatch() const { return std::abs(std::abs(eta_integral) - std::abs(xi_integral)); }
};

inline QuadraturePair unparam_quadrature(double eta0, double eta1, double xi0, double xi1, const SeparationConstants& c) {
  QuadraturePair q;
  q.eta_integral = inverse_sqrt_quadrature([&](double x) { return quartic_radicand(x, c.E, c.Q, c); }, eta0, eta1, "unparam_quadrature");
  q.xi_integral = inverse_sqrt_quadrature([&](double x) { return quartic_radicand(x, -c.E, -c.Q, c); }, xi0, xi1, "unparam_quadrature");
  return q;
}

// bracketed turning points of the radicand inside [lo, hi] to 1e-12
inline std::vector<double> quartic_turning_points(double E, double Q, const SeparationConstants& c, double lo, double hi,
                                                  int grid = 2000) {
  std::vector<double> roots;
  auto f = [&](double x) { return quartic_radicand(x, E, Q, c); };
  double x0 = lo, f0 = f(lo);
  for (int i = 1; i <= grid; ++i) {
    const double x1 = lo + (hi - lo) * i / grid, f1 = f(x1);
    if (f0 == 0.0) roots.push_back(x0);
    else if (f0 * f1 < 0.0) {
      double a = x0, b = x1, fa = f0;
      while (b - a > 1e-12 * std::max(1.0, std::abs(a))) {
        const double mid = 0.5 * (a + b), fm = f(mid);
        if (fa * fm <= 0.0) b = mid;
        else { a = mid; fa = fm; }
      }
      roots.push_back(0.5 * (a + b));
    }
    x0 = x1;
    f0 = f1;
  }
  return roots;
}

// segments [i0, i1] of sample indices on which eta and xi are both monotone
inline std::vector<std::pair<size_t, size_t>> monotone_segments(const Trajectory& tr) {
  std::vector<std::pair<size_t, size_t>> segs;
  size_t start = 0;
  double se = 0.0, sx = 0.0;
  for (size_t i = 0; i < tr.samples.size(); ++i) {
    const auto [de, dx] = parabolic_rates(tr.samples[i].state.x, tr.samples[i].state.u);
    const double ne = de >= 0 ? 1.0 : -1.0, nx = dx >= 0 ? 1.0 : -1.0;
    if (i == start) {
      se = ne;
      sx = nx;
      continue;
    }
    if (ne != se || nx != sx) {
      if (i - 1 > start) segs.push_back({start, i - 1});
      start = i;
      se = ne;
      sx = nx;
    }
  }
  if (tr.samples.size() > start + 1) segs.push_back({start, tr.samples.size() - 1});
  return segs;
}

}  // namespace cgf
