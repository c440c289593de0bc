#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "cgf/fd.hpp"
#include "cgf/flows.hpp"
#include "cgf/geometry.hpp"

namespace cgf {

// Y: two-form (chart components), K: one-form with K_c = -nabla^a Y_ac / (n-1)
struct CKYData {
  std::string name;
  fd::MatrixField Y;
  fd::VectorField K;
};

// nabla_a Y_bc - nabla_[a Y_bc] + 2 g_a[b K_c] in frame components, out[a](b,c)
inline std::vector<Mat> cky_tensor_residual(const Model& M, const CKYData& cky, const Vec& x) {
  const int n = M.dim();
  const auto DY = fd::covariant_derivative_2form(M, cky.Y, x);
  const Mat g = metric_at(M, x);
  const Vec K = cky.K ? cky.K(x) : Vec::Zero(n);
  const Mat F = frame_at(M, x);
  std::vector<Mat> R(n, Mat::Zero(n, n));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        const double alt = (DY[a](b, c) + DY[b](c, a) + DY[c](a, b)) / 3.0;
        R[a](b, c) = DY[a](b, c) - alt + g(a, b) * K[c] - g(a, c) * K[b];
      }
  std::vector<Mat> Rf(n);
  for (int p = 0; p < n; ++p) Rf[p] = F.transpose() * R[p] * F;
  std::vector<Mat> res(n, Mat::Zero(n, n));
  for (int i = 0; i < n; ++i)
    for (int p = 0; p < n; ++p) res[i] += F(p, i) * Rf[p];
  return res;
}

inline double cky_residual(const Model& M, const CKYData& cky, const std::vector<Vec>& points) {
  double mx = 0.0;
  for (const auto& x : points)
    for (const auto& R : cky_tensor_residual(M, cky, x)) mx = std::max(mx, R.cwiseAbs().maxCoeff());
  return mx;
}

// K_c = -nabla^a Y_ac / (n - 1)
inline Vec cky_divergence_oneform(const Model& M, const fd::MatrixField& Y, const Vec& x) {
  const int n = M.dim();
  const auto DY = fd::covariant_derivative_2form(M, Y, x);
  const Mat gi = inverse_metric_at(M, x);
  Vec K = Vec::Zero(n);
  for (int c = 0; c < n; ++c)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) K[c] += gi(a, b) * DY[b](a, c);
  return -K / (n - 1);
}

// Y(u, a) + K(u)
inline double cky_first_integral(const CKYData& cky, const CGState& st) {
  const Mat Y = cky.Y(st.x);
  double q = st.u.dot(Y * st.a);
  if (cky.K) q += cky.K(st.x).dot(st.u);
  return q;
}

inline Monitor cky_monitor(const CKYData& cky) {
  return {cky.name, [cky](const Model&, const CGState& st) { return cky_first_integral(cky, st); }};
}

// ---------------------------------------------------------------------------
// charged phase space

struct PhasePoint {
  Vec q;  // chart coordinates
  Vec P;  // mechanical momentum P_a = p_a - e Phi_a
  double e = 0.0;
};

using PhaseFunction = std::function<double(const PhasePoint&)>;
using FieldStrength = std::function<Mat(const Vec&)>;

inline double bracket_step(double v) { return std::cbrt(std::numeric_limits<double>::epsilon()) * std::max(1.0, std::abs(v)); }

inline void phase_gradient(const PhaseFunction& f, const PhasePoint& pp, Vec& dq, Vec& dP) {
  const int n = static_cast<int>(pp.q.size());
  dq.resize(n);
  dP.resize(n);
  for (int k = 0; k < n; ++k) {
    PhasePoint a = pp, b = pp;
    const double h = bracket_step(pp.q[k]);
    a.q[k] += h;
    b.q[k] -= h;
    dq[k] = (f(a) - f(b)) / (2 * h);
    a = pp;
    b = pp;
    const double hp = bracket_step(pp.P[k]);
    a.P[k] += hp;
    b.P[k] -= hp;
    dP[k] = (f(a) - f(b)) / (2 * hp);
  }
  if (!dq.allFinite() || !dP.allFinite()) throw NumericError("poisson_bracket: non-finite gradient");
}

// {f,g} = df/dq dg/dP - df/dP dg/dq + e F_ab df/dP_a dg/dP_b
inline double poisson_bracket(const PhaseFunction& f, const PhaseFunction& g, const PhasePoint& pp,
                              const FieldStrength& F) {
  Vec fq, fP, gq, gP;
  phase_gradient(f, pp, fq, fP);
  phase_gradient(g, pp, gq, gP);
  double b = fq.dot(gP) - fP.dot(gq);
  if (F && pp.e != 0.0) b += pp.e * fP.dot(F(pp.q) * gP);
  return b;
}

struct NamedIntegral {
  std::string name;
  PhaseFunction f;
};

inline double involution_matrix(const std::vector<NamedIntegral>& I, const std::vector<PhasePoint>& samples,
                                const FieldStrength& F) {
  double mx = 0.0;
  for (const auto& pp : samples)
    for (size_t i = 0; i < I.size(); ++i)
      for (size_t j = i + 1; j < I.size(); ++j) mx = std::max(mx, std::abs(poisson_bracket(I[i].f, I[j].f, pp, F)));
  return mx;
}

// ---------------------------------------------------------------------------
// Taub-NUT integrals, chart (r, theta, phi, psi), F = -Omega^3 = d Phi

inline Vec taubnut_Phi(const Vec& x, double m) {
  const double r = x[0], st = std::sin(x[1]), ct = std::cos(x[1]);
  Vec A = Vec::Zero(4);
  A[2] = -(m * r + 0.5 * r * r * st * st);
  A[3] = -r * ct;
  return A;
}

inline Mat taubnut_F(const TaubNUT& M, const Vec& x) { return -sd_two_forms_at(M, x)[2].components; }

struct TaubNUTIntegrals {
  double K, L, H, W;
};

inline TaubNUTIntegrals taubnut_integrals(const PhasePoint& pp, double m) {
  const double r = pp.q[0], th = pp.q[1], e = pp.e;
  const double st = std::sin(th), ct = std::cos(th);
  if (std::abs(st) < kThetaEps) throw DomainError("taubnut_integrals: sin(theta) = 0");
  const double Pr = pp.P[0], Pth = pp.P[1], Pph = pp.P[2], Pps = pp.P[3];
  TaubNUTIntegrals I;
  I.K = Pps - e * r * ct;
  I.L = Pph - e * (m * r + 0.5 * r * r * st * st);
  I.H = 0.5 * (r / (r + m) * Pr * Pr + Pth * Pth / (r * (r + m)) + (r + m) / r * Pps * Pps +
               std::pow(Pph - m * ct * Pps, 2) / (r * (r + m) * st * st));
  const double tt = st / ct;
  I.W = e * ct / r * std::pow(r * Pr - tt * Pth, 2) - e / (r * ct) * Pth * Pth -
        e * ct / (r * st * st) *
            (Pph * Pph + (m * m - r * r * st * st) * Pps * Pps - 2 * (m + r * st * st) / ct * Pps * Pph) -
        2 * I.H * Pps;
  return I;
}

inline std::vector<NamedIntegral> taubnut_integral_set(double m) {
  return {{"K", [m](const PhasePoint& p) { return taubnut_integrals(p, m).K; }},
          {"L", [m](const PhasePoint& p) { return taubnut_integrals(p, m).L; }},
          {"H", [m](const PhasePoint& p) { return taubnut_integrals(p, m).H; }},
          {"W", [m](const PhasePoint& p) { return taubnut_integrals(p, m).W; }}};
}

inline PhasePoint phase_point(const Model& M, const Vec& x, const Vec& u, double e) {
  return {x, metric_at(M, x) * u, e};
}

// W two-form of Taub-NUT, chart components
inline Mat taubnut_W(const Vec& x, double m) {
  const double r = x[0], st = std::sin(x[1]), ct = std::cos(x[1]);
  Mat W = Mat::Zero(4, 4);
  // -(r+m) dr ^ (dpsi + m cos dphi) + r (r+m)^2 sin dtheta ^ dphi
  W(0, 3) = -(r + m);
  W(0, 2) = -(r + m) * m * ct;
  W(1, 2) = r * (r + m) * (r + m) * st;
  return W - W.transpose();
}

// velocity form: e W_ac F_b^c u^a u^b - 2 H K.u with F_b^c = F_bd g^dc
inline double taubnut_W_velocity(const TaubNUT& M, const Vec& x, const Vec& u, double e) {
  const Mat g = metric_at(M, x);
  const Mat gi = inverse_metric_at(M, x);
  const Mat W = taubnut_W(x, M.m());
  const Mat F = taubnut_F(M, x);
  const double H = 0.5 * u.dot(g * u);
  const double Ku = g.row(3).dot(u);
  const Vec w = W.transpose() * u;  // w_c = u^a W_ac
  const Vec f = gi * (F * u);       // f^c = g^cd F_db u^b
  return -e * w.dot(f) - 2 * H * Ku;
}

}  // namespace cgf
