#pragma once

#include <functional>
#include <limits>

#include "cgf/geometry.hpp"

// Central finite differences used as independent oracles.
namespace cgf::fd {

using ScalarField = std::function<double(const Vec&)>;
using VectorField = std::function<Vec(const Vec&)>;
using MatrixField = std::function<Mat(const Vec&)>;

inline double step(double x, double base = 1e-5) { return base * std::max(1.0, std::abs(x)); }

template <class F>
auto partial(const F& f, const Vec& x, int k, double base = 1e-5) {
  const double h = step(x[k], base);
  Vec xp = x, xm = x;
  xp[k] += h;
  xm[k] -= h;
  return ((f(xp) - f(xm)) / (2.0 * h)).eval();
}

inline double partial_scalar(const ScalarField& f, const Vec& x, int k, double base = 1e-5) {
  const double h = step(x[k], base);
  Vec xp = x, xm = x;
  xp[k] += h;
  xm[k] -= h;
  return (f(xp) - f(xm)) / (2.0 * h);
}

inline Vec gradient(const ScalarField& f, const Vec& x, double base = 1e-5) {
  Vec g(x.size());
  for (int k = 0; k < x.size(); ++k) g[k] = partial_scalar(f, x, k, base);
  return g;
}

inline Christoffel christoffel(const Model& M, const Vec& x) {
  const int n = M.dim();
  const Mat g = metric_at(M, x);
  std::vector<Mat> dg(n);
  for (int k = 0; k < n; ++k) dg[k] = partial([&](const Vec& y) { return metric_at(M, y); }, x, k);
  return christoffel_from(g, dg);
}

// R^a_{bcd} stored as R[a][b](c, d), Christoffel derivatives by central differences
inline std::vector<std::vector<Mat>> riemann(const Model& M, const Vec& x, double base = 1e-3) {
  const int n = M.dim();
  const Christoffel G = christoffel_at(M, x);
  std::vector<Christoffel> dG(n);
  for (int k = 0; k < n; ++k) {
    // fourth-order stencil on the exact Christoffels
    const double h = step(x[k], base);
    auto at = [&](double t) {
      Vec y = x;
      y[k] += t;
      return christoffel_at(M, y);
    };
    const Christoffel G2p = at(2 * h), Gp = at(h), Gm = at(-h), G2m = at(-2 * h);
    dG[k].resize(n);
    for (int a = 0; a < n; ++a) dG[k][a] = (G2m[a] - 8.0 * Gm[a] + 8.0 * Gp[a] - G2p[a]) / (12.0 * h);
  }
  std::vector<std::vector<Mat>> R(n, std::vector<Mat>(n, Mat::Zero(n, n)));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          double s = dG[c][a](d, b) - dG[d][a](c, b);
          for (int e = 0; e < n; ++e) s += G[a](c, e) * G[e](d, b) - G[a](d, e) * G[e](c, b);
          R[a][b](c, d) = s;
        }
  return R;
}

inline Mat ricci(const Model& M, const Vec& x) {
  const int n = M.dim();
  const auto R = riemann(M, x);
  Mat Ric = Mat::Zero(n, n);
  for (int b = 0; b < n; ++b)
    for (int d = 0; d < n; ++d)
      for (int a = 0; a < n; ++a) Ric(b, d) += R[a][b](a, d);
  return Ric;
}

// (dA)_{mn} = d_m A_n - d_n A_m
inline Mat exterior_d1(const VectorField& A, const Vec& x, double base = 1e-5) {
  const int n = static_cast<int>(x.size());
  std::vector<Vec> dA(n);
  for (int k = 0; k < n; ++k) dA[k] = partial(A, x, k, base);
  Mat F(n, n);
  for (int m = 0; m < n; ++m)
    for (int k = 0; k < n; ++k) F(m, k) = dA[m][k] - dA[k][m];
  return F;
}

// (dF)_{abc} = d_a F_bc + d_b F_ca + d_c F_ab, returned as the max abs component
inline double exterior_d2_norm(const MatrixField& F, const Vec& x, double base = 1e-5) {
  const int n = static_cast<int>(x.size());
  std::vector<Mat> dF(n);
  for (int k = 0; k < n; ++k) dF[k] = partial(F, x, k, base);
  double mx = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      for (int c = b + 1; c < n; ++c)
        mx = std::max(mx, std::abs(dF[a](b, c) + dF[b](c, a) + dF[c](a, b)));
  return mx;
}

// nabla_a Y_bc stored as out[a](b, c)
inline std::vector<Mat> covariant_derivative_2form(const Model& M, const MatrixField& Y, const Vec& x,
                                                   double base = 1e-5) {
  const int n = M.dim();
  const Christoffel G = christoffel_at(M, x);
  const Mat Y0 = Y(x);
  std::vector<Mat> out(n);
  for (int a = 0; a < n; ++a) {
    Mat D = partial(Y, x, a, base);
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) D(b, c) -= G[d](a, b) * Y0(d, c) + G[d](a, c) * Y0(b, d);
    out[a] = D;
  }
  return out;
}

// (L_K g)_{mn}
inline Mat lie_metric(const Model& M, const VectorField& K, const Vec& x, double base = 1e-5) {
  const int n = M.dim();
  auto [g, dg] = metric_jet(M, x);
  const Vec k = K(x);
  std::vector<Vec> dK(n);
  for (int m = 0; m < n; ++m) dK[m] = partial(K, x, m, base);
  Mat L = Mat::Zero(n, n);
  for (int m = 0; m < n; ++m)
    for (int v = 0; v < n; ++v) {
      double s = 0.0;
      for (int r = 0; r < n; ++r) s += k[r] * dg[r](m, v) + g(r, v) * dK[m][r] + g(m, r) * dK[v][r];
      L(m, v) = s;
    }
  return L;
}

// (L_K W)_{mn} for a two-form field W
inline Mat lie_2form(const MatrixField& W, const VectorField& K, const Vec& x, double base = 1e-5) {
  const int n = static_cast<int>(x.size());
  const Mat W0 = W(x);
  const Vec k = K(x);
  std::vector<Vec> dK(n);
  std::vector<Mat> dW(n);
  for (int m = 0; m < n; ++m) {
    dK[m] = partial(K, x, m, base);
    dW[m] = partial(W, x, m, base);
  }
  Mat L = Mat::Zero(n, n);
  for (int m = 0; m < n; ++m)
    for (int v = 0; v < n; ++v) {
      double s = 0.0;
      for (int r = 0; r < n; ++r) s += k[r] * dW[r](m, v) + W0(r, v) * dK[m][r] + W0(m, r) * dK[v][r];
      L(m, v) = s;
    }
  return L;
}

// (L_K A)_m for a one-form field A
inline Vec lie_1form(const VectorField& A, const VectorField& K, const Vec& x, double base = 1e-5) {
  const int n = static_cast<int>(x.size());
  const Vec A0 = A(x);
  const Vec k = K(x);
  Vec L = Vec::Zero(n);
  for (int r = 0; r < n; ++r) {
    L += k[r] * partial(A, x, r, base);
    L[r] += A0.dot(partial(K, x, r, base));
  }
  return L;
}

}  // namespace cgf::fd
