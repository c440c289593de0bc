#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "cgf/fd.hpp"
#include "cgf/geometry.hpp"

namespace cgf {

struct NullKillingError : DomainError {
  using DomainError::DomainError;
};

// max |L_K g| over the points
inline double killing_residual(const Model& M, const KillingField& K, const std::vector<Vec>& pts) {
  double mx = 0.0;
  for (const auto& x : pts) mx = std::max(mx, fd::lie_metric(M, K.at, x).cwiseAbs().maxCoeff());
  return mx;
}

// frame components of K^flat, d(K^flat) and d|K|^2 at x
struct KillingJet {
  Vec k, dnorm2;
  Mat dk;
};

inline KillingJet killing_jet(const Model& M, const KillingField& K, const Vec& x) {
  const fd::VectorField flat = [&M, &K](const Vec& y) -> Vec { return metric_at(M, y) * K.at(y); };
  const fd::ScalarField norm2 = [&M, &K](const Vec& y) { const Vec k = K.at(y); return k.dot(metric_at(M, y) * k); };
  const Mat E = M.coframe_at(x);
  const Mat Ei = E.inverse();
  return {Ei.transpose() * flat(x), Ei.transpose() * fd::gradient(norm2, x), form_to_frame(E, fd::exterior_d1(flat, x))};
}

// W = *(K ^ dK) as a frame one-form
inline Vec killing_twist(const Vec& k, const Mat& dk) {
  auto sign = [](int a, int b, int c, int d) {
    int p[4] = {a, b, c, d}, s = 1;
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) {
        if (p[i] == p[j]) return 0;
        if (p[i] > p[j]) s = -s;
      }
    return s;
  };
  Vec W = Vec::Zero(4);
  for (int d = 0; d < 4; ++d)
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int c = 0; c < 4; ++c) {
          const int s = sign(a, b, c, d);
          if (s != 0) W[d] += 0.5 * s * k[a] * dk(b, c);
        }
  return W;
}

// frame components of the two-form d|K|^2 ^ W
inline Mat killing_cg_form(const Model& M, const KillingField& K, const Vec& x) {
  M.check(x);
  const Vec k = K.at(x);
  const double n2 = k.dot(metric_at(M, x) * k);
  if (!(n2 > 1e-14)) throw NullKillingError("killing_cg_criterion: " + K.name + " is null at the point");
  const auto J = killing_jet(M, K, x);
  const Vec W = killing_twist(J.k, J.dk);
  return J.dnorm2 * W.transpose() - W * J.dnorm2.transpose();
}

// |d|K|^2 ^ W| / |K|^4: invariant under K -> cK, zero iff the trajectories of K through x are
// conformal geodesics, and four times the failure of the unit-speed orbit to be one
inline double killing_cg_criterion(const Model& M, const KillingField& K, const Vec& x) {
  const Mat C = killing_cg_form(M, K, x);
  const Vec k = K.at(x);
  const double n2 = k.dot(metric_at(M, x) * k);
  return std::sqrt(0.5) * C.norm() / (n2 * n2);
}

// max over points and i of |L_K Omega^i|
inline double triholomorphic_residual(const Model& M, const KillingField& K, const std::vector<Vec>& pts) {
  if (!M.hyperkahler()) throw UnsupportedError("triholomorphic_residual: " + M.name() + " is not hyper-Kahler");
  double mx = 0.0;
  for (const auto& x : pts)
    for (int i = 0; i < 3; ++i) {
      const fd::MatrixField Om = [&M, i](const Vec& y) -> Mat { return sd_two_forms_at(M, y)[i].components; };
      mx = std::max(mx, fd::lie_2form(Om, K.at, x).cwiseAbs().maxCoeff());
    }
  return mx;
}

// largest self-dual frame component of d(K^flat); zero when dK^flat is anti-self-dual
inline double self_dual_part(const Model& M, const KillingField& K, const Vec& x) {
  const Mat F = killing_jet(M, K, x).dk;
  return (0.5 * (F + hodge_frame(F))).cwiseAbs().maxCoeff();
}

struct MomentMapReport {
  double residual = 0.0;  // max |K _| Omega^i - scale dx^i|
  double scale = 0.0;     // least-squares fit over all points and i
  int points = 0;
};

// K = d_tau on a Gibbons-Hawking model; the moment maps are the flat coordinates up to scale
inline MomentMapReport moment_map_residual(const GibbonsHawking& M, const std::vector<Vec>& pts) {
  std::vector<std::array<Vec, 3>> contractions;
  double num = 0.0, den = 0.0;
  for (const auto& x : pts) {
    M.check(x);
    const auto O = sd_two_forms_at(M, x);
    std::array<Vec, 3> c;
    for (int i = 0; i < 3; ++i) {
      c[i] = O[i].components.row(3).transpose();
      num += c[i][i];
      den += 1.0;
    }
    contractions.push_back(c);
  }
  MomentMapReport r;
  r.points = static_cast<int>(pts.size());
  if (den == 0.0) return r;
  r.scale = num / den;
  for (const auto& c : contractions)
    for (int i = 0; i < 3; ++i) {
      Vec dx = Vec::Zero(4);
      dx[i] = r.scale;
      r.residual = std::max(r.residual, (c[i] - dx).cwiseAbs().maxCoeff());
    }
  return r;
}

// monopole equation d omega = *dV on R^3
using ScalarField3 = std::function<double(const Vec3&)>;
using OneForm3 = std::function<Vec3(const Vec3&)>;

struct GHReport {
  double residual = 0.0;
  int checked = 0;
  std::vector<std::string> warnings;
};

inline GHReport gh_check(const ScalarField3& V, const OneForm3& omega, const std::vector<Vec3>& pts,
                         const std::vector<Vec3>& centers = {}, double min_dist = 1e-3) {
  GHReport rep;
  const fd::ScalarField Vx = [&V](const Vec& y) { return V(Vec3(y[0], y[1], y[2])); };
  const fd::VectorField wx = [&omega](const Vec& y) -> Vec { return omega(Vec3(y[0], y[1], y[2])); };
  for (const auto& p : pts) {
    // omega of an axial configuration is singular on the axis through the centres
    bool skip = !centers.empty() && std::hypot(p.x(), p.y()) < min_dist;
    for (const auto& c : centers) skip = skip || (p - c).norm() < min_dist;
    const Vec y = p;
    if (skip || !std::isfinite(V(p)) || !omega(p).allFinite()) {
      rep.warnings.push_back("skipped sample near a centre or the axis: (" + std::to_string(p.x()) + ", " +
                             std::to_string(p.y()) + ", " + std::to_string(p.z()) + ")");
      continue;
    }
    const Vec g = fd::gradient(Vx, y);
    const Mat dw = fd::exterior_d1(wx, y);
    rep.residual = std::max({rep.residual, std::abs(dw(1, 2) - g[0]), std::abs(dw(2, 0) - g[1]), std::abs(dw(0, 1) - g[2])});
    ++rep.checked;
  }
  return rep;
}

inline GHReport gh_check(const GibbonsHawking& M, const std::vector<Vec3>& pts, double min_dist = 1e-3) {
  std::vector<Vec3> centers;
  for (const auto& c : M.centers()) centers.push_back(c.position);
  return gh_check([&M](const Vec3& p) { return M.V(p); }, [&M](const Vec3& p) { return M.omega(p); }, pts, centers,
                  min_dist);
}

}  // namespace cgf
