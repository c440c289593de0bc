#include <gtest/gtest.h>

#include <random>

#include "cgf/taubnut.hpp"
#include "support.hpp"

using namespace cgf;
using namespace cgf::testing;

namespace {

std::vector<Vec> sample_points(const Model& M, int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::vector<Vec> pts;
  for (int i = 0; i < n; ++i) pts.push_back(random_point(M, rng));
  return pts;
}

Trajectory charged_trajectory(const TaubNUT& M, const Vec& x, std::mt19937& rng, double e, double span,
                              double ds = 0.05) {
  const CGState st = random_state(M, x, 0.0, rng);
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-12;
  cfg.abs_tol = 1e-14;
  cfg.sample_ds = ds;
  return integrate(M, {FlowKind::Lorentz, Vec3(0, 0, e)}, st, 0.0, span, cfg);
}

}  // namespace

TEST(TaubNUT, ParabolicRoundTrip) {
  Vec x(4);
  x << 1.7, 0.9, 0.3, 2.0;
  const auto p = to_parabolic(x);
  EXPECT_NEAR(p.eta + p.xi, 2 * 1.7, 1e-14);
  EXPECT_LT((from_parabolic(p) - x).norm(), 1e-13);
  x[0] = -1.0;
  EXPECT_THROW(to_parabolic(x), DomainError);
}

TEST(TaubNUT, SigmaStructureEquations) {
  for (const auto& x : sample_points(TaubNUT(1.0), 20, 31)) EXPECT_LT(sigma_structure_residual(x), 1e-8);
}

TEST(TaubNUT, YAndWAreConformalKillingYano) {
  for (double m : {1.0, 0.7}) {
    TaubNUT M(m);
    const auto pts = sample_points(M, 20, 32);
    EXPECT_LT(cky_residual(M, taubnut_cky_Y(M), pts), 1e-6);
    EXPECT_LT(cky_residual(M, taubnut_cky_W(M), pts), 1e-6);
  }
}

TEST(TaubNUT, DivergenceOneFormIsDpsiDual) {
  TaubNUT M(1.0);
  for (const auto& x : sample_points(M, 10, 33)) {
    const Vec K = taubnut_K(M, x);
    EXPECT_LT((cky_divergence_oneform(M, [](const Vec& y) { return taubnut_Y(y, 1.0); }, x) - K).norm(), 1e-6);
    EXPECT_LT((cky_divergence_oneform(M, [](const Vec& y) { return taubnut_W(y, 1.0); }, x) - K).norm(), 1e-6);
  }
}

TEST(TaubNUT, ZIsKillingYano) {
  for (double m : {1.0, 0.5, 2.0}) {
    TaubNUT M(m);
    const auto pts = sample_points(M, 20, 34);
    EXPECT_LT(cky_residual(M, taubnut_ky_Z(m), pts), 1e-6);
    for (const auto& x : pts)
      EXPECT_LT(cky_divergence_oneform(M, [m](const Vec& y) { return taubnut_Z(y, m); }, x).norm(), 1e-6);
  }
}

TEST(TaubNUT, PrintedZMatchesOnlyAtUnitMass) {
  for (const auto& x : sample_points(TaubNUT(1.0), 10, 35))
    EXPECT_LT((taubnut_Z_printed(x, 1.0) + taubnut_Z(x, 1.0)).cwiseAbs().maxCoeff(), 1e-12);
  TaubNUT M(2.0);
  const CKYData printed{"Zp", [](const Vec& y) { return taubnut_Z_printed(y, 2.0); }, {}};
  EXPECT_GT(cky_residual(M, printed, sample_points(M, 5, 36)), 1e-2);
}

TEST(TaubNUT, QuarticCoefficientConventions) {
  SeparationConstants c{0.3, -0.4, 0.0, 1.0, 0.6, 1.2};
  SeparationConstants cm = c;
  cm.e = -c.e;
  for (double Q : {0.0, 1.3}) {
    const auto a = quartic_coeffs(c.E, Q, c), b = quartic_coeffs_printed(c.E, Q, cm);
    for (int i = 0; i < 5; ++i) EXPECT_NEAR(a[i], b[i], 1e-14);
  }
  c.e = 0.0;
  const auto u = quartic_coeffs(c.E, 0.5, c);
  EXPECT_EQ(u[3], 0.0);
  EXPECT_EQ(u[4], 0.0);
  EXPECT_NEAR(u[0], -4 * std::pow(c.J + c.E * c.m, 2), 1e-15);
}

TEST(TaubNUT, QuarticUThrowsBeyondTurningPoint) {
  SeparationConstants c{1.0, 2.0, 0.0, 1.0, 0.0, 1.0};
  EXPECT_THROW(quartic_U(0.0, c.E, c.Q, c), TurningPointError);
}

TEST(TaubNUT, HamiltonJacobiResidualAlongChargedTrajectories) {
  std::mt19937 rng(37);
  for (double m : {1.0, 0.8}) {
    TaubNUT M(m);
    for (int k = 0; k < 4; ++k) {
      const double e = 0.3 + 0.3 * k;
      const auto tr = charged_trajectory(M, random_point(M, rng), rng, e, 20.0);
      const auto ex = extract_constants(M, tr, e);
      EXPECT_NEAR(ex.Q_xi, -ex.consts.Q, 1e-8);
      EXPECT_LT(hj_residual(tr, ex.consts).max(), 1e-6) << "m=" << m << " e=" << e;
    }
  }
}

TEST(TaubNUT, UnchargedSeparationUsesPlainQuartic) {
  std::mt19937 rng(38);
  TaubNUT M(1.0);
  const auto tr = charged_trajectory(M, random_point(M, rng), rng, 0.0, 15.0);
  const auto ex = extract_constants(M, tr, 0.0);
  EXPECT_LT(hj_residual(tr, ex.consts).max(), 1e-6);
}

TEST(TaubNUT, QuadraturesAgreeOnMonotoneSegments) {
  std::mt19937 rng(39);
  TaubNUT M(1.0);
  int checked = 0;
  for (int k = 0; k < 4; ++k) {
    const double e = 0.5;
    const auto tr = charged_trajectory(M, random_point(M, rng), rng, e, 20.0, 0.01);
    const auto ex = extract_constants(M, tr, e);
    for (auto [i0, i1] : monotone_segments(tr)) {
      if (i1 - i0 < 20) continue;
      // keep away from the turning points, where the integrands blow up
      const size_t a = i0 + 2, b = i1 - 2;
      const auto p0 = to_parabolic(tr.samples[a].state.x), p1 = to_parabolic(tr.samples[b].state.x);
      const auto q = unparam_quadrature(p0.eta, p1.eta, p0.xi, p1.xi, ex.consts);
      EXPECT_LT(q.mismatch(), 1e-6);
      ++checked;
    }
  }
  EXPECT_GT(checked, 0);
}

TEST(TaubNUT, QuadratureRejectsTurningPointInside) {
  SeparationConstants c{0.2, 0.1, 0.3, 1.0, 0.0, 1.0};
  const auto roots = quartic_turning_points(c.E, c.Q, c, 1e-6, 50.0);
  ASSERT_FALSE(roots.empty());
  for (double r : roots) EXPECT_NEAR(quartic_radicand(r, c.E, c.Q, c), 0.0, 1e-8);
  EXPECT_THROW(unparam_quadrature(roots.front() - 0.5, roots.front() + 0.5, 1.0, 1.0, c), TurningPointError);
  EXPECT_EQ(unparam_quadrature(1.0, 1.0, 2.0, 2.0, c).eta_integral, 0.0);
}
