#include <gtest/gtest.h>

#include <random>

#include "cgf/invariants.hpp"
#include "cgf/taubnut.hpp"
#include "support.hpp"

using namespace cgf;
using namespace cgf::testing;

namespace {

PhasePoint random_phase_point(const TaubNUT& M, std::mt19937& rng, double e) {
  std::normal_distribution<double> N(0.0, 1.0);
  const Vec x = random_point(M, rng);
  Vec P(4);
  for (int i = 0; i < 4; ++i) P[i] = N(rng);
  return {x, P, e};
}

}  // namespace

TEST(Invariants, CanonicalBracketOnFlatSpace) {
  PhasePoint pp{Vec::Zero(2), Vec::Zero(2), 0.0};
  pp.q << 0.3, -0.7;
  pp.P << 1.1, 0.4;
  const PhaseFunction q0 = [](const PhasePoint& p) { return p.q[0]; };
  const PhaseFunction p0 = [](const PhasePoint& p) { return p.P[0]; };
  const PhaseFunction p1 = [](const PhasePoint& p) { return p.P[1]; };
  EXPECT_NEAR(poisson_bracket(q0, p0, pp, {}), 1.0, 1e-10);
  EXPECT_NEAR(poisson_bracket(q0, p1, pp, {}), 0.0, 1e-12);
  pp.e = 2.0;
  const FieldStrength F = [](const Vec&) {
    Mat f = Mat::Zero(2, 2);
    f(0, 1) = 1.5;
    f(1, 0) = -1.5;
    return f;
  };
  EXPECT_NEAR(poisson_bracket(p0, p1, pp, F), 3.0, 1e-9);
}

TEST(Invariants, BracketIsAntisymmetric) {
  std::mt19937 rng(21);
  TaubNUT M(1.0);
  const auto I = taubnut_integral_set(1.0);
  const FieldStrength F = [&M](const Vec& x) { return taubnut_F(M, x); };
  for (int k = 0; k < 10; ++k) {
    const PhasePoint pp = random_phase_point(M, rng, 0.7);
    const PhaseFunction f = [](const PhasePoint& p) { return p.q[0] * p.P[1] + std::sin(p.q[1]) * p.P[2] * p.P[2]; };
    EXPECT_NEAR(poisson_bracket(f, I[2].f, pp, F), -poisson_bracket(I[2].f, f, pp, F), 1e-8);
  }
}

TEST(Invariants, BracketRejectsNonFinite) {
  PhasePoint pp{Vec::Zero(1), Vec::Zero(1), 0.0};
  const PhaseFunction bad = [](const PhasePoint& p) { return std::log(p.q[0]); };
  EXPECT_THROW(poisson_bracket(bad, bad, pp, {}), NumericError);
}

TEST(Invariants, PotentialGeneratesMinusOmega3) {
  std::mt19937 rng(22);
  for (double m : {0.5, 1.0, 2.0}) {
    TaubNUT M(m);
    for (int k = 0; k < 20; ++k) {
      const Vec x = random_point(M, rng);
      const Mat dPhi = fd::exterior_d1([m](const Vec& y) { return taubnut_Phi(y, m); }, x);
      EXPECT_LT((dPhi - taubnut_F(M, x)).cwiseAbs().maxCoeff(), 1e-8);
    }
  }
}

TEST(Invariants, TaubNUTIntegralsInvolution) {
  std::mt19937 rng(23);
  for (double m : {1.0, 0.6}) {
    TaubNUT M(m);
    const FieldStrength F = [&M](const Vec& x) { return taubnut_F(M, x); };
    std::vector<PhasePoint> pts;
    for (int k = 0; k < 20; ++k) pts.push_back(random_phase_point(M, rng, 0.8));
    EXPECT_LT(involution_matrix(taubnut_integral_set(m), pts, F), 1e-5);
  }
}

TEST(Invariants, HamiltonianIsHalfInverseMetric) {
  std::mt19937 rng(24);
  TaubNUT M(1.0);
  for (int k = 0; k < 20; ++k) {
    const PhasePoint pp = random_phase_point(M, rng, 0.3);
    EXPECT_NEAR(taubnut_integrals(pp, 1.0).H, 0.5 * pp.P.dot(inverse_metric_at(M, pp.q) * pp.P), 1e-10);
  }
}

TEST(Invariants, IntegralsConservedAlongChargedTrajectories) {
  std::mt19937 rng(25);
  TaubNUT M(1.0);
  for (int k = 0; k < 4; ++k) {
    const Vec x = random_point(M, rng);
    const CGState st = random_state(M, x, 0.0, rng);
    const double e = 0.4 + 0.2 * k;
    const Vec3 c(0, 0, e);
    std::vector<Monitor> mons;
    for (const auto& I : taubnut_integral_set(1.0))
      mons.push_back({I.name, [f = I.f, e](const Model& Mo, const CGState& s) { return f(phase_point(Mo, s.x, s.u, e)); }});
    mons.push_back({"Wv", [e](const Model& Mo, const CGState& s) {
                      return taubnut_W_velocity(static_cast<const TaubNUT&>(Mo), s.x, s.u, e);
                    }});
    const auto tr = integrate(M, {FlowKind::Lorentz, c}, st, 0.0, 20.0, IntegratorConfig{}, mons);
    for (size_t i = 0; i < mons.size(); ++i) EXPECT_LT(tr.max_drift(i), 1e-7) << mons[i].first << " " << tr.message;
    for (const auto& s : tr.samples)
      EXPECT_NEAR(s.invariants[4], s.invariants[3], 1e-8 * std::max(1.0, std::abs(s.invariants[3])));
  }
}

TEST(Invariants, ThrowsOnAxis) {
  PhasePoint pp{Vec::Zero(4), Vec::Ones(4), 1.0};
  pp.q << 1.0, 0.0, 0.0, 0.0;
  EXPECT_THROW(taubnut_integrals(pp, 1.0), DomainError);
}

TEST(Invariants, CKYFirstIntegralAlongConformalGeodesics) {
  std::mt19937 rng(26);
  TaubNUT M(1.0);
  const auto Y = taubnut_cky_Y(M), W = taubnut_cky_W(M);
  for (int k = 0; k < 3; ++k) {
    const CGState st = random_state(M, random_point(M, rng), 0.5, rng);
    const auto tr = integrate(M, {FlowKind::Conformal}, st, 0.0, 20.0, IntegratorConfig{}, {cky_monitor(Y), cky_monitor(W)});
    EXPECT_LT(tr.max_drift(0), 1e-7);
    EXPECT_LT(tr.max_drift(1), 1e-7);
  }
}
