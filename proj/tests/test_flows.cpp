#include <gtest/gtest.h>

#include <random>

#include "cgf/flows.hpp"
#include "support.hpp"

using namespace cgf;
using namespace cgf::testing;

namespace {

IntegratorConfig tight() {
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-11;
  cfg.abs_tol = 1e-13;
  return cfg;
}

}  // namespace

TEST(Flows, FlatCircleMatchesClosedForm) {
  Flat4 M;
  std::mt19937 rng(11);
  for (int k = 0; k < 5; ++k) {
    const CGState st = random_state(M, Vec::Zero(4), 0.5 + k * 0.3, rng);
    const auto tr = integrate(M, {FlowKind::Conformal}, st, 0.0, 20.0, tight());
    ASSERT_EQ(tr.status, IntegrationStatus::Completed);
    double err = 0.0;
    for (const auto& s : tr.samples) err = std::max(err, (s.state.x - flat_circle(st.x, st.u, st.a, s.s)).norm());
    EXPECT_LT(err, 1e-7);
  }
}

TEST(Flows, StraightLineWhenAccelerationVanishes) {
  Flat4 M;
  Vec u = Vec::Zero(4);
  u[0] = 1.0;
  const auto tr = integrate(M, {FlowKind::Conformal}, {Vec::Zero(4), u, Vec::Zero(4)}, 0.0, 5.0, tight());
  EXPECT_NEAR(tr.samples.back().state.x[0], 5.0, 1e-12);
  EXPECT_LT(tr.samples.back().state.a.norm(), 1e-14);
}

TEST(Flows, ConformalPreservesConstraintsAndAccelerationNorm) {
  std::mt19937 rng(12);
  for (const auto& M : {make_taub_nut(1.0), make_eguchi_hanson(1.0), make_cp2()}) {
    for (int k = 0; k < 3; ++k) {
      const CGState st = random_state(*M, random_point(*M, rng), 0.7, rng);
      const auto tr = integrate(*M, {FlowKind::Conformal}, st, 0.0, 10.0, IntegratorConfig{}, {accel_norm_monitor()});
      EXPECT_LT(tr.max_drift(0), 1e-7) << M->name() << " " << tr.message;
      for (const auto& s : tr.samples) {
        EXPECT_LT(std::abs(s.norm_residual), 1e-9);
        EXPECT_LT(std::abs(s.orth_residual), 1e-8);
      }
    }
  }
}

TEST(Flows, AccelerationFromCIsIsometry) {
  std::mt19937 rng(13);
  for (const auto& M : {make_taub_nut(1.0), make_eguchi_hanson(1.0), make_flat4()}) {
    const Vec x = random_point(*M, rng);
    const CGState st = random_state(*M, x, 1.3, rng);
    const Vec3 c = c_from_acceleration(*M, x, st.u, st.a);
    EXPECT_NEAR(c.norm(), 1.3, 1e-12);
    EXPECT_LT((acceleration_from_c(*M, x, st.u, c) - st.a).norm(), 1e-12);
  }
  EXPECT_THROW(c_from_acceleration(CP2{}, Vec::Ones(4), Vec::Ones(4), Vec::Ones(4)), UnsupportedError);
}

TEST(Flows, LorentzAgreesWithThirdOrderFlow) {
  std::mt19937 rng(14);
  for (const auto& M : {make_taub_nut(1.0), make_eguchi_hanson(1.0)}) {
    const CGState st = random_state(*M, random_point(*M, rng), 0.6, rng);
    const Vec3 c = c_from_acceleration(*M, st.x, st.u, st.a);
    IntegratorConfig cfg = tight();
    cfg.sample_ds = 0.5;
    const auto A = integrate(*M, {FlowKind::Conformal}, st, 0.0, 5.0, cfg);
    const auto B = integrate(*M, {FlowKind::Lorentz, c}, st, 0.0, 5.0, cfg);
    ASSERT_EQ(A.samples.size(), B.samples.size());
    double err = 0.0;
    for (size_t i = 0; i < A.samples.size(); ++i) err = std::max(err, (A.samples[i].state.x - B.samples[i].state.x).norm());
    EXPECT_LT(err, 1e-6) << M->name();
  }
}

TEST(Flows, HalfPlaneRegimes) {
  EXPECT_EQ(halfplane_classify(0.5).regime, HalfPlaneRegime::OpenUnbounded);
  EXPECT_EQ(halfplane_classify(1.0).regime, HalfPlaneRegime::Horocircle);
  EXPECT_EQ(halfplane_classify(3.0).regime, HalfPlaneRegime::Closed);
  EXPECT_DOUBLE_EQ(halfplane_classify(3.0).radius, 1.0 / 3.0);
  EXPECT_THROW(halfplane_classify(0.0), DomainError);
}

TEST(Flows, HalfPlaneClosedOrbitRadius) {
  HalfPlane M;
  const CGState st = halfplane_initial(3.0);
  IntegratorConfig cfg = tight();
  cfg.sample_ds = 0.01;
  const auto tr = integrate(M, {FlowKind::Magnetic, Vec3::Zero(), 3.0}, st, 0.0, 4.0, cfg);
  std::vector<Eigen::Vector2d> pts;
  for (const auto& s : tr.samples) pts.emplace_back(s.state.x[0], s.state.x[1]);
  const CircleFit fit = fit_circle(pts);
  EXPECT_NEAR(fit.radius / fit.yc, 1.0 / 3.0, 1e-6);
  EXPECT_LT(fit.rms, 1e-7);
}

TEST(Flows, HalfPlaneOpenOrbitReachesBoundary) {
  HalfPlane M;
  const auto tr = integrate(M, {FlowKind::Magnetic, Vec3::Zero(), 0.5}, halfplane_initial(0.5), 0.0, 200.0, IntegratorConfig{});
  double ymin = 1e300;
  for (const auto& s : tr.samples) ymin = std::min(ymin, s.state.x[1]);
  EXPECT_LT(ymin, 1e-6);
}

TEST(Flows, HalfPlaneMagneticIsNotOnOtherModels) {
  EXPECT_THROW(magnetic_rhs(Flat4{}, Vec::Zero(4), Vec::Zero(4), 1.0), UnsupportedError);
  EXPECT_THROW(lorentz_rhs(CP2{}, {Vec::Ones(4), Vec::Ones(4), Vec3::Zero()}), UnsupportedError);
}
