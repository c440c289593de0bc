#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "cgf/geometry.hpp"

namespace cgf {

struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = std::numeric_limits<double>::infinity();
  double initial_step = 0.0;  // 0: automatic
  bool dense_output = true;
  bool renormalize = false;
  double sample_ds = 0.0;  // 0: one sample per accepted step
  double event_tol = 1e-10;
  long max_steps = 5'000'000;
};

enum class IntegrationStatus { Completed, ChartExit, StepUnderflow, MaxSteps };

inline const char* to_string(IntegrationStatus s) {
  switch (s) {
    case IntegrationStatus::Completed: return "completed";
    case IntegrationStatus::ChartExit: return "chart_exit";
    case IntegrationStatus::StepUnderflow: return "step_underflow";
    case IntegrationStatus::MaxSteps: return "max_steps";
  }
  return "unknown";
}

struct OdeSolution {
  std::vector<double> s;
  std::vector<Vec> y;
  IntegrationStatus status = IntegrationStatus::Completed;
  std::string message;
  long steps = 0;
  long rejected = 0;
};

using OdeRhs = std::function<void(double, const Vec&, Vec&)>;
using OdeValid = std::function<bool(const Vec&)>;
using OdeProject = std::function<void(Vec&)>;

// Dormand-Prince 5(4) with Hairer's continuous extension.
class DormandPrince {
 public:
  DormandPrince(OdeRhs f, IntegratorConfig cfg) : f_(std::move(f)), cfg_(cfg) {
    if (!(cfg_.rel_tol > 0.0) || !(cfg_.abs_tol > 0.0)) throw DomainError("integrator: tolerances must be positive");
  }

  OdeSolution solve(const Vec& y0, double s0, double s1, const OdeValid& valid = {},
                    const OdeProject& project = {}) {
    OdeSolution out;
    const double dir = s1 >= s0 ? 1.0 : -1.0;
    const int n = static_cast<int>(y0.size());
    Vec y = y0, k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ynew(n), yerr(n), tmp(n);
    double s = s0;
    f_(s, y, k1);
    double h = cfg_.initial_step > 0.0 ? cfg_.initial_step : initial_step(y, k1, s, dir);
    h = std::min(h, cfg_.max_step);
    emit(out, s, y);
    double next_sample = s0 + dir * cfg_.sample_ds;
    const double hmin = 1e-14 * std::max(1.0, std::abs(s1 - s0));

    while (dir * (s1 - s) > 0.0) {
      if (out.steps + out.rejected >= cfg_.max_steps) {
        out.status = IntegrationStatus::MaxSteps;
        out.message = "maximum number of steps reached";
        break;
      }
      bool last = false;
      if (h >= std::abs(s1 - s)) {
        h = std::abs(s1 - s);
        last = true;
      }
      const double hs = dir * h;
      bool ok = true;
      try {
        tmp = y + hs * (a21 * k1); f_(s + c2 * hs, tmp, k2);
        tmp = y + hs * (a31 * k1 + a32 * k2); f_(s + c3 * hs, tmp, k3);
        tmp = y + hs * (a41 * k1 + a42 * k2 + a43 * k3); f_(s + c4 * hs, tmp, k4);
        tmp = y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4); f_(s + c5 * hs, tmp, k5);
        tmp = y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5); f_(s + hs, tmp, k6);
        ynew = y + hs * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
        f_(s + hs, ynew, k7);
        ok = ynew.allFinite() && k7.allFinite();
      } catch (const DomainError&) {
        ok = false;
      }
      double err = std::numeric_limits<double>::infinity();
      if (ok) {
        yerr = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
          const double sc = cfg_.abs_tol + cfg_.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
          acc += (yerr[i] / sc) * (yerr[i] / sc);
        }
        err = std::sqrt(acc / n);
        if (!std::isfinite(err)) ok = false;
      }
      if (!ok || err > 1.0) {
        ++out.rejected;
        const double fac = ok ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.25;
        h *= fac;
        if (h < hmin) {
          out.status = IntegrationStatus::StepUnderflow;
          out.message = "step size underflow at s=" + std::to_string(s);
          break;
        }
        continue;
      }

      // continuous extension coefficients
      std::array<Vec, 5> rc;
      rc[0] = y;
      rc[1] = ynew - y;
      rc[2] = hs * k1 - rc[1];
      rc[3] = rc[1] - hs * k7 - rc[2];
      rc[4] = hs * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
      const double s_new = last ? s1 : s + hs;
      auto dense = [&](double t) {
        const double th = (t - s) / hs, th1 = 1.0 - th;
        return Vec(rc[0] + th * (rc[1] + th1 * (rc[2] + th * (rc[3] + th1 * rc[4]))));
      };

      bool exit = valid && !valid(ynew);
      double s_end = s_new;
      Vec y_end = ynew;
      if (exit) {
        double lo = s, hi = s_new;
        while (std::abs(hi - lo) > cfg_.event_tol) {
          const double mid = 0.5 * (lo + hi);
          if (valid(dense(mid))) lo = mid; else hi = mid;
        }
        s_end = lo;
        y_end = dense(lo);
      }

      if (cfg_.sample_ds > 0.0) {
        while (dir * (s_end - next_sample) >= 0.0 && dir * (s1 - next_sample) > 0.0) {
          emit(out, next_sample, dense(next_sample));
          next_sample += dir * cfg_.sample_ds;
        }
      }

      ++out.steps;
      if (exit) {
        if (out.s.back() != s_end) emit(out, s_end, y_end);
        out.status = IntegrationStatus::ChartExit;
        out.message = "trajectory left the chart near s=" + std::to_string(s_end);
        return out;
      }

      s = s_new;
      y = ynew;
      if (cfg_.renormalize && project) {
        project(y);
        f_(s, y, k1);
      } else {
        k1 = k7;
      }
      if (cfg_.sample_ds <= 0.0 || last) {
        if (out.s.back() != s) emit(out, s, y);
      }
      const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      h = std::min(h * fac, cfg_.max_step);
    }
    return out;
  }

 private:
  void emit(OdeSolution& out, double s, const Vec& y) const {
    out.s.push_back(s);
    out.y.push_back(y);
  }

  double initial_step(const Vec& y, const Vec& f0, double s, double dir) {
    const int n = static_cast<int>(y.size());
    auto norm = [&](const Vec& v) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        const double sc = cfg_.abs_tol + cfg_.rel_tol * std::abs(y[i]);
        acc += (v[i] / sc) * (v[i] / sc);
      }
      return std::sqrt(acc / n);
    };
    const double d0 = norm(y), d1n = norm(f0);
    double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
    Vec y1 = y + dir * h0 * f0, f1(n);
    try {
      f_(s + dir * h0, y1, f1);
    } catch (const DomainError&) {
      return h0 * 1e-3;
    }
    const double d2 = norm(f1 - f0) / h0;
    const double h1 = std::max(d1n, d2) <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                                  : std::pow(0.01 / std::max(d1n, d2), 0.2);
    return std::min(100.0 * h0, h1);
  }

  OdeRhs f_;
  IntegratorConfig cfg_;

  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                          a76 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
  static constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                          d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                          d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
};

inline OdeSolution integrate_ode(const OdeRhs& f, const Vec& y0, double s0, double s1, const IntegratorConfig& cfg,
                                 const OdeValid& valid = {}, const OdeProject& project = {}) {
  DormandPrince dp(f, cfg);
  return dp.solve(y0, s0, s1, valid, project);
}

}  // namespace cgf
