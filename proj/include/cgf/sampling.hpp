#pragma once

#include <random>

#include "cgf/geometry.hpp"

namespace cgf {

// a random point inside the region where each model's chart is well conditioned
inline Vec sample_point(const Model& M, std::mt19937& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  Vec x(M.dim());
  switch (M.kind()) {
    case ModelKind::Flat4: for (int i = 0; i < 4; ++i) x[i] = 4 * U(rng) - 2; break;
    case ModelKind::HalfPlane: x << 4 * U(rng) - 2, 0.2 + 3 * U(rng); break;
    case ModelKind::TaubNUT:
    case ModelKind::CP2: x << 0.3 + 3 * U(rng), 0.2 + 2.7 * U(rng), 2 * kPi * U(rng), 4 * kPi * U(rng); break;
    case ModelKind::EguchiHanson: x << 1.05 + 3 * U(rng), 0.2 + 2.7 * U(rng), 2 * kPi * U(rng), 2 * kPi * U(rng); break;
    case ModelKind::GibbonsHawking: x << 0.3 + U(rng), 0.3 + U(rng), 2 * U(rng) - 1, 3 * U(rng); break;
  }
  return x;
}

// unit frame vector with Gaussian direction
inline Vec sample_unit(int n, std::mt19937& rng) {
  std::normal_distribution<double> N(0.0, 1.0);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = N(rng);
  return v / v.norm();
}

}  // namespace cgf
