#pragma once

#include <random>

#include "cgf/flows.hpp"
#include "cgf/geometry.hpp"
#include "cgf/sampling.hpp"

namespace cgf::testing {

inline Vec random_point(const Model& M, std::mt19937& rng) { return sample_point(M, rng); }

inline std::vector<ModelPtr> all_models() {
  return {make_flat4(), make_half_plane(), make_taub_nut(1.0), make_eguchi_hanson(1.0), make_cp2(),
          make_gibbons_hawking(0.0, {{Vec3(0, 0, -1), 1.0}, {Vec3(0, 0, 1), 1.0}})};
}

inline Vec random_unit_frame(int n, std::mt19937& rng) { return sample_unit(n, rng); }

// unit u and a orthogonal to u with |a| = amag, chart components
inline CGState random_state(const Model& M, const Vec& x, double amag, std::mt19937& rng) {
  const int n = M.dim();
  const Mat F = frame_at(M, x);
  const Vec uf = random_unit_frame(n, rng);
  Vec af = random_unit_frame(n, rng);
  af -= af.dot(uf) * uf;
  af *= amag / af.norm();
  return {x, F * uf, F * af};
}

inline Vec3 random_c(double mag, std::mt19937& rng) {
  const Vec v = random_unit_frame(3, rng);
  return mag * Vec3(v[0], v[1], v[2]);
}

}  // namespace cgf::testing
