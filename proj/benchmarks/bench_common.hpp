#pragma once

#include <random>

#include "orthonewton/geometry.hpp"

namespace bench {

inline orthonewton::Matrix gaussian(orthonewton::Index rows, orthonewton::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  orthonewton::Matrix m(rows, cols);
  for (orthonewton::Index j = 0; j < cols; ++j) {
    for (orthonewton::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  }
  return m;
}

inline orthonewton::GrassmannTangent tangent(const orthonewton::StiefelPoint& u, std::uint64_t seed) {
  return orthonewton::project_tangent(u, gaussian(u.ambient_dim(), u.frame_width(), seed));
}

}  // namespace bench
