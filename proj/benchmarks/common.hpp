#pragma once

#include "sacl/matrix.hpp"
#include "sacl/rng.hpp"

namespace sacl::bench {

inline Matrix gaussian(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  RngStream rng(seed);
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.normal();
  return m;
}

}  // namespace sacl::bench
