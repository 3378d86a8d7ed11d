#pragma once

#include <cstdint>

#include "tcf/random.hpp"
#include "tcf/tensor.hpp"

namespace tcf::testing {

inline Matrix random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double sd = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = draw_normal(rng, 0.0, sd);
  return m;
}

inline Vector random_vector(Rng& rng, Eigen::Index n, double sd = 1.0) {
  return random_matrix(rng, n, 1, sd).col(0);
}

inline Tensor3 random_tensor(Rng& rng, Dims3 d) {
  Tensor3 t(d);
  for (std::size_t k = 0; k < d.d3; ++k)
    for (std::size_t j = 0; j < d.d2; ++j)
      for (std::size_t i = 0; i < d.d1; ++i) t(i, j, k) = draw_normal(rng, 0.0, 1.0);
  return t;
}

inline Dims3 random_dims(Rng& rng, std::size_t max_dim) {
  return {1 + draw_index(rng, max_dim), 1 + draw_index(rng, max_dim), 1 + draw_index(rng, max_dim)};
}

// Rank-r matrix u v' with standard normal factors.
inline Matrix random_low_rank(Rng& rng, Eigen::Index rows, Eigen::Index cols, Eigen::Index r) {
  return random_matrix(rng, rows, r) * random_matrix(rng, cols, r).transpose();
}

}  // namespace tcf::testing
