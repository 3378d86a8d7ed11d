#pragma once

#include <optional>

#include "tcf/tensor.hpp"

namespace tcf::detail {

struct Shrunk {
  Matrix value;
  double nuclear_norm = 0.0;  // of value
};

/// svt(m, lambda), also returning the nuclear norm of the result. With a
/// rank cap the truncated SVD path is used.
Shrunk shrink_singular_values(const Matrix& m, double lambda, std::optional<int> rank_cap);

/// Largest singular value.
double operator_norm(const Matrix& m);

/// Singular values, descending.
Vector singular_values(const Matrix& m);

}  // namespace tcf::detail
