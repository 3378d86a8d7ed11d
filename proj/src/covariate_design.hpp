#pragma once

#include <Eigen/QR>

#include "tcf/completion.hpp"

namespace tcf::detail {

// Dense design for a CovariateModel over every cell of a rows x cols
// matrix (cell index i + rows * j), with a least-squares solver for the
// rows belonging to one observed set.
class CovariateDesign {
 public:
  CovariateDesign(const CovariateModel& cov, Eigen::Index rows, Eigen::Index cols, const Mask& observed);

  bool active() const { return params_ > 0 || has_offset_; }
  Eigen::Index params() const { return params_; }
  bool rank_deficient() const { return rank_deficient_; }

  /// Minimum-norm least-squares coefficients for P_O(target - offset).
  Vector solve(const Matrix& target) const;
  /// Design times beta plus offset, as a rows x cols matrix.
  Matrix evaluate(const Vector& beta) const;
  /// Splits beta into the named blocks of a CovariateFit.
  CovariateFit describe(const Vector& beta) const;

 private:
  Eigen::Index rows_ = 0;
  Eigen::Index cols_ = 0;
  Eigen::Index params_ = 0;
  bool has_offset_ = false;
  Matrix offset_;
  Matrix full_;  // (rows*cols) x params
  std::vector<Eigen::Index> observed_cells_;
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod_;
  bool rank_deficient_ = false;

  // Block layout inside beta.
  Eigen::Index n_unit_ = 0, n_col_ = 0, n_b_ = 0, n_ut_ = 0;
  Eigen::Index b_rows_ = 0, b_cols_ = 0;
  bool drop_first_col_effect_ = false;
};

}  // namespace tcf::detail
