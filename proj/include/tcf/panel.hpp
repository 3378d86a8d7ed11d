#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tcf/completion.hpp"

namespace tcf {

enum class Transform { none, log1p };

Transform parse_transform(const std::string& name);
std::string transform_name(Transform t);

/// Elementwise log(x + 1) or identity. log1p rejects negative values.
Matrix forward_transform(const Matrix& m, Transform t);
/// Inverse of forward_transform; expm1 results are clamped at zero.
Matrix back_transform(const Matrix& m, Transform t);

/// An auxiliary outcome Z^(k). Treated as fully observed unless a mask is
/// given.
struct ControlOutcome {
  std::string name;
  Matrix values;
  std::optional<Mask> observed;
};

/*
 * Unit x period panel for one outcome of interest plus K - 1 control
 * outcomes. y_obs holds Y^1 where w is set and Y^0 elsewhere; cells with
 * no recorded outcome at all are marked in y_observed.
 *
 * covariates are unit-time regressors X^p (N x T each); offsets are the
 * per-unit exposures n_i, entering every model as log n_i.
 */
struct PanelDataset {
  Matrix y_obs;
  Mask w;
  std::optional<Mask> y_observed;
  std::vector<ControlOutcome> controls;
  std::vector<Matrix> covariates;
  std::vector<std::string> covariate_names;
  std::optional<Vector> offsets;
  Transform transform = Transform::log1p;

  std::string outcome_name = "y";
  std::vector<std::string> unit_ids;
  std::vector<long long> periods;

  Eigen::Index N() const { return y_obs.rows(); }
  Eigen::Index T() const { return y_obs.cols(); }
  Eigen::Index K() const { return 1 + static_cast<Eigen::Index>(controls.size()); }

  bool y_is_observed(Eigen::Index i, Eigen::Index t) const { return !y_observed || (*y_observed)(i, t); }
  Mask control_mask(std::size_t k) const;

  /// Throws ShapeError / InputError on nonconforming shapes, non-finite
  /// recorded values or nonpositive offsets.
  void validate() const;
};

}  // namespace tcf
