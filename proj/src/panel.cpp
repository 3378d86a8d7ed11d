#include "tcf/panel.hpp"

#include <cmath>
#include <sstream>

#include "tcf/error.hpp"

namespace tcf {

Transform parse_transform(const std::string& name) {
  if (name == "log1p") return Transform::log1p;
  if (name == "none") return Transform::none;
  throw InputError("unknown transform '" + name + "' (expected log1p or none)");
}

std::string transform_name(Transform t) { return t == Transform::log1p ? "log1p" : "none"; }

Matrix forward_transform(const Matrix& m, Transform t) {
  if (t == Transform::none) return m;
  Matrix out(m.rows(), m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const double x = m(i, j);
      if (std::isnan(x)) {
        out(i, j) = x;  // unrecorded; masked out downstream
        continue;
      }
      if (x < 0.0) {
        std::ostringstream os;
        os << "log1p transform: negative count " << x << " at (" << i << "," << j << ")";
        throw InputError(os.str());
      }
      out(i, j) = std::log1p(x);
    }
  }
  return out;
}

Matrix back_transform(const Matrix& m, Transform t) {
  if (t == Transform::none) return m;
  return m.unaryExpr([](double x) { return std::max(0.0, std::expm1(x)); });
}

Mask PanelDataset::control_mask(std::size_t k) const {
  const ControlOutcome& c = controls.at(k);
  return c.observed ? *c.observed : Mask::Constant(c.values.rows(), c.values.cols(), true);
}

namespace {

void require_shape(const Matrix& m, Eigen::Index n, Eigen::Index t, const std::string& what) {
  if (m.rows() != n || m.cols() != t) {
    std::ostringstream os;
    os << what << " is " << m.rows() << "x" << m.cols() << ", expected " << n << "x" << t;
    throw ShapeError(os.str());
  }
}

void require_finite(const Matrix& m, const Mask& use, const std::string& what) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (use(i, j) && !std::isfinite(m(i, j))) {
        std::ostringstream os;
        os << what << ": non-finite value at (" << i << "," << j << ")";
        throw InputError(os.str());
      }
}

}  // namespace

void PanelDataset::validate() const {
  const Eigen::Index n = N(), t = T();
  if (n == 0 || t == 0) throw InputError("panel: empty outcome matrix");
  if (w.rows() != n || w.cols() != t) throw ShapeError("panel: treatment mask shape differs from the outcome");
  if (y_observed && (y_observed->rows() != n || y_observed->cols() != t)) {
    throw ShapeError("panel: outcome observation mask has the wrong shape");
  }
  require_finite(y_obs, y_observed ? *y_observed : Mask::Constant(n, t, true), outcome_name);
  for (std::size_t k = 0; k < controls.size(); ++k) {
    const ControlOutcome& c = controls[k];
    require_shape(c.values, n, t, "control '" + c.name + "'");
    if (c.observed && (c.observed->rows() != n || c.observed->cols() != t)) {
      throw ShapeError("control '" + c.name + "': mask has the wrong shape");
    }
    require_finite(c.values, control_mask(k), "control '" + c.name + "'");
  }
  for (std::size_t p = 0; p < covariates.size(); ++p) {
    const std::string name = p < covariate_names.size() ? covariate_names[p] : "covariate " + std::to_string(p);
    require_shape(covariates[p], n, t, name);
    require_finite(covariates[p], Mask::Constant(n, t, true), name);
  }
  if (offsets) {
    if (offsets->size() != n) throw ShapeError("panel: offsets must have one entry per unit");
    for (Eigen::Index i = 0; i < n; ++i)
      if (!(std::isfinite((*offsets)(i)) && (*offsets)(i) > 0.0)) throw InputError("panel: offsets must be positive");
  }
  if (!unit_ids.empty() && static_cast<Eigen::Index>(unit_ids.size()) != n) {
    throw ShapeError("panel: unit id count differs from N");
  }
  if (!periods.empty() && static_cast<Eigen::Index>(periods.size()) != t) {
    throw ShapeError("panel: period count differs from T");
  }
}

}  // namespace tcf
