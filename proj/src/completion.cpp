#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "covariate_design.hpp"
#include "svt_detail.hpp"
#include "tcf/completion.hpp"
#include "tcf/error.hpp"

namespace tcf {

// --- MaskedMatrix ---------------------------------------------------------

MaskedMatrix::MaskedMatrix(Matrix values, Mask observed) : values_(std::move(values)), observed_(std::move(observed)) {
  if (values_.rows() != observed_.rows() || values_.cols() != observed_.cols()) {
    throw ShapeError("masked matrix: value and mask shapes differ");
  }
}

MaskedMatrix MaskedMatrix::from_indices(Matrix values,
                                        const std::vector<std::pair<Eigen::Index, Eigen::Index>>& observed) {
  Mask mask = Mask::Constant(values.rows(), values.cols(), false);
  for (const auto& [i, j] : observed) {
    if (i < 0 || j < 0 || i >= values.rows() || j >= values.cols()) {
      std::ostringstream os;
      os << "observed index (" << i << "," << j << ") outside " << values.rows() << "x" << values.cols();
      throw InputError(os.str());
    }
    if (mask(i, j)) {
      std::ostringstream os;
      os << "duplicate observed index (" << i << "," << j << ")";
      throw InputError(os.str());
    }
    mask(i, j) = true;
  }
  return MaskedMatrix(std::move(values), std::move(mask));
}

Matrix MaskedMatrix::zero_filled() const { return observed_.select(values_, Matrix::Zero(rows(), cols())); }

void SolverConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InputError("solver: lambda must be a finite nonnegative number");
  if (!(tol > 0.0)) throw InputError("solver: tol must be positive");
  if (max_iters < 1) throw InputError("solver: max_iters must be at least 1");
  if (continuation && continuation_stages < 1) throw InputError("solver: continuation_stages must be at least 1");
  if (!(continuation_floor > 0.0 && continuation_floor < 1.0)) {
    throw InputError("solver: continuation_floor must lie in (0, 1)");
  }
}

bool CovariateModel::empty() const {
  return !unit_covariates && !time_covariates && unit_time_covariates.empty() && !offset && !unit_intercepts &&
         !column_intercepts;
}

// --- CovariateDesign ------------------------------------------------------

namespace detail {

CovariateDesign::CovariateDesign(const CovariateModel& cov, Eigen::Index rows, Eigen::Index cols,
                                 const Mask& observed)
    : rows_(rows), cols_(cols) {
  const Eigen::Index c0 = cov.first_col;
  const Eigen::Index bc = cov.block_cols < 0 ? cols - c0 : cov.block_cols;
  if (c0 < 0 || bc < 0 || c0 + bc > cols) throw ShapeError("covariates: column block outside the matrix");

  auto check_block = [&](const Matrix& m, const char* what) {
    if (m.rows() != rows || m.cols() != bc) {
      std::ostringstream os;
      os << "covariates: " << what << " must be " << rows << "x" << bc << ", got " << m.rows() << "x" << m.cols();
      throw ShapeError(os.str());
    }
  };

  n_unit_ = cov.unit_intercepts ? rows : 0;
  drop_first_col_effect_ = cov.unit_intercepts && cov.column_intercepts;
  n_col_ = cov.column_intercepts ? cols - (drop_first_col_effect_ ? 1 : 0) : 0;

  const bool has_b = cov.unit_covariates.has_value() || cov.time_covariates.has_value();
  Matrix xn, xt;
  if (has_b) {
    xn = cov.unit_covariates ? *cov.unit_covariates : Matrix::Identity(rows, rows);
    xt = cov.time_covariates ? *cov.time_covariates : Matrix::Identity(bc, bc);
    if (xn.rows() != rows) throw ShapeError("covariates: X_N must have one row per unit");
    if (xt.cols() != bc) throw ShapeError("covariates: X_T must have one column per period");
    if (!xn.allFinite() || !xt.allFinite()) throw InputError("covariates: X_N / X_T must be finite");
    b_rows_ = xn.cols();
    b_cols_ = xt.rows();
  }
  n_b_ = b_rows_ * b_cols_;
  n_ut_ = static_cast<Eigen::Index>(cov.unit_time_covariates.size());
  params_ = n_unit_ + n_col_ + n_b_ + n_ut_;

  if (cov.offset) {
    check_block(*cov.offset, "offset");
    if (!cov.offset->allFinite()) throw InputError("covariates: offset must be finite");
    has_offset_ = true;
    offset_ = Matrix::Zero(rows, cols);
    offset_.middleCols(c0, bc) = *cov.offset;
  }

  full_ = Matrix::Zero(rows * cols, params_);
  Eigen::Index p = 0;
  for (Eigen::Index i = 0; i < n_unit_; ++i, ++p)
    for (Eigen::Index j = 0; j < cols; ++j) full_(i + rows * j, p) = 1.0;
  for (Eigen::Index j = drop_first_col_effect_ ? 1 : 0; n_col_ > 0 && j < cols; ++j, ++p)
    for (Eigen::Index i = 0; i < rows; ++i) full_(i + rows * j, p) = 1.0;
  for (Eigen::Index q = 0; q < b_cols_; ++q)
    for (Eigen::Index a = 0; a < b_rows_; ++a, ++p)
      for (Eigen::Index t = 0; t < bc; ++t)
        for (Eigen::Index i = 0; i < rows; ++i) full_(i + rows * (c0 + t), p) = xn(i, a) * xt(q, t);
  for (const Matrix& u : cov.unit_time_covariates) {
    check_block(u, "unit-time covariate");
    for (Eigen::Index t = 0; t < bc; ++t)
      for (Eigen::Index i = 0; i < rows; ++i) {
        if (observed(i, c0 + t) && !std::isfinite(u(i, t))) {
          throw InputError("covariates: unit-time covariate is missing at an observed cell");
        }
        full_(i + rows * (c0 + t), p) = std::isfinite(u(i, t)) ? u(i, t) : 0.0;
      }
    ++p;
  }

  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i)
      if (observed(i, j)) observed_cells_.push_back(i + rows * j);

  if (params_ > 0) {
    Matrix obs(static_cast<Eigen::Index>(observed_cells_.size()), params_);
    for (std::size_t r = 0; r < observed_cells_.size(); ++r) obs.row(static_cast<Eigen::Index>(r)) = full_.row(observed_cells_[r]);
    cod_.compute(obs);
    rank_deficient_ = cod_.rank() < params_;
  }
}

Vector CovariateDesign::solve(const Matrix& target) const {
  if (params_ == 0) return Vector();
  Vector rhs(static_cast<Eigen::Index>(observed_cells_.size()));
  for (std::size_t r = 0; r < observed_cells_.size(); ++r) {
    const Eigen::Index c = observed_cells_[r];
    rhs(static_cast<Eigen::Index>(r)) = target(c % rows_, c / rows_) - (has_offset_ ? offset_(c % rows_, c / rows_) : 0.0);
  }
  return cod_.solve(rhs);
}

Matrix CovariateDesign::evaluate(const Vector& beta) const {
  Matrix out = has_offset_ ? offset_ : Matrix::Zero(rows_, cols_);
  if (params_ > 0) out += (full_ * beta).reshaped(rows_, cols_);
  return out;
}

CovariateFit CovariateDesign::describe(const Vector& beta) const {
  CovariateFit f;
  f.fitted = evaluate(beta);
  f.rank_deficient = rank_deficient_;
  Eigen::Index p = 0;
  f.unit_effects = beta.segment(p, n_unit_);
  p += n_unit_;
  if (n_col_ > 0) {
    f.column_effects = Vector::Zero(cols_);
    f.column_effects.tail(n_col_) = beta.segment(p, n_col_);
  }
  p += n_col_;
  f.b_hat = beta.segment(p, n_b_).reshaped(b_rows_, b_cols_);
  p += n_b_;
  f.unit_time_coefficients = beta.segment(p, n_ut_);
  return f;
}

}  // namespace detail

// --- solver ---------------------------------------------------------------

namespace {

void validate_input(const MaskedMatrix& y) {
  if (y.count() == 0) throw InputError("completion: no observed entries");
  for (Eigen::Index j = 0; j < y.cols(); ++j)
    for (Eigen::Index i = 0; i < y.rows(); ++i)
      if (y.is_observed(i, j) && !std::isfinite(y.values()(i, j))) {
        std::ostringstream os;
        os << "completion: observed value at (" << i << "," << j << ") is not finite";
        throw InputError(os.str());
      }
}

struct Stage {
  Vector beta;
  Matrix fitted;  // covariate part
  std::vector<double> trace;
  int iterations = 0;
  bool converged = false;
};

// Block coordinate descent at one lambda: exact least squares for the
// covariate coefficients, then one soft-impute step for L. Both steps do
// not increase the objective.
Stage solve_stage(const MaskedMatrix& y, const detail::CovariateDesign& design, double lambda,
                  const SolverConfig& cfg, Matrix& low_rank) {
  Stage st;
  const Mask& obs = y.observed();
  st.fitted = Matrix::Zero(y.rows(), y.cols());
  double prev = 0.0;
  for (int it = 1; it <= cfg.max_iters; ++it) {
    if (design.active()) {
      st.beta = design.solve(y.values() - low_rank);
      st.fitted = design.evaluate(st.beta);
    }
    Matrix filled = obs.select(y.values() - st.fitted, low_rank);
    detail::Shrunk s = detail::shrink_singular_values(filled, lambda, cfg.svd_rank_cap);
    low_rank = std::move(s.value);
    const double loss = 0.5 * obs.select(y.values() - st.fitted - low_rank, Matrix::Zero(y.rows(), y.cols())).squaredNorm();
    const double objective = loss + lambda * s.nuclear_norm;
    st.trace.push_back(objective);
    st.iterations = it;
    if (objective == 0.0 || (it > 1 && std::abs(prev - objective) < cfg.tol * std::abs(prev))) {
      st.converged = true;
      break;
    }
    prev = objective;
  }
  return st;
}

std::vector<double> lambda_stages(double target, double lmax, const SolverConfig& cfg) {
  if (!cfg.continuation || !(lmax > target) || lmax <= 0.0) return {target};
  const double end = target > 0.0 ? target : cfg.continuation_floor * lmax;
  std::vector<double> stages;
  for (int s = 1; s <= cfg.continuation_stages; ++s) {
    stages.push_back(lmax * std::pow(end / lmax, static_cast<double>(s) / cfg.continuation_stages));
  }
  stages.back() = end;
  if (target == 0.0) stages.push_back(0.0);
  return stages;
}

double residual_operator_norm(const MaskedMatrix& y, const detail::CovariateDesign& design) {
  Matrix fitted = Matrix::Zero(y.rows(), y.cols());
  if (design.active()) fitted = design.evaluate(design.solve(y.values()));
  return detail::operator_norm(y.observed().select(y.values() - fitted, Matrix::Zero(y.rows(), y.cols())));
}

int numerical_rank(const Matrix& m) {
  if (m.size() == 0) return 0;
  Vector s = detail::singular_values(m);
  if (s.size() == 0 || s(0) == 0.0) return 0;
  return static_cast<int>((s.array() > 1e-8 * s(0)).count());
}

}  // namespace

CompletionFit complete_with_covariates(const MaskedMatrix& y, const CovariateModel& cov, const SolverConfig& cfg,
                                       const Matrix& warm_low_rank) {
  cfg.validate();
  validate_input(y);
  if (warm_low_rank.rows() != y.rows() || warm_low_rank.cols() != y.cols()) {
    throw ShapeError("completion: warm start has the wrong shape");
  }
  detail::CovariateDesign design(cov, y.rows(), y.cols(), y.observed());

  std::vector<double> stages{cfg.lambda};
  if (cfg.continuation) stages = lambda_stages(cfg.lambda, residual_operator_norm(y, design), cfg);

  Matrix low_rank = warm_low_rank;
  CompletionFit fit;
  Stage last;
  for (double lambda : stages) {
    last = solve_stage(y, design, lambda, cfg, low_rank);
    fit.iterations += last.iterations;
  }
  fit.lambda = cfg.lambda;
  fit.objective_trace = std::move(last.trace);
  fit.converged = last.converged;
  fit.covariates = design.describe(last.beta.size() == design.params() ? last.beta : Vector::Zero(design.params()));
  fit.low_rank = std::move(low_rank);
  fit.theta_hat = fit.low_rank + fit.covariates.fitted;
  fit.rank_hat = numerical_rank(fit.low_rank);
  return fit;
}

CompletionFit complete_with_covariates(const MaskedMatrix& y, const CovariateModel& cov, const SolverConfig& cfg) {
  return complete_with_covariates(y, cov, cfg, Matrix::Zero(y.rows(), y.cols()));
}

CompletionFit complete(const MaskedMatrix& y, const SolverConfig& cfg) {
  return complete_with_covariates(y, CovariateModel{}, cfg);
}

double lambda_max(const MaskedMatrix& y, const CovariateModel& cov) {
  validate_input(y);
  detail::CovariateDesign design(cov, y.rows(), y.cols(), y.observed());
  return residual_operator_norm(y, design);
}

std::vector<double> default_lambda_grid(const MaskedMatrix& y, const CovariateModel& cov, int points, double lo,
                                        double hi) {
  if (points < 1) throw InputError("lambda grid needs at least one point");
  if (!(lo > 0.0) || !(hi >= lo)) throw InputError("lambda grid bounds must satisfy 0 < lo <= hi");
  const double lmax = lambda_max(y, cov);
  std::vector<double> grid;
  for (int k = 0; k < points; ++k) {
    const double frac = points == 1 ? 0.0 : static_cast<double>(k) / (points - 1);
    grid.push_back(lmax * hi * std::pow(lo / hi, frac));
  }
  return grid;
}

}  // namespace tcf
