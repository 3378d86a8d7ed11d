#pragma once

#include <optional>
#include <vector>

#include "tcf/tensor.hpp"

namespace tcf {

struct GlmOptions {
  /// Hold phi fixed instead of estimating it; 0 is the Poisson model.
  std::optional<double> fixed_phi;
  int max_outer = 200;
  int max_inner = 100;
  double tol = 1e-8;  // relative change of the joint log-likelihood
  /// Below this the dispersion estimate is treated as the Poisson limit.
  double phi_floor = 1e-8;
};

struct GlmFit {
  Vector coefficients;
  double phi = 0.0;
  Matrix covariance;  // inverse expected information for the coefficients
  double log_lik = 0.0;
  std::vector<double> log_lik_trace;  // after every outer iteration
  Vector score;                       // at the returned coefficients
  int outer_iterations = 0;
  bool converged = false;
  bool poisson_limit = false;      // phi estimate collapsed to zero
  bool covariance_singular = false;
};

/// Negative binomial log-likelihood with log link, mean m = exp(X b + off)
/// and variance m + phi m^2 (phi = 0: Poisson). Responses may be real.
double nb_log_likelihood(const Matrix& x, const Vector& y, const Vector& offset, const Vector& beta, double phi);

/*
 * Maximum likelihood for the negative binomial GLM. Fisher scoring (IRLS
 * with step halving) for the coefficients given phi alternates with a
 * one-dimensional maximization over log phi given the coefficients,
 * until the joint log-likelihood changes by less than tol * (1 + |l|).
 * Starts from least squares on log(y + 0.5).
 */
GlmFit fit_nb_glm(const Matrix& x, const Vector& y, const Vector& offset, const GlmOptions& opts = {});

}  // namespace tcf
