#include "tcf/nb_glm.hpp"

#include <cmath>

#include <boost/math/tools/minima.hpp>

#include "tcf/error.hpp"

namespace tcf {

namespace {

constexpr double kMaxEta = 700.0;

Vector mean_of(const Matrix& x, const Vector& offset, const Vector& beta) {
  return (x * beta + offset).array().min(kMaxEta).exp().matrix();
}

double log_lik_at(const Vector& y, const Vector& m, double phi) {
  double ll = 0.0;
  if (phi <= 0.0) {
    for (Eigen::Index c = 0; c < y.size(); ++c) {
      ll += (y(c) > 0.0 ? y(c) * std::log(m(c)) : 0.0) - m(c) - std::lgamma(y(c) + 1.0);
    }
    return ll;
  }
  const double r = 1.0 / phi;
  if (r > 1e5) {
    // lgamma(y + r) - lgamma(r) cancels catastrophically for large r; use
    // the Stirling difference, with log(r + y) terms folded into log1p.
    for (Eigen::Index c = 0; c < y.size(); ++c) {
      const double yc = y(c), mc = m(c);
      const double ly = std::log1p(yc / r), lm = std::log1p(mc / r);
      ll += (r - 0.5) * ly - yc - yc / (12.0 * r * (r + yc)) - r * lm - std::lgamma(yc + 1.0);
      if (yc > 0.0) ll += yc * (std::log(mc) + ly - lm);
    }
    return ll;
  }
  const double lg_r = std::lgamma(r);
  for (Eigen::Index c = 0; c < y.size(); ++c) {
    const double yc = y(c), mc = m(c);
    ll += std::lgamma(yc + r) - lg_r - std::lgamma(yc + 1.0) - r * std::log1p(mc / r);
    if (yc > 0.0) ll += yc * (std::log(mc) - std::log(mc + r));
  }
  return ll;
}

// Fisher scoring for the coefficients at fixed phi; each accepted step
// does not lower the likelihood.
Vector scoring(const Matrix& x, const Vector& y, const Vector& offset, Vector beta, double phi, int max_inner) {
  Vector m = mean_of(x, offset, beta);
  double ll = log_lik_at(y, m, phi);
  for (int it = 0; it < max_inner; ++it) {
    const Vector eta = x * beta + offset;
    const Vector w = (m.array() / (1.0 + phi * m.array())).matrix();
    const Vector z = (eta - offset).array() + (y - m).array() / m.array();
    const Vector sw = w.array().sqrt();
    const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(sw.asDiagonal() * x);
    const Vector target = cod.solve(Vector(sw.cwiseProduct(z)));
    if (!target.allFinite()) throw NumericalError("negative binomial fit: scoring step is not finite");

    Vector step = target - beta;
    bool accepted = false;
    for (int half = 0; half < 40; ++half) {
      const Vector cand = beta + step;
      const Vector mc = mean_of(x, offset, cand);
      const double llc = log_lik_at(y, mc, phi);
      // Near the optimum the likelihood change drowns in rounding; allow
      // that much slack so the last Newton steps still land.
      if (std::isfinite(llc) && llc >= ll - 1e-13 * (1.0 + std::abs(ll))) {
        const double move = step.lpNorm<Eigen::Infinity>();
        beta = cand;
        m = mc;
        ll = std::max(ll, llc);
        accepted = true;
        if (move <= 1e-11 * (1.0 + beta.lpNorm<Eigen::Infinity>())) return beta;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
  return beta;
}

}  // namespace

double nb_log_likelihood(const Matrix& x, const Vector& y, const Vector& offset, const Vector& beta, double phi) {
  return log_lik_at(y, mean_of(x, offset, beta), phi);
}

GlmFit fit_nb_glm(const Matrix& x, const Vector& y, const Vector& offset, const GlmOptions& opts) {
  const Eigen::Index n = x.rows(), p = x.cols();
  if (n == 0 || p == 0) throw InputError("negative binomial fit: empty design");
  if (y.size() != n || offset.size() != n) throw ShapeError("negative binomial fit: response/offset length differs");
  if (!x.allFinite() || !offset.allFinite()) throw InputError("negative binomial fit: non-finite design or offset");
  for (Eigen::Index c = 0; c < n; ++c)
    if (!(y(c) >= 0.0) || !std::isfinite(y(c))) throw InputError("negative binomial fit: responses must be nonnegative");
  if (opts.fixed_phi && !(*opts.fixed_phi >= 0.0)) throw InputError("negative binomial fit: phi must be nonnegative");

  GlmFit fit;
  const Vector start_target = (y.array() + 0.5).log().matrix() - offset;
  Vector beta = x.completeOrthogonalDecomposition().solve(start_target);
  double phi = opts.fixed_phi ? *opts.fixed_phi : 0.1;

  const double log_lo = std::log(opts.phi_floor), log_hi = std::log(1e4);
  double ll = nb_log_likelihood(x, y, offset, beta, phi);
  for (int outer = 1; outer <= opts.max_outer; ++outer) {
    beta = scoring(x, y, offset, beta, phi, opts.max_inner);
    if (!opts.fixed_phi) {
      const Vector m = mean_of(x, offset, beta);
      auto negll = [&](double u) { return -log_lik_at(y, m, std::exp(u)); };
      auto best = boost::math::tools::brent_find_minima(negll, log_lo, log_hi, 50);
      // Brent creeps towards an end point without reaching it; the floor
      // itself is the Poisson-limit candidate.
      if (const double at_floor = negll(log_lo); at_floor <= best.second) best = {log_lo, at_floor};
      // Only move when it helps, so the outer trace stays monotone.
      if (-best.second >= log_lik_at(y, m, phi)) phi = std::exp(best.first);
    }
    const double ll_new = nb_log_likelihood(x, y, offset, beta, phi);
    fit.log_lik_trace.push_back(ll_new);
    fit.outer_iterations = outer;
    const double change = std::abs(ll_new - ll);
    ll = ll_new;
    if (outer > 1 && change < opts.tol * (1.0 + std::abs(ll))) {
      fit.converged = true;
      break;
    }
  }

  // The last phi update moved the scoring fixed point; polish beta at the
  // final phi so the score vanishes there.
  beta = scoring(x, y, offset, beta, phi, opts.max_inner);
  ll = nb_log_likelihood(x, y, offset, beta, phi);

  fit.poisson_limit = !opts.fixed_phi && phi <= opts.phi_floor * (1.0 + 1e-6);
  fit.coefficients = beta;
  fit.phi = phi;
  fit.log_lik = ll;

  const Vector m = mean_of(x, offset, beta);
  const Vector w = (m.array() / (1.0 + phi * m.array())).matrix();
  fit.score = x.transpose() * ((y - m).array() / (1.0 + phi * m.array())).matrix();
  const Matrix info = x.transpose() * w.asDiagonal() * x;
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(info);
  if (eig.info() != Eigen::Success) throw NumericalError("negative binomial fit: information matrix eigensolver failed");
  const Vector ev = eig.eigenvalues();
  const double cutoff = 1e-12 * std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
  Vector inv = Vector::Zero(p);
  for (Eigen::Index k = 0; k < p; ++k) {
    if (ev(k) > cutoff) {
      inv(k) = 1.0 / ev(k);
    } else {
      fit.covariance_singular = true;
    }
  }
  fit.covariance = eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
  fit.covariance = (0.5 * (fit.covariance + fit.covariance.transpose())).eval();
  return fit;
}

}  // namespace tcf
