#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/SVD>

#include "svt_detail.hpp"
#include "tcf/completion.hpp"
#include "tcf/error.hpp"
#include "tcf/random.hpp"

namespace tcf {

namespace detail {

namespace {

void require_finite(const Matrix& m) {
  if (!m.allFinite()) throw InputError("svt: matrix has non-finite entries");
}

Shrunk rebuild(const Matrix& u, const Vector& s, const Matrix& v, double lambda) {
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > lambda) ++r;
  Shrunk out;
  out.value = Matrix::Zero(u.rows(), v.rows());
  if (r == 0) return out;
  Vector shrunk = (s.head(r).array() - lambda).matrix();
  out.value.noalias() = u.leftCols(r) * shrunk.asDiagonal() * v.leftCols(r).transpose();
  out.nuclear_norm = shrunk.sum();
  return out;
}

Shrunk full_shrink(const Matrix& m, double lambda) {
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() == Eigen::Success && svd.singularValues().allFinite() && svd.matrixU().allFinite() &&
      svd.matrixV().allFinite()) {
    return rebuild(svd.matrixU(), svd.singularValues(), svd.matrixV(), lambda);
  }
  // Eigen 3.4's divide-and-conquer SVD occasionally returns NaNs on
  // nearly rank-deficient input without reporting failure; Jacobi is slow
  // but robust.
  Eigen::JacobiSVD<Matrix> jac(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (!jac.singularValues().allFinite()) {
    throw NumericalError("svt: SVD failed on a " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                         " matrix");
  }
  return rebuild(jac.matrixU(), jac.singularValues(), jac.matrixV(), lambda);
}

Matrix orthonormal_columns(const Matrix& a) {
  Eigen::HouseholderQR<Matrix> qr(a);
  return qr.householderQ() * Matrix::Identity(a.rows(), a.cols());
}

struct Truncated {
  Matrix u;
  Vector s;
  Matrix v;
  bool ok = false;
};

// Block subspace iteration for the leading k singular triplets. The start
// block is drawn from a fixed seed so repeated calls agree exactly.
Truncated truncated_svd(const Matrix& m, Eigen::Index k) {
  const Eigen::Index width = std::min<Eigen::Index>(k + 8, std::min(m.rows(), m.cols()));
  Rng rng(0x5eed5eedULL + static_cast<std::uint64_t>(k));
  Matrix omega(m.cols(), width);
  for (Eigen::Index j = 0; j < width; ++j)
    for (Eigen::Index i = 0; i < m.cols(); ++i) omega(i, j) = draw_normal(rng, 0.0, 1.0);
  Matrix q = orthonormal_columns(m * omega);
  Truncated out;
  for (int it = 0; it < 300; ++it) {
    Matrix z = orthonormal_columns(m.transpose() * q);
    q = orthonormal_columns(m * z);
    Matrix b = q.transpose() * m;
    Eigen::JacobiSVD<Matrix> small(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Matrix u = q * small.matrixU().leftCols(k);
    Vector s = small.singularValues().head(k);
    Matrix v = small.matrixV().leftCols(k);
    // Converged once every kept triplet satisfies M v = s u to near roundoff.
    const double resid = (m * v - u * s.asDiagonal()).colwise().norm().maxCoeff();
    if (resid <= 1e-12 * std::max(s(0), 1e-300)) {
      out.u = std::move(u);
      out.s = std::move(s);
      out.v = std::move(v);
      out.ok = true;
      return out;
    }
  }
  return out;
}

}  // namespace

Shrunk shrink_singular_values(const Matrix& m, double lambda, std::optional<int> rank_cap) {
  require_finite(m);
  if (lambda < 0.0) throw InputError("svt: lambda must be nonnegative");
  if (lambda == 0.0) {
    Shrunk out;
    out.value = m;
    return out;  // nuclear norm term is multiplied by lambda = 0
  }
  const Eigen::Index full = std::min(m.rows(), m.cols());
  if (!rank_cap || *rank_cap <= 0 || *rank_cap >= full) return full_shrink(m, lambda);
  Eigen::Index k = *rank_cap;
  while (k < full) {
    Truncated t = truncated_svd(m, k);
    if (!t.ok) break;
    if (t.s(k - 1) <= lambda) return rebuild(t.u, t.s, t.v, lambda);
    k = std::min<Eigen::Index>(2 * k, full);
  }
  return full_shrink(m, lambda);
}

double operator_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return singular_values(m)(0);
}

Vector singular_values(const Matrix& m) {
  Eigen::BDCSVD<Matrix> svd(m);
  if (svd.info() == Eigen::Success && svd.singularValues().allFinite()) return svd.singularValues();
  Eigen::JacobiSVD<Matrix> jac(m);
  if (!jac.singularValues().allFinite()) throw NumericalError("SVD failed while computing singular values");
  return jac.singularValues();
}

}  // namespace detail

Matrix svt(const Matrix& m, double lambda) { return detail::shrink_singular_values(m, lambda, std::nullopt).value; }

Matrix svt_truncated(const Matrix& m, double lambda, int rank_cap) {
  return detail::shrink_singular_values(m, lambda, rank_cap).value;
}

}  // namespace tcf
