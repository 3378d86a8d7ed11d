#include "tcf/tensor.hpp"

#include <cmath>
#include <sstream>

#include "tcf/error.hpp"

namespace tcf {

namespace {

void check_mode(int mode) {
  if (mode < 1 || mode > 3) {
    throw InputError("tensor mode must be 1, 2 or 3, got " + std::to_string(mode));
  }
}

std::string dims_str(Dims3 d) {
  std::ostringstream os;
  os << "(" << d.d1 << "," << d.d2 << "," << d.d3 << ")";
  return os.str();
}

// Other two dims for a mode, lowest mode first.
std::pair<std::size_t, std::size_t> other_dims(Dims3 d, int mode) {
  switch (mode) {
    case 1: return {d.d2, d.d3};
    case 2: return {d.d1, d.d3};
    default: return {d.d1, d.d2};
  }
}

// Linear storage offset of unfolding entry (q, s) for a tensor of dims d.
std::size_t offset_of(Dims3 d, int mode, std::size_t q, std::size_t s) {
  switch (mode) {
    case 1: return q + d.d1 * s;  // s = j + d2 k
    case 2: {
      const std::size_t i = s % d.d1;
      const std::size_t k = s / d.d1;
      return i + d.d1 * (q + d.d2 * k);
    }
    default: {
      const std::size_t i = s % d.d1;
      const std::size_t j = s / d.d1;
      return i + d.d1 * (j + d.d2 * q);
    }
  }
}

}  // namespace

std::size_t Dims3::operator[](int mode) const {
  check_mode(mode);
  return mode == 1 ? d1 : (mode == 2 ? d2 : d3);
}

Tensor3::Tensor3(Dims3 dims) : dims_(dims), values_(dims.size(), 0.0) {}

Tensor3::Tensor3(Dims3 dims, std::vector<double> values) : dims_(dims), values_(std::move(values)) {
  if (values_.size() != dims_.size()) {
    throw InputError("tensor of dims " + dims_str(dims_) + " needs " + std::to_string(dims_.size()) +
                     " values, got " + std::to_string(values_.size()));
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw InputError("tensor entries must be finite");
  }
}

Matrix Tensor3::slice(std::size_t k) const {
  Matrix m(dims_.d1, dims_.d2);
  for (std::size_t j = 0; j < dims_.d2; ++j)
    for (std::size_t i = 0; i < dims_.d1; ++i) m(i, j) = (*this)(i, j, k);
  return m;
}

void Tensor3::set_slice(std::size_t k, const Matrix& m) {
  if (static_cast<std::size_t>(m.rows()) != dims_.d1 || static_cast<std::size_t>(m.cols()) != dims_.d2) {
    throw ShapeError("slice shape does not match tensor dims " + dims_str(dims_));
  }
  for (std::size_t j = 0; j < dims_.d2; ++j)
    for (std::size_t i = 0; i < dims_.d1; ++i) (*this)(i, j, k) = m(i, j);
}

ModeMatrix unfold(const Tensor3& t, int mode) {
  check_mode(mode);
  const Dims3 d = t.dims();
  const auto [a, b] = other_dims(d, mode);
  const std::size_t rows = d[mode];
  const std::size_t cols = a * b;
  ModeMatrix out{mode, Matrix(rows, cols)};
  const auto& v = t.values();
  for (std::size_t s = 0; s < cols; ++s)
    for (std::size_t q = 0; q < rows; ++q) out.values(q, s) = v[offset_of(d, mode, q, s)];
  return out;
}

Tensor3 fold(const ModeMatrix& m, Dims3 dims) {
  check_mode(m.mode);
  const auto [a, b] = other_dims(dims, m.mode);
  if (static_cast<std::size_t>(m.values.rows()) != dims[m.mode] ||
      static_cast<std::size_t>(m.values.cols()) != a * b) {
    std::ostringstream os;
    os << "mode-" << m.mode << " matrix of shape " << m.values.rows() << "x" << m.values.cols()
       << " cannot be folded into dims " << dims_str(dims);
    throw ShapeError(os.str());
  }
  std::vector<double> v(dims.size());
  for (std::size_t s = 0; s < a * b; ++s)
    for (std::size_t q = 0; q < dims[m.mode]; ++q) v[offset_of(dims, m.mode, q, s)] = m.values(q, s);
  return Tensor3(dims, std::move(v));
}

Tensor3 mode_product(const Tensor3& t, const Matrix& m, int mode) {
  check_mode(mode);
  const Dims3 d = t.dims();
  if (static_cast<std::size_t>(m.cols()) != d[mode]) {
    std::ostringstream os;
    os << "mode-" << mode << " product needs a matrix with " << d[mode] << " columns, got " << m.cols();
    throw ShapeError(os.str());
  }
  Dims3 out_dims = d;
  const auto r = static_cast<std::size_t>(m.rows());
  if (mode == 1) out_dims.d1 = r;
  if (mode == 2) out_dims.d2 = r;
  if (mode == 3) out_dims.d3 = r;
  ModeMatrix u{mode, m * unfold(t, mode).values};
  return fold(u, out_dims);
}

Tensor3 outer3(const Vector& a, const Vector& b, const Vector& c) {
  if (a.size() == 0 || b.size() == 0 || c.size() == 0) throw ShapeError("outer3 needs nonempty vectors");
  Tensor3 t(Dims3{static_cast<std::size_t>(a.size()), static_cast<std::size_t>(b.size()),
                  static_cast<std::size_t>(c.size())});
  for (Eigen::Index k = 0; k < c.size(); ++k)
    for (Eigen::Index j = 0; j < b.size(); ++j)
      for (Eigen::Index i = 0; i < a.size(); ++i) t(i, j, k) = a(i) * b(j) * c(k);
  return t;
}

Tensor3 tucker_compose(const Tensor3& core, const Matrix& a, const Matrix& b, const Matrix& c) {
  return mode_product(mode_product(mode_product(core, a, 1), b, 2), c, 3);
}

}  // namespace tcf
