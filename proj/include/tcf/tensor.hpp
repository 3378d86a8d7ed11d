#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tcf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Dims3 {
  std::size_t d1 = 0;
  std::size_t d2 = 0;
  std::size_t d3 = 0;

  std::size_t operator[](int mode) const;  // mode in {1,2,3}
  std::size_t size() const { return d1 * d2 * d3; }
  bool operator==(const Dims3&) const = default;
};

/*
 * Dense third-order tensor.
 *
 * Entries are stored column-major: element (i, j, k) (0-based) lives at
 * i + d1 * (j + d2 * k). With this layout the mode-1 unfolding is a plain
 * reshape to d1 x (d2 d3), and every unfolding uses the index order
 *
 *   mode 1: column s = j + d2 * k
 *   mode 2: column s = i + d1 * k
 *   mode 3: column s = i + d1 * j
 *
 * i.e. the remaining indices vary in increasing mode order with the
 * lowest mode fastest (1-based: j(s) = s mod d2 with a zero remainder
 * mapped to d2, k(s) = ceil(s / d2) for mode 1, and analogously for the
 * other modes).
 */
class Tensor3 {
 public:
  Tensor3() = default;
  /// Zero-filled tensor.
  explicit Tensor3(Dims3 dims);
  /// Throws InputError when values.size() != d1*d2*d3 or any entry is
  /// non-finite.
  Tensor3(Dims3 dims, std::vector<double> values);

  const Dims3& dims() const { return dims_; }
  const std::vector<double>& values() const { return values_; }

  double operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return values_[i + dims_.d1 * (j + dims_.d2 * k)];
  }
  double& operator()(std::size_t i, std::size_t j, std::size_t k) {
    return values_[i + dims_.d1 * (j + dims_.d2 * k)];
  }

  /// Frontal slice k as a d1 x d2 matrix.
  Matrix slice(std::size_t k) const;
  void set_slice(std::size_t k, const Matrix& m);

  const std::optional<std::array<std::string, 3>>& labels() const { return labels_; }
  void set_labels(std::array<std::string, 3> labels) { labels_ = std::move(labels); }

 private:
  Dims3 dims_;
  std::vector<double> values_;
  std::optional<std::array<std::string, 3>> labels_;
};

/// A mode-l unfolding together with the mode it came from.
struct ModeMatrix {
  int mode = 1;
  Matrix values;
};

ModeMatrix unfold(const Tensor3& t, int mode);

/// Back-folding: the tensor whose mode-`m.mode` unfolding is `m.values`.
Tensor3 fold(const ModeMatrix& m, Dims3 dims);

/// t x_mode m. `m` must have d_mode columns; the result replaces d_mode by
/// m.rows().
Tensor3 mode_product(const Tensor3& t, const Matrix& m, int mode);

/// a o b o c, entries a_i b_j c_k.
Tensor3 outer3(const Vector& a, const Vector& b, const Vector& c);

/// core x1 a x2 b x3 c.
Tensor3 tucker_compose(const Tensor3& core, const Matrix& a, const Matrix& b, const Matrix& c);

}  // namespace tcf
