#pragma once

#include <stdexcept>
#include <string>

namespace tcf {

/// Malformed or out-of-contract input (bad shapes, non-finite values,
/// negative counts). Maps to CLI exit status 1.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dimension mismatch between tensors and matrices.
class ShapeError : public InputError {
 public:
  using InputError::InputError;
};

/// A numerical routine failed (SVD did not converge, singular system).
/// Maps to CLI exit status 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tcf
