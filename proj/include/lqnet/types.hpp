#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace lqnet {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixX<double>;
using Vector = VectorX<double>;

// Raised when a factorization that the problem assumptions guarantee to
// succeed fails (R + B'PB not positive definite, and so on).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or dimensionally inconsistent input.
class StructuralError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Channel output inconsistent with the channel state.
class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

template <typename Derived>
auto symmetrized(const Eigen::MatrixBase<Derived>& X) {
  using Scalar = typename Derived::Scalar;
  MatrixX<Scalar> S = (X + X.transpose()) * Scalar(0.5);
  return S;
}

}  // namespace lqnet
