#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace mwlab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Thrown when a matrix required to be symmetric positive definite is not
/// (smallest eigenvalue below the relative tolerance).
struct NotSpdError : std::runtime_error {
  explicit NotSpdError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when two grid objects disagree on depth or vector dimension.
struct DimensionMismatchError : std::invalid_argument {
  explicit DimensionMismatchError(const std::string& what)
      : std::invalid_argument(what) {}
};

}  // namespace mwlab
