#pragma once

#include <Eigen/Dense>

#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace badtime {

using Index = Eigen::Index;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixX<double>;
using Vector = VectorX<double>;

/// Ordered set of variable (column) indices.
using VariableSet = std::vector<Index>;

enum class ErrorKind {
  Format,            // unparsable input cell
  Ordering,          // non-monotonic timestamps
  EmptyInput,
  InsufficientData,  // series too short for the requested windows
  State,             // operation applied in the wrong state
  Shape,
  Length,
  Config,
  Infeasible,        // a selection cannot be satisfied
  Input,             // non-finite or otherwise invalid numeric input
  Training,          // divergence during optimization
  Io,
  Internal,          // invariant violation
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

/// Fills a rows x cols matrix with N(0, sigma^2) draws in column-major order.
template <typename Rng>
Matrix gaussian_matrix(Index rows, Index cols, double sigma, Rng& rng) {
  std::normal_distribution<double> normal(0.0, sigma);
  Matrix out(rows, cols);
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) out(r, c) = normal(rng);
  return out;
}

/// Process exit code for an error: 2 configuration, 3 data, 4 training.
int exit_code(ErrorKind kind);

}  // namespace badtime
