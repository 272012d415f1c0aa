#pragma once

#include "badtime/core.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace badtime {

/// Linear forecaster Y = (A X + b 1^T) M^T + 1 c^T: a temporal projection
/// shared by every variable followed by a channel mixer.
template <typename Scalar>
struct ForecasterParams {
  MatrixX<Scalar> A;  // t_out x t_in
  MatrixX<Scalar> M;  // N x N
  VectorX<Scalar> b;  // t_out
  VectorX<Scalar> c;  // N

  Index t_in() const { return A.cols(); }
  Index t_out() const { return A.rows(); }
  Index n_vars() const { return M.rows(); }

  static ForecasterParams zeros(Index t_in, Index t_out, Index n) {
    return {MatrixX<Scalar>::Zero(t_out, t_in), MatrixX<Scalar>::Zero(n, n),
            VectorX<Scalar>::Zero(t_out), VectorX<Scalar>::Zero(n)};
  }

  ForecasterParams& operator+=(const ForecasterParams& o) {
    A += o.A;
    M += o.M;
    b += o.b;
    c += o.c;
    return *this;
  }

  bool all_finite() const { return A.allFinite() && M.allFinite() && b.allFinite() && c.allFinite(); }
};

using Forecaster = ForecasterParams<double>;

/// A ~ N(0, 1/t_in), M ~ N(0, 1/N), zero biases.
Forecaster init_forecaster(Index t_in, Index t_out, Index n, std::uint64_t seed);

template <typename Scalar, typename Derived>
MatrixX<Scalar> forward(const ForecasterParams<Scalar>& p, const Eigen::MatrixBase<Derived>& x) {
  if (x.rows() != p.t_in() || x.cols() != p.n_vars()) {
    std::ostringstream msg;
    msg << "forecaster input is " << x.rows() << "x" << x.cols() << ", expected " << p.t_in()
        << "x" << p.n_vars();
    fail(ErrorKind::Shape, msg.str());
  }
  MatrixX<Scalar> z = p.A * x;
  z.colwise() += p.b;
  MatrixX<Scalar> y = z * p.M.transpose();
  y.rowwise() += p.c.transpose();
  return y;
}

inline void check_columns(const VariableSet& columns, Index n) {
  if (columns.empty()) fail(ErrorKind::Config, "column mask is empty");
  for (Index c : columns)
    if (c < 0 || c >= n) fail(ErrorKind::Shape, "column mask index out of range");
}

/// Squared L2 plus L1 error over the masked columns.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar combined_error(const Eigen::MatrixBase<DerivedA>& prediction,
                                         const Eigen::MatrixBase<DerivedB>& target,
                                         const VariableSet& columns) {
  using Scalar = typename DerivedA::Scalar;
  if (prediction.rows() != target.rows() || prediction.cols() != target.cols())
    fail(ErrorKind::Shape, "prediction and target shapes differ");
  check_columns(columns, prediction.cols());
  Scalar total(0);
  for (Index c : columns) {
    const auto e = (prediction.col(c) - target.col(c)).array();
    total += e.square().sum() + e.abs().sum();
  }
  return total;
}

/// Adds weight * d(combined_error)/d(prediction) into `grad`. The L1
/// subgradient at zero is zero.
template <typename DerivedA, typename DerivedB, typename DerivedG>
void accumulate_error_gradient(const Eigen::MatrixBase<DerivedA>& prediction,
                               const Eigen::MatrixBase<DerivedB>& target,
                               const VariableSet& columns, typename DerivedA::Scalar weight,
                               Eigen::MatrixBase<DerivedG>& grad) {
  using Scalar = typename DerivedA::Scalar;
  for (Index c : columns) {
    const auto e = (prediction.col(c) - target.col(c)).array();
    grad.col(c).array() += weight * (Scalar(2) * e + e.sign());
  }
}

template <typename Scalar>
struct ForecasterGradients {
  ForecasterParams<Scalar> params;
  MatrixX<Scalar> input;  // t_in x N
};

/// Back-propagates an output gradient through the forecaster.
template <typename Scalar, typename DerivedX, typename DerivedG>
ForecasterGradients<Scalar> backward_from_output(const ForecasterParams<Scalar>& p,
                                                 const Eigen::MatrixBase<DerivedX>& x,
                                                 const Eigen::MatrixBase<DerivedG>& grad_out,
                                                 bool with_input = true) {
  MatrixX<Scalar> z = p.A * x;
  z.colwise() += p.b;
  ForecasterGradients<Scalar> g;
  g.params.c = grad_out.colwise().sum().transpose();
  g.params.M = grad_out.transpose() * z;
  const MatrixX<Scalar> dz = grad_out * p.M;
  g.params.A = dz * x.transpose();
  g.params.b = dz.rowwise().sum();
  if (with_input) g.input = p.A.transpose() * dz;
  return g;
}

/// Exact gradients of combined_error(forward(p, x), target, columns).
template <typename Scalar, typename DerivedX, typename DerivedY>
ForecasterGradients<Scalar> backward(const ForecasterParams<Scalar>& p,
                                     const Eigen::MatrixBase<DerivedX>& x,
                                     const Eigen::MatrixBase<DerivedY>& target,
                                     const VariableSet& columns) {
  const MatrixX<Scalar> y = forward(p, x);
  if (target.rows() != y.rows() || target.cols() != y.cols())
    fail(ErrorKind::Shape, "target shape differs from forecaster output");
  check_columns(columns, y.cols());
  MatrixX<Scalar> grad_out = MatrixX<Scalar>::Zero(y.rows(), y.cols());
  accumulate_error_gradient(y, target, columns, Scalar(1), grad_out);
  return backward_from_output(p, x, grad_out);
}

struct OptState {
  double lr = 1e-3;
  bool adaptive = true;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t step = 0;
  Forecaster first;   // moment accumulators, sized lazily
  Forecaster second;

  static OptState adam(double lr) {
    OptState s;
    s.lr = lr;
    return s;
  }
  static OptState plain(double lr) {
    OptState s;
    s.lr = lr;
    s.adaptive = false;
    return s;
  }
};

/// One descent step: plain theta -= lr * grad, or bias-corrected adaptive
/// moments when `opt.adaptive`.
void sgd_step(Forecaster& params, const Forecaster& grads, OptState& opt);

void write_checkpoint(const Forecaster& p, const std::string& path);
Forecaster read_checkpoint(const std::string& path);

std::uint64_t checksum(const Forecaster& p);

}  // namespace badtime
