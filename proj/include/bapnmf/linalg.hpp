#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "bapnmf/errors.hpp"

namespace bapnmf {

struct SpdSolution {
  Eigen::MatrixXd solution;
  Eigen::MatrixXd inverse;
  double trace_inverse = 0.0;
  double log_det = 0.0;
};

/// Solves A X = B for symmetric positive-definite A (Cholesky). Throws
/// DecompositionError when A is asymmetric beyond 1e-10 or not PD.
SpdSolution spd_solve(const Eigen::Ref<const Eigen::MatrixXd>& a,
                      const Eigen::Ref<const Eigen::MatrixXd>& b);

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine_similarity(const Eigen::MatrixBase<DerivedA>& x,
                                            const Eigen::MatrixBase<DerivedB>& y) {
  using Scalar = typename DerivedA::Scalar;
  const Scalar nx = x.norm();
  const Scalar ny = y.norm();
  if (nx == Scalar(0) || ny == Scalar(0)) {
    throw DegenerateInputError("cosine similarity of a zero-norm vector");
  }
  return x.dot(y) / (nx * ny);
}

/// Pairwise cosine similarities between the columns of x (rows) and y (cols).
template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> cosine_matrix(
    const Eigen::MatrixBase<DerivedA>& x, const Eigen::MatrixBase<DerivedB>& y) {
  using Scalar = typename DerivedA::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(x.cols(), y.cols());
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    for (Eigen::Index j = 0; j < y.cols(); ++j) {
      out(i, j) = cosine_similarity(x.col(i), y.col(j));
    }
  }
  return out;
}

/// Columns rescaled to sum to one. All-zero columns are left untouched.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> column_normalized(
    const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out = m;
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    const Scalar total = out.col(j).sum();
    if (total != Scalar(0)) out.col(j) /= total;
  }
  return out;
}

}  // namespace bapnmf
