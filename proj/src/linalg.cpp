#include "bapnmf/linalg.hpp"

#include <algorithm>

namespace bapnmf {

SpdSolution spd_solve(const Eigen::Ref<const Eigen::MatrixXd>& a,
                      const Eigen::Ref<const Eigen::MatrixXd>& b) {
  if (a.rows() != a.cols() || a.rows() != b.rows()) {
    throw StructuralError("spd_solve: dimension mismatch");
  }
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw DecompositionError("spd_solve: matrix is not symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    throw DecompositionError("spd_solve: matrix is not positive definite");
  }
  SpdSolution out;
  out.solution = llt.solve(b);
  out.inverse = llt.solve(Eigen::MatrixXd::Identity(a.rows(), a.cols()));
  // Symmetrize away the round-off of the triangular solves.
  out.inverse = 0.5 * (out.inverse + out.inverse.transpose()).eval();
  out.trace_inverse = out.inverse.trace();
  out.log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return out;
}

}  // namespace bapnmf
