#include "bapnmf/nmf.hpp"

#include <cmath>

#include "bapnmf/errors.hpp"
#include "bapnmf/linalg.hpp"
#include "bapnmf/rng.hpp"

namespace bapnmf {
namespace {

constexpr double kFloor = 1e-12;

void check_counts(const Eigen::MatrixXd& m) {
  if (m.size() == 0) throw DegenerateInputError("nmf: empty matrix");
  if (!m.allFinite() || (m.array() < 0.0).any()) throw DomainError("nmf: negative or non-finite entry");
  if (m.sum() <= 0.0) throw DegenerateInputError("nmf: all-zero matrix");
}

// H <- H .* (W' (M ./ WH)) ./ (W' 1)
void update_coefficients(const Eigen::MatrixXd& m, const Eigen::MatrixXd& w, Eigen::MatrixXd& h) {
  const Eigen::MatrixXd ratio = m.cwiseQuotient((w * h).cwiseMax(kFloor));
  const Eigen::VectorXd col_sums = w.colwise().sum().transpose().cwiseMax(kFloor);
  h = h.cwiseProduct(w.transpose() * ratio);
  h = col_sums.cwiseInverse().asDiagonal() * h;
}

// W <- W .* ((M ./ WH) H') ./ (1 H')
void update_basis(const Eigen::MatrixXd& m, Eigen::MatrixXd& w, const Eigen::MatrixXd& h) {
  const Eigen::MatrixXd ratio = m.cwiseQuotient((w * h).cwiseMax(kFloor));
  const Eigen::RowVectorXd row_sums = h.rowwise().sum().transpose().cwiseMax(kFloor);
  w = w.cwiseProduct(ratio * h.transpose());
  w = w * row_sums.cwiseInverse().asDiagonal();
}

bool improvement_small(double previous, double current, double tol) {
  if (current <= 1e-300) return true;
  return (previous - current) <= tol * current;
}

Eigen::MatrixXd random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale) {
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = scale * (0.5 + rng.uniform());
  }
  return out;
}

}  // namespace

double kl_divergence(const Eigen::MatrixXd& m, const Eigen::MatrixXd& approx) {
  double out = 0.0;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const double x = m(i, j);
      const double a = std::max(approx(i, j), kFloor);
      if (x > 0.0) out += x * std::log(x / a) - x;
      out += a;
    }
  }
  return std::max(out, 0.0);
}

NmfSolution frequentist_nmf(const Eigen::MatrixXd& m, Eigen::Index rank, std::uint64_t seed,
                            const NmfOptions& opts) {
  check_counts(m);
  if (rank < 1) throw DomainError("nmf: rank must be >= 1");
  Rng rng(seed);
  const double scale = std::sqrt(m.mean() / static_cast<double>(rank));
  NmfSolution sol;
  sol.basis = random_matrix(rng, m.rows(), rank, scale);
  sol.coefficients = random_matrix(rng, rank, m.cols(), scale);
  double previous = kl_divergence(m, sol.basis * sol.coefficients);
  for (int it = 0; it < opts.max_iterations; ++it) {
    update_coefficients(m, sol.basis, sol.coefficients);
    update_basis(m, sol.basis, sol.coefficients);
    const double current = kl_divergence(m, sol.basis * sol.coefficients);
    sol.trace.push_back(current);
    sol.iterations = it + 1;
    const bool done = improvement_small(previous, current, opts.tolerance);
    previous = current;
    if (done) break;
  }
  // Move the column scale of the basis into the coefficients.
  const Eigen::VectorXd mass = sol.basis.colwise().sum().transpose();
  for (Eigen::Index r = 0; r < rank; ++r) {
    if (mass(r) > 0.0) {
      sol.basis.col(r) /= mass(r);
      sol.coefficients.row(r) *= mass(r);
    }
  }
  sol.divergence = previous;
  return sol;
}

NmfSolution frequentist_nmf_fixed_basis(const Eigen::MatrixXd& m, const Eigen::MatrixXd& basis,
                                        std::uint64_t seed, const NmfOptions& opts) {
  check_counts(m);
  if (basis.rows() != m.rows()) throw StructuralError("nmf: basis rows do not match motif count");
  if ((basis.array() < 0.0).any()) throw DomainError("nmf: negative basis entry");
  for (Eigen::Index r = 0; r < basis.cols(); ++r) {
    if (basis.col(r).sum() <= 0.0) throw DegenerateInputError("nmf: all-zero basis column");
  }
  Rng rng(seed);
  NmfSolution sol;
  sol.basis = basis;
  const double scale = m.colwise().sum().mean() / static_cast<double>(basis.cols());
  sol.coefficients = random_matrix(rng, basis.cols(), m.cols(), scale);
  double previous = kl_divergence(m, sol.basis * sol.coefficients);
  for (int it = 0; it < opts.max_iterations; ++it) {
    update_coefficients(m, sol.basis, sol.coefficients);
    const double current = kl_divergence(m, sol.basis * sol.coefficients);
    sol.trace.push_back(current);
    sol.iterations = it + 1;
    const bool done = improvement_small(previous, current, opts.tolerance);
    previous = current;
    if (done) break;
  }
  sol.divergence = previous;
  return sol;
}

std::vector<Eigen::Index> cosine_dedup(const Eigen::MatrixXd& columns, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) throw DomainError("cosine_dedup: threshold outside (0, 1]");
  std::vector<Eigen::Index> kept;
  for (Eigen::Index c = 0; c < columns.cols(); ++c) {
    if (columns.col(c).norm() == 0.0) continue;
    bool duplicate = false;
    for (Eigen::Index k : kept) {
      if (cosine_similarity(columns.col(c), columns.col(k)) > threshold) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) kept.push_back(c);
  }
  return kept;
}

}  // namespace bapnmf
