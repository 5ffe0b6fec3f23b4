#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace bapnmf {

struct NmfOptions {
  int max_iterations = 2000;
  double tolerance = 1e-8;  // stop when the relative divergence improvement falls below
};

struct NmfSolution {
  Eigen::MatrixXd basis;         // K x R, columns sum to one
  Eigen::MatrixXd coefficients;  // R x N
  double divergence = 0.0;
  int iterations = 0;
  std::vector<double> trace;  // divergence after every iteration
};

/// Generalized KL divergence D(M || A) = sum m log(m / a) - m + a.
double kl_divergence(const Eigen::MatrixXd& m, const Eigen::MatrixXd& approx);

/// Multiplicative-update KL NMF. Throws DegenerateInputError for an all-zero M.
NmfSolution frequentist_nmf(const Eigen::MatrixXd& m, Eigen::Index rank, std::uint64_t seed,
                            const NmfOptions& opts = {});

/// Same updates with the basis held fixed; only the coefficients move.
NmfSolution frequentist_nmf_fixed_basis(const Eigen::MatrixXd& m, const Eigen::MatrixXd& basis,
                                        std::uint64_t seed, const NmfOptions& opts = {});

/// Left-to-right scan keeping a column only if its cosine similarity with
/// every column already kept is at most `threshold`. Zero columns are dropped.
std::vector<Eigen::Index> cosine_dedup(const Eigen::MatrixXd& columns, double threshold = 0.5);

}  // namespace bapnmf
