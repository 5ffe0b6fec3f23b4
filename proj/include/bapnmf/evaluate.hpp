#pragma once

#include <vector>

#include "bapnmf/model.hpp"

namespace bapnmf {

struct MatchReport {
  Eigen::VectorXd best_cosine;          // per truth column
  std::vector<Index> matched;           // index of the best estimate column
  std::vector<bool> captured;           // best_cosine >= threshold
  double threshold = 0.8;

  double mean_cosine() const { return best_cosine.mean(); }
};

/// Greedy per-truth-column best match; two truth columns may share an estimate.
MatchReport cosine_match(const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& truth,
                         double threshold = 0.8);

/// Fraction of reports that captured each truth signature.
Eigen::VectorXd detection_rate(const std::vector<MatchReport>& reports);

/// (1/N) sum_j Phi(beta' x_j) per signature, for a Q x R coefficient matrix.
Eigen::VectorXd design_prevalence(const Eigen::MatrixXd& covariates, const Eigen::MatrixXd& beta);

/// Per study, the prevalence implied by the fitted coefficient means.
std::vector<Eigen::VectorXd> inclusion_prevalence(const VariationalState& state,
                                                  const std::vector<StudyData>& data);

struct CredibleIntervals {
  Eigen::MatrixXd low;   // Q x R
  Eigen::MatrixXd mean;  // Q x R
  Eigen::MatrixXd high;  // Q x R
};

/// Equal-tailed marginal intervals of the normal coefficient factors.
std::vector<CredibleIntervals> beta_credible_intervals(const VariationalState& state,
                                                       double level = 0.95);

/// Type-7 sample quantile (linear interpolation between order statistics).
double sample_quantile(std::vector<double> values, double probability);

/// Signatures whose `percentile` of the pooled latent-score means, over all
/// subjects of all studies, is at least `cut`.
std::vector<Index> signature_filter(const VariationalState& state, double percentile = 0.95,
                                    double cut = 0.0);

}  // namespace bapnmf
