#include "bapnmf/evaluate.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/normal.hpp>

#include "bapnmf/errors.hpp"
#include "bapnmf/linalg.hpp"
#include "bapnmf/special.hpp"

namespace bapnmf {

MatchReport cosine_match(const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& truth,
                         double threshold) {
  if (estimate.rows() != truth.rows()) throw StructuralError("cosine_match: motif dimension mismatch");
  if (estimate.cols() == 0) throw DegenerateInputError("cosine_match: no estimated signatures");
  const Eigen::MatrixXd cos = cosine_matrix(truth, estimate);
  MatchReport out;
  out.threshold = threshold;
  out.best_cosine.resize(truth.cols());
  for (Index t = 0; t < truth.cols(); ++t) {
    Index best = 0;
    out.best_cosine(t) = cos.row(t).maxCoeff(&best);
    out.matched.push_back(best);
    out.captured.push_back(out.best_cosine(t) >= threshold);
  }
  return out;
}

Eigen::VectorXd detection_rate(const std::vector<MatchReport>& reports) {
  if (reports.empty()) throw DomainError("detection_rate: no reports");
  const std::size_t n = reports.front().captured.size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Index>(n));
  for (const MatchReport& r : reports) {
    if (r.captured.size() != n) throw StructuralError("detection_rate: reports disagree in size");
    for (std::size_t t = 0; t < n; ++t) out(static_cast<Index>(t)) += r.captured[t] ? 1.0 : 0.0;
  }
  return out / static_cast<double>(reports.size());
}

Eigen::VectorXd design_prevalence(const Eigen::MatrixXd& covariates, const Eigen::MatrixXd& beta) {
  if (covariates.cols() != beta.rows()) throw StructuralError("prevalence: covariate count mismatch");
  const Eigen::MatrixXd linear = covariates * beta;  // N x R
  Eigen::VectorXd out(beta.cols());
  for (Index r = 0; r < beta.cols(); ++r) {
    double total = 0.0;
    for (Index j = 0; j < linear.rows(); ++j) total += std_normal_cdf(linear(j, r));
    out(r) = total / static_cast<double>(linear.rows());
  }
  return out;
}

std::vector<Eigen::VectorXd> inclusion_prevalence(const VariationalState& state,
                                                  const std::vector<StudyData>& data) {
  if (data.size() != state.studies.size()) throw StructuralError("study count mismatch");
  std::vector<Eigen::VectorXd> out;
  for (std::size_t s = 0; s < data.size(); ++s) {
    out.push_back(design_prevalence(data[s].covariates, state.studies[s].beta_mean));
  }
  return out;
}

std::vector<CredibleIntervals> beta_credible_intervals(const VariationalState& state, double level) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("credible level outside (0, 1)");
  const double z = boost::math::quantile(boost::math::normal(), 0.5 + 0.5 * level);
  std::vector<CredibleIntervals> out;
  for (const StudyFactors& f : state.studies) {
    CredibleIntervals ci;
    ci.mean = f.beta_mean;
    Eigen::MatrixXd sd(f.beta_mean.rows(), f.beta_mean.cols());
    for (Index r = 0; r < f.beta_mean.cols(); ++r) sd.col(r) = f.beta_cov[r].diagonal().cwiseSqrt();
    ci.low = ci.mean - z * sd;
    ci.high = ci.mean + z * sd;
    out.push_back(std::move(ci));
  }
  return out;
}

double sample_quantile(std::vector<double> values, double probability) {
  if (values.empty()) throw DegenerateInputError("quantile of an empty sample");
  if (!(probability >= 0.0 && probability <= 1.0)) throw DomainError("quantile probability outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * probability;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<Index> signature_filter(const VariationalState& state, double percentile, double cut) {
  if (!(percentile > 0.0 && percentile < 1.0)) throw DomainError("percentile outside (0, 1)");
  std::vector<Index> kept;
  for (Index r = 0; r < state.signatures(); ++r) {
    std::vector<double> pool;
    for (const StudyFactors& f : state.studies) {
      for (Index j = 0; j < f.a_star_mean.cols(); ++j) pool.push_back(f.a_star_mean(r, j));
    }
    if (sample_quantile(std::move(pool), percentile) >= cut) kept.push_back(r);
  }
  return kept;
}

}  // namespace bapnmf
