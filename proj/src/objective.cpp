#include "bapnmf/objective.hpp"

#include <cmath>

#include "bapnmf/errors.hpp"
#include "bapnmf/linalg.hpp"
#include "bapnmf/special.hpp"

namespace bapnmf {
namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

// log Dirichlet(x; alpha) up to the softmax-coordinate Jacobian, which turns
// the usual (alpha - 1) exponents into alpha.
double dirichlet_softmax_log_density(const Eigen::Ref<const Eigen::VectorXd>& x,
                                     const Eigen::Ref<const Eigen::VectorXd>& alpha) {
  double out = std::lgamma(alpha.sum());
  for (Index i = 0; i < x.size(); ++i) out += alpha(i) * std::log(x(i)) - std::lgamma(alpha(i));
  return out;
}

double gamma_entropy(double shape, double rate) {
  return shape - std::log(rate) + std::lgamma(shape) + (1.0 - shape) * digamma(shape);
}

// E[log Gamma(x; shape0, rate0)] for x ~ Gamma(shape, rate).
double gamma_cross(double shape0, double rate0, double shape, double rate) {
  const double e_log = digamma(shape) - std::log(rate);
  return shape0 * std::log(rate0) - std::lgamma(shape0) + (shape0 - 1.0) * e_log -
         rate0 * shape / rate;
}

double bernoulli_entropy(double p) {
  double out = 0.0;
  if (p > 0.0) out -= p * std::log(p);
  if (p < 1.0) out -= (1.0 - p) * std::log1p(-p);
  return out;
}

double allocation_block(const std::vector<StudyData>& data, const Hyperparameters& hp,
                        const VariationalState& state) {
  const Eigen::MatrixXd p_hat = column_normalized(state.theta_p);
  const Eigen::MatrixXd prior = hp.signature_prior(state.signatures());
  double out = 0.0;
  for (Index r = 0; r < p_hat.cols(); ++r) {
    out += dirichlet_softmax_log_density(p_hat.col(r), prior.col(r));
  }
  for (std::size_t s = 0; s < data.size(); ++s) {
    const StudyFactors& f = state.studies[s];
    const StudyPriors& p = hp.studies[s];
    const Eigen::MatrixXd e_hat = column_normalized(f.theta_e);
    const Eigen::MatrixXd rate = p_hat * e_hat;
    const Eigen::MatrixXd& m = data[s].counts;
    for (Index j = 0; j < m.cols(); ++j) {
      for (Index i = 0; i < m.rows(); ++i) {
        if (m(i, j) > 0.0) out += m(i, j) * std::log(rate(i, j));
      }
      const Eigen::VectorXd concentration =
          (f.theta_a.col(j).array() * p.alpha_e1 + (1.0 - f.theta_a.col(j).array()) * p.alpha_e0)
              .matrix();
      out += dirichlet_softmax_log_density(e_hat.col(j), concentration);
    }
  }
  return out;
}

double weight_block(const std::vector<StudyData>& data, const Hyperparameters& hp,
                    const VariationalState& state) {
  double out = 0.0;
  for (std::size_t s = 0; s < data.size(); ++s) {
    const StudyFactors& f = state.studies[s];
    const StudyPriors& p = hp.studies[s];
    const WeightShapeFactor& a = f.w_alpha;
    const double e_beta = f.w_beta_shape / f.w_beta_rate;
    const double e_log_beta = digamma(f.w_beta_shape) - std::log(f.w_beta_rate);
    const Eigen::VectorXd totals = data[s].column_totals();
    for (Index j = 0; j < totals.size(); ++j) {
      const double e_w = f.w_shape(j) / f.w_rate(j);
      const double e_log_w = digamma(f.w_shape(j)) - std::log(f.w_rate(j));
      out += totals(j) * e_log_w - e_w;
      out += a.mean * e_log_beta - a.mean_log_gamma + (a.mean - 1.0) * e_log_w - e_beta * e_w;
      out += gamma_entropy(f.w_shape(j), f.w_rate(j));
    }
    const Eigen::MatrixXd& m = data[s].counts;
    for (Index j = 0; j < m.cols(); ++j) {
      for (Index i = 0; i < m.rows(); ++i) out -= std::lgamma(m(i, j) + 1.0);
    }
    out += std::log(p.lambda_w) - p.lambda_w * a.mean;
    out += a.log_norm - a.slope * a.mean + a.lgamma_count * a.mean_log_gamma;
    out += gamma_cross(p.a_w, p.b_w, f.w_beta_shape, f.w_beta_rate);
    out += gamma_entropy(f.w_beta_shape, f.w_beta_rate);
  }
  return out;
}

double probit_block(const std::vector<StudyData>& data, const Hyperparameters& hp,
                    const VariationalState& state) {
  double out = 0.0;
  for (std::size_t s = 0; s < data.size(); ++s) {
    const StudyFactors& f = state.studies[s];
    const StudyPriors& p = hp.studies[s];
    const Eigen::MatrixXd& x = data[s].covariates;
    const double q = static_cast<double>(x.cols());
    for (Index r = 0; r < f.theta_a.rows(); ++r) {
      const Eigen::MatrixXd& cov = f.beta_cov[r];
      for (Index j = 0; j < x.rows(); ++j) {
        const double location = x.row(j).dot(f.beta_mean.col(r));
        const double variance = x.row(j) * cov * x.row(j).transpose();
        const BowlingLogMoments bm = bowling_log_moments(-location, variance);
        const double a = f.theta_a(r, j);
        out += a * bm.upper + (1.0 - a) * bm.lower + bernoulli_entropy(a);
        const double resid = f.a_star_mean(r, j) - location;
        out -= 0.5 * (resid * resid + variance);
      }
      const double e_tau = f.tau_shape(r) / f.tau_rate(r);
      const double e_log_tau = digamma(f.tau_shape(r)) - std::log(f.tau_rate(r));
      const Eigen::VectorXd diff = f.beta_mean.col(r) - p.beta0.col(r);
      Eigen::LLT<Eigen::MatrixXd> llt(cov);
      if (llt.info() != Eigen::Success) throw DecompositionError("objective: beta covariance not PD");
      const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
      out += -0.5 * q * kLog2Pi + 0.5 * q * e_log_tau -
             0.5 * e_tau * (cov.trace() + diff.squaredNorm());
      out += 0.5 * q * (kLog2Pi + 1.0) + 0.5 * log_det;
      out += gamma_cross(hp.gamma1, hp.gamma2, f.tau_shape(r), f.tau_rate(r));
      out += gamma_entropy(f.tau_shape(r), f.tau_rate(r));
    }
  }
  return out;
}

}  // namespace

ObjectiveTerms surrogate_objective_terms(const std::vector<StudyData>& data,
                                         const Hyperparameters& hp,
                                         const VariationalState& state) {
  if (data.size() != state.studies.size()) throw StructuralError("study count mismatch");
  ObjectiveTerms t;
  t.allocation = allocation_block(data, hp, state);
  t.weights = weight_block(data, hp, state);
  t.probit = probit_block(data, hp, state);
  return t;
}

double surrogate_objective(const std::vector<StudyData>& data, const Hyperparameters& hp,
                           const VariationalState& state) {
  return surrogate_objective_terms(data, hp, state).total();
}

}  // namespace bapnmf
