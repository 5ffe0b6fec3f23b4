#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

// Index convention throughout: motif i in [0, K), signature r in [0, R),
// subject j in [0, N_s), covariate q in [0, Q_s). Matrices are stored
// motif x signature (K x R) and signature x subject (R x N_s).

namespace bapnmf {

using Eigen::Index;

/// One study: its counts, covariate design and labels. Immutable once built.
struct StudyData {
  std::string id;
  Eigen::MatrixXd counts;      // K x N, non-negative integer valued
  Eigen::MatrixXd covariates;  // N x Q, column 0 is the all-ones intercept
  std::vector<std::string> motif_labels;
  std::vector<std::string> subject_ids;

  Index motifs() const { return counts.rows(); }
  Index subjects() const { return counts.cols(); }
  Index covariate_count() const { return covariates.cols(); }
  Eigen::VectorXd column_totals() const { return counts.colwise().sum().transpose(); }

  /// Throws StructuralError / DataError on any invariant breach.
  void validate() const;
};

/// Builds a study with an intercept-only design and generated labels.
StudyData make_study(std::string id, Eigen::MatrixXd counts,
                     std::optional<Eigen::MatrixXd> covariates_without_intercept = std::nullopt);

struct SignatureCatalog {
  std::vector<std::string> names;
  std::vector<std::string> motif_labels;
  Eigen::MatrixXd profiles;  // K x R_recov, columns on the simplex

  Index size() const { return profiles.cols(); }
  void validate() const;
};

struct StudyPriors {
  double alpha_e1 = 5.0;  // slab concentration (a = 1)
  double alpha_e0 = 0.05; // spike concentration (a = 0)
  double lambda_w = 0.1;  // Exp rate on the weight shape
  double a_w = 0.01;      // Gamma shape on the weight rate
  double b_w = 0.01;      // Gamma rate on the weight rate
  Eigen::MatrixXd beta0;  // Q x R prior means of the probit coefficients
};

struct Hyperparameters {
  Eigen::VectorXd alpha_p;                 // K, Dirichlet prior of discovered signatures
  Eigen::MatrixXd recovered_profiles;      // K x R_recov (empty in discovery mode)
  Eigen::VectorXd recovery_concentration;  // R_recov, c_r
  std::vector<StudyPriors> studies;
  double gamma1 = 1.0;
  double gamma2 = 1.0;

  Index recovered_count() const { return recovered_profiles.cols(); }

  /// K x R Dirichlet concentration for every signature column: c_r * profile_r
  /// for the first R_recov columns, alpha_p for the rest.
  Eigen::MatrixXd signature_prior(Index signatures) const;

  void validate(const std::vector<StudyData>& data, Index signatures) const;
};

Hyperparameters default_hyperparameters(const std::vector<StudyData>& data, Index signatures,
                                        const SignatureCatalog* catalog = nullptr,
                                        double recovery_concentration = 1000.0);

/// q(alpha_w) is known only up to its unnormalized log-density
///   h(alpha) = slope * alpha - lgamma_count * lgamma(alpha);
/// the state keeps the family parameters and the quadrature moments.
struct WeightShapeFactor {
  double slope = -0.1;
  double lgamma_count = 0.0;
  double log_norm = 0.0;        // log integral of exp(h) over (0, inf)
  double mean = 10.0;           // E[alpha]
  double mean_log_gamma = 0.0;  // E[lgamma(alpha)]
  double log_c = 0.0;           // log of the normalizer C in the published form
};

struct StudyFactors {
  Eigen::MatrixXd theta_e;          // R x N Dirichlet parameters of exposures
  Eigen::MatrixXd theta_a;          // R x N Bernoulli means
  Eigen::MatrixXd a_star_location;  // R x N, beta_mean^T x
  Eigen::MatrixXd a_star_mean;      // R x N, E[a*] under the truncated mixture
  Eigen::MatrixXd beta_mean;        // Q x R
  std::vector<Eigen::MatrixXd> beta_cov;  // R matrices, Q x Q
  Eigen::VectorXd tau_shape;        // R
  Eigen::VectorXd tau_rate;         // R
  Eigen::VectorXd w_shape;          // N
  Eigen::VectorXd w_rate;           // N
  WeightShapeFactor w_alpha;
  double w_beta_shape = 1.0;
  double w_beta_rate = 1.0;
  Eigen::MatrixXd z_subject;        // R x N, sum over motifs of latent counts
  Eigen::MatrixXd z_motif;          // K x R, this study's sum over subjects
};

struct VariationalState {
  Eigen::MatrixXd theta_p;  // K x R Dirichlet parameters of signatures
  std::vector<StudyFactors> studies;
  Eigen::MatrixXd z_motif;  // K x R, pooled over studies
  int iteration = 0;
  std::uint64_t seed = 0;

  Index motifs() const { return theta_p.rows(); }
  Index signatures() const { return theta_p.cols(); }
};

/// Allocates every factor with the right shape and prior-mean contents.
/// Signature and exposure parameters are set to flat pseudo-counts; z caches
/// are filled with the proportional split of the counts.
VariationalState prior_state(const std::vector<StudyData>& data, const Hyperparameters& hp,
                             Index signatures, std::uint64_t seed);

struct Violation {
  std::string what;
  std::string where;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  std::string summary() const;
};

/// Checks every structural and numerical invariant of the state. Dimension
/// mismatches throw StructuralError; value violations are reported.
ValidationReport validate_state(const VariationalState& state, const std::vector<StudyData>& data);

struct PointEstimates {
  Eigen::MatrixXd signatures;               // K x R
  std::vector<Eigen::MatrixXd> exposures;   // per study, R x N
  std::vector<Eigen::VectorXd> weights;     // per study, N
  std::vector<Eigen::MatrixXd> inclusion;   // per study, R x N
};

PointEstimates point_estimates(const VariationalState& state);

/// Checkpoint archive: state plus hyperparameters.
inline constexpr const char* kCheckpointHeader = "BAPMNMF-STATE-v1";

void save_checkpoint(const std::string& path, const VariationalState& state,
                     const Hyperparameters& hp);
struct Checkpoint {
  VariationalState state;
  Hyperparameters hp;
};
Checkpoint load_checkpoint(const std::string& path);

}  // namespace bapnmf
