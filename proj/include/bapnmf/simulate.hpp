#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "bapnmf/model.hpp"

namespace bapnmf {

enum class InclusionDesign { sharing, probit };

struct CovariateSpec {
  enum class Kind { intercept, bernoulli, normal };
  Kind kind = Kind::intercept;
  double probability = 0.5;  // bernoulli only
};

struct ScenarioSpec {
  Index studies = 3;
  Index motifs = 20;
  Index signatures = 4;
  std::vector<Index> subjects{100, 100, 100};
  double concentration = 0.1;
  double exposure_shape = 2.0;
  double exposure_rate = 10.0;
  double weight = 1000.0;
  std::vector<CovariateSpec> covariates{CovariateSpec{}};
  InclusionDesign inclusion = InclusionDesign::sharing;
  /// sharing design: studies x signatures 0/1 presence matrix
  Eigen::MatrixXi sharing;
  /// probit design: per study, Q x R true coefficients
  std::vector<Eigen::MatrixXd> beta;
  /// Optional K x R ground-truth signatures used instead of Dirichlet draws.
  std::optional<Eigen::MatrixXd> plug_in_signatures;

  void validate() const;
};

struct GroundTruth {
  Eigen::MatrixXd signatures;              // K x R
  std::vector<Eigen::MatrixXd> exposures;  // per study, R x N, columns on the simplex
  std::vector<Eigen::VectorXd> weights;    // per study, N
  std::vector<Eigen::MatrixXd> inclusion;  // per study, R x N, 0/1
  std::vector<Eigen::MatrixXd> beta;       // per study, Q x R (probit design only)
};

struct SimulatedData {
  std::vector<StudyData> studies;
  GroundTruth truth;
};

/// Draws one dataset. Subjects whose inclusion vector comes out all zero get
/// it redrawn, since their exposure column would otherwise be undefined.
SimulatedData simulate(const ScenarioSpec& spec, std::uint64_t seed);

/// Desk-scale defaults of the two synthetic scenarios.
ScenarioSpec scenario_one();
ScenarioSpec scenario_two();

}  // namespace bapnmf
