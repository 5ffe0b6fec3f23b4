#pragma once

#include <functional>
#include <string>
#include <vector>

#include "bapnmf/model.hpp"
#include "bapnmf/quadrature.hpp"

namespace bapnmf {

enum class FitMode { discovery, recovery_discovery };

struct FitDiagnostics;

struct FitConfig {
  int max_iterations = 2000;
  double tolerance = 1e-5;
  Index rank = 4;             // total signature count R
  Index discovered_rank = 0;  // R_discov; recovery-discovery mode only
  FitMode mode = FitMode::discovery;
  bool track_objective = true;
  std::uint64_t seed = 0;
  QuadratureConfig quadrature;
  /// Skip the inclusion / latent-score / coefficient / precision steps, so
  /// the probit layer keeps its initial values.
  bool freeze_probit = false;
  int threads = 1;
  /// Called after every completed sweep.
  std::function<void(const VariationalState&, const FitDiagnostics&)> observer;

  void validate() const;
};

struct FitDiagnostics {
  std::vector<double> objective;  // empty entries are NaN when tracking is off
  std::vector<double> max_delta;
  std::vector<double> seconds;
  std::string termination;  // "converged" or "max-iterations"

  int iterations() const { return static_cast<int>(max_delta.size()); }
};

struct FitResult {
  VariationalState state;
  FitDiagnostics diagnostics;
};

// Individual CAVI steps, in sweep order. Each updates `state` in place and
// reads only factors already current for that step. `threads` parallelizes
// over studies; results do not depend on it.

/// Step 1: expected latent counts from the Dirichlet means; refreshes the
/// per-subject and per-motif sufficient statistics.
void update_latent_counts(const std::vector<StudyData>& data, VariationalState& state,
                          int threads = 1);
/// Step 2: subject weights.
void update_weights(const std::vector<StudyData>& data, VariationalState& state, int threads = 1);
/// Step 3: numeric factor of the weight shape.
void update_weight_shape(const std::vector<StudyData>& data, const Hyperparameters& hp,
                         VariationalState& state, const QuadratureConfig& quad, int threads = 1);
/// Step 4: Gamma factor of the weight rate.
void update_weight_rate(const std::vector<StudyData>& data, const Hyperparameters& hp,
                        VariationalState& state);
/// Step 5: signature Dirichlet parameters (recovered columns use the catalog prior).
void update_signatures(const Hyperparameters& hp, VariationalState& state);
/// Step 6: exposure Dirichlet parameters.
void update_exposures(const Hyperparameters& hp, VariationalState& state);
/// Step 7: Bernoulli inclusion means. All signatures of a subject are
/// updated from the same previous inclusion vector.
void update_inclusion(const std::vector<StudyData>& data, const Hyperparameters& hp,
                      VariationalState& state, int threads = 1);
/// Step 8: latent score locations and mixture means.
void update_a_star(const std::vector<StudyData>& data, VariationalState& state);
/// Step 9: coefficient means and covariances.
void update_beta(const std::vector<StudyData>& data, const Hyperparameters& hp,
                 VariationalState& state);
/// Step 10: precision factors.
void update_tau(const std::vector<StudyData>& data, const Hyperparameters& hp,
                VariationalState& state);

/// The unclamped log-odds computed by step 7 for one (study, signature, subject).
double inclusion_logit(const StudyData& study, const StudyPriors& priors, const StudyFactors& f,
                       Index r, Index j);

/// Unnormalized log-density of q(alpha_w) for one study, with the
/// alpha-independent terms dropped.
struct WeightShapeLogDensity {
  double slope = 0.0;
  double lgamma_count = 0.0;
  double operator()(double alpha) const;
};
WeightShapeLogDensity weight_shape_log_density(const StudyPriors& priors, const StudyFactors& f);

/// One full sweep of the ten steps.
void sweep(const std::vector<StudyData>& data, const Hyperparameters& hp, const FitConfig& cfg,
           VariationalState& state);

/// max |new - old| / (|old| + 1e-8) over every factor parameter.
double max_relative_change(const VariationalState& before, const VariationalState& after);

FitResult fit(const std::vector<StudyData>& data, const Hyperparameters& hp, const FitConfig& cfg,
              VariationalState init);

}  // namespace bapnmf
