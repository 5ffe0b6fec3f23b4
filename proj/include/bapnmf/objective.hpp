#pragma once

#include <vector>

#include "bapnmf/model.hpp"
#include "bapnmf/quadrature.hpp"

namespace bapnmf {

/// Per-block breakdown of the surrogate objective.
struct ObjectiveTerms {
  double allocation = 0.0;  // counts, signatures, exposures
  double weights = 0.0;     // w, alpha_w, beta_w
  double probit = 0.0;      // a, a*, beta, tau
  double total() const { return allocation + weights + probit; }
};

/// Surrogate of the evidence lower bound.
///
/// The allocation block is the log joint of the counts and the Dirichlet
/// priors evaluated at the Dirichlet means (in softmax coordinates, so that
/// the latent-count / Dirichlet updates are exactly an EM step on it). The
/// weight and probit blocks are the exact expected log joint plus entropy,
/// with the probit log-likelihood taken under the Bowling form.
ObjectiveTerms surrogate_objective_terms(const std::vector<StudyData>& data,
                                         const Hyperparameters& hp, const VariationalState& state);

double surrogate_objective(const std::vector<StudyData>& data, const Hyperparameters& hp,
                           const VariationalState& state);

}  // namespace bapnmf
