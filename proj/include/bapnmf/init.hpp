#pragma once

#include <cstdint>
#include <vector>

#include "bapnmf/model.hpp"
#include "bapnmf/nmf.hpp"

namespace bapnmf {

struct InitOptions {
  double pseudo_count_scale = 100.0;  // Dirichlet parameters = scale * initial mean
  double dedup_threshold = 0.5;
  NmfOptions nmf;
};

/// Columns of all studies side by side (K x sum N_s).
Eigen::MatrixXd concatenate_counts(const std::vector<StudyData>& data);

/// Frequentist NMF at rank R, cosine dedup, refit at the reduced rank R',
/// then R - R' signatures drawn from the discovered-signature prior.
/// Exposures of the random signatures are spike-prior draws.
VariationalState init_discovery(const std::vector<StudyData>& data, const Hyperparameters& hp,
                                Index rank, std::uint64_t seed, const InitOptions& opts = {});

/// Recovered signatures start at the catalog prior with exposures from a
/// fixed-basis NMF; discovered signatures and their exposures are prior draws.
VariationalState init_recovery_discovery(const std::vector<StudyData>& data,
                                         const Hyperparameters& hp, const SignatureCatalog& catalog,
                                         Index discovered, std::uint64_t seed,
                                         const InitOptions& opts = {});

}  // namespace bapnmf
