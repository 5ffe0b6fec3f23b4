#pragma once

// Small fixtures shared by the unit tests.

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "bapnmf/cavi.hpp"
#include "bapnmf/model.hpp"
#include "bapnmf/rng.hpp"

namespace testing_support {

using bapnmf::Index;

/// Poisson counts from a random K x R profile matrix with two covariates per study.
inline std::vector<bapnmf::StudyData> small_studies(Index studies, Index k, Index r, Index n,
                                                    std::uint64_t seed, double depth = 200.0) {
  bapnmf::Rng rng(seed);
  Eigen::MatrixXd p(k, r);
  for (Index c = 0; c < r; ++c) p.col(c) = rng.dirichlet(k, 0.5);
  std::vector<bapnmf::StudyData> out;
  for (Index s = 0; s < studies; ++s) {
    Eigen::MatrixXd m(k, n);
    Eigen::MatrixXd x(n, 2);
    for (Index j = 0; j < n; ++j) {
      const Eigen::VectorXd e = rng.dirichlet(r, 1.0);
      const Eigen::VectorXd rate = p * e * depth;
      for (Index i = 0; i < k; ++i) m(i, j) = static_cast<double>(rng.poisson(rate(i)));
      x(j, 0) = rng.bernoulli(0.4) ? 1.0 : 0.0;
      x(j, 1) = rng.normal();
    }
    out.push_back(bapnmf::make_study("s" + std::to_string(s + 1), m, x));
  }
  return out;
}

/// A prior state pushed through a few sweeps so that every factor is non-trivial.
inline bapnmf::VariationalState warmed_state(const std::vector<bapnmf::StudyData>& data,
                                             const bapnmf::Hyperparameters& hp, Index r,
                                             std::uint64_t seed, int sweeps = 5) {
  bapnmf::VariationalState st = bapnmf::prior_state(data, hp, r, seed);
  bapnmf::Rng rng(seed);
  // break the column symmetry of the flat prior
  for (Index c = 0; c < r; ++c) st.theta_p.col(c) = rng.dirichlet(st.motifs(), 1.0) * 50.0;
  st.theta_p.array() += 0.1;
  bapnmf::FitConfig cfg;
  cfg.rank = r;
  for (int it = 0; it < sweeps; ++it) bapnmf::sweep(data, hp, cfg, st);
  return st;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("bapnmf_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing_support
