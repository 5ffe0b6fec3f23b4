#pragma once

// Tiny single-study instance on which the CAVI fixed point is compared with
// long-run collapsed Gibbs posterior means.

#include <cstdint>

#include "bapnmf/cavi.hpp"
#include "bapnmf/init.hpp"
#include "bapnmf/rng.hpp"
#include "oracles.hpp"

namespace testing_support {

struct FixedPointComparison {
  double max_signature_gap = 0.0;
  double max_exposure_gap = 0.0;
  int cavi_iterations = 0;
};

inline FixedPointComparison compare_with_gibbs(int sweeps, std::uint64_t seed) {
  using namespace bapnmf;
  const Index k = 5, r_count = 2, n = 10;
  Eigen::MatrixXd p(k, r_count);
  p << 0.45, 0.03, 0.45, 0.03, 0.04, 0.04, 0.03, 0.45, 0.03, 0.45;
  Rng rng(seed);
  Eigen::MatrixXd m(k, n);
  for (Index j = 0; j < n; ++j) {
    const double lead = 0.85 + 0.1 * rng.uniform();
    const Eigen::Vector2d e = (j % 2 == 0) ? Eigen::Vector2d(lead, 1 - lead) : Eigen::Vector2d(1 - lead, lead);
    const Eigen::VectorXd rate = p * e * 100.0;
    for (Index i = 0; i < k; ++i) m(i, j) = static_cast<double>(rng.poisson(rate(i)));
  }
  std::vector<StudyData> data{make_study("tiny", m)};
  Hyperparameters hp = default_hyperparameters(data, r_count);
  const double alpha_e = 0.5;
  hp.studies[0].alpha_e1 = hp.studies[0].alpha_e0 = alpha_e;

  FitConfig cfg;
  cfg.rank = r_count;
  cfg.tolerance = 1e-10;
  cfg.max_iterations = 20000;
  cfg.track_objective = false;
  const FitResult res = fit(data, hp, cfg, init_discovery(data, hp, r_count, seed));
  const PointEstimates pe = point_estimates(res.state);

  const Eigen::MatrixXd p_hat = pe.signatures;
  const Eigen::MatrixXd e_hat = pe.exposures[0];
  auto start = [&](Index i, Index j) {
    Eigen::VectorXd share = p_hat.row(i).transpose().cwiseProduct(e_hat.col(j));
    return Eigen::VectorXd(share / share.sum());
  };
  const oracle::AllocationPosterior gibbs =
      oracle::collapsed_gibbs(m, hp.alpha_p, alpha_e, r_count, sweeps, sweeps / 20, seed + 1, start);

  FixedPointComparison out;
  out.cavi_iterations = res.diagnostics.iterations();
  out.max_signature_gap = (gibbs.signatures - p_hat).cwiseAbs().maxCoeff();
  out.max_exposure_gap = (gibbs.exposures - e_hat).cwiseAbs().maxCoeff();
  return out;
}

}  // namespace testing_support
