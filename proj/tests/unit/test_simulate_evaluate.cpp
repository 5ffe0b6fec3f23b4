#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "bapnmf/cavi.hpp"
#include "bapnmf/evaluate.hpp"
#include "bapnmf/init.hpp"
#include "bapnmf/simulate.hpp"
#include "bapnmf/special.hpp"
#include "support.hpp"

using namespace bapnmf;

TEST(Simulate, ColumnTotalsCenterOnWeight) {
  const SimulatedData sim = simulate(scenario_one(), 1);
  ASSERT_EQ(sim.studies.size(), 3u);
  for (const auto& s : sim.studies) {
    EXPECT_EQ(s.motifs(), 20);
    EXPECT_EQ(s.subjects(), 100);
    const double mean = s.column_totals().mean();
    EXPECT_NEAR(mean, 1000.0, 3 * std::sqrt(1000.0 / 100));
  }
  for (Index r = 0; r < 4; ++r) EXPECT_NEAR(sim.truth.signatures.col(r).sum(), 1.0, 1e-12);
}

TEST(Simulate, ExpectedTotalsPassCltGate) {
  // Pool many subjects so the mean total is a tight estimate of the weight.
  ScenarioSpec spec = scenario_one();
  spec.subjects = {2000, 2000, 2000};
  const SimulatedData sim = simulate(spec, 2);
  for (const auto& s : sim.studies) {
    const double n = static_cast<double>(s.subjects());
    EXPECT_NEAR(s.column_totals().mean(), spec.weight, 4 * std::sqrt(spec.weight / n));
  }
}

TEST(Simulate, AbsentSignaturesHaveZeroExposure) {
  const SimulatedData sim = simulate(scenario_one(), 3);
  const ScenarioSpec spec = scenario_one();
  for (Index s = 0; s < 3; ++s) {
    for (Index r = 0; r < 4; ++r) {
      if (spec.sharing(s, r) == 0) {
        EXPECT_EQ(sim.truth.exposures[s].row(r).cwiseAbs().maxCoeff(), 0.0);
        EXPECT_EQ(sim.truth.inclusion[s].row(r).sum(), 0.0);
      }
    }
    for (Index j = 0; j < 100; ++j) EXPECT_NEAR(sim.truth.exposures[s].col(j).sum(), 1.0, 1e-12);
  }
}

TEST(Simulate, ProbitDesignAndDeterminism) {
  const ScenarioSpec spec = scenario_two();
  const SimulatedData a = simulate(spec, 4);
  const SimulatedData b = simulate(spec, 4);
  EXPECT_EQ(a.studies[0].counts, b.studies[0].counts);
  EXPECT_EQ(a.studies[2].covariates, b.studies[2].covariates);
  const Eigen::MatrixXd& x = a.studies[0].covariates;
  EXPECT_EQ(x.cols(), 4);
  EXPECT_TRUE(((x.col(1).array() == 0.0) || (x.col(1).array() == 1.0)).all());
  EXPECT_NEAR(x.col(1).mean(), 0.2, 0.12);
  ASSERT_EQ(a.truth.beta.size(), 3u);
  for (std::size_t s = 0; s < a.studies.size(); ++s) {
    for (Index j = 0; j < a.studies[s].subjects(); ++j) {
      EXPECT_GT(a.truth.inclusion[s].col(j).sum(), 0.0);
    }
  }
  EXPECT_NE(simulate(spec, 5).studies[0].counts, a.studies[0].counts);
}

TEST(Simulate, PlugInSignatures) {
  ScenarioSpec spec = scenario_one();
  Eigen::MatrixXd p = Eigen::MatrixXd::Constant(20, 4, 0.05);
  spec.plug_in_signatures = p;
  EXPECT_EQ(simulate(spec, 1).truth.signatures, p);
  spec.plug_in_signatures = Eigen::MatrixXd::Constant(20, 3, 0.05);
  EXPECT_ANY_THROW(simulate(spec, 1));
}

TEST(CosineMatch, IdentityOrthogonalAndPermutationInvariance) {
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(4, 3);
  const MatchReport self = cosine_match(id, id);
  EXPECT_NEAR(self.best_cosine.minCoeff(), 1.0, 1e-15);
  EXPECT_TRUE(std::all_of(self.captured.begin(), self.captured.end(), [](bool b) { return b; }));

  Eigen::MatrixXd other = Eigen::MatrixXd::Zero(4, 1);
  other(3, 0) = 1.0;
  const MatchReport miss = cosine_match(other, id);
  EXPECT_EQ(miss.best_cosine.maxCoeff(), 0.0);
  EXPECT_FALSE(miss.captured[0]);

  Eigen::MatrixXd est(4, 3);
  est << 0.5, 0.1, 0.3, 0.2, 0.6, 0.3, 0.2, 0.2, 0.1, 0.1, 0.1, 0.3;
  Eigen::MatrixXd shuffled(4, 3);
  shuffled << est.col(2), est.col(0), est.col(1);
  const MatchReport a = cosine_match(est, id);
  const MatchReport b = cosine_match(shuffled, id);
  EXPECT_EQ(a.best_cosine, b.best_cosine);
}

TEST(DetectionRate, AllOrNone) {
  MatchReport hit;
  hit.captured = {true, false};
  MatchReport hit2 = hit;
  hit2.captured = {true, true};
  const Eigen::VectorXd rate = detection_rate({hit, hit2});
  EXPECT_DOUBLE_EQ(rate(0), 1.0);
  EXPECT_DOUBLE_EQ(rate(1), 0.5);
  MatchReport none;
  none.captured = {false, false};
  EXPECT_EQ(detection_rate({none}).maxCoeff(), 0.0);
}

TEST(Prevalence, KnownValues) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(5, 1);
  EXPECT_NEAR(design_prevalence(x, Eigen::MatrixXd::Zero(1, 2))(1), 0.5, 1e-15);
  EXPECT_GE(design_prevalence(x, Eigen::MatrixXd::Constant(1, 1, 8.0))(0), 0.9999);
}

TEST(Prevalence, FromFittedState) {
  const auto data = testing_support::small_studies(1, 4, 2, 6, 3);
  const Hyperparameters hp = default_hyperparameters(data, 2);
  VariationalState st = prior_state(data, hp, 2, 0);
  st.studies[0].beta_mean.setZero();
  EXPECT_NEAR(inclusion_prevalence(st, data)[0](1), 0.5, 1e-15);
}

TEST(CredibleIntervals, NormalQuantiles) {
  const auto data = testing_support::small_studies(1, 4, 2, 6, 4);
  const Hyperparameters hp = default_hyperparameters(data, 2);
  VariationalState st = prior_state(data, hp, 2, 0);
  st.studies[0].beta_mean.setZero();
  for (auto& c : st.studies[0].beta_cov) c.setIdentity();
  const auto ci = beta_credible_intervals(st, 0.95);
  EXPECT_NEAR(ci[0].low(0, 0), -1.959963985, 1e-8);
  EXPECT_NEAR(ci[0].high(2, 1), 1.959963985, 1e-8);
  EXPECT_EQ(ci[0].mean(1, 1), 0.0);
  st.studies[0].beta_cov[0] *= 4.0;
  const auto half = beta_credible_intervals(st, 0.5);
  EXPECT_NEAR(half[0].high(0, 0) - half[0].mean(0, 0), 0.6744897502 * 2.0, 1e-8);
}

TEST(SignatureFilter, OrderStatisticRule) {
  const auto data = testing_support::small_studies(1, 4, 2, 50, 5);
  const Hyperparameters hp = default_hyperparameters(data, 2);
  VariationalState st = prior_state(data, hp, 2, 0);
  auto& a = st.studies[0].a_star_mean;
  a.row(0).setConstant(1.0);
  a.row(1).setConstant(-1.0);
  EXPECT_EQ(signature_filter(st), (std::vector<Index>{0}));
  // 48 of 50 values (96%) positive: the 95th percentile is positive
  a.row(1).setConstant(0.5);
  a(1, 0) = a(1, 1) = -2.0;
  EXPECT_EQ(signature_filter(st, 0.95, 0.0), (std::vector<Index>{0, 1}));
  // raising the cut never retains more
  std::size_t prev = 3;
  for (double cut : {-3.0, 0.0, 0.7, 1.5}) {
    const auto kept = signature_filter(st, 0.95, cut);
    EXPECT_LE(kept.size(), prev);
    prev = kept.size();
  }
}

TEST(SampleQuantile, TypeSeven) {
  EXPECT_DOUBLE_EQ(sample_quantile({1, 2, 3, 4}, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(sample_quantile({4, 1, 3, 2}, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(sample_quantile({1, 2, 3, 4, 5}, 0.25), 2.0);
}

TEST(Prevalence, InvariantToCovariateRescaling) {
  ScenarioSpec spec = scenario_two();
  spec.studies = 1;
  spec.subjects = {150};
  spec.beta.resize(1);
  const SimulatedData sim = simulate(spec, 8);
  std::vector<StudyData> shifted = sim.studies;
  shifted[0].covariates.col(2) = shifted[0].covariates.col(2) * 2.5 + Eigen::VectorXd::Constant(150, 1.0);
  shifted[0].covariates.col(3) = shifted[0].covariates.col(3) * 0.5 - Eigen::VectorXd::Constant(150, 2.0);

  auto prevalence = [](const std::vector<StudyData>& d) {
    const Hyperparameters hp = default_hyperparameters(d, 4);
    FitConfig cfg;
    cfg.rank = 4;
    cfg.max_iterations = 300;
    cfg.track_objective = false;
    const FitResult res = fit(d, hp, cfg, init_discovery(d, hp, 4, 1));
    return inclusion_prevalence(res.state, d)[0];
  };
  const Eigen::VectorXd a = prevalence(sim.studies);
  const Eigen::VectorXd b = prevalence(shifted);
  EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 0.02) << a.transpose() << " vs " << b.transpose();
}
