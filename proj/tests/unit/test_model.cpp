#include <cstring>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "bapnmf/errors.hpp"
#include "bapnmf/model.hpp"
#include "support.hpp"

using namespace bapnmf;
using testing_support::small_studies;

namespace {

bool same_bits(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

}  // namespace

TEST(StudyData, ValidateRejectsBadCounts) {
  Eigen::MatrixXd m(2, 2);
  m << 1, 2, 3, 4;
  EXPECT_NO_THROW(make_study("a", m).validate());
  Eigen::MatrixXd neg = m;
  neg(0, 0) = -1;
  EXPECT_ANY_THROW(make_study("a", neg).validate());
  Eigen::MatrixXd frac = m;
  frac(1, 1) = 0.5;
  EXPECT_ANY_THROW(make_study("a", frac).validate());
}

TEST(StudyData, InterceptIsPrepended) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Ones(3, 4);
  Eigen::MatrixXd x(4, 1);
  x << 0.1, 0.2, 0.3, 0.4;
  const StudyData s = make_study("a", m, x);
  EXPECT_EQ(s.covariate_count(), 2);
  EXPECT_TRUE((s.covariates.col(0).array() == 1.0).all());
  EXPECT_EQ(make_study("b", m).covariate_count(), 1);
}

TEST(Hyperparameters, DefaultsAndSignaturePrior) {
  const auto data = small_studies(2, 6, 3, 5, 1);
  const Hyperparameters hp = default_hyperparameters(data, 3);
  EXPECT_EQ(hp.alpha_p.size(), 6);
  EXPECT_DOUBLE_EQ(hp.studies[0].alpha_e1, 5.0);
  EXPECT_DOUBLE_EQ(hp.studies[1].alpha_e0, 0.05);
  EXPECT_EQ(hp.studies[0].beta0.rows(), 3);
  EXPECT_TRUE((hp.signature_prior(3).array() == 1.0).all());
  EXPECT_NO_THROW(hp.validate(data, 3));

  Hyperparameters bad = hp;
  bad.studies[0].alpha_e0 = 0.0;
  EXPECT_ANY_THROW(bad.validate(data, 3));
}

TEST(Hyperparameters, RecoveredColumnsUseScaledCatalog) {
  const auto data = small_studies(1, 4, 2, 5, 2);
  SignatureCatalog cat;
  cat.names = {"A"};
  cat.motif_labels = data[0].motif_labels;
  cat.profiles = Eigen::Vector4d(0.5, 0.5, 0.0, 0.0);
  const Hyperparameters hp = default_hyperparameters(data, 3, &cat, 1000.0);
  const Eigen::MatrixXd prior = hp.signature_prior(3);
  EXPECT_DOUBLE_EQ(prior(0, 0), 500.0);
  EXPECT_DOUBLE_EQ(prior(2, 0), 1e-6);
  EXPECT_TRUE((prior.rightCols(2).array() == 1.0).all());
}

TEST(PriorState, IsValid) {
  const auto data = small_studies(2, 6, 3, 7, 3);
  const Hyperparameters hp = default_hyperparameters(data, 3);
  const VariationalState st = prior_state(data, hp, 3, 9);
  const auto report = validate_state(st, data);
  EXPECT_TRUE(report.ok()) << report.summary();
  // beta0 = 0 gives prior inclusion probability 1/2
  EXPECT_NEAR(st.studies[0].theta_a(1, 2), 0.5, 1e-12);
}

TEST(ValidateState, FlagsInjectedInclusion) {
  const auto data = small_studies(1, 5, 2, 4, 4);
  const Hyperparameters hp = default_hyperparameters(data, 2);
  VariationalState st = prior_state(data, hp, 2, 1);
  st.studies[0].theta_a(1, 3) = 1.2;
  const auto report = validate_state(st, data);
  ASSERT_FALSE(report.ok());
  EXPECT_NE(report.violations.front().where.find("theta_a"), std::string::npos);
  EXPECT_NE(report.violations.front().where.find("1"), std::string::npos);
  EXPECT_NE(report.violations.front().where.find("3"), std::string::npos);
}

TEST(ValidateState, FlagsLatentSumNamingSubject) {
  const auto data = small_studies(1, 5, 2, 4, 5);
  const Hyperparameters hp = default_hyperparameters(data, 2);
  VariationalState st = prior_state(data, hp, 2, 1);
  st.studies[0].z_subject(0, 2) += 3.0;
  const auto report = validate_state(st, data);
  ASSERT_FALSE(report.ok());
  bool named = false;
  for (const auto& v : report.violations) {
    if (v.where.find(data[0].subject_ids[2]) != std::string::npos) named = true;
  }
  EXPECT_TRUE(named) << report.summary();
}

TEST(ValidateState, ShapeMismatchThrows) {
  const auto data = small_studies(1, 5, 2, 4, 6);
  const Hyperparameters hp = default_hyperparameters(data, 2);
  VariationalState st = prior_state(data, hp, 2, 1);
  st.studies[0].theta_e.resize(2, 3);
  EXPECT_THROW(validate_state(st, data), StructuralError);
}

TEST(PointEstimates, DirichletAndGammaMeans) {
  const auto data = small_studies(1, 4, 2, 3, 7);
  const Hyperparameters hp = default_hyperparameters(data, 2);
  VariationalState st = prior_state(data, hp, 2, 1);
  st.theta_p.col(0).setOnes();
  st.studies[0].w_shape(0) = 101.0;
  st.studies[0].w_rate(0) = 1.01;
  st.studies[0].theta_e.col(1) = Eigen::Vector2d(2, 6);
  const PointEstimates pe = point_estimates(st);
  EXPECT_TRUE(pe.signatures.col(0).isApprox(Eigen::Vector4d::Constant(0.25)));
  EXPECT_NEAR(pe.weights[0](0), 100.0, 1e-12);
  EXPECT_NEAR(pe.exposures[0](0, 1), 0.25, 1e-15);
  EXPECT_NEAR(pe.exposures[0](1, 1), 0.75, 1e-15);
  for (Index j = 0; j < 3; ++j) EXPECT_NEAR(pe.exposures[0].col(j).sum(), 1.0, 1e-12);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  const auto data = small_studies(2, 6, 3, 5, 8);
  const Hyperparameters hp = default_hyperparameters(data, 3);
  const VariationalState st = testing_support::warmed_state(data, hp, 3, 4, 3);
  const auto dir = testing_support::scratch_dir("checkpoint");
  const std::string path = (dir / "state.bapm").string();
  save_checkpoint(path, st, hp);
  const Checkpoint back = load_checkpoint(path);
  EXPECT_TRUE(same_bits(back.state.theta_p, st.theta_p));
  EXPECT_EQ(back.state.iteration, st.iteration);
  EXPECT_EQ(back.state.seed, st.seed);
  for (std::size_t s = 0; s < st.studies.size(); ++s) {
    const auto& a = st.studies[s];
    const auto& b = back.state.studies[s];
    EXPECT_TRUE(same_bits(a.theta_e, b.theta_e));
    EXPECT_TRUE(same_bits(a.theta_a, b.theta_a));
    EXPECT_TRUE(same_bits(a.a_star_mean, b.a_star_mean));
    EXPECT_TRUE(same_bits(a.beta_mean, b.beta_mean));
    EXPECT_TRUE(same_bits(a.beta_cov[1], b.beta_cov[1]));
    EXPECT_TRUE(same_bits(a.w_shape, b.w_shape));
    EXPECT_TRUE(same_bits(a.z_subject, b.z_subject));
    EXPECT_EQ(a.w_alpha.mean, b.w_alpha.mean);
    EXPECT_EQ(a.w_alpha.log_c, b.w_alpha.log_c);
    EXPECT_EQ(a.w_beta_rate, b.w_beta_rate);
  }
  EXPECT_TRUE(same_bits(back.hp.alpha_p, hp.alpha_p));
  EXPECT_EQ(back.hp.studies[1].alpha_e1, hp.studies[1].alpha_e1);

  // saving the restored state reproduces the file byte for byte
  const std::string again = (dir / "again.bapm").string();
  save_checkpoint(again, back.state, back.hp);
  std::ifstream f1(path, std::ios::binary), f2(again, std::ios::binary);
  const std::string s1((std::istreambuf_iterator<char>(f1)), {});
  const std::string s2((std::istreambuf_iterator<char>(f2)), {});
  EXPECT_EQ(s1, s2);
}

TEST(Checkpoint, RejectsForeignFile) {
  const auto dir = testing_support::scratch_dir("checkpoint_bad");
  const std::string path = (dir / "x.bapm").string();
  std::ofstream(path) << "not a checkpoint\n";
  EXPECT_ANY_THROW(load_checkpoint(path));
}
