#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "bapnmf/errors.hpp"
#include "bapnmf/linalg.hpp"
#include "bapnmf/quadrature.hpp"
#include "bapnmf/rng.hpp"
#include "bapnmf/special.hpp"
#include "oracles.hpp"

using namespace bapnmf;

namespace {

// Maclaurin series of erf; converges well for |x| < 3.
double erf_series(double x) {
  double term = x;
  double sum = x;
  for (int n = 1; n < 200; ++n) {
    term *= -x * x / n;
    sum += term / (2 * n + 1);
  }
  return 2.0 / std::sqrt(std::numbers::pi) * sum;
}

Eigen::MatrixXd random_spd(Index q, std::mt19937_64& eng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd a(q, q);
  for (Index i = 0; i < q; ++i)
    for (Index j = 0; j < q; ++j) a(i, j) = normal(eng);
  return a * a.transpose() + 0.5 * Eigen::MatrixXd::Identity(q, q);
}

}  // namespace

TEST(SpecialFunctions, LogGammaValues) {
  EXPECT_NEAR(log_gamma(1.0), 0.0, 1e-14);
  EXPECT_NEAR(log_gamma(0.5), 0.5723649429, 1e-10);
  // ln 9! by direct summation
  double ln_fact = 0.0;
  for (int k = 2; k <= 9; ++k) ln_fact += std::log(k);
  EXPECT_NEAR(log_gamma(10.0), ln_fact, 1e-12);
  EXPECT_NEAR(log_gamma(10.0), 12.8018274801, 1e-10);
}

TEST(SpecialFunctions, RejectsNonPositive) {
  EXPECT_THROW(log_gamma(0.0), DomainError);
  EXPECT_THROW(digamma(-1.0), DomainError);
  EXPECT_THROW(trigamma(std::nan("")), DomainError);
}

TEST(SpecialFunctions, DigammaTrigamma) {
  EXPECT_NEAR(digamma(1.0), -0.5772156649, 1e-10);
  EXPECT_NEAR(trigamma(1.0), std::numbers::pi * std::numbers::pi / 6.0, 1e-10);
  double psi5 = -std::numbers::egamma;
  for (int k = 1; k < 5; ++k) psi5 += 1.0 / k;
  EXPECT_NEAR(digamma(5.0), psi5, 1e-12);
  EXPECT_NEAR(digamma(5.0), 1.5061176684, 1e-10);
}

TEST(SpecialFunctions, DigammaRecurrence) {
  for (double x : {0.1, 1.0, 10.0, 100.0}) {
    EXPECT_NEAR(digamma(x + 1.0) - digamma(x), 1.0 / x, 1e-10) << x;
  }
}

TEST(SpecialFunctions, NormalCdfPdf) {
  EXPECT_EQ(std_normal_cdf(0.0), 0.5);
  EXPECT_NEAR(std_normal_pdf(0.0), 0.3989422804, 1e-10);
  EXPECT_NEAR(std_normal_cdf(1.96), 0.5 * (1.0 + erf_series(1.96 / std::sqrt(2.0))), 1e-12);
  EXPECT_NEAR(std_normal_cdf(1.96), 0.9750021, 1e-7);
  for (double x = -8.0; x <= 8.0; x += 0.37) {
    EXPECT_NEAR(std_normal_cdf(x) + std_normal_cdf(-x), 1.0, 1e-12) << x;
  }
}

TEST(SpecialFunctions, LogCdfTail) {
  for (double x : {-3.0, -7.9, -8.1, -20.0}) {
    if (x > -8.0) {
      EXPECT_NEAR(std_normal_log_cdf(x), std::log(std_normal_cdf(x)), 1e-12);
    }
  }
  // Asymptotic series: log Phi(x) ~ log phi(x) - log(-x) + log(1 - 1/x^2 + 3/x^4)
  const double x = -20.0;
  const double approx = -0.5 * x * x - 0.5 * std::log(2 * std::numbers::pi) - std::log(-x) +
                        std::log(1 - 1 / (x * x) + 3 / std::pow(x, 4) - 15 / std::pow(x, 6));
  EXPECT_NEAR(std_normal_log_cdf(x), approx, 1e-8);
  EXPECT_NEAR(std_normal_log_cdf(-8.0 - 1e-9), std_normal_log_cdf(-8.0 + 1e-9), 1e-7);
}

TEST(SpecialFunctions, SoftplusLogistic) {
  EXPECT_NEAR(softplus(0.0), std::log(2.0), 1e-15);
  EXPECT_NEAR(softplus(800.0), 800.0, 1e-12);
  EXPECT_NEAR(softplus(-800.0), 0.0, 1e-300);
  EXPECT_EQ(logistic(0.0), 0.5);
  EXPECT_NEAR(logistic(3.0) + logistic(-3.0), 1.0, 1e-15);
  EXPECT_NEAR(std::log(logistic(2.5)), -softplus(-2.5), 1e-14);
}

TEST(BowlingApprox, KnownPoints) {
  EXPECT_EQ(bowling_probit_approx(0.0), 0.5);
  EXPECT_LE(std::abs(bowling_probit_approx(2.0) - std_normal_cdf(2.0)), 3e-3);
  EXPECT_NEAR(bowling_probit_approx(-1.0), 1.0 - bowling_probit_approx(1.0), 1e-15);
}

TEST(BowlingApprox, MaxErrorOnGrid) {
  double worst = 0.0;
  for (int k = -500; k <= 500; ++k) {
    const double x = 0.01 * k;
    worst = std::max(worst, std::abs(bowling_probit_approx(x) - std_normal_cdf(x)));
  }
  EXPECT_LE(worst, 3e-3);
}

TEST(BowlingApprox, LogMomentsZeroVarianceAreExactLogs) {
  for (double m : {-3.0, -0.4, 0.0, 1.2, 4.0}) {
    const auto mom = bowling_log_moments(m, 0.0);
    EXPECT_NEAR(mom.lower, std::log(bowling_probit_approx(m)), 1e-12);
    // the reference loses digits to cancellation when the approximation is close to 1
    const double tail = 1.0 - bowling_probit_approx(m);
    EXPECT_NEAR(mom.upper, std::log(tail), 1e-12 + 1e-15 / tail);
  }
}

TEST(BowlingApprox, LogMomentsCurvatureMatchesFiniteDifference) {
  auto lower = [](double x) { return std::log(bowling_probit_approx(x)); };
  auto upper = [](double x) { return std::log(1.0 - bowling_probit_approx(x)); };
  const double h = 1e-4;
  for (double m : {-2.0, -0.5, 0.3, 1.7}) {
    const double v = 0.8;
    const auto mom = bowling_log_moments(m, v);
    const double d2l = (lower(m + h) - 2 * lower(m) + lower(m - h)) / (h * h);
    const double d2u = (upper(m + h) - 2 * upper(m) + upper(m - h)) / (h * h);
    EXPECT_NEAR(mom.lower, lower(m) + 0.5 * v * d2l, 1e-5) << m;
    EXPECT_NEAR(mom.upper, upper(m) + 0.5 * v * d2u, 1e-5) << m;
  }
}

TEST(TruncatedMixture, KnownValues) {
  EXPECT_NEAR(truncated_normal_mixture_mean({0.0, 0.5}), 0.0, 1e-15);
  EXPECT_NEAR(truncated_normal_mixture_mean({0.0, 1.0}), 0.7978845608, 1e-10);
}

TEST(TruncatedMixture, MatchesRejectionSampler) {
  const auto mc = oracle::mc_truncated_mixture_mean(1.5, 0.3, 2'000'000, 7);
  EXPECT_NEAR(truncated_normal_mixture_mean({1.5, 0.3}), mc.mean, std::max(1e-3, 4 * mc.standard_error));
}

TEST(TruncatedMixture, MonotoneInWeight) {
  for (double m : {-3.0, 0.0, 2.0, -12.0, 12.0}) {
    double prev = -INFINITY;
    for (double w = 0.0; w <= 1.0; w += 0.05) {
      const double v = truncated_normal_mixture_mean({m, w});
      EXPECT_GT(v, prev);
      prev = v;
    }
  }
}

TEST(TruncatedMixture, FiniteInFarTails) {
  for (double m : {-40.0, 40.0}) {
    for (double w : {1e-12, 0.5, 1.0 - 1e-12}) {
      EXPECT_TRUE(std::isfinite(truncated_normal_mixture_mean({m, w})));
    }
  }
}

TEST(Quadrature, KnownIntegrals) {
  QuadratureConfig cfg;
  cfg.upper_bound = 60.0;
  cfg.relative_tolerance = 1e-10;
  EXPECT_NEAR(adaptive_quadrature([](double x) { return std::exp(-x); }, cfg).value, 1.0, 1e-8);
  EXPECT_NEAR(adaptive_quadrature([](double x) { return x * std::exp(-2 * x); }, cfg).value, 0.25, 1e-9);
}

TEST(Quadrature, GammaDensitiesIntegrateToOne) {
  for (double a : {0.5, 1.0, 5.0}) {
    for (double b : {0.1, 1.0, 10.0}) {
      auto log_density = [a, b](double x) {
        return a * std::log(b) - std::lgamma(a) + (a - 1) * std::log(x) - b * x;
      };
      QuadratureConfig cfg;
      const auto res = integrate_log_density(log_density, {[](double x) { return x; }}, cfg);
      EXPECT_NEAR(res.log_normalizer, 0.0, 1e-7) << a << " " << b;
      EXPECT_NEAR(res.means[0], a / b, 1e-6 * a / b) << a << " " << b;
    }
  }
}

TEST(Quadrature, ReportsAccuracyFailure) {
  QuadratureConfig cfg;
  cfg.upper_bound = 1.0;
  cfg.max_subdivisions = 2;
  cfg.relative_tolerance = 1e-14;
  EXPECT_THROW(adaptive_quadrature([](double x) { return std::sin(1.0 / (x + 1e-3)); }, cfg),
               AccuracyError);
}

TEST(Quadrature, WeightShapeDensityMatchesImportanceSampling) {
  // N = 1, E[log w] = 0, E[log beta] = 0, lambda = 0.1.
  auto h = [](double a) { return -0.1 * a - std::lgamma(a); };
  QuadratureConfig cfg;
  const auto res = integrate_log_density(h, {[](double a) { return a; }}, cfg);
  const auto is = oracle::importance_log_density(h, std::log(1.0), 1.5, 1'000'000, 3);
  EXPECT_NEAR(res.means[0], is.mean, 0.01 * is.mean);
  EXPECT_NEAR(res.log_normalizer, is.log_normalizer, 0.01);
}

TEST(Linalg, SpdSolveSmallCases) {
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(3, 3);
  const Eigen::VectorXd b = Eigen::Vector3d(1, -2, 3);
  EXPECT_TRUE(spd_solve(id, b).solution.isApprox(b, 1e-15));
  Eigen::MatrixXd d = Eigen::Vector2d(2, 4).asDiagonal();
  EXPECT_TRUE(spd_solve(d, Eigen::Vector2d(2, 4)).solution.isApprox(Eigen::Vector2d(1, 1), 1e-15));
}

TEST(Linalg, SpdSolveRecoversRandomSystems) {
  std::mt19937_64 eng(11);
  std::normal_distribution<double> normal;
  for (Index q = 1; q <= 20; ++q) {
    const Eigen::MatrixXd a = random_spd(q, eng);
    Eigen::VectorXd x(q);
    for (Index i = 0; i < q; ++i) x(i) = normal(eng);
    const auto sol = spd_solve(a, a * x);
    EXPECT_LE((sol.solution - x).norm(), 1e-8 * std::max(1.0, x.norm())) << q;
    EXPECT_LE((a * sol.solution - a * x).norm(), 1e-8 * (a * x).norm());
    EXPECT_LE((a * sol.inverse - Eigen::MatrixXd::Identity(q, q)).norm(), 1e-8);
  }
}

TEST(Linalg, SpdSolveRejectsBadInput) {
  Eigen::Matrix2d asym;
  asym << 2, 1, 0, 2;
  EXPECT_THROW(spd_solve(asym, Eigen::Vector2d(1, 1)), DecompositionError);
  Eigen::Matrix2d indef;
  indef << 1, 2, 2, 1;
  EXPECT_THROW(spd_solve(indef, Eigen::Vector2d(1, 1)), DecompositionError);
}

TEST(Linalg, CosineAndNormalization) {
  Eigen::MatrixXd m(2, 2);
  m << 1, 0, 3, 0;
  const Eigen::MatrixXd n = column_normalized(m);
  EXPECT_NEAR(n(0, 0), 0.25, 1e-15);
  EXPECT_EQ(n(1, 1), 0.0);
  EXPECT_NEAR(cosine_similarity(Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 2)), 0.0, 1e-15);
  EXPECT_THROW(cosine_similarity(Eigen::Vector2d(0, 0), Eigen::Vector2d(0, 2)), DegenerateInputError);
}

TEST(RngSuite, DirichletOnSimplex) {
  Rng rng(5);
  for (int k = 0; k < 100; ++k) {
    const Eigen::VectorXd d = rng.dirichlet(Eigen::Vector3d(1, 1, 1));
    EXPECT_NEAR(d.sum(), 1.0, 1e-12);
    EXPECT_TRUE((d.array() >= 0).all());
    const Eigen::VectorXd sparse = rng.dirichlet(10, 0.01);
    EXPECT_NEAR(sparse.sum(), 1.0, 1e-12);
    EXPECT_TRUE(sparse.allFinite());
  }
}

TEST(RngSuite, PoissonAndBernoulliMoments) {
  Rng rng(9);
  const int n = 100000;
  double sum = 0.0;
  int hits = 0;
  for (int k = 0; k < n; ++k) {
    sum += static_cast<double>(rng.poisson(1000.0));
    hits += rng.bernoulli(0.2) ? 1 : 0;
  }
  EXPECT_NEAR(sum / n, 1000.0, 3 * std::sqrt(1000.0 / n) * 3);
  EXPECT_NEAR(static_cast<double>(hits) / n, 0.2, 0.01);
}

TEST(RngSuite, SplitStreamsAreDeterministicAndDistinct) {
  Rng a(42);
  Rng b(42);
  EXPECT_EQ(a.split(3).uniform(), b.split(3).uniform());
  EXPECT_NE(a.split(3).uniform(), a.split(4).uniform());
  Rng c(42);
  EXPECT_EQ(Rng(42).gamma(2.0, 3.0), c.gamma(2.0, 3.0));
}
