#pragma once

// Special functions and normal-distribution helpers used by the CAVI updates.

namespace bapnmf {

inline constexpr double kBowlingCubic = 0.07056;
inline constexpr double kBowlingLinear = 1.5976;

double log_gamma(double x);
double digamma(double x);
double trigamma(double x);

double std_normal_pdf(double x);
double std_normal_cdf(double x);
/// log Phi(x), accurate in the lower tail.
double std_normal_log_cdf(double x);

/// log(1 + exp(x)) without overflow.
double softplus(double x);
double logistic(double x);

/// Polynomial argument of the logistic probit approximation,
/// c(x) = 0.07056 x^3 + 1.5976 x.
double bowling_polynomial(double x);
/// Phi(x) ~= logistic(c(x)).
double bowling_probit_approx(double x);

/// Second-order expectations of the two log-probit branches under the Bowling
/// form when the argument x ~ N(mean, variance):
///   lower = E[log Phi~(x)],  upper = E[log(1 - Phi~(x))].
struct BowlingLogMoments {
  double lower;
  double upper;
};
BowlingLogMoments bowling_log_moments(double mean, double variance);

/// phi(m) / Phi(m), stable for very negative m.
double inverse_mills_ratio(double m);

/// Variational factor of a latent probit score: with probability
/// `inclusion_weight` a unit-variance normal at `location` truncated to
/// [0, inf), otherwise the same normal truncated to (-inf, 0].
struct TruncatedNormalMixture {
  double location = 0.0;
  double inclusion_weight = 0.5;
};

double truncated_normal_mixture_mean(const TruncatedNormalMixture& mix);

}  // namespace bapnmf
