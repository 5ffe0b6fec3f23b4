#include "bapnmf/special.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "bapnmf/errors.hpp"

namespace bapnmf {
namespace {

void require_finite(double x, const char* fn) {
  if (!std::isfinite(x)) {
    throw DomainError(std::string(fn) + ": non-finite argument");
  }
}

void require_positive(double x, const char* fn) {
  if (!std::isfinite(x) || x <= 0.0) {
    throw DomainError(std::string(fn) + ": argument must be positive and finite, got " +
                      std::to_string(x));
  }
}

// Laplace continued fraction for the Mills ratio (1 - Phi(x)) / phi(x), x > 0.
double mills_ratio_cf(double x) {
  double tail = x;
  for (int k = 80; k >= 1; --k) {
    tail = x + k / tail;
  }
  return 1.0 / tail;
}

}  // namespace

double log_gamma(double x) {
  require_positive(x, "log_gamma");
  return std::lgamma(x);
}

double digamma(double x) {
  require_positive(x, "digamma");
  return boost::math::digamma(x);
}

double trigamma(double x) {
  require_positive(x, "trigamma");
  return boost::math::trigamma(x);
}

double std_normal_pdf(double x) {
  require_finite(x, "std_normal_pdf");
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double std_normal_cdf(double x) {
  require_finite(x, "std_normal_cdf");
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double std_normal_log_cdf(double x) {
  require_finite(x, "std_normal_log_cdf");
  if (x > -8.0) {
    return std::log(std_normal_cdf(x));
  }
  // Phi(x) = phi(x) * R(-x)
  return -0.5 * x * x - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(mills_ratio_cf(-x));
}

double softplus(double x) {
  if (x > 0.0) {
    return x + std::log1p(std::exp(-x));
  }
  return std::log1p(std::exp(x));
}

double logistic(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double bowling_polynomial(double x) {
  return kBowlingCubic * x * x * x + kBowlingLinear * x;
}

double bowling_probit_approx(double x) {
  require_finite(x, "bowling_probit_approx");
  return logistic(bowling_polynomial(x));
}

BowlingLogMoments bowling_log_moments(double mean, double variance) {
  // log Phi~(x) = -softplus(-c(x)),  log(1 - Phi~(x)) = -softplus(c(x)).
  // With s = logistic(c):  d2/dx2 of the first is (1-s) c'' - s(1-s) c'^2,
  // of the second is -s c'' - s(1-s) c'^2.
  const double c = bowling_polynomial(mean);
  const double c1 = 3.0 * kBowlingCubic * mean * mean + kBowlingLinear;
  const double c2 = 6.0 * kBowlingCubic * mean;
  const double s = logistic(c);
  const double curvature = s * (1.0 - s) * c1 * c1;
  BowlingLogMoments out;
  out.lower = -softplus(-c) + 0.5 * variance * ((1.0 - s) * c2 - curvature);
  out.upper = -softplus(c) + 0.5 * variance * (-s * c2 - curvature);
  return out;
}

double inverse_mills_ratio(double m) {
  require_finite(m, "inverse_mills_ratio");
  if (m < -8.0) {
    return 1.0 / mills_ratio_cf(-m);
  }
  return std_normal_pdf(m) / std_normal_cdf(m);
}

double truncated_normal_mixture_mean(const TruncatedNormalMixture& mix) {
  const double m = mix.location;
  const double w = mix.inclusion_weight;
  // E[x | x > 0] = m + phi(m)/Phi(m);  E[x | x <= 0] = m - phi(m)/(1 - Phi(m)).
  const double upper = m + inverse_mills_ratio(m);
  const double lower = m - inverse_mills_ratio(-m);
  return w * upper + (1.0 - w) * lower;
}

}  // namespace bapnmf
