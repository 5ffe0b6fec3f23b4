#include "bapnmf/rng.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bapnmf/errors.hpp"

namespace bapnmf {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(mix_seed(seed, 0)) {}

Rng Rng::split(std::uint64_t stream) const { return Rng(mix_seed(seed_, stream + 1)); }

double Rng::uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

double Rng::normal(double mean, double sd) {
  if (!(sd >= 0.0) || !std::isfinite(mean)) throw DomainError("normal: invalid parameters");
  if (sd == 0.0) return mean;
  return std::normal_distribution<double>(mean, sd)(engine_);
}

double Rng::gamma(double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0) || !std::isfinite(shape) || !std::isfinite(rate)) {
    throw DomainError("gamma: shape and rate must be positive");
  }
  return std::gamma_distribution<double>(shape, 1.0 / rate)(engine_);
}

double Rng::log_gamma_variate(double shape) {
  if (!(shape > 0.0) || !std::isfinite(shape)) throw DomainError("gamma: shape must be positive");
  if (shape >= 1.0) {
    return std::log(std::gamma_distribution<double>(shape, 1.0)(engine_));
  }
  // G(a) = G(a + 1) * U^(1/a), evaluated in log-space.
  const double g = std::gamma_distribution<double>(shape + 1.0, 1.0)(engine_);
  double u = uniform();
  while (u <= 0.0) u = uniform();
  return std::log(g) + std::log(u) / shape;
}

bool Rng::bernoulli(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("bernoulli: p outside [0, 1]");
  return uniform() < p;
}

std::int64_t Rng::poisson(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw DomainError("poisson: mean must be >= 0");
  if (mean == 0.0) return 0;
  return std::poisson_distribution<std::int64_t>(mean)(engine_);
}

std::int64_t Rng::binomial(std::int64_t trials, double p) {
  if (trials < 0 || !(p >= 0.0 && p <= 1.0)) throw DomainError("binomial: invalid parameters");
  if (trials == 0 || p == 0.0) return 0;
  if (p >= 1.0) return trials;
  return std::binomial_distribution<std::int64_t>(trials, p)(engine_);
}

Eigen::VectorXd Rng::dirichlet(const Eigen::Ref<const Eigen::VectorXd>& alpha) {
  if (alpha.size() == 0) throw DomainError("dirichlet: empty concentration");
  Eigen::VectorXd logs(alpha.size());
  for (Eigen::Index i = 0; i < alpha.size(); ++i) {
    logs(i) = log_gamma_variate(alpha(i));
  }
  const double top = logs.maxCoeff();
  Eigen::VectorXd out = (logs.array() - top).exp();
  return out / out.sum();
}

Eigen::VectorXd Rng::dirichlet(Eigen::Index dim, double alpha) {
  return dirichlet(Eigen::VectorXd::Constant(dim, alpha));
}

Eigen::VectorXi Rng::multinomial(std::int64_t trials, const Eigen::Ref<const Eigen::VectorXd>& probs) {
  if (trials < 0 || probs.size() == 0 || (probs.array() < 0.0).any()) {
    throw DomainError("multinomial: invalid parameters");
  }
  Eigen::VectorXi out = Eigen::VectorXi::Zero(probs.size());
  double remaining_mass = probs.sum();
  std::int64_t remaining = trials;
  for (Eigen::Index i = 0; i + 1 < probs.size() && remaining > 0; ++i) {
    const double p = remaining_mass > 0.0 ? std::min(1.0, probs(i) / remaining_mass) : 0.0;
    const std::int64_t k = binomial(remaining, p);
    out(i) = static_cast<int>(k);
    remaining -= k;
    remaining_mass -= probs(i);
  }
  out(probs.size() - 1) += static_cast<int>(remaining);
  return out;
}

}  // namespace bapnmf
