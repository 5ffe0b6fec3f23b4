#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace bapnmf {

/// Seedable sampler suite. Single owner; derive independent streams for
/// workers with split().
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  /// Independent child stream; deterministic in (seed, stream).
  Rng split(std::uint64_t stream) const;

  double uniform();
  double normal(double mean = 0.0, double sd = 1.0);
  /// Gamma with the given shape and *rate*.
  double gamma(double shape, double rate);
  /// log of a Gamma(shape, 1) draw; finite even when the draw underflows.
  double log_gamma_variate(double shape);
  bool bernoulli(double p);
  std::int64_t poisson(double mean);
  std::int64_t binomial(std::int64_t trials, double p);

  Eigen::VectorXd dirichlet(const Eigen::Ref<const Eigen::VectorXd>& alpha);
  Eigen::VectorXd dirichlet(Eigen::Index dim, double alpha);
  Eigen::VectorXi multinomial(std::int64_t trials, const Eigen::Ref<const Eigen::VectorXd>& probs);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// splitmix64 finalizer; used to derive child seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace bapnmf
