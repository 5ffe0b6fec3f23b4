#pragma once

#include <functional>
#include <vector>

namespace bapnmf {

struct QuadratureConfig {
  double lower_bound = 0.0;
  /// Upper end of the integration domain. For log-density integrals this is
  /// replaced by the adaptive truncation point.
  double upper_bound = 1.0;
  double relative_tolerance = 1e-10;
  int max_subdivisions = 400;
  /// Absolute error accepted regardless of the relative test (0 = off); used
  /// for integrands that change sign.
  double absolute_tolerance = 0.0;
  /// Nats below the log-density maximum at which the domain is truncated.
  double truncation_nats = 40.0;

  void validate() const;
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int subdivisions = 0;
};

/// Globally adaptive Gauss-Kronrod (7/15) integration of `f` over
/// [cfg.lower_bound, cfg.upper_bound]. Optional interior `breakpoints` seed the
/// initial partition. Throws AccuracyError (carrying the best estimate) if the
/// tolerance is not met within cfg.max_subdivisions bisections.
QuadratureResult adaptive_quadrature(const std::function<double(double)>& f,
                                     const QuadratureConfig& cfg,
                                     const std::vector<double>& breakpoints = {});

/// Domain (0, upper] of a unimodal log-density on (0, inf) together with the
/// location and value of its maximum.
struct LogDensityDomain {
  double mode = 0.0;
  double log_max = 0.0;
  double lower_cut = 0.0;
  double upper_cut = 0.0;
};

LogDensityDomain locate_log_density(const std::function<double(double)>& log_density,
                                    double truncation_nats);

/// Normalizer and moments of exp(log_density) on (0, inf):
/// log_normalizer = log integral exp(h), and mean_of[i] = E[moments[i](x)].
struct LogDensityIntegral {
  double log_normalizer = 0.0;
  std::vector<double> means;
  LogDensityDomain domain;
};

LogDensityIntegral integrate_log_density(const std::function<double(double)>& log_density,
                                         const std::vector<std::function<double(double)>>& moments,
                                         const QuadratureConfig& cfg);

}  // namespace bapnmf
