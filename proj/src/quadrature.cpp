#include "bapnmf/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "bapnmf/errors.hpp"

namespace bapnmf {
namespace {

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 15>;
using Gauss = boost::math::quadrature::gauss<double, 7>;

struct Panel {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

Panel integrate_panel(const std::function<double(double)>& f, double a, double b) {
  const auto& x = Kronrod::abscissa();
  const auto& wk = Kronrod::weights();
  const auto& wg = Gauss::weights();
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);

  const double f0 = f(center);
  double kronrod = wk[0] * f0;
  double gauss = wg[0] * f0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double fsum = f(center - half * x[i]) + f(center + half * x[i]);
    kronrod += wk[i] * fsum;
    // Gauss nodes are the even-indexed Kronrod abscissae.
    if (i % 2 == 0) {
      gauss += wg[i / 2] * fsum;
    }
  }
  kronrod *= half;
  gauss *= half;
  return {a, b, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace

void QuadratureConfig::validate() const {
  if (!(lower_bound < upper_bound)) {
    throw DomainError("quadrature: lower bound must be below upper bound");
  }
  if (!(relative_tolerance > 0.0 && relative_tolerance < 1.0)) {
    throw DomainError("quadrature: relative tolerance must lie in (0, 1)");
  }
  if (max_subdivisions < 1) {
    throw DomainError("quadrature: max subdivisions must be at least 1");
  }
}

QuadratureResult adaptive_quadrature(const std::function<double(double)>& f,
                                     const QuadratureConfig& cfg,
                                     const std::vector<double>& breakpoints) {
  cfg.validate();
  std::vector<double> cuts{cfg.lower_bound};
  for (double p : breakpoints) {
    if (p > cfg.lower_bound && p < cfg.upper_bound) cuts.push_back(p);
  }
  cuts.push_back(cfg.upper_bound);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::priority_queue<Panel> panels;
  double total = 0.0;
  double total_error = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    Panel p = integrate_panel(f, cuts[i], cuts[i + 1]);
    total += p.value;
    total_error += p.error;
    panels.push(p);
  }

  const double eps = std::numeric_limits<double>::epsilon();
  int subdivisions = 0;
  while (total_error > cfg.relative_tolerance * std::abs(total) &&
         total_error > 50.0 * eps * std::abs(total) &&
         total_error > cfg.absolute_tolerance) {
    if (subdivisions >= cfg.max_subdivisions) {
      throw AccuracyError("quadrature did not converge within " +
                              std::to_string(cfg.max_subdivisions) + " subdivisions",
                          total);
    }
    Panel worst = panels.top();
    panels.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    Panel left = integrate_panel(f, worst.a, mid);
    Panel right = integrate_panel(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_error += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
    ++subdivisions;
  }
  if (!std::isfinite(total)) {
    throw AccuracyError("quadrature produced a non-finite value", total);
  }

  // Re-sum from the panels to drop the running-update rounding.
  double value = 0.0;
  double error = 0.0;
  std::vector<Panel> all;
  all.reserve(panels.size());
  while (!panels.empty()) {
    all.push_back(panels.top());
    panels.pop();
  }
  std::sort(all.begin(), all.end(), [](const Panel& l, const Panel& r) { return l.a < r.a; });
  for (const Panel& p : all) {
    value += p.value;
    error += p.error;
  }
  return {value, error, subdivisions};
}

LogDensityDomain locate_log_density(const std::function<double(double)>& log_density,
                                    double truncation_nats) {
  // Coarse geometric grid.
  std::vector<double> grid;
  for (int k = -40; k <= 60; ++k) grid.push_back(std::ldexp(1.0, k));
  std::vector<double> values(grid.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    values[i] = log_density(grid[i]);
    if (values[i] > values[best]) best = i;
  }
  if (!std::isfinite(values[best])) {
    throw DomainError("log-density is not finite on the search grid");
  }

  // Golden-section refinement between the grid neighbours of the maximum.
  double lo = best == 0 ? 0.0 : grid[best - 1];
  double hi = best + 1 == grid.size() ? grid[best] : grid[best + 1];
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - ratio * (hi - lo);
  double x2 = lo + ratio * (hi - lo);
  double f1 = log_density(x1);
  double f2 = log_density(x2);
  for (int it = 0; it < 200 && (hi - lo) > 1e-12 * std::max(1.0, hi); ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + ratio * (hi - lo);
      f2 = log_density(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - ratio * (hi - lo);
      f1 = log_density(x1);
    }
  }
  LogDensityDomain dom;
  dom.mode = f1 >= f2 ? x1 : x2;
  dom.log_max = std::max(f1, f2);
  if (values[best] > dom.log_max) {
    dom.mode = grid[best];
    dom.log_max = values[best];
  }
  const double threshold = dom.log_max - truncation_nats;

  auto bisect = [&](double inside, double outside) {
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (inside + outside);
      if (log_density(mid) > threshold) {
        inside = mid;
      } else {
        outside = mid;
      }
      if (std::abs(outside - inside) <= 1e-12 * std::max(1.0, std::abs(inside))) break;
    }
    return outside;
  };

  // Upper truncation: step outwards from the mode until below threshold.
  double step = std::max(dom.mode, 1.0);
  double inside = dom.mode;
  double outside = dom.mode + step;
  while (log_density(outside) > threshold) {
    inside = outside;
    step *= 2.0;
    outside = dom.mode + step;
    if (!std::isfinite(outside)) {
      throw DomainError("log-density does not decay; cannot truncate the domain");
    }
  }
  dom.upper_cut = bisect(inside, outside);

  // Lower cut: where the density has fallen below threshold towards zero.
  dom.lower_cut = 0.0;
  if (dom.mode > 0.0) {
    const double tiny = dom.mode * 1e-12;
    if (log_density(tiny) <= threshold) {
      dom.lower_cut = bisect(dom.mode, tiny);
    }
  }
  return dom;
}

LogDensityIntegral integrate_log_density(const std::function<double(double)>& log_density,
                                         const std::vector<std::function<double(double)>>& moments,
                                         const QuadratureConfig& cfg) {
  LogDensityIntegral out;
  out.domain = locate_log_density(log_density, cfg.truncation_nats);
  const double shift = out.domain.log_max;

  QuadratureConfig local = cfg;
  local.lower_bound = 0.0;
  local.upper_bound = out.domain.upper_cut;
  std::vector<double> breaks{out.domain.lower_cut, out.domain.mode};

  auto density = [&](double x) { return std::exp(log_density(x) - shift); };
  const double mass = adaptive_quadrature(density, local, breaks).value;
  if (!(mass > 0.0)) {
    throw AccuracyError("log-density integrates to zero", mass);
  }
  out.log_normalizer = shift + std::log(mass);
  out.means.reserve(moments.size());
  for (const auto& g : moments) {
    auto weighted = [&](double x) { return g(x) * density(x); };
    QuadratureConfig moment_cfg = local;
    moment_cfg.absolute_tolerance =
        cfg.relative_tolerance * mass * std::max(1.0, std::abs(g(out.domain.mode)));
    out.means.push_back(adaptive_quadrature(weighted, moment_cfg, breaks).value / mass);
  }
  return out;
}

}  // namespace bapnmf
