#include "bapnmf/cavi.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

#include "bapnmf/errors.hpp"
#include "bapnmf/linalg.hpp"
#include "bapnmf/objective.hpp"
#include "bapnmf/special.hpp"

namespace bapnmf {
namespace {

constexpr double kLogitClip = 30.0;
constexpr double kInclusionFloor = 1e-12;
constexpr double kDegenerateRate = 1e-300;

// Runs fn(s) for s in [0, count). Each call writes only to slot s, so the
// result is the same for any thread count.
template <typename Fn>
void for_each_study(std::size_t count, int threads, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(threads, 1), count);
  if (workers <= 1) {
    for (std::size_t s = 0; s < count; ++s) fn(s);
    return;
  }
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t s = w; s < count; s += workers) {
        try {
          fn(s);
        } catch (...) {
          errors[s] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void check_studies(const std::vector<StudyData>& data, const VariationalState& state) {
  if (data.size() != state.studies.size()) throw StructuralError("study count mismatch");
}

}  // namespace

void FitConfig::validate() const {
  if (max_iterations < 1) throw DomainError("max_iterations must be >= 1");
  if (!(tolerance >= 0.0)) throw DomainError("tolerance must be non-negative");
  if (rank < 1) throw DomainError("rank must be >= 1");
  if (mode == FitMode::recovery_discovery && (discovered_rank < 0 || discovered_rank > rank)) {
    throw DomainError("discovered_rank must lie in [0, rank]");
  }
  if (threads < 1) throw DomainError("threads must be >= 1");
  quadrature.validate();
}

void update_latent_counts(const std::vector<StudyData>& data, VariationalState& state,
                          int threads) {
  check_studies(data, state);
  const Index r_count = state.signatures();
  const Eigen::MatrixXd p_hat = column_normalized(state.theta_p);
  for_each_study(data.size(), threads, [&](std::size_t s) {
    const Eigen::MatrixXd& m = data[s].counts;
    StudyFactors& f = state.studies[s];
    const Eigen::MatrixXd e_hat = column_normalized(f.theta_e);
    const Eigen::MatrixXd rate = p_hat * e_hat;  // K x N

    // ratio(i, j) = m_ij / sum_r p_ir e_rj, so z_ijr = p_ir e_rj ratio(i, j).
    Eigen::MatrixXd ratio = Eigen::MatrixXd::Zero(m.rows(), m.cols());
    Eigen::MatrixXd uniform_motif = Eigen::MatrixXd::Zero(m.rows(), 1);
    Eigen::RowVectorXd uniform_subject = Eigen::RowVectorXd::Zero(m.cols());
    for (Index j = 0; j < m.cols(); ++j) {
      for (Index i = 0; i < m.rows(); ++i) {
        const double count = m(i, j);
        if (count <= 0.0) continue;
        if (rate(i, j) < kDegenerateRate) {
          uniform_motif(i) += count / r_count;
          uniform_subject(j) += count / r_count;
        } else {
          ratio(i, j) = count / rate(i, j);
        }
      }
    }
    f.z_motif = p_hat.cwiseProduct(ratio * e_hat.transpose());
    f.z_subject = e_hat.cwiseProduct(p_hat.transpose() * ratio);
    f.z_motif.colwise() += uniform_motif.col(0);
    f.z_subject.rowwise() += uniform_subject;
  });
  state.z_motif.setZero(state.motifs(), r_count);
  for (const StudyFactors& f : state.studies) state.z_motif += f.z_motif;
}

void update_weights(const std::vector<StudyData>& data, VariationalState& state, int threads) {
  check_studies(data, state);
  for_each_study(data.size(), threads, [&](std::size_t s) {
    StudyFactors& f = state.studies[s];
    f.w_shape = (data[s].column_totals().array() + f.w_alpha.mean).matrix();
    f.w_rate.setConstant(data[s].subjects(), f.w_beta_shape / f.w_beta_rate + 1.0);
  });
}

double WeightShapeLogDensity::operator()(double alpha) const {
  return slope * alpha - lgamma_count * std::lgamma(alpha);
}

WeightShapeLogDensity weight_shape_log_density(const StudyPriors& priors, const StudyFactors& f) {
  const double n = static_cast<double>(f.w_shape.size());
  double sum_log_w = 0.0;
  for (Index j = 0; j < f.w_shape.size(); ++j) {
    sum_log_w += digamma(f.w_shape(j)) - std::log(f.w_rate(j));
  }
  const double e_log_beta = digamma(f.w_beta_shape) - std::log(f.w_beta_rate);
  WeightShapeLogDensity h;
  h.slope = n * e_log_beta + sum_log_w - priors.lambda_w;
  h.lgamma_count = n;
  return h;
}

void update_weight_shape(const std::vector<StudyData>& data, const Hyperparameters& hp,
                         VariationalState& state, const QuadratureConfig& quad, int threads) {
  check_studies(data, state);
  for_each_study(data.size(), threads, [&](std::size_t s) {
    StudyFactors& f = state.studies[s];
    const StudyPriors& p = hp.studies[s];
    const WeightShapeLogDensity h = weight_shape_log_density(p, f);
    const auto integral = integrate_log_density(
        h, {[](double a) { return a; }, [](double a) { return std::lgamma(a); }}, quad);
    double sum_log_w = 0.0;
    for (Index j = 0; j < f.w_shape.size(); ++j) {
      sum_log_w += digamma(f.w_shape(j)) - std::log(f.w_rate(j));
    }
    f.w_alpha.slope = h.slope;
    f.w_alpha.lgamma_count = h.lgamma_count;
    f.w_alpha.log_norm = integral.log_normalizer;
    f.w_alpha.mean = integral.means[0];
    f.w_alpha.mean_log_gamma = integral.means[1];
    // Normalizer of the density written with its alpha-free factors
    // lambda * prod_j exp(-E log w_j) kept in.
    f.w_alpha.log_c = std::log(p.lambda_w) - sum_log_w + integral.log_normalizer;
  });
}

void update_weight_rate(const std::vector<StudyData>& data, const Hyperparameters& hp,
                        VariationalState& state) {
  check_studies(data, state);
  for (std::size_t s = 0; s < data.size(); ++s) {
    StudyFactors& f = state.studies[s];
    const StudyPriors& p = hp.studies[s];
    f.w_beta_shape = static_cast<double>(data[s].subjects()) * f.w_alpha.mean + p.a_w;
    f.w_beta_rate = f.w_shape.cwiseQuotient(f.w_rate).sum() + p.b_w;
  }
}

void update_signatures(const Hyperparameters& hp, VariationalState& state) {
  state.theta_p = hp.signature_prior(state.signatures()) + state.z_motif;
}

void update_exposures(const Hyperparameters& hp, VariationalState& state) {
  for (std::size_t s = 0; s < state.studies.size(); ++s) {
    StudyFactors& f = state.studies[s];
    const StudyPriors& p = hp.studies[s];
    f.theta_e = (f.theta_a.array() * p.alpha_e1 + (1.0 - f.theta_a.array()) * p.alpha_e0).matrix() +
                f.z_subject;
  }
}

double inclusion_logit(const StudyData& study, const StudyPriors& priors, const StudyFactors& f,
                       Index r, Index j) {
  const double a1 = priors.alpha_e1;
  const double a0 = priors.alpha_e0;
  const Index r_count = f.theta_a.rows();

  // Concentration contributed by the other signatures: mean and variance
  // under independent Bernoulli inclusion.
  double others_mean = 0.0;
  double others_var = 0.0;
  for (Index t = 0; t < r_count; ++t) {
    if (t == r) continue;
    const double a = f.theta_a(t, j);
    others_mean += a * a1 + (1.0 - a) * a0;
    others_var += (a1 - a0) * (a1 - a0) * a * (1.0 - a);
  }
  // Second-order expansion of E[lgamma(alpha + others)] on each branch.
  const double slab = log_gamma(a1 + others_mean) + 0.5 * trigamma(a1 + others_mean) * others_var;
  const double spike = log_gamma(a0 + others_mean) + 0.5 * trigamma(a0 + others_mean) * others_var;
  const double normalizer = slab - spike - log_gamma(a1) + log_gamma(a0);

  const double e_log_exposure = digamma(f.theta_e(r, j)) - digamma(f.theta_e.col(j).sum());

  const auto x = study.covariates.row(j);
  const double location = x.dot(f.beta_mean.col(r));
  const double variance = x * f.beta_cov[r] * x.transpose();
  // log P(a = 1 | beta) = log Phi(m) = log(1 - Phi(-m)); the Bowling form is
  // expanded around -m for both branches.
  const BowlingLogMoments probit = bowling_log_moments(-location, variance);

  return normalizer + (a1 - a0) * e_log_exposure + (probit.upper - probit.lower);
}

void update_inclusion(const std::vector<StudyData>& data, const Hyperparameters& hp,
                      VariationalState& state, int threads) {
  check_studies(data, state);
  for_each_study(data.size(), threads, [&](std::size_t s) {
    StudyFactors& f = state.studies[s];
    const Index r_count = f.theta_a.rows();
    Eigen::VectorXd logits(r_count);
    for (Index j = 0; j < f.theta_a.cols(); ++j) {
      for (Index r = 0; r < r_count; ++r) {
        logits(r) = inclusion_logit(data[s], hp.studies[s], f, r, j);
      }
      for (Index r = 0; r < r_count; ++r) {
        const double clipped = std::clamp(logits(r), -kLogitClip, kLogitClip);
        f.theta_a(r, j) = std::clamp(logistic(clipped), kInclusionFloor, 1.0 - kInclusionFloor);
      }
    }
  });
}

void update_a_star(const std::vector<StudyData>& data, VariationalState& state) {
  check_studies(data, state);
  for (std::size_t s = 0; s < data.size(); ++s) {
    StudyFactors& f = state.studies[s];
    f.a_star_location = (data[s].covariates * f.beta_mean).transpose();
    for (Index j = 0; j < f.a_star_location.cols(); ++j) {
      for (Index r = 0; r < f.a_star_location.rows(); ++r) {
        f.a_star_mean(r, j) = truncated_normal_mixture_mean({f.a_star_location(r, j), f.theta_a(r, j)});
      }
    }
  }
}

void update_beta(const std::vector<StudyData>& data, const Hyperparameters& hp,
                 VariationalState& state) {
  check_studies(data, state);
  for (std::size_t s = 0; s < data.size(); ++s) {
    StudyFactors& f = state.studies[s];
    const Eigen::MatrixXd& x = data[s].covariates;
    const Eigen::MatrixXd gram = x.transpose() * x;
    const Index q = x.cols();
    for (Index r = 0; r < f.beta_mean.cols(); ++r) {
      const double e_tau = f.tau_shape(r) / f.tau_rate(r);
      const Eigen::MatrixXd precision = gram + e_tau * Eigen::MatrixXd::Identity(q, q);
      const Eigen::VectorXd rhs =
          e_tau * hp.studies[s].beta0.col(r) + x.transpose() * f.a_star_mean.row(r).transpose();
      const SpdSolution sol = spd_solve(precision, rhs);
      f.beta_mean.col(r) = sol.solution;
      f.beta_cov[r] = sol.inverse;
    }
  }
}

void update_tau(const std::vector<StudyData>& data, const Hyperparameters& hp,
                VariationalState& state) {
  check_studies(data, state);
  for (std::size_t s = 0; s < data.size(); ++s) {
    StudyFactors& f = state.studies[s];
    const double q = static_cast<double>(data[s].covariate_count());
    for (Index r = 0; r < f.beta_mean.cols(); ++r) {
      const Eigen::VectorXd diff = f.beta_mean.col(r) - hp.studies[s].beta0.col(r);
      f.tau_shape(r) = hp.gamma1 + 0.5 * q;
      f.tau_rate(r) = hp.gamma2 + 0.5 * (f.beta_cov[r].trace() + diff.squaredNorm());
    }
  }
}

namespace {

template <typename Fn>
void run_step(const char* step, int sweep_index, Fn&& fn) {
  const std::string where = std::string(" [sweep ") + std::to_string(sweep_index) + ", " + step + "]";
  try {
    fn();
  } catch (const AccuracyError& e) {
    throw AccuracyError(e.what() + where, e.best_estimate());
  } catch (const DecompositionError& e) {
    throw DecompositionError(e.what() + where);
  } catch (const DomainError& e) {
    throw DomainError(e.what() + where);
  } catch (const DegenerateInputError& e) {
    throw DegenerateInputError(e.what() + where);
  } catch (const StructuralError& e) {
    throw StructuralError(e.what() + where);
  }
}

void append(std::vector<double>& out, const Eigen::MatrixXd& m) {
  out.insert(out.end(), m.data(), m.data() + m.size());
}

std::vector<double> flatten(const VariationalState& st) {
  std::vector<double> out;
  append(out, st.theta_p);
  for (const StudyFactors& f : st.studies) {
    append(out, f.theta_e);
    append(out, f.theta_a);
    append(out, f.beta_mean);
    for (const auto& c : f.beta_cov) append(out, c);
    append(out, f.tau_shape);
    append(out, f.tau_rate);
    append(out, f.w_shape);
    append(out, f.w_rate);
    out.push_back(f.w_alpha.mean);
    out.push_back(f.w_beta_shape);
    out.push_back(f.w_beta_rate);
  }
  return out;
}

}  // namespace

void sweep(const std::vector<StudyData>& data, const Hyperparameters& hp, const FitConfig& cfg,
           VariationalState& state) {
  const int n = state.iteration + 1;
  const int t = cfg.threads;
  run_step("latent counts", n, [&] { update_latent_counts(data, state, t); });
  run_step("weights", n, [&] { update_weights(data, state, t); });
  run_step("weight shape", n, [&] { update_weight_shape(data, hp, state, cfg.quadrature, t); });
  run_step("weight rate", n, [&] { update_weight_rate(data, hp, state); });
  run_step("signatures", n, [&] { update_signatures(hp, state); });
  run_step("exposures", n, [&] { update_exposures(hp, state); });
  if (cfg.freeze_probit) return;
  run_step("inclusion", n, [&] { update_inclusion(data, hp, state, t); });
  run_step("latent scores", n, [&] { update_a_star(data, state); });
  run_step("coefficients", n, [&] { update_beta(data, hp, state); });
  run_step("precisions", n, [&] { update_tau(data, hp, state); });
}

double max_relative_change(const VariationalState& before, const VariationalState& after) {
  const std::vector<double> a = flatten(before);
  const std::vector<double> b = flatten(after);
  if (a.size() != b.size()) throw StructuralError("states differ in shape");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(b[i] - a[i]) / (std::abs(a[i]) + 1e-8));
  }
  return worst;
}

FitResult fit(const std::vector<StudyData>& data, const Hyperparameters& hp, const FitConfig& cfg,
              VariationalState init) {
  cfg.validate();
  hp.validate(data, init.signatures());
  if (init.signatures() != cfg.rank) {
    throw StructuralError("initial state rank does not match the configured rank");
  }
  FitResult out;
  out.state = std::move(init);
  out.diagnostics.termination = "max-iterations";
  for (int it = 0; it < cfg.max_iterations; ++it) {
    const auto start = std::chrono::steady_clock::now();
    const VariationalState before = out.state;
    sweep(data, hp, cfg, out.state);
    out.state.iteration += 1;
    const double delta = max_relative_change(before, out.state);
    const double objective = cfg.track_objective ? surrogate_objective(data, hp, out.state)
                                                 : std::numeric_limits<double>::quiet_NaN();
    const auto stop = std::chrono::steady_clock::now();
    out.diagnostics.max_delta.push_back(delta);
    out.diagnostics.objective.push_back(objective);
    out.diagnostics.seconds.push_back(std::chrono::duration<double>(stop - start).count());
    if (cfg.observer) cfg.observer(out.state, out.diagnostics);
    if (delta < cfg.tolerance) {
      out.diagnostics.termination = "converged";
      break;
    }
  }
  return out;
}

}  // namespace bapnmf
