#include "bapnmf/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "bapnmf/errors.hpp"
#include "bapnmf/quadrature.hpp"
#include "bapnmf/special.hpp"

namespace bapnmf {
namespace {

std::string coord(const std::string& name, Index s, Index a, Index b = -1) {
  std::ostringstream os;
  os << name << "[study " << s << "](" << a;
  if (b >= 0) os << ", " << b;
  os << ")";
  return os.str();
}

void check_shape(const Eigen::MatrixXd& m, Index rows, Index cols, const std::string& name) {
  if (m.rows() != rows || m.cols() != cols) {
    std::ostringstream os;
    os << name << " has shape " << m.rows() << "x" << m.cols() << ", expected " << rows << "x"
       << cols;
    throw StructuralError(os.str());
  }
}

}  // namespace

void StudyData::validate() const {
  if (counts.size() == 0) throw DataError("study " + id + ": empty counts matrix");
  if (!counts.allFinite() || (counts.array() < 0.0).any()) {
    throw DataError("study " + id + ": counts must be finite and non-negative");
  }
  if ((counts.array() != counts.array().round()).any()) {
    throw DataError("study " + id + ": counts must be integers");
  }
  if (covariates.rows() != subjects()) {
    throw StructuralError("study " + id + ": covariate rows do not match subject count");
  }
  if (covariates.cols() < 1) throw StructuralError("study " + id + ": design needs an intercept");
  if (!covariates.allFinite()) throw DataError("study " + id + ": missing covariate entries");
  if ((covariates.col(0).array() != 1.0).any()) {
    throw StructuralError("study " + id + ": first covariate column must be all ones");
  }
  if (static_cast<Index>(motif_labels.size()) != motifs() ||
      static_cast<Index>(subject_ids.size()) != subjects()) {
    throw StructuralError("study " + id + ": label count mismatch");
  }
}

StudyData make_study(std::string id, Eigen::MatrixXd counts,
                     std::optional<Eigen::MatrixXd> covariates_without_intercept) {
  StudyData s;
  s.id = std::move(id);
  s.counts = std::move(counts);
  const Index n = s.counts.cols();
  const Index extra = covariates_without_intercept ? covariates_without_intercept->cols() : 0;
  s.covariates.resize(n, 1 + extra);
  s.covariates.col(0).setOnes();
  if (extra > 0) s.covariates.rightCols(extra) = *covariates_without_intercept;
  for (Index i = 0; i < s.counts.rows(); ++i) s.motif_labels.push_back("m" + std::to_string(i + 1));
  for (Index j = 0; j < n; ++j) s.subject_ids.push_back(s.id + "_" + std::to_string(j + 1));
  return s;
}

void SignatureCatalog::validate() const {
  if (static_cast<Index>(names.size()) != profiles.cols()) {
    throw StructuralError("catalog: name count does not match profile columns");
  }
  if (!motif_labels.empty() && static_cast<Index>(motif_labels.size()) != profiles.rows()) {
    throw StructuralError("catalog: motif label count does not match profile rows");
  }
  if ((profiles.array() < 0.0).any()) throw DataError("catalog: negative entry");
  for (Index r = 0; r < profiles.cols(); ++r) {
    if (std::abs(profiles.col(r).sum() - 1.0) > 1e-6) {
      throw DataError("catalog: column " + names[r] + " does not sum to 1");
    }
  }
}

Eigen::MatrixXd Hyperparameters::signature_prior(Index signatures) const {
  const Index k = alpha_p.size();
  const Index recovered = recovered_count();
  if (recovered > signatures) {
    throw StructuralError("more recovered signatures than signature columns");
  }
  Eigen::MatrixXd prior(k, signatures);
  for (Index r = 0; r < signatures; ++r) {
    if (r < recovered) {
      // Zero catalog entries would pin the Dirichlet parameter at zero.
      prior.col(r) =
          (recovery_concentration(r) * recovered_profiles.col(r)).cwiseMax(1e-6);
    } else {
      prior.col(r) = alpha_p;
    }
  }
  return prior;
}

void Hyperparameters::validate(const std::vector<StudyData>& data, Index signatures) const {
  if (data.empty()) throw StructuralError("no studies");
  const Index k = data.front().motifs();
  if (alpha_p.size() != k) throw StructuralError("alpha_p length does not match motif count");
  if ((alpha_p.array() <= 0.0).any()) throw DomainError("alpha_p must be strictly positive");
  if (recovered_count() > 0) {
    if (recovered_profiles.rows() != k) throw StructuralError("recovered profiles: wrong K");
    if (recovery_concentration.size() != recovered_count()) {
      throw StructuralError("one recovery concentration per recovered signature required");
    }
    if ((recovery_concentration.array() < 100.0).any()) {
      throw DomainError("recovery concentration must be >= 100");
    }
  }
  if (recovered_count() > signatures) throw StructuralError("too many recovered signatures");
  if (static_cast<Index>(studies.size()) != static_cast<Index>(data.size())) {
    throw StructuralError("one StudyPriors entry per study required");
  }
  if (!(gamma1 > 0.0 && gamma2 > 0.0)) throw DomainError("gamma1, gamma2 must be positive");
  for (std::size_t s = 0; s < studies.size(); ++s) {
    const StudyPriors& p = studies[s];
    if (!(p.alpha_e0 > 0.0)) throw DomainError("alpha_e0 must be positive");
    // alpha_e1 == alpha_e0 is the conjugate (no-selection) special case.
    if (p.alpha_e1 < p.alpha_e0) throw DomainError("alpha_e1 must not be below alpha_e0");
    if (!(p.lambda_w > 0.0 && p.a_w > 0.0 && p.b_w > 0.0)) {
      throw DomainError("weight hyperparameters must be positive");
    }
    check_shape(p.beta0, data[s].covariate_count(), signatures, "beta0");
  }
}

Hyperparameters default_hyperparameters(const std::vector<StudyData>& data, Index signatures,
                                        const SignatureCatalog* catalog,
                                        double recovery_concentration) {
  if (data.empty()) throw StructuralError("no studies");
  Hyperparameters hp;
  hp.alpha_p = Eigen::VectorXd::Ones(data.front().motifs());
  if (catalog != nullptr) {
    hp.recovered_profiles = catalog->profiles;
    hp.recovery_concentration = Eigen::VectorXd::Constant(catalog->size(), recovery_concentration);
  } else {
    hp.recovered_profiles.resize(data.front().motifs(), 0);
  }
  for (const StudyData& s : data) {
    StudyPriors p;
    p.beta0 = Eigen::MatrixXd::Zero(s.covariate_count(), signatures);
    hp.studies.push_back(p);
  }
  return hp;
}

namespace {

WeightShapeFactor prior_weight_shape(double lambda) {
  WeightShapeFactor f;
  f.slope = -lambda;
  f.lgamma_count = 0.0;
  f.log_norm = -std::log(lambda);
  f.mean = 1.0 / lambda;
  QuadratureConfig cfg;
  auto log_density = [lambda](double x) { return -lambda * x; };
  auto lg = [](double x) { return std::lgamma(x); };
  f.mean_log_gamma = integrate_log_density(log_density, {lg}, cfg).means[0];
  f.log_c = 0.0;
  return f;
}

}  // namespace

VariationalState prior_state(const std::vector<StudyData>& data, const Hyperparameters& hp,
                             Index signatures, std::uint64_t seed) {
  hp.validate(data, signatures);
  const Index k = data.front().motifs();
  const Index r_count = signatures;
  VariationalState st;
  st.seed = seed;
  st.theta_p = hp.signature_prior(r_count);
  st.z_motif = Eigen::MatrixXd::Zero(k, r_count);

  for (std::size_t s = 0; s < data.size(); ++s) {
    const StudyData& d = data[s];
    const StudyPriors& p = hp.studies[s];
    d.validate();
    if (d.motifs() != k) throw StructuralError("studies disagree on motif count");
    const Index n = d.subjects();
    const Index q = d.covariate_count();
    StudyFactors f;

    const double e_tau = hp.gamma1 / hp.gamma2;
    f.tau_shape = Eigen::VectorXd::Constant(r_count, hp.gamma1);
    f.tau_rate = Eigen::VectorXd::Constant(r_count, hp.gamma2);
    f.beta_mean = p.beta0;
    f.beta_cov.assign(r_count, Eigen::MatrixXd::Identity(q, q) / e_tau);
    f.a_star_location = (d.covariates * f.beta_mean).transpose();
    f.theta_a.resize(r_count, n);
    f.a_star_mean.resize(r_count, n);
    for (Index r = 0; r < r_count; ++r) {
      for (Index j = 0; j < n; ++j) {
        const double m = f.a_star_location(r, j);
        const double v = d.covariates.row(j) * f.beta_cov[r] * d.covariates.row(j).transpose();
        // P(a* > 0) with a* ~ N(m, 1 + x' Sigma x) under the prior.
        f.theta_a(r, j) = std::clamp(std_normal_cdf(m / std::sqrt(1.0 + v)), 1e-12, 1.0 - 1e-12);
        f.a_star_mean(r, j) = truncated_normal_mixture_mean({m, f.theta_a(r, j)});
      }
    }
    f.theta_e = f.theta_a * p.alpha_e1 + (1.0 - f.theta_a.array()).matrix() * p.alpha_e0;

    const Eigen::VectorXd totals = d.column_totals();
    f.z_subject = Eigen::MatrixXd::Constant(r_count, n, 1.0 / r_count) * totals.asDiagonal();
    f.z_motif = (d.counts.rowwise().sum() / static_cast<double>(r_count)) *
                Eigen::RowVectorXd::Ones(r_count);
    st.z_motif += f.z_motif;

    f.w_alpha = prior_weight_shape(p.lambda_w);
    f.w_beta_shape = p.a_w;
    f.w_beta_rate = p.b_w;
    f.w_shape = (f.w_alpha.mean + totals.array()).matrix();
    f.w_rate = Eigen::VectorXd::Constant(n, f.w_beta_shape / f.w_beta_rate + 1.0);
    st.studies.push_back(std::move(f));
  }
  return st;
}

std::string ValidationReport::summary() const {
  if (ok()) return "ok";
  std::ostringstream os;
  os << violations.size() << " violation(s); first: " << violations.front().what << " at "
     << violations.front().where;
  return os.str();
}

ValidationReport validate_state(const VariationalState& state, const std::vector<StudyData>& data) {
  ValidationReport report;
  auto add = [&report](std::string what, std::string where) {
    report.violations.push_back({std::move(what), std::move(where)});
  };
  const Index k = state.motifs();
  const Index r_count = state.signatures();
  if (state.studies.size() != data.size()) throw StructuralError("study count mismatch");
  check_shape(state.z_motif, k, r_count, "z_motif");

  for (Index i = 0; i < k; ++i) {
    for (Index r = 0; r < r_count; ++r) {
      if (!(state.theta_p(i, r) > 0.0) || !std::isfinite(state.theta_p(i, r))) {
        add("theta_p not strictly positive", "theta_p(" + std::to_string(i) + ", " +
                                                 std::to_string(r) + ")");
      }
    }
  }

  Eigen::MatrixXd pooled = Eigen::MatrixXd::Zero(k, r_count);
  for (std::size_t si = 0; si < data.size(); ++si) {
    const Index s = static_cast<Index>(si);
    const StudyData& d = data[si];
    const StudyFactors& f = state.studies[si];
    const Index n = d.subjects();
    const Index q = d.covariate_count();
    if (d.motifs() != k) throw StructuralError("motif count mismatch in study " + d.id);
    check_shape(f.theta_e, r_count, n, "theta_e");
    check_shape(f.theta_a, r_count, n, "theta_a");
    check_shape(f.a_star_location, r_count, n, "a_star_location");
    check_shape(f.a_star_mean, r_count, n, "a_star_mean");
    check_shape(f.beta_mean, q, r_count, "beta_mean");
    check_shape(f.z_subject, r_count, n, "z_subject");
    check_shape(f.z_motif, k, r_count, "z_motif (study)");
    if (static_cast<Index>(f.beta_cov.size()) != r_count || f.tau_shape.size() != r_count ||
        f.tau_rate.size() != r_count || f.w_shape.size() != n || f.w_rate.size() != n) {
      throw StructuralError("factor vector length mismatch in study " + d.id);
    }
    for (Index r = 0; r < r_count; ++r) check_shape(f.beta_cov[r], q, q, "beta_cov");

    for (Index j = 0; j < n; ++j) {
      for (Index r = 0; r < r_count; ++r) {
        const double e = f.theta_e(r, j);
        if (!(e > 0.0) || !std::isfinite(e)) add("theta_e not strictly positive", coord("theta_e", s, r, j));
        const double a = f.theta_a(r, j);
        if (!(a >= 0.0 && a <= 1.0)) add("theta_a outside [0, 1]", coord("theta_a", s, r, j));
        if (!std::isfinite(f.a_star_mean(r, j))) add("a_star_mean not finite", coord("a_star_mean", s, r, j));
        if (f.z_subject(r, j) < -1e-12) add("negative latent count", coord("z_subject", s, r, j));
      }
      const double total = d.counts.col(j).sum();
      const double zsum = f.z_subject.col(j).sum();
      if (std::abs(zsum - total) > 1e-9 * std::max(1.0, total)) {
        add("latent counts do not sum to the column total",
            "subject " + d.subject_ids[j] + " (" + coord("z_subject", s, j) + ")");
      }
      if (!(f.w_shape(j) > 0.0) || !(f.w_rate(j) > 0.0)) {
        add("weight factor not strictly positive", coord("w", s, j));
      }
    }
    for (Index r = 0; r < r_count; ++r) {
      if (!(f.tau_shape(r) > 0.0) || !(f.tau_rate(r) > 0.0)) {
        add("tau factor not strictly positive", coord("tau", s, r));
      }
      const Eigen::MatrixXd& cov = f.beta_cov[r];
      const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
      if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        add("beta covariance not symmetric", coord("beta_cov", s, r));
      }
      Eigen::LLT<Eigen::MatrixXd> llt(cov);
      if (llt.info() != Eigen::Success) add("beta covariance not positive definite", coord("beta_cov", s, r));
    }
    if (!(f.w_beta_shape > 0.0) || !(f.w_beta_rate > 0.0) || !(f.w_alpha.mean > 0.0)) {
      add("weight hyperparameter factor not strictly positive", "study " + std::to_string(s));
    }
    const double motif_total = f.z_motif.sum();
    const double subject_total = f.z_subject.sum();
    if (std::abs(motif_total - subject_total) > 1e-9 * std::max(1.0, subject_total)) {
      add("latent-count caches disagree", "study " + std::to_string(s));
    }
    pooled += f.z_motif;
  }
  if ((pooled - state.z_motif).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, pooled.sum())) {
    add("pooled latent counts differ from the per-study sums", "z_motif");
  }
  return report;
}

PointEstimates point_estimates(const VariationalState& state) {
  PointEstimates out;
  out.signatures = state.theta_p.array().rowwise() / state.theta_p.colwise().sum().array();
  for (const StudyFactors& f : state.studies) {
    out.exposures.push_back(f.theta_e.array().rowwise() / f.theta_e.colwise().sum().array());
    out.weights.push_back(f.w_shape.cwiseQuotient(f.w_rate));
    out.inclusion.push_back(f.theta_a);
  }
  return out;
}

}  // namespace bapnmf
