#include "bapnmf/simulate.hpp"

#include <string>

#include "bapnmf/errors.hpp"
#include "bapnmf/rng.hpp"
#include "bapnmf/special.hpp"

namespace bapnmf {

void ScenarioSpec::validate() const {
  if (studies < 1 || motifs < 1 || signatures < 1) {
    throw DomainError("scenario: studies, motifs and signatures must be >= 1");
  }
  if (static_cast<Index>(subjects.size()) != studies) {
    throw StructuralError("scenario: one subject count per study required");
  }
  for (Index n : subjects) {
    if (n < 1) throw DomainError("scenario: subject counts must be >= 1");
  }
  if (!(concentration > 0.0 && exposure_shape > 0.0 && exposure_rate > 0.0 && weight > 0.0)) {
    throw DomainError("scenario: concentration, exposure shape/rate and weight must be positive");
  }
  if (covariates.empty() || covariates.front().kind != CovariateSpec::Kind::intercept) {
    throw StructuralError("scenario: the first covariate must be the intercept");
  }
  for (std::size_t q = 1; q < covariates.size(); ++q) {
    const CovariateSpec& c = covariates[q];
    if (c.kind == CovariateSpec::Kind::intercept) throw StructuralError("scenario: repeated intercept");
    if (c.kind == CovariateSpec::Kind::bernoulli && !(c.probability > 0.0 && c.probability < 1.0)) {
      throw DomainError("scenario: bernoulli probability outside (0, 1)");
    }
  }
  if (inclusion == InclusionDesign::sharing) {
    if (sharing.rows() != studies || sharing.cols() != signatures) {
      throw StructuralError("scenario: sharing matrix must be studies x signatures");
    }
    if ((sharing.array() != 0 && sharing.array() != 1).any()) {
      throw DomainError("scenario: sharing entries must be 0 or 1");
    }
    for (Index s = 0; s < studies; ++s) {
      if (sharing.row(s).sum() == 0) throw DomainError("scenario: a study with no signatures");
    }
  } else {
    if (static_cast<Index>(beta.size()) != studies) {
      throw StructuralError("scenario: one coefficient matrix per study required");
    }
    for (const auto& b : beta) {
      if (b.rows() != static_cast<Index>(covariates.size()) || b.cols() != signatures) {
        throw StructuralError("scenario: coefficient matrix must be Q x R");
      }
    }
  }
  if (plug_in_signatures) {
    const Eigen::MatrixXd& p = *plug_in_signatures;
    if (p.rows() != motifs || p.cols() != signatures) {
      throw StructuralError("scenario: plug-in signatures must be K x R");
    }
    if ((p.array() < 0.0).any()) throw DomainError("scenario: negative plug-in signature entry");
  }
}

SimulatedData simulate(const ScenarioSpec& spec, std::uint64_t seed) {
  spec.validate();
  const Rng root(seed);
  SimulatedData out;
  GroundTruth& truth = out.truth;
  const Index k = spec.motifs;
  const Index r_count = spec.signatures;

  if (spec.plug_in_signatures) {
    truth.signatures = *spec.plug_in_signatures;
    for (Index r = 0; r < r_count; ++r) truth.signatures.col(r) /= truth.signatures.col(r).sum();
  } else {
    Rng rng = root.split(0);
    truth.signatures.resize(k, r_count);
    for (Index r = 0; r < r_count; ++r) truth.signatures.col(r) = rng.dirichlet(k, spec.concentration);
  }

  const Index q = static_cast<Index>(spec.covariates.size());
  for (Index s = 0; s < spec.studies; ++s) {
    Rng rng = root.split(static_cast<std::uint64_t>(s) + 1);
    const Index n = spec.subjects[s];

    Eigen::MatrixXd x(n, q);
    for (Index j = 0; j < n; ++j) {
      for (Index c = 0; c < q; ++c) {
        const CovariateSpec& cov = spec.covariates[c];
        switch (cov.kind) {
          case CovariateSpec::Kind::intercept: x(j, c) = 1.0; break;
          case CovariateSpec::Kind::bernoulli: x(j, c) = rng.bernoulli(cov.probability) ? 1.0 : 0.0; break;
          case CovariateSpec::Kind::normal: x(j, c) = rng.normal(); break;
        }
      }
    }

    Eigen::MatrixXd inclusion(r_count, n);
    for (Index j = 0; j < n; ++j) {
      do {
        for (Index r = 0; r < r_count; ++r) {
          if (spec.inclusion == InclusionDesign::sharing) {
            inclusion(r, j) = spec.sharing(s, r);
          } else {
            const double p = std_normal_cdf(x.row(j).dot(spec.beta[s].col(r)));
            inclusion(r, j) = rng.bernoulli(p) ? 1.0 : 0.0;
          }
        }
      } while (inclusion.col(j).sum() == 0.0);
    }

    Eigen::MatrixXd exposures(r_count, n);
    for (Index j = 0; j < n; ++j) {
      for (Index r = 0; r < r_count; ++r) {
        const double draw = rng.gamma(spec.exposure_shape, spec.exposure_rate);
        exposures(r, j) = inclusion(r, j) * draw;
      }
      exposures.col(j) /= exposures.col(j).sum();
    }

    const Eigen::VectorXd weights = Eigen::VectorXd::Constant(n, spec.weight);
    const Eigen::MatrixXd mean = truth.signatures * exposures * weights.asDiagonal();
    Eigen::MatrixXd counts(k, n);
    for (Index j = 0; j < n; ++j) {
      for (Index i = 0; i < k; ++i) counts(i, j) = static_cast<double>(rng.poisson(mean(i, j)));
    }

    StudyData study;
    study.id = "study" + std::to_string(s + 1);
    study.counts = std::move(counts);
    study.covariates = x;
    for (Index i = 0; i < k; ++i) study.motif_labels.push_back("m" + std::to_string(i + 1));
    for (Index j = 0; j < n; ++j) study.subject_ids.push_back(study.id + "_s" + std::to_string(j + 1));
    out.studies.push_back(std::move(study));

    truth.exposures.push_back(exposures);
    truth.weights.push_back(weights);
    truth.inclusion.push_back(inclusion);
    if (spec.inclusion == InclusionDesign::probit) truth.beta.push_back(spec.beta[s]);
  }
  return out;
}

ScenarioSpec scenario_one() {
  ScenarioSpec spec;
  spec.inclusion = InclusionDesign::sharing;
  spec.sharing.resize(3, 4);
  spec.sharing << 1, 1, 1, 0,
                  1, 1, 0, 1,
                  1, 1, 1, 1;
  return spec;
}

ScenarioSpec scenario_two() {
  ScenarioSpec spec;
  spec.inclusion = InclusionDesign::probit;
  spec.covariates = {CovariateSpec{},
                     {CovariateSpec::Kind::bernoulli, 0.2},
                     {CovariateSpec::Kind::normal, 0.0},
                     {CovariateSpec::Kind::normal, 0.0}};
  Eigen::MatrixXd b(4, 4);
  // rows: intercept, binary, normal, normal; columns: signatures
  b << 1.0,  0.5,  0.0, -1.0,
       1.0, -1.0,  1.0,  1.0,
       1.0,  1.0, -1.0,  1.0,
      -1.0,  1.0,  1.0, -1.0;
  spec.beta.assign(3, b);
  return spec;
}

}  // namespace bapnmf
