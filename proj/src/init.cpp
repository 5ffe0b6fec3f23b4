#include "bapnmf/init.hpp"

#include "bapnmf/cavi.hpp"
#include "bapnmf/errors.hpp"
#include "bapnmf/linalg.hpp"
#include "bapnmf/rng.hpp"

namespace bapnmf {
namespace {

constexpr double kMeanFloor = 1e-10;

// Exposure columns for `fitted` NMF signatures followed by `random` prior
// signatures. The random block gets the share a spike would have against
// slab-included fitted signatures.
Eigen::MatrixXd combined_exposures(const Eigen::MatrixXd& fitted, Index random, double alpha_e1,
                                   double alpha_e0, Rng& rng) {
  const Index known = fitted.rows();
  const Index n = fitted.cols();
  Eigen::MatrixXd out(known + random, n);
  const double share = random == 0 ? 0.0
                                   : random * alpha_e0 / (known * alpha_e1 + random * alpha_e0);
  for (Index j = 0; j < n; ++j) {
    if (known > 0) {
      const double total = fitted.col(j).sum();
      const Eigen::VectorXd own = total > 0.0
                                      ? Eigen::VectorXd(fitted.col(j) / total)
                                      : Eigen::VectorXd::Constant(known, 1.0 / known);
      out.col(j).head(known) = (1.0 - share) * own;
    }
    if (random > 0) {
      const double weight = known > 0 ? share : 1.0;
      out.col(j).tail(random) = weight * rng.dirichlet(random, alpha_e0);
    }
  }
  return out;
}

VariationalState assemble(const std::vector<StudyData>& data, const Hyperparameters& hp,
                          const Eigen::MatrixXd& signatures, const std::vector<Eigen::MatrixXd>& exposures,
                          std::uint64_t seed, const InitOptions& opts) {
  const Index r_count = signatures.cols();
  VariationalState st = prior_state(data, hp, r_count, seed);
  const Index recovered = hp.recovered_count();
  const Eigen::MatrixXd prior = hp.signature_prior(r_count);
  for (Index r = 0; r < r_count; ++r) {
    if (r < recovered) {
      st.theta_p.col(r) = prior.col(r);
    } else {
      st.theta_p.col(r) =
          opts.pseudo_count_scale * column_normalized(signatures.col(r).cwiseMax(kMeanFloor).eval());
    }
  }
  for (std::size_t s = 0; s < data.size(); ++s) {
    st.studies[s].theta_e =
        opts.pseudo_count_scale * column_normalized(exposures[s].cwiseMax(kMeanFloor).eval());
  }
  update_latent_counts(data, st);
  return st;
}

std::vector<Eigen::MatrixXd> split_columns(const Eigen::MatrixXd& all,
                                           const std::vector<StudyData>& data) {
  std::vector<Eigen::MatrixXd> out;
  Index offset = 0;
  for (const StudyData& d : data) {
    out.push_back(all.middleCols(offset, d.subjects()));
    offset += d.subjects();
  }
  return out;
}

}  // namespace

Eigen::MatrixXd concatenate_counts(const std::vector<StudyData>& data) {
  if (data.empty()) throw StructuralError("no studies");
  Index total = 0;
  for (const StudyData& d : data) {
    if (d.motifs() != data.front().motifs()) throw StructuralError("studies disagree on motif count");
    total += d.subjects();
  }
  Eigen::MatrixXd out(data.front().motifs(), total);
  Index offset = 0;
  for (const StudyData& d : data) {
    out.middleCols(offset, d.subjects()) = d.counts;
    offset += d.subjects();
  }
  return out;
}

VariationalState init_discovery(const std::vector<StudyData>& data, const Hyperparameters& hp,
                                Index rank, std::uint64_t seed, const InitOptions& opts) {
  if (rank < 1) throw DomainError("rank must be >= 1");
  if (hp.recovered_count() != 0) {
    throw StructuralError("discovery initialization with recovered signatures in the prior");
  }
  hp.validate(data, rank);
  const Rng root(seed);
  const Eigen::MatrixXd m = concatenate_counts(data);

  NmfSolution first = frequentist_nmf(m, rank, root.split(1).seed(), opts.nmf);
  const std::vector<Index> kept = cosine_dedup(first.basis, opts.dedup_threshold);
  const Index reduced = static_cast<Index>(kept.size());
  NmfSolution sol = reduced == rank ? std::move(first)
                                    : frequentist_nmf(m, reduced, root.split(2).seed(), opts.nmf);

  Rng draws = root.split(3);
  Eigen::MatrixXd signatures(m.rows(), rank);
  signatures.leftCols(reduced) = sol.basis;
  for (Index r = reduced; r < rank; ++r) signatures.col(r) = draws.dirichlet(hp.alpha_p);

  std::vector<Eigen::MatrixXd> fitted = split_columns(sol.coefficients, data);
  std::vector<Eigen::MatrixXd> exposures;
  for (std::size_t s = 0; s < data.size(); ++s) {
    exposures.push_back(combined_exposures(fitted[s], rank - reduced, hp.studies[s].alpha_e1,
                                           hp.studies[s].alpha_e0, draws));
  }
  return assemble(data, hp, signatures, exposures, seed, opts);
}

VariationalState init_recovery_discovery(const std::vector<StudyData>& data,
                                         const Hyperparameters& hp, const SignatureCatalog& catalog,
                                         Index discovered, std::uint64_t seed,
                                         const InitOptions& opts) {
  catalog.validate();
  if (discovered < 0) throw DomainError("discovered rank must be >= 0");
  const Eigen::MatrixXd m = concatenate_counts(data);
  if (catalog.profiles.rows() != m.rows()) {
    throw StructuralError("catalog motif count does not match the counts");
  }
  if (hp.recovered_count() != catalog.size()) {
    throw StructuralError("hyperparameters do not carry the catalog as recovered prior");
  }
  const Index recovered = catalog.size();
  const Index rank = recovered + discovered;
  if (rank < 1) throw DomainError("no signatures to fit");
  hp.validate(data, rank);
  const Rng root(seed);

  Eigen::MatrixXd fitted_all;
  if (recovered > 0) {
    fitted_all = frequentist_nmf_fixed_basis(m, catalog.profiles, root.split(1).seed(), opts.nmf)
                     .coefficients;
  } else {
    fitted_all.resize(0, m.cols());
  }

  Rng draws = root.split(3);
  Eigen::MatrixXd signatures(m.rows(), rank);
  signatures.leftCols(recovered) = catalog.profiles;
  for (Index r = recovered; r < rank; ++r) signatures.col(r) = draws.dirichlet(hp.alpha_p);

  std::vector<Eigen::MatrixXd> fitted = split_columns(fitted_all, data);
  std::vector<Eigen::MatrixXd> exposures;
  for (std::size_t s = 0; s < data.size(); ++s) {
    exposures.push_back(combined_exposures(fitted[s], discovered, hp.studies[s].alpha_e1,
                                           hp.studies[s].alpha_e0, draws));
  }
  return assemble(data, hp, signatures, exposures, seed, opts);
}

}  // namespace bapnmf
