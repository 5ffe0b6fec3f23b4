// Command-line front end: fit, simulate, evaluate, match.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "bapnmf/cavi.hpp"
#include "bapnmf/errors.hpp"
#include "bapnmf/evaluate.hpp"
#include "bapnmf/init.hpp"
#include "bapnmf/io.hpp"
#include "bapnmf/linalg.hpp"
#include "bapnmf/manifest.hpp"
#include "bapnmf/simulate.hpp"
#include "bapnmf/version.hpp"

namespace fs = std::filesystem;
using namespace bapnmf;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

int default_threads() {
  if (const char* env = std::getenv("BAPNMF_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<std::string> signature_names(Index count, const SignatureCatalog* catalog) {
  std::vector<std::string> out;
  for (Index r = 0; r < count; ++r) {
    if (catalog != nullptr && r < catalog->size()) {
      out.push_back(catalog->names[r]);
    } else {
      out.push_back("S" + std::to_string(r + 1));
    }
  }
  return out;
}

std::vector<std::string> covariate_names(const StudyData& s) {
  std::vector<std::string> out{"intercept"};
  for (Index q = 1; q < s.covariate_count(); ++q) out.push_back("x" + std::to_string(q));
  return out;
}

// Brings every study onto the motif order of the first one.
void align_motifs(std::vector<StudyData>& studies) {
  const std::vector<std::string>& reference = studies.front().motif_labels;
  for (StudyData& s : studies) {
    if (s.motif_labels == reference) continue;
    SignatureCatalog as_catalog;
    as_catalog.motif_labels = s.motif_labels;
    as_catalog.profiles = s.counts;
    for (Index j = 0; j < s.subjects(); ++j) as_catalog.names.push_back(s.subject_ids[j]);
    try {
      s.counts = align_catalog(as_catalog, reference).profiles;
    } catch (const StructuralError&) {
      throw StructuralError("study " + s.id + " has a different motif set from " +
                            studies.front().id);
    }
    s.motif_labels = reference;
  }
}

struct FitArgs {
  std::vector<std::string> counts;
  std::vector<std::string> covariates;
  std::string catalog;
  std::string config;
  std::string out;
  Index rank = 0;
  Index discovered = -1;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 0;
  int max_iterations = 0;
  double tolerance = -1.0;
  int checkpoint_interval = 0;
};

int run_fit(const FitArgs& a, const std::vector<std::string>& argv) {
  RunManifest manifest;
  manifest.command = "fit";
  manifest.arguments = argv;
  manifest.tool_version = kVersion;
  manifest.started = utc_timestamp();

  if (!a.covariates.empty() && a.covariates.size() != a.counts.size()) {
    throw ParseError("--covariates needs one entry per counts file ('-' for none)");
  }
  std::vector<StudyData> studies;
  for (std::size_t s = 0; s < a.counts.size(); ++s) {
    const std::string& path = a.counts[s];
    if (!fs::exists(path)) throw DataError("counts file not found: " + path);
    StudyData study = load_counts(path, fs::path(path).stem().string());
    manifest.inputs.emplace_back(path, sha256_file(path));
    if (!a.covariates.empty() && a.covariates[s] != "-") {
      const CovariateDesign design = load_covariates(a.covariates[s], study.subject_ids);
      for (const auto& w : design.warnings) std::cerr << "warning: " << w << "\n";
      apply_covariates(study, design);
      manifest.inputs.emplace_back(a.covariates[s], sha256_file(a.covariates[s]));
    }
    studies.push_back(std::move(study));
  }
  align_motifs(studies);

  FitConfig cfg;
  InitOptions init_opts;
  int checkpoint_interval = 0;
  KeyValues kv;
  if (!a.config.empty()) {
    kv = load_key_values(a.config);
    manifest.config_digest = sha256_file(a.config);
    manifest.inputs.emplace_back(a.config, manifest.config_digest);
    apply_fit_config(kv, cfg, init_opts, checkpoint_interval);
  }
  if (a.rank > 0) cfg.rank = a.rank;
  if (a.discovered >= 0) cfg.discovered_rank = a.discovered;
  if (a.seed_given) cfg.seed = a.seed;
  if (a.max_iterations > 0) cfg.max_iterations = a.max_iterations;
  if (a.tolerance >= 0.0) cfg.tolerance = a.tolerance;
  if (a.checkpoint_interval > 0) checkpoint_interval = a.checkpoint_interval;
  cfg.threads = a.threads > 0 ? a.threads : (kv.has("threads") ? cfg.threads : default_threads());
  if (!a.seed_given && !kv.has("seed")) std::cerr << "note: no seed given; using " << cfg.seed << "\n";

  std::optional<SignatureCatalog> catalog;
  if (!a.catalog.empty()) {
    if (!fs::exists(a.catalog)) throw DataError("catalog file not found: " + a.catalog);
    catalog = align_catalog(load_catalog(a.catalog), studies.front().motif_labels);
    manifest.inputs.emplace_back(a.catalog, sha256_file(a.catalog));
    cfg.mode = FitMode::recovery_discovery;
    if (a.discovered < 0 && !kv.has("discovered_rank")) cfg.discovered_rank = 0;
    cfg.rank = catalog->size() + cfg.discovered_rank;
  }

  Hyperparameters hp = default_hyperparameters(studies, cfg.rank, catalog ? &*catalog : nullptr);
  apply_hyperparameters(kv, studies, hp);
  kv.reject_unused();
  cfg.validate();

  fs::create_directories(a.out);
  const std::string checkpoint_path = (fs::path(a.out) / "checkpoint.bapm").string();
  if (checkpoint_interval > 0) {
    cfg.observer = [&](const VariationalState& st, const FitDiagnostics&) {
      if (st.iteration % checkpoint_interval == 0) save_checkpoint(checkpoint_path, st, hp);
    };
  }

  VariationalState init = catalog ? init_recovery_discovery(studies, hp, *catalog, cfg.discovered_rank,
                                                            cfg.seed, init_opts)
                                  : init_discovery(studies, hp, cfg.rank, cfg.seed, init_opts);
  const FitResult result = fit(studies, hp, cfg, std::move(init));
  const VariationalState& st = result.state;
  save_checkpoint(checkpoint_path, st, hp);

  const PointEstimates pe = point_estimates(st);
  const std::vector<std::string> sig_names = signature_names(cfg.rank, catalog ? &*catalog : nullptr);
  const fs::path dir(a.out);
  write_matrix((dir / "signatures.tsv").string(),
               {"motif", studies.front().motif_labels, sig_names, pe.signatures});

  const std::vector<CredibleIntervals> cis = beta_credible_intervals(st, 0.95);
  const std::vector<Eigen::VectorXd> prevalence = inclusion_prevalence(st, studies);
  LabeledMatrix beta_table{"study:signature:covariate", {}, {"low", "mean", "high"}, {}};
  std::vector<Eigen::RowVector3d> beta_rows;
  LabeledMatrix prev_table{"study", {}, sig_names, Eigen::MatrixXd(studies.size(), cfg.rank)};
  for (std::size_t s = 0; s < studies.size(); ++s) {
    const StudyData& d = studies[s];
    write_matrix((dir / ("exposures_" + d.id + ".tsv")).string(),
                 {"signature", sig_names, d.subject_ids, pe.exposures[s]});
    write_matrix((dir / ("inclusion_" + d.id + ".tsv")).string(),
                 {"signature", sig_names, d.subject_ids, pe.inclusion[s]});
    write_matrix((dir / ("weights_" + d.id + ".tsv")).string(),
                 {"subject", d.subject_ids, {"weight"}, pe.weights[s]});
    const std::vector<std::string> cov_names = covariate_names(d);
    for (Index r = 0; r < cfg.rank; ++r) {
      for (Index q = 0; q < d.covariate_count(); ++q) {
        beta_table.row_labels.push_back(d.id + ":" + sig_names[r] + ":" + cov_names[q]);
        beta_rows.emplace_back(cis[s].low(q, r), cis[s].mean(q, r), cis[s].high(q, r));
      }
    }
    prev_table.row_labels.push_back(d.id);
    prev_table.values.row(static_cast<Index>(s)) = prevalence[s].transpose();
  }
  beta_table.values.resize(static_cast<Index>(beta_rows.size()), 3);
  for (std::size_t i = 0; i < beta_rows.size(); ++i) beta_table.values.row(static_cast<Index>(i)) = beta_rows[i];
  write_matrix((dir / "beta.tsv").string(), beta_table);
  write_matrix((dir / "prevalence.tsv").string(), prev_table);

  const std::vector<Index> kept = signature_filter(st, 0.95, 0.0);
  LabeledMatrix filter{"signature", sig_names, {"a_star_q95", "retained"}, Eigen::MatrixXd(cfg.rank, 2)};
  for (Index r = 0; r < cfg.rank; ++r) {
    std::vector<double> pool;
    for (const StudyFactors& f : st.studies) {
      for (Index j = 0; j < f.a_star_mean.cols(); ++j) pool.push_back(f.a_star_mean(r, j));
    }
    filter.values(r, 0) = sample_quantile(pool, 0.95);
    filter.values(r, 1) = std::find(kept.begin(), kept.end(), r) != kept.end() ? 1.0 : 0.0;
  }
  write_matrix((dir / "filter.tsv").string(), filter);

  const FitDiagnostics& diag = result.diagnostics;
  LabeledMatrix trace{"iteration", {}, {"objective", "max_delta", "seconds"},
                      Eigen::MatrixXd(diag.iterations(), 3)};
  for (int i = 0; i < diag.iterations(); ++i) {
    trace.row_labels.push_back(std::to_string(i + 1));
    trace.values.row(i) << diag.objective[i], diag.max_delta[i], diag.seconds[i];
  }
  write_matrix((dir / "trace.tsv").string(), trace);

  manifest.seed = cfg.seed;
  manifest.threads = cfg.threads;
  manifest.finished = utc_timestamp();
  write_manifest((dir / "manifest.json").string(), manifest);
  std::cerr << "fit: " << diag.iterations() << " sweeps, " << diag.termination << "\n";
  return kOk;
}

int run_simulate(const std::string& spec_path, std::uint64_t seed, const std::string& out,
                 const std::vector<std::string>& argv) {
  RunManifest manifest;
  manifest.command = "simulate";
  manifest.arguments = argv;
  manifest.tool_version = kVersion;
  manifest.started = utc_timestamp();
  manifest.seed = seed;
  if (!fs::exists(spec_path)) throw DataError("scenario file not found: " + spec_path);
  const ScenarioSpec spec = load_scenario(spec_path);
  manifest.config_digest = sha256_file(spec_path);
  manifest.inputs.emplace_back(spec_path, manifest.config_digest);
  const SimulatedData sim = simulate(spec, seed);

  fs::create_directories(out);
  const fs::path dir(out);
  std::vector<std::string> sig_names;
  for (Index r = 0; r < spec.signatures; ++r) sig_names.push_back("T" + std::to_string(r + 1));
  write_matrix((dir / "truth_signatures.tsv").string(),
               {"motif", sim.studies.front().motif_labels, sig_names, sim.truth.signatures});
  LabeledMatrix prevalence{"study", {}, sig_names, Eigen::MatrixXd(spec.studies, spec.signatures)};
  for (std::size_t s = 0; s < sim.studies.size(); ++s) {
    const StudyData& d = sim.studies[s];
    write_counts((dir / (d.id + "_counts.tsv")).string(), d);
    if (d.covariate_count() > 1) {
      std::vector<std::string> names;
      for (Index q = 1; q < d.covariate_count(); ++q) names.push_back("x" + std::to_string(q));
      write_matrix((dir / (d.id + "_covariates.tsv")).string(),
                   {"subject", d.subject_ids, names, d.covariates.rightCols(d.covariate_count() - 1)});
    }
    write_matrix((dir / ("truth_exposures_" + d.id + ".tsv")).string(),
                 {"signature", sig_names, d.subject_ids, sim.truth.exposures[s]});
    write_matrix((dir / ("truth_inclusion_" + d.id + ".tsv")).string(),
                 {"signature", sig_names, d.subject_ids, sim.truth.inclusion[s]});
    prevalence.row_labels.push_back(d.id);
    if (spec.inclusion == InclusionDesign::probit) {
      prevalence.values.row(static_cast<Index>(s)) =
          design_prevalence(d.covariates, sim.truth.beta[s]).transpose();
      std::vector<std::string> rows;
      for (Index q = 0; q < d.covariate_count(); ++q) rows.push_back(q == 0 ? "intercept" : "x" + std::to_string(q));
      write_matrix((dir / ("truth_beta_" + d.id + ".tsv")).string(),
                   {"covariate", rows, sig_names, sim.truth.beta[s]});
    } else {
      prevalence.values.row(static_cast<Index>(s)) = sim.truth.inclusion[s].rowwise().mean().transpose();
    }
  }
  write_matrix((dir / "truth_prevalence.tsv").string(), prevalence);
  manifest.finished = utc_timestamp();
  write_manifest((dir / "manifest.json").string(), manifest);
  return kOk;
}

int run_evaluate(const std::vector<std::string>& fits, const std::vector<std::string>& truths,
                 const std::string& out, double threshold, const std::vector<std::string>& argv) {
  if (fits.size() != truths.size()) throw ParseError("--fit and --truth need the same number of directories");
  RunManifest manifest;
  manifest.command = "evaluate";
  manifest.arguments = argv;
  manifest.tool_version = kVersion;
  manifest.started = utc_timestamp();

  std::vector<MatchReport> reports;
  LabeledMatrix match{"replicate:truth", {}, {"best_cosine", "matched", "captured"}, {}};
  LabeledMatrix prev_err{"replicate:study", {}, {}, {}};
  std::vector<Eigen::RowVectorXd> match_rows;
  std::vector<Eigen::RowVectorXd> prev_rows;
  std::vector<std::string> truth_names;
  for (std::size_t k = 0; k < fits.size(); ++k) {
    const std::string est_path = (fs::path(fits[k]) / "signatures.tsv").string();
    const std::string truth_path = (fs::path(truths[k]) / "truth_signatures.tsv").string();
    const LabeledMatrix est = read_matrix(est_path);
    const LabeledMatrix truth = read_matrix(truth_path);
    manifest.inputs.emplace_back(est_path, sha256_file(est_path));
    manifest.inputs.emplace_back(truth_path, sha256_file(truth_path));
    if (est.row_labels != truth.row_labels) throw StructuralError("estimate and truth motif labels differ");
    const MatchReport rep = cosine_match(est.values, truth.values, threshold);
    truth_names = truth.col_labels;
    for (Index t = 0; t < truth.values.cols(); ++t) {
      match.row_labels.push_back(std::to_string(k + 1) + ":" + truth.col_labels[t]);
      Eigen::RowVectorXd row(3);
      row << rep.best_cosine(t), static_cast<double>(rep.matched[t] + 1), rep.captured[t] ? 1.0 : 0.0;
      match_rows.push_back(row);
    }
    const fs::path est_prev = fs::path(fits[k]) / "prevalence.tsv";
    const fs::path true_prev = fs::path(truths[k]) / "truth_prevalence.tsv";
    if (fs::exists(est_prev) && fs::exists(true_prev)) {
      const LabeledMatrix ep = read_matrix(est_prev.string());
      const LabeledMatrix tp = read_matrix(true_prev.string());
      if (ep.values.rows() != tp.values.rows()) throw StructuralError("prevalence tables differ in study count");
      prev_err.col_labels = tp.col_labels;
      for (Index s = 0; s < tp.values.rows(); ++s) {
        prev_err.row_labels.push_back(std::to_string(k + 1) + ":" + tp.row_labels[s]);
        Eigen::RowVectorXd row(tp.values.cols());
        for (Index t = 0; t < tp.values.cols(); ++t) row(t) = ep.values(s, rep.matched[t]) - tp.values(s, t);
        prev_rows.push_back(row);
      }
    }
    reports.push_back(rep);
  }
  fs::create_directories(out);
  const fs::path dir(out);
  match.values.resize(static_cast<Index>(match_rows.size()), 3);
  for (std::size_t i = 0; i < match_rows.size(); ++i) match.values.row(static_cast<Index>(i)) = match_rows[i];
  write_matrix((dir / "match.tsv").string(), match);
  write_matrix((dir / "detection.tsv").string(),
               {"truth", truth_names, {"detection_rate"}, detection_rate(reports)});
  if (!prev_rows.empty()) {
    prev_err.values.resize(static_cast<Index>(prev_rows.size()), prev_rows.front().size());
    for (std::size_t i = 0; i < prev_rows.size(); ++i) prev_err.values.row(static_cast<Index>(i)) = prev_rows[i];
    write_matrix((dir / "prevalence_error.tsv").string(), prev_err);
  }
  manifest.finished = utc_timestamp();
  write_manifest((dir / "manifest.json").string(), manifest);
  return kOk;
}

int run_match(const std::string& a_path, const std::string& b_path, const std::string& out) {
  const LabeledMatrix a = read_matrix(a_path);
  const LabeledMatrix b = read_matrix(b_path);
  if (a.row_labels.size() != b.row_labels.size()) throw StructuralError("matrices differ in motif count");
  const LabeledMatrix table{"signature", a.col_labels, b.col_labels, cosine_matrix(a.values, b.values)};
  if (out.empty()) {
    write_matrix(std::cout, table);
  } else {
    write_matrix(out, table);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  CLI::App app{"Bayesian probit multi-study NMF"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  FitArgs fa;
  auto* fit_cmd = app.add_subcommand("fit", "fit the model to one or more studies");
  fit_cmd->add_option("--counts", fa.counts, "counts TSV per study")->required();
  fit_cmd->add_option("--covariates", fa.covariates, "covariate TSV per study ('-' for none)");
  fit_cmd->add_option("--catalog", fa.catalog, "known-signature catalog (recovery-discovery)");
  fit_cmd->add_option("--config", fa.config, "key = value configuration file");
  fit_cmd->add_option("--rank", fa.rank, "number of signatures (discovery mode)");
  fit_cmd->add_option("--discovered-rank", fa.discovered, "discovered signatures next to the catalog");
  auto* seed_opt = fit_cmd->add_option("--seed", fa.seed, "random seed");
  fit_cmd->add_option("--threads", fa.threads, "worker threads");
  fit_cmd->add_option("--max-iterations", fa.max_iterations, "sweep cap");
  fit_cmd->add_option("--tolerance", fa.tolerance, "convergence tolerance");
  fit_cmd->add_option("--checkpoint-interval", fa.checkpoint_interval, "write a checkpoint every N sweeps");
  fit_cmd->add_option("--out", fa.out, "output directory")->required();

  std::string spec_path, sim_out;
  std::uint64_t sim_seed = 0;
  int sim_threads = 0;
  auto* sim_cmd = app.add_subcommand("simulate", "draw a synthetic dataset from a scenario file");
  sim_cmd->add_option("--spec", spec_path, "scenario file")->required();
  sim_cmd->add_option("--seed", sim_seed, "random seed")->required();
  sim_cmd->add_option("--threads", sim_threads, "worker threads (unused; simulation is sequential)");
  sim_cmd->add_option("--out", sim_out, "output directory")->required();

  std::vector<std::string> eval_fits, eval_truths;
  std::string eval_out;
  double eval_threshold = 0.8;
  auto* eval_cmd = app.add_subcommand("evaluate", "score fits against simulation ground truth");
  eval_cmd->add_option("--fit", eval_fits, "fit output directories")->required();
  eval_cmd->add_option("--truth", eval_truths, "simulate output directories, same order")->required();
  eval_cmd->add_option("--threshold", eval_threshold, "capture threshold on cosine similarity");
  eval_cmd->add_option("--out", eval_out, "output directory")->required();

  std::string match_a, match_b, match_out;
  auto* match_cmd = app.add_subcommand("match", "cosine similarity table of two signature matrices");
  match_cmd->add_option("first", match_a, "signature TSV")->required();
  match_cmd->add_option("second", match_b, "signature TSV")->required();
  match_cmd->add_option("--out", match_out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*fit_cmd) {
      fa.seed_given = seed_opt->count() > 0;
      return run_fit(fa, args);
    }
    if (*sim_cmd) return run_simulate(spec_path, sim_seed, sim_out, args);
    if (*eval_cmd) return run_evaluate(eval_fits, eval_truths, eval_out, eval_threshold, args);
    if (*match_cmd) return run_match(match_a, match_b, match_out);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  } catch (const StructuralError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  } catch (const DegenerateInputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}
