#pragma once

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "bapnmf/cavi.hpp"
#include "bapnmf/init.hpp"
#include "bapnmf/model.hpp"
#include "bapnmf/simulate.hpp"

namespace bapnmf {

/// A labelled real matrix as read from / written to a TSV file.
struct LabeledMatrix {
  std::string corner;
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  Eigen::MatrixXd values;
};

/// 12 significant digits, shortest form.
std::string format_number(double x);

LabeledMatrix read_matrix(const std::string& path);
void write_matrix(const std::string& path, const LabeledMatrix& m);
void write_matrix(std::ostream& out, const LabeledMatrix& m);

/// Counts file: header of subject ids, first column motif labels, integer cells.
StudyData load_counts(const std::string& path, const std::string& study_id);
void write_counts(const std::string& path, const StudyData& study);

struct CovariateDesign {
  std::vector<std::string> names;      // without the intercept
  std::vector<Index> kept_subjects;    // indices into the counts columns
  Eigen::MatrixXd design;              // kept subjects x (1 + names), intercept first
  std::vector<std::string> warnings;
};

/// Covariate table: first column subject id, then numeric columns ("", NA,
/// NaN or "." mark a missing value). Rows follow `subject_ids`; subjects with
/// any missing value or no row are dropped. Non-binary columns are
/// standardized. Throws DataError on zero overlap or a constant column.
CovariateDesign load_covariates(const std::string& path, const std::vector<std::string>& subject_ids);

/// Restricts the study to the kept subjects and installs the design.
void apply_covariates(StudyData& study, const CovariateDesign& design);

/// Catalog: first column motif labels, one column per signature. Columns are
/// renormalized if their sum is within 1e-3 of one, rejected otherwise.
SignatureCatalog load_catalog(const std::string& path);

/// Reorders catalog rows to `motif_labels`; the label sets must agree.
SignatureCatalog align_catalog(const SignatureCatalog& catalog,
                               const std::vector<std::string>& motif_labels);

/// Flat "key = value" file; '#' starts a comment. Keys keep their line number
/// so later validation can point at them.
struct KeyValues {
  struct Entry {
    std::string value;
    int line = 0;
    bool used = false;
  };
  std::string source;
  std::map<std::string, Entry> entries;

  bool has(const std::string& key) const { return entries.count(key) > 0; }
  std::string get_string(const std::string& key);
  double get_double(const std::string& key);
  long long get_int(const std::string& key);
  bool get_bool(const std::string& key);
  std::vector<double> get_doubles(const std::string& key);
  std::vector<std::string> get_strings(const std::string& key);
  /// Throws ParseError naming the first key that no reader consumed.
  void reject_unused() const;
};

KeyValues parse_key_values(const std::string& text, const std::string& source);
KeyValues load_key_values(const std::string& path);

/// Reads the fit-loop keys (max_iterations, tolerance, rank, ...).
void apply_fit_config(KeyValues& kv, FitConfig& cfg, InitOptions& init, int& checkpoint_interval);

/// Reads the prior keys. Scalars apply to every study; "key.<s>" overrides
/// study s (1-based); "beta0.<s>.<r>" sets one coefficient prior mean vector.
void apply_hyperparameters(KeyValues& kv, const std::vector<StudyData>& data, Hyperparameters& hp);

/// Scenario file; `signatures_file` paths are resolved against `base_dir`.
ScenarioSpec parse_scenario(KeyValues& kv, const std::string& base_dir);
ScenarioSpec load_scenario(const std::string& path);

}  // namespace bapnmf
