#include "bapnmf/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "bapnmf/errors.hpp"

namespace bapnmf {
namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> read_lines(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(std::string("cannot open ") + what + " file " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  // A trailing blank line is not a row.
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw ParseError(path + ": empty file");
  return lines;
}

bool parse_double(const std::string& text, double& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (*first == '+') ++first;
  const auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last && std::isfinite(out);
}

bool is_missing(const std::string& text) {
  const std::string t = trim(text);
  return t.empty() || t == "NA" || t == "NaN" || t == "nan" || t == ".";
}

std::string cell_name(const std::string& row, const std::string& col) {
  return "row '" + row + "', column '" + col + "'";
}

}  // namespace

std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

LabeledMatrix read_matrix(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path, "matrix");
  LabeledMatrix m;
  const std::vector<std::string> header = split(lines[0], '\t');
  if (header.size() < 2) throw ParseError(path + ": header needs at least one column", 1);
  m.corner = header[0];
  m.col_labels.assign(header.begin() + 1, header.end());
  const Index cols = static_cast<Index>(m.col_labels.size());
  m.values.resize(static_cast<Index>(lines.size()) - 1, cols);
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const std::vector<std::string> cells = split(lines[l], '\t');
    const int line_no = static_cast<int>(l) + 1;
    if (static_cast<Index>(cells.size()) != cols + 1) {
      throw ParseError(path + ": ragged row (" + std::to_string(cells.size() - 1) + " values, expected " +
                           std::to_string(cols) + ")",
                       line_no);
    }
    m.row_labels.push_back(cells[0]);
    for (Index c = 0; c < cols; ++c) {
      double v = 0.0;
      if (!parse_double(cells[c + 1], v)) {
        throw ParseError(path + ": non-numeric value '" + cells[c + 1] + "' at " +
                             cell_name(cells[0], m.col_labels[c]),
                         line_no);
      }
      m.values(static_cast<Index>(l) - 1, c) = v;
    }
  }
  return m;
}

void write_matrix(std::ostream& out, const LabeledMatrix& m) {
  if (static_cast<Index>(m.row_labels.size()) != m.values.rows() ||
      static_cast<Index>(m.col_labels.size()) != m.values.cols()) {
    throw StructuralError("write_matrix: label count does not match matrix shape");
  }
  out << m.corner;
  for (const auto& c : m.col_labels) out << '\t' << c;
  out << '\n';
  for (Index i = 0; i < m.values.rows(); ++i) {
    out << m.row_labels[i];
    for (Index j = 0; j < m.values.cols(); ++j) out << '\t' << format_number(m.values(i, j));
    out << '\n';
  }
}

void write_matrix(const std::string& path, const LabeledMatrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  write_matrix(out, m);
  if (!out) throw DataError("failed writing " + path);
}

StudyData load_counts(const std::string& path, const std::string& study_id) {
  const std::vector<std::string> lines = read_lines(path, "counts");
  const std::vector<std::string> header = split(lines[0], '\t');
  if (header.size() < 2) throw ParseError(path + ": header needs at least one subject", 1);
  StudyData s;
  s.id = study_id;
  s.subject_ids.assign(header.begin() + 1, header.end());
  std::set<std::string> seen_subjects;
  for (const auto& id : s.subject_ids) {
    if (!seen_subjects.insert(id).second) throw ParseError(path + ": duplicate subject id '" + id + "'", 1);
  }
  const Index n = static_cast<Index>(s.subject_ids.size());
  s.counts.resize(static_cast<Index>(lines.size()) - 1, n);
  std::set<std::string> seen_motifs;
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const int line_no = static_cast<int>(l) + 1;
    const std::vector<std::string> cells = split(lines[l], '\t');
    if (static_cast<Index>(cells.size()) != n + 1) {
      throw ParseError(path + ": ragged row with " + std::to_string(cells.size() - 1) +
                           " values, expected " + std::to_string(n),
                       line_no);
    }
    if (!seen_motifs.insert(cells[0]).second) {
      throw ParseError(path + ": duplicate motif label '" + cells[0] + "'", line_no);
    }
    s.motif_labels.push_back(cells[0]);
    for (Index j = 0; j < n; ++j) {
      const std::string t = trim(cells[j + 1]);
      long long v = -1;
      const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
      if (res.ec != std::errc() || res.ptr != t.data() + t.size() || v < 0) {
        throw ParseError(path + ": '" + cells[j + 1] + "' is not a non-negative integer at " +
                             cell_name(cells[0], s.subject_ids[j]),
                         line_no);
      }
      s.counts(static_cast<Index>(l) - 1, j) = static_cast<double>(v);
    }
  }
  s.covariates = Eigen::MatrixXd::Ones(n, 1);
  return s;
}

void write_counts(const std::string& path, const StudyData& study) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << "motif";
  for (const auto& id : study.subject_ids) out << '\t' << id;
  out << '\n';
  for (Index i = 0; i < study.motifs(); ++i) {
    out << study.motif_labels[i];
    for (Index j = 0; j < study.subjects(); ++j) {
      out << '\t' << static_cast<long long>(std::llround(study.counts(i, j)));
    }
    out << '\n';
  }
  if (!out) throw DataError("failed writing " + path);
}

CovariateDesign load_covariates(const std::string& path, const std::vector<std::string>& subject_ids) {
  const std::vector<std::string> lines = read_lines(path, "covariates");
  const std::vector<std::string> header = split(lines[0], '\t');
  CovariateDesign out;
  out.names.assign(header.begin() + 1, header.end());
  const std::size_t q = out.names.size();

  struct Row {
    std::vector<double> values;
    bool complete = true;
  };
  std::unordered_map<std::string, Row> rows;
  std::set<std::string> known(subject_ids.begin(), subject_ids.end());
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const int line_no = static_cast<int>(l) + 1;
    const std::vector<std::string> cells = split(lines[l], '\t');
    if (cells.size() != q + 1) throw ParseError(path + ": ragged row", line_no);
    Row row;
    for (std::size_t c = 0; c < q; ++c) {
      double v = 0.0;
      if (is_missing(cells[c + 1])) {
        row.complete = false;
      } else if (!parse_double(cells[c + 1], v)) {
        throw ParseError(path + ": non-numeric value '" + cells[c + 1] + "' at " +
                             cell_name(cells[0], out.names[c]),
                         line_no);
      }
      row.values.push_back(v);
    }
    if (!rows.emplace(cells[0], row).second) {
      throw ParseError(path + ": duplicate subject '" + cells[0] + "'", line_no);
    }
    if (!known.count(cells[0])) {
      out.warnings.push_back("subject '" + cells[0] + "' in " + path + " has no counts; ignored");
    }
  }

  std::vector<const Row*> kept_rows;
  for (std::size_t j = 0; j < subject_ids.size(); ++j) {
    const auto it = rows.find(subject_ids[j]);
    if (it == rows.end()) {
      out.warnings.push_back("subject '" + subject_ids[j] + "' has no covariate row; dropped");
      continue;
    }
    if (!it->second.complete) {
      out.warnings.push_back("subject '" + subject_ids[j] + "' has a missing covariate; dropped");
      continue;
    }
    out.kept_subjects.push_back(static_cast<Index>(j));
    kept_rows.push_back(&it->second);
  }
  if (kept_rows.empty()) throw DataError(path + ": no subject has both counts and complete covariates");

  const Index n = static_cast<Index>(kept_rows.size());
  out.design.resize(n, static_cast<Index>(q) + 1);
  out.design.col(0).setOnes();
  for (std::size_t c = 0; c < q; ++c) {
    Eigen::VectorXd col(n);
    for (Index j = 0; j < n; ++j) col(j) = kept_rows[j]->values[c];
    const bool binary = ((col.array() == 0.0) || (col.array() == 1.0)).all();
    const double mean = col.mean();
    const double sd = n > 1 ? std::sqrt((col.array() - mean).square().sum() / (n - 1)) : 0.0;
    if (!(sd > 0.0)) throw DataError(path + ": covariate '" + out.names[c] + "' is constant");
    out.design.col(static_cast<Index>(c) + 1) = binary ? col : Eigen::VectorXd((col.array() - mean) / sd);
  }
  return out;
}

void apply_covariates(StudyData& study, const CovariateDesign& design) {
  const Index n = static_cast<Index>(design.kept_subjects.size());
  Eigen::MatrixXd counts(study.motifs(), n);
  std::vector<std::string> ids;
  for (Index j = 0; j < n; ++j) {
    counts.col(j) = study.counts.col(design.kept_subjects[j]);
    ids.push_back(study.subject_ids[design.kept_subjects[j]]);
  }
  study.counts = std::move(counts);
  study.subject_ids = std::move(ids);
  study.covariates = design.design;
}

SignatureCatalog load_catalog(const std::string& path) {
  const LabeledMatrix m = read_matrix(path);
  SignatureCatalog cat;
  cat.names = m.col_labels;
  cat.motif_labels = m.row_labels;
  cat.profiles = m.values;
  std::set<std::string> seen;
  for (const auto& label : cat.motif_labels) {
    if (!seen.insert(label).second) throw ParseError(path + ": duplicate motif label '" + label + "'");
  }
  if ((cat.profiles.array() < 0.0).any()) throw ParseError(path + ": negative catalog entry");
  for (Index r = 0; r < cat.profiles.cols(); ++r) {
    const double total = cat.profiles.col(r).sum();
    if (std::abs(total - 1.0) > 1e-3) {
      throw ParseError(path + ": signature '" + cat.names[r] + "' sums to " + format_number(total) +
                       ", not 1");
    }
    cat.profiles.col(r) /= total;
  }
  return cat;
}

SignatureCatalog align_catalog(const SignatureCatalog& catalog,
                               const std::vector<std::string>& motif_labels) {
  if (catalog.motif_labels.size() != motif_labels.size()) {
    throw StructuralError("catalog and counts have different motif sets");
  }
  std::unordered_map<std::string, Index> where;
  for (std::size_t i = 0; i < catalog.motif_labels.size(); ++i) {
    where[catalog.motif_labels[i]] = static_cast<Index>(i);
  }
  SignatureCatalog out;
  out.names = catalog.names;
  out.motif_labels = motif_labels;
  out.profiles.resize(catalog.profiles.rows(), catalog.profiles.cols());
  for (std::size_t i = 0; i < motif_labels.size(); ++i) {
    const auto it = where.find(motif_labels[i]);
    if (it == where.end()) throw StructuralError("catalog lacks motif '" + motif_labels[i] + "'");
    out.profiles.row(static_cast<Index>(i)) = catalog.profiles.row(it->second);
  }
  return out;
}

std::string KeyValues::get_string(const std::string& key) {
  auto it = entries.find(key);
  if (it == entries.end()) throw ParseError(source + ": missing key '" + key + "'");
  it->second.used = true;
  return it->second.value;
}

double KeyValues::get_double(const std::string& key) {
  const std::string v = get_string(key);
  double out = 0.0;
  if (!parse_double(v, out)) {
    throw ParseError(source + ": key '" + key + "' expects a number, got '" + v + "'",
                     entries.at(key).line);
  }
  return out;
}

long long KeyValues::get_int(const std::string& key) {
  const std::string v = trim(get_string(key));
  long long out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ParseError(source + ": key '" + key + "' expects an integer, got '" + v + "'",
                     entries.at(key).line);
  }
  return out;
}

bool KeyValues::get_bool(const std::string& key) {
  const std::string v = trim(get_string(key));
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ParseError(source + ": key '" + key + "' expects true/false, got '" + v + "'",
                   entries.at(key).line);
}

std::vector<std::string> KeyValues::get_strings(const std::string& key) {
  std::vector<std::string> out;
  for (const auto& part : split(get_string(key), ',')) out.push_back(trim(part));
  return out;
}

std::vector<double> KeyValues::get_doubles(const std::string& key) {
  std::vector<double> out;
  for (const auto& part : get_strings(key)) {
    double v = 0.0;
    if (!parse_double(part, v)) {
      throw ParseError(source + ": key '" + key + "' expects numbers, got '" + part + "'",
                       entries.at(key).line);
    }
    out.push_back(v);
  }
  return out;
}

void KeyValues::reject_unused() const {
  for (const auto& [key, entry] : entries) {
    if (!entry.used) throw ParseError(source + ": unknown key '" + key + "'", entry.line);
  }
}

KeyValues parse_key_values(const std::string& text, const std::string& source) {
  KeyValues kv;
  kv.source = source;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(source + ": expected 'key = value'", line_no);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(source + ": empty key", line_no);
    if (!kv.entries.emplace(key, KeyValues::Entry{value, line_no, false}).second) {
      throw ParseError(source + ": duplicate key '" + key + "'", line_no);
    }
  }
  return kv;
}

KeyValues load_key_values(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_key_values(buf.str(), path);
}

void apply_fit_config(KeyValues& kv, FitConfig& cfg, InitOptions& init, int& checkpoint_interval) {
  if (kv.has("max_iterations")) cfg.max_iterations = static_cast<int>(kv.get_int("max_iterations"));
  if (kv.has("tolerance")) cfg.tolerance = kv.get_double("tolerance");
  if (kv.has("rank")) cfg.rank = kv.get_int("rank");
  if (kv.has("discovered_rank")) cfg.discovered_rank = kv.get_int("discovered_rank");
  if (kv.has("mode")) {
    const std::string mode = kv.get_string("mode");
    if (mode == "discovery") {
      cfg.mode = FitMode::discovery;
    } else if (mode == "recovery-discovery") {
      cfg.mode = FitMode::recovery_discovery;
    } else {
      throw ParseError(kv.source + ": mode must be discovery or recovery-discovery",
                       kv.entries.at("mode").line);
    }
  }
  if (kv.has("track_objective")) cfg.track_objective = kv.get_bool("track_objective");
  if (kv.has("seed")) cfg.seed = static_cast<std::uint64_t>(kv.get_int("seed"));
  if (kv.has("freeze_probit")) cfg.freeze_probit = kv.get_bool("freeze_probit");
  if (kv.has("threads")) cfg.threads = static_cast<int>(kv.get_int("threads"));
  if (kv.has("checkpoint_interval")) checkpoint_interval = static_cast<int>(kv.get_int("checkpoint_interval"));
  if (kv.has("quadrature.relative_tolerance")) {
    cfg.quadrature.relative_tolerance = kv.get_double("quadrature.relative_tolerance");
  }
  if (kv.has("quadrature.max_subdivisions")) {
    cfg.quadrature.max_subdivisions = static_cast<int>(kv.get_int("quadrature.max_subdivisions"));
  }
  if (kv.has("quadrature.truncation_nats")) {
    cfg.quadrature.truncation_nats = kv.get_double("quadrature.truncation_nats");
  }
  if (kv.has("init.pseudo_count_scale")) init.pseudo_count_scale = kv.get_double("init.pseudo_count_scale");
  if (kv.has("init.dedup_threshold")) init.dedup_threshold = kv.get_double("init.dedup_threshold");
  if (kv.has("nmf.max_iterations")) init.nmf.max_iterations = static_cast<int>(kv.get_int("nmf.max_iterations"));
  if (kv.has("nmf.tolerance")) init.nmf.tolerance = kv.get_double("nmf.tolerance");
}

void apply_hyperparameters(KeyValues& kv, const std::vector<StudyData>& data, Hyperparameters& hp) {
  if (kv.has("alpha_p")) {
    const std::vector<double> v = kv.get_doubles("alpha_p");
    if (v.size() == 1) {
      hp.alpha_p.setConstant(v[0]);
    } else if (static_cast<Index>(v.size()) == hp.alpha_p.size()) {
      hp.alpha_p = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Index>(v.size()));
    } else {
      throw ParseError(kv.source + ": alpha_p needs 1 or K values", kv.entries.at("alpha_p").line);
    }
  }
  if (kv.has("gamma1")) hp.gamma1 = kv.get_double("gamma1");
  if (kv.has("gamma2")) hp.gamma2 = kv.get_double("gamma2");
  if (kv.has("recovery_concentration")) {
    const std::vector<double> v = kv.get_doubles("recovery_concentration");
    if (v.size() == 1) {
      hp.recovery_concentration.setConstant(hp.recovered_count(), v[0]);
    } else if (static_cast<Index>(v.size()) == hp.recovered_count()) {
      hp.recovery_concentration = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Index>(v.size()));
    } else {
      throw ParseError(kv.source + ": recovery_concentration needs 1 or R_recov values",
                       kv.entries.at("recovery_concentration").line);
    }
  }
  struct Field {
    const char* key;
    double StudyPriors::*member;
  };
  const Field fields[] = {{"alpha_e1", &StudyPriors::alpha_e1},
                          {"alpha_e0", &StudyPriors::alpha_e0},
                          {"lambda_w", &StudyPriors::lambda_w},
                          {"a_w", &StudyPriors::a_w},
                          {"b_w", &StudyPriors::b_w}};
  for (const Field& f : fields) {
    if (kv.has(f.key)) {
      const double v = kv.get_double(f.key);
      for (StudyPriors& p : hp.studies) p.*f.member = v;
    }
    for (std::size_t s = 0; s < hp.studies.size(); ++s) {
      const std::string key = std::string(f.key) + "." + std::to_string(s + 1);
      if (kv.has(key)) hp.studies[s].*f.member = kv.get_double(key);
    }
  }
  if (kv.has("beta0")) {
    const double v = kv.get_double("beta0");
    for (StudyPriors& p : hp.studies) p.beta0.setConstant(v);
  }
  for (std::size_t s = 0; s < hp.studies.size(); ++s) {
    StudyPriors& p = hp.studies[s];
    for (Index r = 0; r < p.beta0.cols(); ++r) {
      const std::string key = "beta0." + std::to_string(s + 1) + "." + std::to_string(r + 1);
      if (!kv.has(key)) continue;
      const std::vector<double> v = kv.get_doubles(key);
      if (static_cast<Index>(v.size()) != data[s].covariate_count()) {
        throw ParseError(kv.source + ": " + key + " needs one value per covariate (intercept included)",
                         kv.entries.at(key).line);
      }
      p.beta0.col(r) = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Index>(v.size()));
    }
  }
}

ScenarioSpec parse_scenario(KeyValues& kv, const std::string& base_dir) {
  ScenarioSpec spec;
  spec.covariates = {CovariateSpec{}};
  if (kv.has("studies")) spec.studies = kv.get_int("studies");
  if (kv.has("motifs")) spec.motifs = kv.get_int("motifs");
  if (kv.has("signatures")) spec.signatures = kv.get_int("signatures");
  if (kv.has("subjects")) {
    spec.subjects.clear();
    for (double v : kv.get_doubles("subjects")) spec.subjects.push_back(static_cast<Index>(v));
    if (spec.subjects.size() == 1) spec.subjects.assign(static_cast<std::size_t>(spec.studies), spec.subjects[0]);
  } else {
    spec.subjects.assign(static_cast<std::size_t>(spec.studies), 100);
  }
  if (kv.has("concentration")) spec.concentration = kv.get_double("concentration");
  if (kv.has("exposure_shape")) spec.exposure_shape = kv.get_double("exposure_shape");
  if (kv.has("exposure_rate")) spec.exposure_rate = kv.get_double("exposure_rate");
  if (kv.has("weight")) spec.weight = kv.get_double("weight");
  if (kv.has("covariates")) {
    spec.covariates.clear();
    const int line = kv.entries.at("covariates").line;
    for (const std::string& item : kv.get_strings("covariates")) {
      CovariateSpec c;
      if (item == "intercept") {
        c.kind = CovariateSpec::Kind::intercept;
      } else if (item == "normal") {
        c.kind = CovariateSpec::Kind::normal;
      } else if (item.rfind("bernoulli:", 0) == 0) {
        c.kind = CovariateSpec::Kind::bernoulli;
        if (!parse_double(item.substr(10), c.probability)) {
          throw ParseError(kv.source + ": bad bernoulli probability in '" + item + "'", line);
        }
      } else {
        throw ParseError(kv.source + ": unknown covariate kind '" + item + "'", line);
      }
      spec.covariates.push_back(c);
    }
  }
  const std::string inclusion = kv.has("inclusion") ? kv.get_string("inclusion") : "sharing";
  if (inclusion == "sharing") {
    spec.inclusion = InclusionDesign::sharing;
    spec.sharing = Eigen::MatrixXi::Ones(spec.studies, spec.signatures);
    for (Index s = 0; s < spec.studies; ++s) {
      const std::string key = "sharing." + std::to_string(s + 1);
      if (!kv.has(key)) continue;
      const std::vector<double> v = kv.get_doubles(key);
      if (static_cast<Index>(v.size()) != spec.signatures) {
        throw ParseError(kv.source + ": " + key + " needs one 0/1 per signature", kv.entries.at(key).line);
      }
      for (Index r = 0; r < spec.signatures; ++r) spec.sharing(s, r) = static_cast<int>(v[r]);
    }
  } else if (inclusion == "probit") {
    spec.inclusion = InclusionDesign::probit;
    const Index q = static_cast<Index>(spec.covariates.size());
    spec.beta.assign(static_cast<std::size_t>(spec.studies), Eigen::MatrixXd::Zero(q, spec.signatures));
    for (Index s = 0; s < spec.studies; ++s) {
      for (Index r = 0; r < spec.signatures; ++r) {
        const std::string key = "beta." + std::to_string(s + 1) + "." + std::to_string(r + 1);
        if (!kv.has(key)) throw ParseError(kv.source + ": probit design needs key '" + key + "'");
        const std::vector<double> v = kv.get_doubles(key);
        if (static_cast<Index>(v.size()) != q) {
          throw ParseError(kv.source + ": " + key + " needs one value per covariate", kv.entries.at(key).line);
        }
        spec.beta[s].col(r) = Eigen::Map<const Eigen::VectorXd>(v.data(), q);
      }
    }
  } else {
    throw ParseError(kv.source + ": inclusion must be sharing or probit", kv.entries.at("inclusion").line);
  }
  if (kv.has("signatures_file")) {
    std::filesystem::path p = kv.get_string("signatures_file");
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    const LabeledMatrix m = read_matrix(p.string());
    spec.plug_in_signatures = m.values;
  }
  kv.reject_unused();
  spec.validate();
  return spec;
}

ScenarioSpec load_scenario(const std::string& path) {
  KeyValues kv = load_key_values(path);
  return parse_scenario(kv, std::filesystem::path(path).parent_path().string());
}

}  // namespace bapnmf
