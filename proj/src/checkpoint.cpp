#include <fstream>
#include <sstream>

#include "bapnmf/errors.hpp"
#include "bapnmf/model.hpp"
#include "json.hpp"

namespace bapnmf {
namespace {

using nlohmann::json;

// Doubles are written with max_digits10 by the serializer, so every value
// survives the round trip bit-exactly.
json encode(const Eigen::MatrixXd& m) {
  json out;
  out["rows"] = m.rows();
  out["cols"] = m.cols();
  out["data"] = std::vector<double>(m.data(), m.data() + m.size());
  return out;
}

json encode(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::MatrixXd decode_matrix(const json& j) {
  const Index rows = j.at("rows").get<Index>();
  const Index cols = j.at("cols").get<Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Index>(data.size()) != rows * cols) {
    throw ParseError("checkpoint: matrix payload has the wrong length");
  }
  return Eigen::Map<const Eigen::MatrixXd>(data.data(), rows, cols);
}

Eigen::VectorXd decode_vector(const json& j) {
  const auto data = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(data.data(), static_cast<Index>(data.size()));
}

json encode(const WeightShapeFactor& f) {
  return {{"slope", f.slope},   {"lgamma_count", f.lgamma_count},
          {"log_norm", f.log_norm}, {"mean", f.mean},
          {"mean_log_gamma", f.mean_log_gamma}, {"log_c", f.log_c}};
}

WeightShapeFactor decode_weight_shape(const json& j) {
  WeightShapeFactor f;
  f.slope = j.at("slope").get<double>();
  f.lgamma_count = j.at("lgamma_count").get<double>();
  f.log_norm = j.at("log_norm").get<double>();
  f.mean = j.at("mean").get<double>();
  f.mean_log_gamma = j.at("mean_log_gamma").get<double>();
  f.log_c = j.at("log_c").get<double>();
  return f;
}

json encode(const StudyFactors& f) {
  json covs = json::array();
  for (const auto& c : f.beta_cov) covs.push_back(encode(c));
  return {{"theta_e", encode(f.theta_e)},
          {"theta_a", encode(f.theta_a)},
          {"a_star_location", encode(f.a_star_location)},
          {"a_star_mean", encode(f.a_star_mean)},
          {"beta_mean", encode(f.beta_mean)},
          {"beta_cov", covs},
          {"tau_shape", encode(f.tau_shape)},
          {"tau_rate", encode(f.tau_rate)},
          {"w_shape", encode(f.w_shape)},
          {"w_rate", encode(f.w_rate)},
          {"w_alpha", encode(f.w_alpha)},
          {"w_beta_shape", f.w_beta_shape},
          {"w_beta_rate", f.w_beta_rate},
          {"z_subject", encode(f.z_subject)},
          {"z_motif", encode(f.z_motif)}};
}

StudyFactors decode_study(const json& j) {
  StudyFactors f;
  f.theta_e = decode_matrix(j.at("theta_e"));
  f.theta_a = decode_matrix(j.at("theta_a"));
  f.a_star_location = decode_matrix(j.at("a_star_location"));
  f.a_star_mean = decode_matrix(j.at("a_star_mean"));
  f.beta_mean = decode_matrix(j.at("beta_mean"));
  for (const auto& c : j.at("beta_cov")) f.beta_cov.push_back(decode_matrix(c));
  f.tau_shape = decode_vector(j.at("tau_shape"));
  f.tau_rate = decode_vector(j.at("tau_rate"));
  f.w_shape = decode_vector(j.at("w_shape"));
  f.w_rate = decode_vector(j.at("w_rate"));
  f.w_alpha = decode_weight_shape(j.at("w_alpha"));
  f.w_beta_shape = j.at("w_beta_shape").get<double>();
  f.w_beta_rate = j.at("w_beta_rate").get<double>();
  f.z_subject = decode_matrix(j.at("z_subject"));
  f.z_motif = decode_matrix(j.at("z_motif"));
  return f;
}

json encode(const Hyperparameters& hp) {
  json studies = json::array();
  for (const StudyPriors& p : hp.studies) {
    studies.push_back({{"alpha_e1", p.alpha_e1},
                       {"alpha_e0", p.alpha_e0},
                       {"lambda_w", p.lambda_w},
                       {"a_w", p.a_w},
                       {"b_w", p.b_w},
                       {"beta0", encode(p.beta0)}});
  }
  return {{"alpha_p", encode(hp.alpha_p)},
          {"recovered_profiles", encode(hp.recovered_profiles)},
          {"recovery_concentration", encode(hp.recovery_concentration)},
          {"studies", studies},
          {"gamma1", hp.gamma1},
          {"gamma2", hp.gamma2}};
}

Hyperparameters decode_hyperparameters(const json& j) {
  Hyperparameters hp;
  hp.alpha_p = decode_vector(j.at("alpha_p"));
  hp.recovered_profiles = decode_matrix(j.at("recovered_profiles"));
  hp.recovery_concentration = decode_vector(j.at("recovery_concentration"));
  for (const auto& s : j.at("studies")) {
    StudyPriors p;
    p.alpha_e1 = s.at("alpha_e1").get<double>();
    p.alpha_e0 = s.at("alpha_e0").get<double>();
    p.lambda_w = s.at("lambda_w").get<double>();
    p.a_w = s.at("a_w").get<double>();
    p.b_w = s.at("b_w").get<double>();
    p.beta0 = decode_matrix(s.at("beta0"));
    hp.studies.push_back(p);
  }
  hp.gamma1 = j.at("gamma1").get<double>();
  hp.gamma2 = j.at("gamma2").get<double>();
  return hp;
}

}  // namespace

void save_checkpoint(const std::string& path, const VariationalState& state,
                     const Hyperparameters& hp) {
  json studies = json::array();
  for (const StudyFactors& f : state.studies) studies.push_back(encode(f));
  const json doc = {{"iteration", state.iteration},
                    {"seed", state.seed},
                    {"theta_p", encode(state.theta_p)},
                    {"z_motif", encode(state.z_motif)},
                    {"studies", studies},
                    {"hyperparameters", encode(hp)}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint " + path);
  out << kCheckpointHeader << '\n' << doc.dump(1) << '\n';
  if (!out) throw DataError("failed writing checkpoint " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path);
  std::string header;
  std::getline(in, header);
  if (header != kCheckpointHeader) {
    throw ParseError("checkpoint " + path + ": unknown header '" + header + "'", 1);
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError("checkpoint " + path + ": " + e.what());
  }
  try {
    Checkpoint out;
    out.state.iteration = doc.at("iteration").get<int>();
    out.state.seed = doc.at("seed").get<std::uint64_t>();
    out.state.theta_p = decode_matrix(doc.at("theta_p"));
    out.state.z_motif = decode_matrix(doc.at("z_motif"));
    for (const auto& s : doc.at("studies")) out.state.studies.push_back(decode_study(s));
    out.hp = decode_hyperparameters(doc.at("hyperparameters"));
    return out;
  } catch (const json::exception& e) {
    throw ParseError("checkpoint " + path + ": " + e.what());
  }
}

}  // namespace bapnmf
