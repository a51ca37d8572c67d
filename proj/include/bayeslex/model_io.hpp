#pragma once

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "bayeslex/corpus.hpp"
#include "bayeslex/dirichlet.hpp"
#include "bayeslex/rules.hpp"

namespace bayeslex {

enum class RuleKind { Count, Weighted, Dcm, Mixture, Dp };

inline std::string rule_name(RuleKind r) {
  switch (r) {
    case RuleKind::Count: return "count";
    case RuleKind::Weighted: return "weighted";
    case RuleKind::Dcm: return "dcm";
    case RuleKind::Mixture: return "mixture";
    case RuleKind::Dp: return "dp";
  }
  throw std::logic_error("rule_name: bad enum");
}

inline RuleKind rule_from_name(const std::string& name) {
  if (name == "count") return RuleKind::Count;
  if (name == "weighted") return RuleKind::Weighted;
  if (name == "dcm") return RuleKind::Dcm;
  if (name == "mixture") return RuleKind::Mixture;
  if (name == "dp") return RuleKind::Dp;
  throw std::runtime_error("unknown rule \"" + name + "\"");
}

// Everything a predict run needs, and exactly what the model file stores.
struct FittedModel {
  RuleKind rule = RuleKind::Count;
  int tie_default = 0;
  Vocabulary vocabulary;
  LexiconPair lexicon;
  std::vector<double> mu;    // global base rates (empty for count rule)
  MixtureModel mixture;      // 1 component for weighted/dcm, g for mixture
  DCMConfig dcm;
  DPMixtureModel dp;         // populated when rule == Dp
};

inline Prediction predict(const FittedModel& model, const DocumentCounts& doc) {
  switch (model.rule) {
    case RuleKind::Count:
      return count_rule(doc, model.lexicon);
    case RuleKind::Weighted:
      return weighted_rule(doc, model.mixture.components.at(0));
    case RuleKind::Dcm: {
      const auto& component = model.mixture.components.at(0);
      const double ll0 = dcm_loglik(doc, theta_from_gamma(component, 0), model.dcm);
      const double ll1 = dcm_loglik(doc, theta_from_gamma(component, 1), model.dcm);
      return make_prediction(ll0, ll1);
    }
    case RuleKind::Mixture:
      return aggregated_rule(doc, model.mixture);
    case RuleKind::Dp:
      return dp_predictive_rule(doc, model.dp);
  }
  throw std::logic_error("predict: bad rule enum");
}

namespace detail {

inline nlohmann::json gamma_model_to_json(const GammaModel& m) {
  return nlohmann::json{
      {"gamma0", m.gammas.g0},
      {"gamma1", m.gammas.g1},
      {"mu", m.mu},
      {"objective", m.diagnostics.final_objective},
      {"iterations", m.diagnostics.iterations},
      {"constraint_residual", m.diagnostics.constraint_residual},
  };
}

inline GammaModel gamma_model_from_json(const nlohmann::json& j, const LexiconPair& lexicon) {
  GammaModel m;
  m.gammas.g0 = j.at("gamma0").get<std::vector<double>>();
  m.gammas.g1 = j.at("gamma1").get<std::vector<double>>();
  m.mu = j.at("mu").get<std::vector<double>>();
  m.lexicon = lexicon;
  m.diagnostics.final_objective = j.at("objective").get<double>();
  m.diagnostics.iterations = j.at("iterations").get<int>();
  m.diagnostics.constraint_residual = j.at("constraint_residual").get<double>();
  if (m.gammas.g0.size() != lexicon.w0.size() || m.gammas.g1.size() != lexicon.w1.size())
    throw std::runtime_error("model file: gamma lengths do not match lexicon");
  return m;
}

}  // namespace detail

inline nlohmann::json model_to_json(const FittedModel& model) {
  nlohmann::json j;
  j["version"] = 1;
  j["rule"] = rule_name(model.rule);
  j["tie_default"] = model.tie_default;
  j["vocabulary"] = model.vocabulary.tokens();

  std::vector<std::string> w0_tokens, w1_tokens;
  for (int id : model.lexicon.w0) w0_tokens.push_back(model.vocabulary.token(id));
  for (int id : model.lexicon.w1) w1_tokens.push_back(model.vocabulary.token(id));
  j["lexicon"] = {{"w0", w0_tokens}, {"w1", w1_tokens}};
  j["mu"] = model.mu;

  j["pi"] = model.mixture.proportions;
  nlohmann::json comps = nlohmann::json::array();
  for (const auto& c : model.mixture.components) comps.push_back(detail::gamma_model_to_json(c));
  j["components"] = comps;

  if (model.rule == RuleKind::Dcm) j["dcm_s"] = model.dcm.concentration;
  if (model.rule == RuleKind::Dp) {
    nlohmann::json dp;
    dp["alpha0"] = model.dp.alpha0;
    dp["beta"] = model.dp.base_concentration;
    dp["truncation"] = model.dp.weights.truncation;
    dp["pi"] = model.dp.weights.pi;
    std::vector<int> occ(model.dp.occupied.begin(), model.dp.occupied.end());
    dp["occupied"] = occ;
    dp["phi"] = model.dp.components;
    dp["assignments"] = model.dp.assignments;
    nlohmann::json dp_comps = nlohmann::json::array();
    for (const auto& c : model.dp.component_gammas)
      dp_comps.push_back(detail::gamma_model_to_json(c));
    dp["component_gammas"] = dp_comps;
    j["dp"] = dp;
  }
  return j;
}

inline FittedModel model_from_json(const nlohmann::json& j) {
  if (!j.contains("version") || !j["version"].is_number_integer())
    throw std::runtime_error("model file: missing version");
  if (j["version"].get<int>() != 1)
    throw std::runtime_error("model file: unsupported version " + j["version"].dump());

  FittedModel model;
  model.rule = rule_from_name(j.at("rule").get<std::string>());
  model.tie_default = j.at("tie_default").get<int>();
  for (const auto& tok : j.at("vocabulary")) model.vocabulary.add_or_get(tok.get<std::string>());

  const auto w0_tokens = j.at("lexicon").at("w0").get<std::vector<std::string>>();
  const auto w1_tokens = j.at("lexicon").at("w1").get<std::vector<std::string>>();
  model.lexicon = make_lexicon(w0_tokens, w1_tokens, model.vocabulary);
  if (!model.lexicon.dropped.empty())
    throw std::runtime_error("model file: lexicon token missing from stored vocabulary");
  model.mu = j.at("mu").get<std::vector<double>>();

  model.mixture.proportions = j.at("pi").get<std::vector<double>>();
  for (const auto& cj : j.at("components"))
    model.mixture.components.push_back(detail::gamma_model_from_json(cj, model.lexicon));

  if (model.rule == RuleKind::Dcm) model.dcm.concentration = j.at("dcm_s").get<double>();
  if (model.rule == RuleKind::Dp) {
    const auto& dp = j.at("dp");
    model.dp.alpha0 = dp.at("alpha0").get<double>();
    model.dp.base_concentration = dp.at("beta").get<double>();
    model.dp.weights.truncation = dp.at("truncation").get<int>();
    model.dp.weights.pi = dp.at("pi").get<std::vector<double>>();
    const auto occ = dp.at("occupied").get<std::vector<int>>();
    model.dp.occupied.assign(occ.begin(), occ.end());
    model.dp.components = dp.at("phi").get<std::vector<std::vector<double>>>();
    model.dp.assignments = dp.at("assignments").get<std::vector<int>>();
    for (const auto& cj : dp.at("component_gammas"))
      model.dp.component_gammas.push_back(detail::gamma_model_from_json(cj, model.lexicon));
  }
  return model;
}

inline std::string model_to_string(const FittedModel& model) {
  return model_to_json(model).dump(2) + "\n";
}

inline void save_model(const FittedModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out << model_to_string(model);
}

inline FittedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("model file " + path + ": invalid JSON: " + e.what());
  }
  return model_from_json(j);
}

}  // namespace bayeslex
