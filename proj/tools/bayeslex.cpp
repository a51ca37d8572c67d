// bayeslex: unsupervised lexicon classification from the command line.
//
// Subcommands: fit, predict, eval, sample, inspect.
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bayeslex/corpus.hpp"
#include "bayeslex/dirichlet.hpp"
#include "bayeslex/metrics.hpp"
#include "bayeslex/model_io.hpp"
#include "bayeslex/moments.hpp"
#include "bayeslex/rules.hpp"
#include "bayeslex/solver.hpp"
#include "bayeslex/synthetic.hpp"

namespace {

using namespace bayeslex;

CorpusFormat parse_format(const std::string& name) {
  if (name == "raw") return CorpusFormat::RawTextJsonl;
  if (name == "precounted") return CorpusFormat::PrecountedJsonl;
  throw CLI::ValidationError("--format must be raw or precounted");
}

struct FitOptions {
  std::string corpus_path;
  std::string format = "raw";
  std::string lexicon_pos;
  std::string lexicon_neg;
  std::string rule = "weighted";
  std::string model_out;
  int components = 5;
  double dcm_s = 100.0;
  double alpha0 = 1.0;
  double beta = 0.1;
  int truncation = 20;
  int gibbs_iters = 200;
  int max_iters = 5000;
  double tol = 1e-8;
  double penalty = -1.0;  // auto
  int tie_default = 0;
  std::optional<std::uint64_t> seed;
};

int run_fit(const FitOptions& opt) {
  const RuleKind rule = rule_from_name(opt.rule);
  if ((rule == RuleKind::Mixture || rule == RuleKind::Dp) && !opt.seed) {
    std::cerr << "error: --seed is required for rule " << opt.rule << "\n";
    return 1;
  }

  Corpus corpus = load_corpus(opt.corpus_path, parse_format(opt.format));
  LexiconPair lexicon = load_lexicon(opt.lexicon_pos, opt.lexicon_neg, corpus.vocabulary);
  for (const auto& [token, reason] : lexicon.dropped)
    std::cerr << "note: dropped lexicon token \"" << token << "\" (" << reason << ")\n";

  SolverConfig solver;
  solver.max_iters = opt.max_iters;
  solver.tol = opt.tol;
  solver.penalty = opt.penalty;

  FittedModel model;
  model.rule = rule;
  model.tie_default = opt.tie_default;
  model.vocabulary = corpus.vocabulary;
  model.lexicon = lexicon;

  if (rule != RuleKind::Count) model.mu = estimate_mu(corpus);

  switch (rule) {
    case RuleKind::Count:
      break;
    case RuleKind::Weighted:
    case RuleKind::Dcm: {
      auto stats = make_moment_stats(corpus, lexicon);
      model.mixture.components = {fit_gamma(stats, solver)};
      model.mixture.proportions = {1.0};
      model.dcm.concentration = opt.dcm_s;
      break;
    }
    case RuleKind::Mixture:
      model.mixture = fit_mixture(corpus, lexicon, opt.components, solver, *opt.seed);
      break;
    case RuleKind::Dp: {
      Rng rng(*opt.seed);
      model.dp = fit_dp_mixture(corpus, lexicon, opt.alpha0, opt.beta, opt.truncation,
                                opt.gibbs_iters, rng, solver);
      break;
    }
  }

  save_model(model, opt.model_out);
  std::cerr << "wrote " << opt.model_out << "\n";
  return 0;
}

struct PredictOptions {
  std::string model_path;
  std::string corpus_path;
  std::string format = "raw";
  std::string out_path;
  std::optional<int> tie_default;
};

int run_predict(const PredictOptions& opt) {
  FittedModel model = load_model(opt.model_path);
  const int tie_default = opt.tie_default.value_or(model.tie_default);

  Corpus corpus = load_corpus(opt.corpus_path, parse_format(opt.format), model.vocabulary);

  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!opt.out_path.empty()) {
    file.open(opt.out_path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot write predictions: " + opt.out_path);
    out = &file;
  }

  std::int64_t ties = 0;
  for (const auto& doc : corpus.documents) {
    const Prediction p = predict(model, doc);
    const bool tie = p.label == Label::Tie;
    if (tie) ++ties;
    const int label = tie ? tie_default : (p.label == Label::Class0 ? 0 : 1);
    nlohmann::json j{{"id", doc.id}, {"label", label}, {"margin", p.margin}, {"tie", tie}};
    *out << j.dump() << "\n";
  }
  std::cerr << corpus.size() << " documents, " << ties << " ties\n";
  return 0;
}

struct EvalOptions {
  std::string pred_path;
  std::string truth_path;
  std::string out_path;
  std::string tie = "0";
};

int run_eval(const EvalOptions& opt) {
  std::ifstream pred_in(opt.pred_path);
  if (!pred_in) throw std::runtime_error("cannot open predictions: " + opt.pred_path);
  std::ifstream truth_in(opt.truth_path);
  if (!truth_in) throw std::runtime_error("cannot open truth file: " + opt.truth_path);

  std::unordered_map<std::string, int> truth_by_id;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(truth_in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line);
    truth_by_id[j.at("id").get<std::string>()] = j.at("label").get<int>();
  }

  TiePolicy policy;
  if (opt.tie == "0")
    policy = TiePolicy::AsClass0;
  else if (opt.tie == "1")
    policy = TiePolicy::AsClass1;
  else if (opt.tie == "exclude")
    policy = TiePolicy::Exclude;
  else
    throw CLI::ValidationError("--tie must be 0, 1 or exclude");

  std::vector<Prediction> predictions;
  std::vector<int> truth;
  line_no = 0;
  while (std::getline(pred_in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line);
    const auto id = j.at("id").get<std::string>();
    auto it = truth_by_id.find(id);
    if (it == truth_by_id.end())
      throw std::runtime_error("prediction id \"" + id + "\" missing from truth file");
    Prediction p;
    p.margin = j.at("margin").get<double>();
    if (j.at("tie").get<bool>())
      p.label = Label::Tie;
    else
      p.label = j.at("label").get<int>() == 0 ? Label::Class0 : Label::Class1;
    predictions.push_back(p);
    truth.push_back(it->second);
  }

  EvalReport report = evaluate(predictions, truth, policy);
  nlohmann::json j{
      {"accuracy", report.accuracy},
      {"macro_f1", report.macro_f1},
      {"confusion",
       {{report.confusion[0][0], report.confusion[0][1]},
        {report.confusion[1][0], report.confusion[1][1]}}},
      {"tie_count", report.tie_count},
      {"evaluated", report.evaluated},
  };
  if (opt.out_path.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::ofstream out(opt.out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write report: " + opt.out_path);
    out << j.dump(2) << "\n";
  }
  return 0;
}

struct SampleOptions {
  std::string out_path;
  std::string truth_out;
  std::string lexicon0_out;
  std::string lexicon1_out;
  int docs = 1000;
  int doc_len = 50;
  int vocab = 50;
  int lex_size = 5;
  double gamma = 0.5;
  std::uint64_t seed = 0;
};

int run_sample(const SampleOptions& opt) {
  if (opt.vocab < 2 * opt.lex_size)
    throw CLI::ValidationError("--vocab must be at least twice --lex-size");

  GenerativeSpec spec;
  spec.mu.assign(static_cast<std::size_t>(opt.vocab), 1.0 / opt.vocab);
  for (int i = 0; i < opt.lex_size; ++i) {
    spec.lexicon.w0.push_back(i);
    spec.lexicon.w1.push_back(opt.lex_size + i);
  }
  spec.gammas.g0.assign(static_cast<std::size_t>(opt.lex_size), opt.gamma);
  spec.gammas.g1.assign(static_cast<std::size_t>(opt.lex_size), opt.gamma);
  spec.num_docs = opt.docs;
  spec.doc_lengths = {opt.doc_len};
  spec.seed = opt.seed;

  Rng rng(opt.seed);
  auto sampled = sample_corpus(spec, rng);

  std::ofstream out(opt.out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write corpus: " + opt.out_path);
  for (const auto& doc : sampled.corpus.documents) {
    nlohmann::json counts = nlohmann::json::object();
    for (const auto& [w, c] : doc.counts) counts[sampled.corpus.vocabulary.token(w)] = c;
    out << nlohmann::json{{"id", doc.id}, {"counts", counts}}.dump() << "\n";
  }

  if (!opt.truth_out.empty()) {
    std::ofstream truth(opt.truth_out, std::ios::binary);
    if (!truth) throw std::runtime_error("cannot write truth file: " + opt.truth_out);
    for (std::size_t t = 0; t < sampled.corpus.size(); ++t)
      truth << nlohmann::json{{"id", sampled.corpus.documents[t].id},
                              {"label", sampled.labels[t]}}
                   .dump()
            << "\n";
  }

  auto write_lexicon = [&](const std::string& path, const std::vector<int>& words) {
    if (path.empty()) return;
    std::ofstream lex(path, std::ios::binary);
    if (!lex) throw std::runtime_error("cannot write lexicon: " + path);
    for (int w : words) lex << sampled.corpus.vocabulary.token(w) << "\n";
  };
  write_lexicon(opt.lexicon0_out, spec.lexicon.w0);
  write_lexicon(opt.lexicon1_out, spec.lexicon.w1);

  std::cerr << "wrote " << opt.out_path << " (" << opt.docs << " docs)\n";
  return 0;
}

struct InspectOptions {
  std::string model_path;
  int top = 10;
};

int run_inspect(const InspectOptions& opt) {
  FittedModel model = load_model(opt.model_path);
  if (model.rule == RuleKind::Count) {
    std::cout << "count rule: all lexicon words weighted 1\n";
    return 0;
  }

  const auto& components =
      model.rule == RuleKind::Dp ? model.dp.component_gammas : model.mixture.components;
  if (components.empty()) throw std::runtime_error("model has no fitted components");

  auto print_side = [&](const char* name, const std::vector<int>& words, bool side0) {
    std::vector<std::pair<double, int>> weighted;
    for (std::size_t k = 0; k < words.size(); ++k) {
      double w = 0.0;
      for (const auto& c : components)
        w += word_weight(side0 ? c.gammas.g0[k] : c.gammas.g1[k]);
      weighted.emplace_back(w / static_cast<double>(components.size()), words[k]);
    }
    std::sort(weighted.begin(), weighted.end(), std::greater<>());
    std::cout << name << ":\n";
    const auto limit = std::min<std::size_t>(weighted.size(), static_cast<std::size_t>(opt.top));
    for (std::size_t k = 0; k < limit; ++k)
      std::cout << "  " << model.vocabulary.token(weighted[k].second) << "\t"
                << weighted[k].first << "\n";
  };
  print_side("w0 (class 0)", model.lexicon.w0, true);
  print_side("w1 (class 1)", model.lexicon.w1, false);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"unsupervised lexicon classification (BayesLex) toolkit"};
  app.require_subcommand(1);

  FitOptions fit;
  auto* fit_cmd = app.add_subcommand("fit", "fit a model on a corpus");
  fit_cmd->add_option("--corpus", fit.corpus_path, "corpus JSONL")->required();
  fit_cmd->add_option("--format", fit.format, "raw | precounted");
  fit_cmd->add_option("--lexicon-pos", fit.lexicon_pos, "class-0 lexicon file")->required();
  fit_cmd->add_option("--lexicon-neg", fit.lexicon_neg, "class-1 lexicon file")->required();
  fit_cmd->add_option("--rule", fit.rule, "count | weighted | dcm | mixture | dp");
  fit_cmd->add_option("--model-out", fit.model_out, "output model file")->required();
  fit_cmd->add_option("--components", fit.components, "mixture component count");
  fit_cmd->add_option("--dcm-s", fit.dcm_s, "DCM concentration");
  fit_cmd->add_option("--alpha0", fit.alpha0, "DP concentration");
  fit_cmd->add_option("--beta", fit.beta, "DP base-measure concentration");
  fit_cmd->add_option("--truncation", fit.truncation, "stick-breaking truncation");
  fit_cmd->add_option("--gibbs-iters", fit.gibbs_iters, "Gibbs sweeps");
  fit_cmd->add_option("--max-iters", fit.max_iters, "solver iteration cap");
  fit_cmd->add_option("--tol", fit.tol, "solver relative tolerance");
  fit_cmd->add_option("--penalty", fit.penalty, "constraint penalty weight (<0 = auto)");
  fit_cmd->add_option("--tie", fit.tie_default, "default class for ties (0 or 1)");
  std::uint64_t fit_seed = 0;
  auto* fit_seed_opt = fit_cmd->add_option("--seed", fit_seed, "seed (required for mixture/dp)");

  PredictOptions pred;
  auto* pred_cmd = app.add_subcommand("predict", "classify a corpus");
  pred_cmd->add_option("--model", pred.model_path, "model file")->required();
  pred_cmd->add_option("--corpus", pred.corpus_path, "corpus JSONL")->required();
  pred_cmd->add_option("--format", pred.format, "raw | precounted");
  pred_cmd->add_option("--out", pred.out_path, "predictions JSONL (default stdout)");
  int pred_tie = 0;
  auto* pred_tie_opt = pred_cmd->add_option("--tie", pred_tie, "tie class override (0 or 1)");

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "score predictions against truth labels");
  eval_cmd->add_option("--pred", eval.pred_path, "predictions JSONL")->required();
  eval_cmd->add_option("--truth", eval.truth_path, "truth JSONL {id, label}")->required();
  eval_cmd->add_option("--out", eval.out_path, "report JSON (default stdout)");
  eval_cmd->add_option("--tie", eval.tie, "0 | 1 | exclude");

  SampleOptions sample;
  auto* sample_cmd = app.add_subcommand("sample", "generate a synthetic corpus");
  sample_cmd->add_option("--out", sample.out_path, "corpus JSONL (precounted)")->required();
  sample_cmd->add_option("--truth-out", sample.truth_out, "truth JSONL");
  sample_cmd->add_option("--lexicon0-out", sample.lexicon0_out, "class-0 lexicon file");
  sample_cmd->add_option("--lexicon1-out", sample.lexicon1_out, "class-1 lexicon file");
  sample_cmd->add_option("--docs", sample.docs, "document count");
  sample_cmd->add_option("--doc-len", sample.doc_len, "tokens per document");
  sample_cmd->add_option("--vocab", sample.vocab, "vocabulary size");
  sample_cmd->add_option("--lex-size", sample.lex_size, "lexicon words per side");
  sample_cmd->add_option("--gamma", sample.gamma, "true predictiveness");
  sample_cmd->add_option("--seed", sample.seed, "seed")->required();

  InspectOptions inspect;
  auto* inspect_cmd = app.add_subcommand("inspect", "print top-weighted lexicon words");
  inspect_cmd->add_option("--model", inspect.model_path, "model file")->required();
  inspect_cmd->add_option("--top", inspect.top, "words per side");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << e.what() << "\n" << app.help();
    return 1;
  }

  try {
    if (fit_cmd->parsed()) {
      if (*fit_seed_opt) fit.seed = fit_seed;
      return run_fit(fit);
    }
    if (pred_cmd->parsed()) {
      if (*pred_tie_opt) pred.tie_default = pred_tie;
      return run_predict(pred);
    }
    if (eval_cmd->parsed()) return run_eval(eval);
    if (sample_cmd->parsed()) return run_sample(sample);
    if (inspect_cmd->parsed()) return run_inspect(inspect);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
