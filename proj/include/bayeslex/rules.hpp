#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "bayeslex/corpus.hpp"
#include "bayeslex/rng.hpp"
#include "bayeslex/solver.hpp"

namespace bayeslex {

enum class Label { Class0, Class1, Tie };

struct Prediction {
  Label label = Label::Tie;
  double margin = 0.0;  // s0 - s1
};

inline Prediction make_prediction(double s0, double s1) {
  const double margin = s0 - s1;
  Prediction p;
  p.margin = margin;
  p.label = margin > 0.0 ? Label::Class0 : (margin < 0.0 ? Label::Class1 : Label::Tie);
  return p;
}

// log((1+gamma)/(1-gamma)); the per-word evidence weight.
inline double word_weight(double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw std::invalid_argument("word_weight: gamma must be in [0, 1)");
  return std::log1p(gamma) - std::log1p(-gamma);
}

inline Prediction count_rule(const DocumentCounts& doc, const LexiconPair& lexicon) {
  std::int64_t s0 = 0, s1 = 0;
  for (int w : lexicon.w0) {
    auto it = doc.counts.find(w);
    if (it != doc.counts.end()) s0 += it->second;
  }
  for (int w : lexicon.w1) {
    auto it = doc.counts.find(w);
    if (it != doc.counts.end()) s1 += it->second;
  }
  return make_prediction(static_cast<double>(s0), static_cast<double>(s1));
}

// Class-conditional word distribution: own-lexicon words boosted by (1+gamma),
// opposite-lexicon damped by (1-gamma), the rest at mu. Renormalized so the
// result is a proper simplex vector even off the equal-coverage constraint.
inline std::vector<double> theta_from_gamma(const std::vector<double>& mu,
                                            const LexiconPair& lexicon,
                                            const GammaVectors& gammas, int cls) {
  std::vector<double> theta = mu;
  const auto& own = cls == 0 ? lexicon.w0 : lexicon.w1;
  const auto& opp = cls == 0 ? lexicon.w1 : lexicon.w0;
  const auto& own_g = cls == 0 ? gammas.g0 : gammas.g1;
  const auto& opp_g = cls == 0 ? gammas.g1 : gammas.g0;
  for (std::size_t k = 0; k < own.size(); ++k)
    theta[static_cast<std::size_t>(own[k])] *= 1.0 + own_g[k];
  for (std::size_t k = 0; k < opp.size(); ++k)
    theta[static_cast<std::size_t>(opp[k])] *= 1.0 - opp_g[k];
  double total = 0.0;
  for (double t : theta) total += t;
  for (double& t : theta) t /= total;
  return theta;
}

inline std::vector<double> theta_from_gamma(const GammaModel& model, int cls) {
  return theta_from_gamma(model.mu, model.lexicon, model.gammas, cls);
}

// sum_i x_i log theta_i; the y-constant multinomial coefficient is dropped.
inline double multinomial_loglik(const DocumentCounts& doc, const std::vector<double>& theta) {
  double ll = 0.0;
  for (const auto& [word, count] : doc.counts) {
    const double t = theta[static_cast<std::size_t>(word)];
    if (!(t > 0.0)) throw std::runtime_error("multinomial_loglik: zero theta with nonzero count");
    ll += static_cast<double>(count) * std::log(t);
  }
  return ll;
}

inline Prediction weighted_rule(const DocumentCounts& doc, const GammaModel& model) {
  double s0 = 0.0, s1 = 0.0;
  const auto& lex = model.lexicon;
  for (std::size_t k = 0; k < lex.w0.size(); ++k) {
    auto it = doc.counts.find(lex.w0[k]);
    if (it != doc.counts.end())
      s0 += static_cast<double>(it->second) * word_weight(model.gammas.g0[k]);
  }
  for (std::size_t k = 0; k < lex.w1.size(); ++k) {
    auto it = doc.counts.find(lex.w1[k]);
    if (it != doc.counts.end())
      s1 += static_cast<double>(it->second) * word_weight(model.gammas.g1[k]);
  }
  return make_prediction(s0, s1);
}

struct DCMConfig {
  double concentration = 100.0;  // alpha = s * theta
};

// Dirichlet-compound multinomial log-likelihood, document-constant factor
// dropped. Converges to multinomial_loglik as s grows.
inline double dcm_loglik(const DocumentCounts& doc, const std::vector<double>& theta,
                         const DCMConfig& config) {
  const double s = config.concentration;
  if (!(s > 0.0)) throw std::invalid_argument("dcm_loglik: concentration must be > 0");
  double ll = std::lgamma(s) - std::lgamma(static_cast<double>(doc.total) + s);
  for (const auto& [word, count] : doc.counts) {
    const double alpha = s * theta[static_cast<std::size_t>(word)];
    ll += std::lgamma(static_cast<double>(count) + alpha) - std::lgamma(alpha);
  }
  if (!std::isfinite(ll)) throw std::runtime_error("dcm_loglik: non-finite result");
  return ll;
}

struct MixtureModel {
  std::vector<GammaModel> components;  // shared lexicon and vocabulary
  std::vector<double> proportions;     // sums to 1
};

struct MixtureLoglik {
  double loglik = 0.0;       // log sum_i pi_i f_i, via log-sum-exp
  double sum_of_logs = 0.0;  // sum_i log(pi_i f_i)
  double residual = 0.0;     // the telescoping remainder L(x,y)
};

// Stable mixture log-likelihood plus its telescoping decomposition
//   log sum pi_i f_i = sum_i log(pi_i f_i) + L(x,y).
inline MixtureLoglik mixture_loglik_and_residual(const DocumentCounts& doc,
                                                 const MixtureModel& mixture, int cls) {
  const std::size_t g = mixture.components.size();
  if (g == 0) throw std::invalid_argument("mixture_loglik: empty mixture");
  std::vector<double> terms(g);
  for (std::size_t i = 0; i < g; ++i) {
    if (!(mixture.proportions[i] > 0.0))
      throw std::runtime_error("mixture_loglik: zero proportion breaks the residual decomposition");
    terms[i] = std::log(mixture.proportions[i]) +
               multinomial_loglik(doc, theta_from_gamma(mixture.components[i], cls));
  }
  const double m = *std::max_element(terms.begin(), terms.end());
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - m);

  MixtureLoglik out;
  out.loglik = m + std::log(acc);
  for (double t : terms) out.sum_of_logs += t;
  out.residual = out.loglik - out.sum_of_logs;
  return out;
}

// Telescoping form of the mixture log-likelihood: fold the components back
// to front through log S_i = log(pi_i f_i) + log(1 + S_{i+1}/(pi_i f_i)).
// Kept as a verification oracle; the log-sum-exp path above is the
// production route.
inline double mixture_loglik_telescoping(const DocumentCounts& doc, const MixtureModel& mixture,
                                         int cls) {
  const std::size_t g = mixture.components.size();
  if (g == 0) throw std::invalid_argument("mixture_loglik_telescoping: empty mixture");
  std::vector<double> terms(g);
  for (std::size_t i = 0; i < g; ++i)
    terms[i] = std::log(mixture.proportions[i]) +
               multinomial_loglik(doc, theta_from_gamma(mixture.components[i], cls));
  double acc = terms[g - 1];
  for (std::size_t i = g - 1; i-- > 0;) acc = terms[i] + std::log1p(std::exp(acc - terms[i]));
  return acc;
}

// Summed per-component weighted scores; equals the sum of weighted_rule
// margins component by component.
inline Prediction aggregated_rule(const DocumentCounts& doc, const MixtureModel& mixture) {
  double s0 = 0.0, s1 = 0.0;
  for (const auto& component : mixture.components) {
    const auto& lex = component.lexicon;
    for (std::size_t k = 0; k < lex.w0.size(); ++k) {
      auto it = doc.counts.find(lex.w0[k]);
      if (it != doc.counts.end())
        s0 += static_cast<double>(it->second) * word_weight(component.gammas.g0[k]);
    }
    for (std::size_t k = 0; k < lex.w1.size(); ++k) {
      auto it = doc.counts.find(lex.w1[k]);
      if (it != doc.counts.end())
        s1 += static_cast<double>(it->second) * word_weight(component.gammas.g1[k]);
    }
  }
  return make_prediction(s0, s1);
}

// Mixture components from fitting gamma on seeded bootstrap resamples of the
// corpus; proportions uniform.
inline MixtureModel fit_mixture(const Corpus& corpus, const LexiconPair& lexicon, int g,
                                const SolverConfig& config, std::uint64_t seed) {
  if (g < 1) throw std::invalid_argument("fit_mixture: g must be >= 1");
  MixtureModel mixture;
  Rng rng(seed);
  const std::size_t t = corpus.size();
  for (int b = 0; b < g; ++b) {
    Corpus resample;
    resample.vocabulary = corpus.vocabulary;
    resample.documents.reserve(t);
    for (std::size_t k = 0; k < t; ++k)
      resample.documents.push_back(corpus.documents[rng.uniform_index(t)]);
    mixture.components.push_back(fit_gamma(make_moment_stats(resample, lexicon), config));
  }
  mixture.proportions.assign(static_cast<std::size_t>(g), 1.0 / g);
  return mixture;
}

}  // namespace bayeslex
