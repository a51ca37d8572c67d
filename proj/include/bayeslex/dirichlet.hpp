#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "bayeslex/corpus.hpp"
#include "bayeslex/rng.hpp"
#include "bayeslex/rules.hpp"

namespace bayeslex {

struct DirichletParams {
  std::vector<double> alpha;
  double alpha0 = 0.0;  // sum of alpha

  static DirichletParams make(std::vector<double> a) {
    for (double x : a)
      if (!(x > 0.0)) throw std::invalid_argument("DirichletParams: alpha entries must be > 0");
    DirichletParams p;
    p.alpha0 = std::accumulate(a.begin(), a.end(), 0.0);
    p.alpha = std::move(a);
    return p;
  }
};

inline double dirichlet_log_density(const std::vector<double>& mu, const DirichletParams& params) {
  if (mu.size() != params.alpha.size())
    throw std::invalid_argument("dirichlet_log_density: dimension mismatch");
  double sum = 0.0;
  for (double m : mu) {
    if (!(m > 0.0 && m < 1.0))
      throw std::invalid_argument("dirichlet_log_density: mu must be on the open simplex");
    sum += m;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("dirichlet_log_density: mu must sum to 1");

  double ll = std::lgamma(params.alpha0);
  for (std::size_t k = 0; k < mu.size(); ++k) {
    ll -= std::lgamma(params.alpha[k]);
    ll += (params.alpha[k] - 1.0) * std::log(mu[k]);
  }
  return ll;
}

// Normalized gamma variates.
inline std::vector<double> sample_dirichlet(const DirichletParams& params, Rng& rng) {
  std::vector<double> draw(params.alpha.size());
  double total = 0.0;
  for (std::size_t k = 0; k < draw.size(); ++k) {
    draw[k] = rng.gamma(params.alpha[k]);
    total += draw[k];
  }
  for (double& x : draw) x /= total;
  return draw;
}

struct StickWeights {
  std::vector<double> pi;  // length truncation, sums to exactly 1
  int truncation = 0;
};

namespace detail {

// Set the final weight so the left-to-right sum is exactly 1.0.
inline void close_stick_remainder(std::vector<double>& pi) {
  const std::size_t n = pi.size();
  if (n == 1) {
    pi[0] = 1.0;
    return;
  }
  // volatile accumulators pin strict left-to-right summation; the compiler
  // otherwise vectorizes these reductions and the invariant we maintain is
  // that the plain sequential sum equals 1.0
  const auto prefix_sum = [&pi, n] {
    volatile double s = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) s = s + pi[k];
    return static_cast<double>(s);
  };
  // rounding can push the prefix past 1.0; shave ulps off the largest stick
  // until the last stick has nonnegative room
  double prefix = prefix_sum();
  while (prefix > 1.0) {
    const auto big = std::max_element(pi.begin(), pi.end() - 1);
    *big = std::nextafter(*big, 0.0);
    prefix = prefix_sum();
  }
  // the final addition has no downstream rounding, so single-ulp moves of the
  // last stick step through every representable total and cannot skip 1.0
  double last = std::max(0.0, 1.0 - prefix);
  const auto closed = [prefix](double l) {
    volatile double s = prefix;
    s = s + l;
    return static_cast<double>(s);
  };
  while (closed(last) > 1.0 && last > 0.0) last = std::nextafter(last, 0.0);
  while (closed(last) < 1.0) last = std::nextafter(last, 2.0);
  pi[n - 1] = last;
}

}  // namespace detail

// Truncated GEM draw: beta fractions Beta(1, alpha0) for the first
// truncation-1 sticks; the last stick absorbs the remaining mass.
inline StickWeights sample_gem(double alpha0, int truncation, Rng& rng) {
  if (truncation < 1) throw std::invalid_argument("sample_gem: truncation must be >= 1");
  StickWeights w;
  w.truncation = truncation;
  w.pi.resize(static_cast<std::size_t>(truncation));
  double remaining = 1.0;
  for (int k = 0; k + 1 < truncation; ++k) {
    const double frac = rng.beta(1.0, alpha0);
    w.pi[static_cast<std::size_t>(k)] = frac * remaining;
    remaining -= w.pi[static_cast<std::size_t>(k)];
  }
  w.pi[static_cast<std::size_t>(truncation - 1)] = remaining;
  detail::close_stick_remainder(w.pi);
  return w;
}

struct DPMixtureModel {
  StickWeights weights;
  std::vector<std::vector<double>> components;  // phi_k on the V-simplex
  std::vector<int> assignments;                 // per document
  std::vector<GammaModel> component_gammas;     // indexed like components
  std::vector<char> occupied;
  double base_concentration = 0.1;  // symmetric Dirichlet(beta) base measure
  double alpha0 = 1.0;
};

namespace detail {

// Collapsed predictive log-probability of a document under a component with
// accumulated counts m (total mass m_total) and Dirichlet(beta) smoothing;
// document-constant multinomial coefficient dropped.
inline double collapsed_doc_logprob(const DocumentCounts& doc, const std::vector<double>& m,
                                    double m_total, double beta, int v) {
  const double base = static_cast<double>(v) * beta + m_total;
  double ll = std::lgamma(base) - std::lgamma(base + static_cast<double>(doc.total));
  for (const auto& [word, count] : doc.counts) {
    const double a = beta + m[static_cast<std::size_t>(word)];
    ll += std::lgamma(a + static_cast<double>(count)) - std::lgamma(a);
  }
  return ll;
}

}  // namespace detail

// Joint collapsed data log-likelihood given an assignment; invariant under
// relabeling of components.
inline double dp_assignment_loglik(const Corpus& corpus, const std::vector<int>& assignments,
                                   double beta, int truncation) {
  const int v = corpus.vocabulary.size();
  std::vector<std::vector<double>> m(static_cast<std::size_t>(truncation),
                                     std::vector<double>(static_cast<std::size_t>(v), 0.0));
  std::vector<double> m_total(static_cast<std::size_t>(truncation), 0.0);
  double ll = 0.0;
  for (std::size_t t = 0; t < corpus.size(); ++t) {
    const auto k = static_cast<std::size_t>(assignments[t]);
    const auto& doc = corpus.documents[t];
    ll += detail::collapsed_doc_logprob(doc, m[k], m_total[k], beta, v);
    for (const auto& [word, count] : doc.counts)
      m[k][static_cast<std::size_t>(word)] += static_cast<double>(count);
    m_total[k] += static_cast<double>(doc.total);
  }
  return ll;
}

// Truncated DP mixture over documents: component parameters are collapsed
// out (conjugate Dirichlet(beta) base), stick weights are instantiated from
// their Beta posteriors once per sweep, and document assignments are
// resampled sequentially. After the final sweep each sufficiently occupied
// component gets its own moment-fitted GammaModel; small components inherit
// the global fit.
inline DPMixtureModel fit_dp_mixture(const Corpus& corpus, const LexiconPair& lexicon,
                                     double alpha0, double beta, int truncation, int iters,
                                     Rng& rng, const SolverConfig& solver_config = {}) {
  if (corpus.documents.empty()) throw std::invalid_argument("fit_dp_mixture: empty corpus");
  if (truncation < 1) throw std::invalid_argument("fit_dp_mixture: truncation must be >= 1");
  if (iters < 1) throw std::invalid_argument("fit_dp_mixture: iters must be >= 1");

  const int v = corpus.vocabulary.size();
  const std::size_t t_docs = corpus.size();
  const auto kk = static_cast<std::size_t>(truncation);

  std::vector<std::vector<double>> m(kk, std::vector<double>(static_cast<std::size_t>(v), 0.0));
  std::vector<double> m_total(kk, 0.0);
  std::vector<int> n_docs(kk, 0);
  std::vector<int> z(t_docs);

  auto add_doc = [&](std::size_t t, int k, int sign) {
    const auto& doc = corpus.documents[t];
    auto& mk = m[static_cast<std::size_t>(k)];
    for (const auto& [word, count] : doc.counts)
      mk[static_cast<std::size_t>(word)] += sign * static_cast<double>(count);
    m_total[static_cast<std::size_t>(k)] += sign * static_cast<double>(doc.total);
    n_docs[static_cast<std::size_t>(k)] += sign;
  };

  for (std::size_t t = 0; t < t_docs; ++t) {
    z[t] = static_cast<int>(rng.uniform_index(kk));
    add_doc(t, z[t], +1);
  }

  std::vector<double> log_pi(kk, 0.0);
  std::vector<double> logp(kk, 0.0);
  for (int sweep = 0; sweep < iters; ++sweep) {
    // Sticks from their conditional Beta(1 + n_k, alpha0 + tail) posteriors.
    double log_remaining = 0.0;
    int tail = static_cast<int>(t_docs);
    for (std::size_t k = 0; k + 1 < kk; ++k) {
      tail -= n_docs[k];
      const double frac = rng.beta(1.0 + n_docs[k], alpha0 + tail);
      log_pi[k] = std::log(frac) + log_remaining;
      log_remaining += std::log1p(-frac);
    }
    log_pi[kk - 1] = log_remaining;

    for (std::size_t t = 0; t < t_docs; ++t) {
      add_doc(t, z[t], -1);
      const auto& doc = corpus.documents[t];
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < kk; ++k) {
        logp[k] = log_pi[k] + detail::collapsed_doc_logprob(doc, m[k], m_total[k], beta, v);
        mx = std::max(mx, logp[k]);
      }
      std::vector<double> w(kk);
      for (std::size_t k = 0; k < kk; ++k) w[k] = std::exp(logp[k] - mx);
      z[t] = static_cast<int>(rng.categorical(w));
      add_doc(t, z[t], +1);
    }
  }

  DPMixtureModel model;
  model.alpha0 = alpha0;
  model.base_concentration = beta;
  model.assignments = z;
  model.weights.truncation = truncation;
  model.weights.pi.resize(kk);
  for (std::size_t k = 0; k < kk; ++k)
    model.weights.pi[k] = (n_docs[k] + alpha0 / truncation) / (static_cast<double>(t_docs) + alpha0);
  detail::close_stick_remainder(model.weights.pi);

  model.components.resize(kk);
  model.occupied.resize(kk);
  for (std::size_t k = 0; k < kk; ++k) {
    model.occupied[k] = n_docs[k] > 0 ? 1 : 0;
    auto& phi = model.components[k];
    phi.resize(static_cast<std::size_t>(v));
    const double denom = m_total[k] + beta * v;
    for (int i = 0; i < v; ++i)
      phi[static_cast<std::size_t>(i)] = (m[k][static_cast<std::size_t>(i)] + beta) / denom;
  }

  // Per-component gamma fits; tiny components fall back to the global model.
  const auto lex_size = static_cast<int>(lexicon.w0.size() + lexicon.w1.size());
  const int min_docs = std::max(5, lex_size);
  GammaModel global = fit_gamma(make_moment_stats(corpus, lexicon), solver_config);
  model.component_gammas.assign(kk, global);
  for (std::size_t k = 0; k < kk; ++k) {
    if (n_docs[k] < min_docs) continue;
    Corpus sub;
    sub.vocabulary = corpus.vocabulary;
    for (std::size_t t = 0; t < t_docs; ++t)
      if (z[t] == static_cast<int>(k)) sub.documents.push_back(corpus.documents[t]);
    model.component_gammas[k] = fit_gamma(make_moment_stats(sub, lexicon), solver_config);
  }
  return model;
}

// Stick-weighted aggregation of the per-component weighted rules.
inline Prediction dp_predictive_rule(const DocumentCounts& doc, const DPMixtureModel& model) {
  double s0 = 0.0, s1 = 0.0;
  bool any = false;
  for (std::size_t k = 0; k < model.components.size(); ++k) {
    if (!model.occupied[k]) continue;
    any = true;
    const auto& component = model.component_gammas[k];
    const double pi = model.weights.pi[k];
    const auto& lex = component.lexicon;
    for (std::size_t j = 0; j < lex.w0.size(); ++j) {
      auto it = doc.counts.find(lex.w0[j]);
      if (it != doc.counts.end())
        s0 += pi * static_cast<double>(it->second) * word_weight(component.gammas.g0[j]);
    }
    for (std::size_t j = 0; j < lex.w1.size(); ++j) {
      auto it = doc.counts.find(lex.w1[j]);
      if (it != doc.counts.end())
        s1 += pi * static_cast<double>(it->second) * word_weight(component.gammas.g1[j]);
    }
  }
  if (!any) throw std::runtime_error("dp_predictive_rule: no occupied component");
  return make_prediction(s0, s1);
}

}  // namespace bayeslex
