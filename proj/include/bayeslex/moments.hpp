#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bayeslex/corpus.hpp"

namespace bayeslex {

// Per-word predictiveness, indexed parallel to LexiconPair::w0 / w1.
struct GammaVectors {
  std::vector<double> g0;
  std::vector<double> g1;
};

struct MomentStats {
  std::vector<double> mu;   // length V, sums to 1
  std::vector<double> c0;   // cross-label counts for w0 words
  std::vector<double> c1;
  double pair_mass = 0.0;   // sum over docs of N(N-1)
  LexiconPair lexicon;
  // Lexicon words unseen in the corpus (mu at the additive floor) carry no
  // moment information; the solver freezes them.
  std::vector<char> frozen0;
  std::vector<char> frozen1;
};

inline constexpr double kMuFloor = 1e-9;

inline std::vector<double> estimate_mu(const Corpus& corpus) {
  const int v = corpus.vocabulary.size();
  if (v == 0) throw std::runtime_error("estimate_mu: empty vocabulary");
  std::vector<std::int64_t> totals(static_cast<std::size_t>(v), 0);
  std::int64_t grand_total = 0;
  for (const auto& doc : corpus.documents) {
    for (const auto& [word, count] : doc.counts) totals[static_cast<std::size_t>(word)] += count;
    grand_total += doc.total;
  }
  if (grand_total == 0) throw std::runtime_error("estimate_mu: corpus has zero tokens");
  const double denom = static_cast<double>(grand_total) + kMuFloor * v;
  std::vector<double> mu(static_cast<std::size_t>(v));
  for (int i = 0; i < v; ++i)
    mu[static_cast<std::size_t>(i)] =
        (static_cast<double>(totals[static_cast<std::size_t>(i)]) + kMuFloor) / denom;
  return mu;
}

struct CrossCounts {
  std::vector<double> c0;
  std::vector<double> c1;
  double pair_mass = 0.0;
};

// c_i = sum over docs of x_i * (total count of the opposite lexicon in the
// doc). Accumulated in 64-bit integers; exact.
inline CrossCounts cross_counts(const Corpus& corpus, const LexiconPair& lexicon) {
  std::vector<std::int64_t> acc0(lexicon.w0.size(), 0), acc1(lexicon.w1.size(), 0);
  std::int64_t pair_acc = 0;
  for (const auto& doc : corpus.documents) {
    std::int64_t s0 = 0, s1 = 0;
    for (std::size_t k = 0; k < lexicon.w0.size(); ++k) {
      auto it = doc.counts.find(lexicon.w0[k]);
      if (it != doc.counts.end()) s0 += it->second;
    }
    for (std::size_t k = 0; k < lexicon.w1.size(); ++k) {
      auto it = doc.counts.find(lexicon.w1[k]);
      if (it != doc.counts.end()) s1 += it->second;
    }
    if (s1 != 0)
      for (std::size_t k = 0; k < lexicon.w0.size(); ++k) {
        auto it = doc.counts.find(lexicon.w0[k]);
        if (it != doc.counts.end()) acc0[k] += it->second * s1;
      }
    if (s0 != 0)
      for (std::size_t k = 0; k < lexicon.w1.size(); ++k) {
        auto it = doc.counts.find(lexicon.w1[k]);
        if (it != doc.counts.end()) acc1[k] += it->second * s0;
      }
    pair_acc += doc.total * (doc.total - 1);
  }
  CrossCounts out;
  out.c0.assign(acc0.begin(), acc0.end());
  out.c1.assign(acc1.begin(), acc1.end());
  out.pair_mass = static_cast<double>(pair_acc);
  return out;
}

inline MomentStats make_moment_stats(const Corpus& corpus, const LexiconPair& lexicon) {
  MomentStats stats;
  stats.mu = estimate_mu(corpus);
  auto cc = cross_counts(corpus, lexicon);
  stats.c0 = std::move(cc.c0);
  stats.c1 = std::move(cc.c1);
  stats.pair_mass = cc.pair_mass;
  stats.lexicon = lexicon;

  std::vector<std::int64_t> totals(static_cast<std::size_t>(corpus.vocabulary.size()), 0);
  for (const auto& doc : corpus.documents)
    for (const auto& [word, count] : doc.counts) totals[static_cast<std::size_t>(word)] += count;
  stats.frozen0.resize(lexicon.w0.size());
  stats.frozen1.resize(lexicon.w1.size());
  for (std::size_t k = 0; k < lexicon.w0.size(); ++k)
    stats.frozen0[k] = totals[static_cast<std::size_t>(lexicon.w0[k])] == 0 ? 1 : 0;
  for (std::size_t k = 0; k < lexicon.w1.size(); ++k)
    stats.frozen1[k] = totals[static_cast<std::size_t>(lexicon.w1[k])] == 0 ? 1 : 0;
  return stats;
}

// Closed form for the model-expected cross-label counts:
//   E[c_i] = pair_mass * mu_i * sum_{j in opposite} mu_j (1 - gamma_i gamma_j).
inline std::pair<std::vector<double>, std::vector<double>> expected_cross_counts(
    const MomentStats& stats, const GammaVectors& gammas) {
  const auto& lex = stats.lexicon;
  double s0 = 0.0, s1 = 0.0;   // lexicon mass per side
  double a0 = 0.0, a1 = 0.0;   // gamma-weighted mass per side
  for (std::size_t k = 0; k < lex.w0.size(); ++k) {
    const double m = stats.mu[static_cast<std::size_t>(lex.w0[k])];
    s0 += m;
    a0 += m * gammas.g0[k];
  }
  for (std::size_t k = 0; k < lex.w1.size(); ++k) {
    const double m = stats.mu[static_cast<std::size_t>(lex.w1[k])];
    s1 += m;
    a1 += m * gammas.g1[k];
  }
  std::vector<double> e0(lex.w0.size()), e1(lex.w1.size());
  for (std::size_t k = 0; k < lex.w0.size(); ++k) {
    const double m = stats.mu[static_cast<std::size_t>(lex.w0[k])];
    e0[k] = stats.pair_mass * m * (s1 - gammas.g0[k] * a1);
  }
  for (std::size_t k = 0; k < lex.w1.size(); ++k) {
    const double m = stats.mu[static_cast<std::size_t>(lex.w1[k])];
    e1[k] = stats.pair_mass * m * (s0 - gammas.g1[k] * a0);
  }
  return {std::move(e0), std::move(e1)};
}

struct ObjectiveResult {
  double value = 0.0;
  std::vector<double> grad0;
  std::vector<double> grad1;
};

// Penalized least-squares moment objective:
//   1/2 sum_i (c_i - E[c_i])^2  over both sides
//   + penalty/2 * (mu0.g0 - mu1.g1)^2
// with the exact analytic gradient.
inline ObjectiveResult objective_and_gradient(const MomentStats& stats,
                                              const GammaVectors& gammas, double penalty) {
  const auto& lex = stats.lexicon;
  const double mass = stats.pair_mass;

  std::vector<double> mu0(lex.w0.size()), mu1(lex.w1.size());
  for (std::size_t k = 0; k < lex.w0.size(); ++k)
    mu0[k] = stats.mu[static_cast<std::size_t>(lex.w0[k])];
  for (std::size_t k = 0; k < lex.w1.size(); ++k)
    mu1[k] = stats.mu[static_cast<std::size_t>(lex.w1[k])];

  double a0 = 0.0, a1 = 0.0, s0 = 0.0, s1 = 0.0;
  for (std::size_t k = 0; k < mu0.size(); ++k) {
    s0 += mu0[k];
    a0 += mu0[k] * gammas.g0[k];
  }
  for (std::size_t k = 0; k < mu1.size(); ++k) {
    s1 += mu1[k];
    a1 += mu1[k] * gammas.g1[k];
  }

  std::vector<double> r0(mu0.size()), r1(mu1.size());
  double value = 0.0;
  for (std::size_t k = 0; k < mu0.size(); ++k) {
    const double e = mass * mu0[k] * (s1 - gammas.g0[k] * a1);
    r0[k] = stats.c0[k] - e;
    value += 0.5 * r0[k] * r0[k];
  }
  for (std::size_t k = 0; k < mu1.size(); ++k) {
    const double e = mass * mu1[k] * (s0 - gammas.g1[k] * a0);
    r1[k] = stats.c1[k] - e;
    value += 0.5 * r1[k] * r1[k];
  }

  const double d = a0 - a1;  // equal-coverage constraint residual
  value += 0.5 * penalty * d * d;

  // Cross sums: sum_k r_k mu_k gamma_k per side.
  double rg0 = 0.0, rg1 = 0.0;
  for (std::size_t k = 0; k < mu0.size(); ++k) rg0 += r0[k] * mu0[k] * gammas.g0[k];
  for (std::size_t k = 0; k < mu1.size(); ++k) rg1 += r1[k] * mu1[k] * gammas.g1[k];

  ObjectiveResult out;
  out.value = value;
  out.grad0.resize(mu0.size());
  out.grad1.resize(mu1.size());
  for (std::size_t k = 0; k < mu0.size(); ++k)
    out.grad0[k] = mass * mu0[k] * (a1 * r0[k] + rg1) + penalty * d * mu0[k];
  for (std::size_t k = 0; k < mu1.size(); ++k)
    out.grad1[k] = mass * mu1[k] * (a0 * r1[k] + rg0) - penalty * d * mu1[k];
  return out;
}

}  // namespace bayeslex
