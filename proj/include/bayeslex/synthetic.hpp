#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bayeslex/corpus.hpp"
#include "bayeslex/moments.hpp"
#include "bayeslex/rng.hpp"
#include "bayeslex/rules.hpp"

namespace bayeslex {

// Generative setup: label ~ Bernoulli(1/2), counts ~ Multinomial(N, theta_y)
// with theta_y built from (mu, gamma, lexicon).
struct GenerativeSpec {
  std::vector<double> mu;
  GammaVectors gammas;
  LexiconPair lexicon;
  int num_docs = 1;
  std::vector<int> doc_lengths;  // length 1 = shared N, else per-doc
  std::uint64_t seed = 0;

  int doc_length(std::size_t t) const {
    return doc_lengths.size() == 1 ? doc_lengths[0] : doc_lengths.at(t);
  }
};

namespace detail {

inline std::vector<double> cumulative(const std::vector<double>& p) {
  std::vector<double> cdf(p.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    cdf[i] = acc;
  }
  cdf.back() = 1.0;
  return cdf;
}

inline int draw_from_cdf(const std::vector<double>& cdf, Rng& rng) {
  const double u = rng.uniform();
  return static_cast<int>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
}

}  // namespace detail

struct SampledCorpus {
  Corpus corpus;
  std::vector<int> labels;  // ground truth, never consumed by fitting code
};

inline Vocabulary synthetic_vocabulary(int v) {
  Vocabulary vocab;
  for (int i = 0; i < v; ++i) vocab.add_or_get("w" + std::to_string(i));
  return vocab;
}

inline SampledCorpus sample_corpus(const GenerativeSpec& spec, Rng& rng) {
  if (spec.num_docs < 1) throw std::invalid_argument("sample_corpus: num_docs must be >= 1");
  if (spec.doc_lengths.empty()) throw std::invalid_argument("sample_corpus: no doc lengths");

  const auto theta0 = theta_from_gamma(spec.mu, spec.lexicon, spec.gammas, 0);
  const auto theta1 = theta_from_gamma(spec.mu, spec.lexicon, spec.gammas, 1);
  const auto cdf0 = detail::cumulative(theta0);
  const auto cdf1 = detail::cumulative(theta1);

  SampledCorpus out;
  out.corpus.vocabulary = synthetic_vocabulary(static_cast<int>(spec.mu.size()));
  out.corpus.documents.reserve(static_cast<std::size_t>(spec.num_docs));
  out.labels.reserve(static_cast<std::size_t>(spec.num_docs));
  for (int t = 0; t < spec.num_docs; ++t) {
    const int label = rng.uniform() < 0.5 ? 0 : 1;
    const auto& cdf = label == 0 ? cdf0 : cdf1;
    DocumentCounts doc;
    doc.id = "doc" + std::to_string(t);
    const int n = spec.doc_length(static_cast<std::size_t>(t));
    for (int j = 0; j < n; ++j) {
      ++doc.counts[detail::draw_from_cdf(cdf, rng)];
      ++doc.total;
    }
    out.corpus.documents.push_back(std::move(doc));
    out.labels.push_back(label);
  }
  return out;
}

struct MonteCarloCounts {
  std::vector<double> mean0, mean1;  // cross-count means per lexicon word
  std::vector<double> se0, se1;      // standard errors of those means
};

// Monte-Carlo oracle for the expected cross-label counts: sample whole
// corpora, compute the exact cross counts on each, report mean and SE.
inline MonteCarloCounts monte_carlo_cross_counts(const GenerativeSpec& spec, int draws,
                                                 Rng& rng) {
  if (draws < 1000) throw std::invalid_argument("monte_carlo_cross_counts: draws must be >= 1000");
  const std::size_t n0 = spec.lexicon.w0.size(), n1 = spec.lexicon.w1.size();
  std::vector<double> sum0(n0, 0.0), sum1(n1, 0.0), sq0(n0, 0.0), sq1(n1, 0.0);
  for (int d = 0; d < draws; ++d) {
    const auto sampled = sample_corpus(spec, rng);
    const auto cc = cross_counts(sampled.corpus, spec.lexicon);
    for (std::size_t k = 0; k < n0; ++k) {
      sum0[k] += cc.c0[k];
      sq0[k] += cc.c0[k] * cc.c0[k];
    }
    for (std::size_t k = 0; k < n1; ++k) {
      sum1[k] += cc.c1[k];
      sq1[k] += cc.c1[k] * cc.c1[k];
    }
  }
  MonteCarloCounts out;
  out.mean0.resize(n0);
  out.mean1.resize(n1);
  out.se0.resize(n0);
  out.se1.resize(n1);
  const double nd = static_cast<double>(draws);
  for (std::size_t k = 0; k < n0; ++k) {
    out.mean0[k] = sum0[k] / nd;
    const double var = std::max(0.0, sq0[k] / nd - out.mean0[k] * out.mean0[k]);
    out.se0[k] = std::sqrt(var / nd);
  }
  for (std::size_t k = 0; k < n1; ++k) {
    out.mean1[k] = sum1[k] / nd;
    const double var = std::max(0.0, sq1[k] / nd - out.mean1[k] * out.mean1[k]);
    out.se1[k] = std::sqrt(var / nd);
  }
  return out;
}

}  // namespace bayeslex
