#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "bayeslex/moments.hpp"

namespace bayeslex {

struct SolverConfig {
  int max_iters = 5000;
  double tol = 1e-8;          // relative objective decrease
  double epsilon = 1e-6;      // box upper bound is 1 - epsilon
  double penalty = -1.0;      // < 0 means auto: 10 * max(c)^2
  double init_gamma = 0.5;
  double ls_initial_step = 1.0;
  double ls_shrink = 0.5;
  double ls_sufficient = 1e-4;
  std::uint64_t seed = 0;
};

struct FitDiagnostics {
  double final_objective = 0.0;
  int iterations = 0;
  double constraint_residual = 0.0;
};

// One fitted mixture component: per-word gammas plus the base rates they
// were fitted against.
struct GammaModel {
  GammaVectors gammas;
  std::vector<double> mu;
  LexiconPair lexicon;
  FitDiagnostics diagnostics;
};

inline GammaVectors project_feasible(GammaVectors gammas, double epsilon) {
  const double hi = 1.0 - epsilon;
  for (double& g : gammas.g0) g = std::clamp(g, 0.0, hi);
  for (double& g : gammas.g1) g = std::clamp(g, 0.0, hi);
  return gammas;
}

namespace detail {

inline double lexicon_dot(const std::vector<double>& mu, const std::vector<int>& words,
                          const std::vector<double>& gamma) {
  double acc = 0.0;
  for (std::size_t k = 0; k < words.size(); ++k)
    acc += mu[static_cast<std::size_t>(words[k])] * gamma[k];
  return acc;
}

}  // namespace detail

// Projected gradient descent with backtracking on the penalized objective.
// Frozen entries (unseen lexicon words) keep their init value. After
// convergence the equal-coverage constraint is enforced exactly by uniformly
// rescaling the heavier side.
inline GammaModel fit_gamma(const MomentStats& stats, const SolverConfig& config) {
  const auto& lex = stats.lexicon;
  if (lex.w0.empty() || lex.w1.empty())
    throw std::runtime_error("fit_gamma: both lexicon sides must be nonempty");

  double penalty = config.penalty;
  if (penalty < 0.0) {
    double maxc = 0.0;
    for (double c : stats.c0) maxc = std::max(maxc, c);
    for (double c : stats.c1) maxc = std::max(maxc, c);
    penalty = maxc > 0.0 ? 10.0 * maxc * maxc : 1.0;
  }

  GammaVectors x;
  x.g0.assign(lex.w0.size(), config.init_gamma);
  x.g1.assign(lex.w1.size(), config.init_gamma);
  x = project_feasible(std::move(x), config.epsilon);

  auto mask = [&](std::vector<double>& grad, const std::vector<char>& frozen) {
    for (std::size_t k = 0; k < grad.size(); ++k)
      if (frozen[k]) grad[k] = 0.0;
  };

  ObjectiveResult cur = objective_and_gradient(stats, x, penalty);
  if (!std::isfinite(cur.value)) throw std::runtime_error("fit_gamma: non-finite objective");
  mask(cur.grad0, stats.frozen0);
  mask(cur.grad1, stats.frozen1);

  double step = config.ls_initial_step;
  int iters = 0;
  int flat_streak = 0;
  for (; iters < config.max_iters; ++iters) {
    // Backtracking: accept the projected step when the Armijo condition on
    // the projected direction holds.
    double t = step;
    bool accepted = false;
    GammaVectors cand;
    ObjectiveResult cand_res;
    while (t > 1e-18) {
      cand = x;
      for (std::size_t k = 0; k < cand.g0.size(); ++k) cand.g0[k] -= t * cur.grad0[k];
      for (std::size_t k = 0; k < cand.g1.size(); ++k) cand.g1[k] -= t * cur.grad1[k];
      cand = project_feasible(std::move(cand), config.epsilon);
      double decrease = 0.0;  // grad . (x - cand), nonnegative after projection
      for (std::size_t k = 0; k < cand.g0.size(); ++k)
        decrease += cur.grad0[k] * (x.g0[k] - cand.g0[k]);
      for (std::size_t k = 0; k < cand.g1.size(); ++k)
        decrease += cur.grad1[k] * (x.g1[k] - cand.g1[k]);
      if (decrease <= 0.0) break;  // stationary within the box
      cand_res = objective_and_gradient(stats, cand, penalty);
      if (!std::isfinite(cand_res.value))
        throw std::runtime_error("fit_gamma: non-finite objective");
      if (cand_res.value <= cur.value - config.ls_sufficient * decrease) {
        accepted = true;
        break;
      }
      t *= config.ls_shrink;
    }
    if (!accepted) break;

    const double rel =
        (cur.value - cand_res.value) / std::max(std::abs(cur.value), 1e-300);
    x = std::move(cand);
    cur = std::move(cand_res);
    mask(cur.grad0, stats.frozen0);
    mask(cur.grad1, stats.frozen1);
    step = t * 2.0;

    flat_streak = rel < config.tol ? flat_streak + 1 : 0;
    if (flat_streak >= 10) {
      ++iters;
      break;
    }
  }

  // Exact constraint projection.
  const double d0 = detail::lexicon_dot(stats.mu, lex.w0, x.g0);
  const double d1 = detail::lexicon_dot(stats.mu, lex.w1, x.g1);
  if (std::abs(d0 - d1) > 1e-6) {
    if (d0 > d1 && d0 > 0.0)
      for (double& g : x.g0) g *= d1 / d0;
    else if (d1 > d0 && d1 > 0.0)
      for (double& g : x.g1) g *= d0 / d1;
  }

  GammaModel model;
  model.gammas = std::move(x);
  model.mu = stats.mu;
  model.lexicon = lex;
  model.diagnostics.final_objective = objective_and_gradient(stats, model.gammas, penalty).value;
  model.diagnostics.iterations = iters;
  model.diagnostics.constraint_residual =
      std::abs(detail::lexicon_dot(stats.mu, lex.w0, model.gammas.g0) -
               detail::lexicon_dot(stats.mu, lex.w1, model.gammas.g1));
  return model;
}

}  // namespace bayeslex
