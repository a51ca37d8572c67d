#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "bayeslex/rules.hpp"

namespace bayeslex {

enum class TiePolicy { AsClass0, AsClass1, Exclude };

struct EvalReport {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::array<std::array<std::int64_t, 2>, 2> confusion{};  // [truth][predicted]
  std::int64_t tie_count = 0;
  std::int64_t evaluated = 0;
  std::optional<double> ari;
};

inline EvalReport evaluate(const std::vector<Prediction>& predictions,
                           const std::vector<int>& truth, TiePolicy tie_policy) {
  if (predictions.size() != truth.size())
    throw std::invalid_argument("evaluate: length mismatch");
  if (predictions.empty()) throw std::invalid_argument("evaluate: empty input");

  EvalReport report;
  for (std::size_t t = 0; t < predictions.size(); ++t) {
    const auto& p = predictions[t];
    int predicted;
    if (p.label == Label::Tie) {
      ++report.tie_count;
      if (tie_policy == TiePolicy::Exclude) continue;
      predicted = tie_policy == TiePolicy::AsClass0 ? 0 : 1;
    } else {
      predicted = p.label == Label::Class0 ? 0 : 1;
    }
    if (truth[t] != 0 && truth[t] != 1)
      throw std::invalid_argument("evaluate: truth labels must be 0 or 1");
    ++report.confusion[static_cast<std::size_t>(truth[t])][static_cast<std::size_t>(predicted)];
    ++report.evaluated;
  }
  if (report.evaluated == 0) throw std::invalid_argument("evaluate: no documents after tie exclusion");

  report.accuracy =
      static_cast<double>(report.confusion[0][0] + report.confusion[1][1]) / report.evaluated;

  double f1_sum = 0.0;
  for (int cls = 0; cls < 2; ++cls) {
    const auto c = static_cast<std::size_t>(cls);
    const auto tp = static_cast<double>(report.confusion[c][c]);
    const auto fp = static_cast<double>(report.confusion[1 - c][c]);
    const auto fn = static_cast<double>(report.confusion[c][1 - c]);
    // 0/0 per-class F1 counts as 0
    const double denom = 2.0 * tp + fp + fn;
    f1_sum += denom > 0.0 ? 2.0 * tp / denom : 0.0;
  }
  report.macro_f1 = f1_sum / 2.0;
  return report;
}

// Adjusted Rand index between two clusterings over the same items.
inline double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("adjusted_rand_index: length mismatch");
  if (a.empty()) throw std::invalid_argument("adjusted_rand_index: empty input");

  std::map<std::pair<int, int>, std::int64_t> joint;
  std::map<int, std::int64_t> rows, cols;
  for (std::size_t t = 0; t < a.size(); ++t) {
    ++joint[{a[t], b[t]}];
    ++rows[a[t]];
    ++cols[b[t]];
  }
  auto choose2 = [](std::int64_t n) { return static_cast<double>(n) * (n - 1) / 2.0; };
  double sum_joint = 0.0, sum_rows = 0.0, sum_cols = 0.0;
  for (const auto& [key, n] : joint) sum_joint += choose2(n);
  for (const auto& [key, n] : rows) sum_rows += choose2(n);
  for (const auto& [key, n] : cols) sum_cols += choose2(n);
  const double total = choose2(static_cast<std::int64_t>(a.size()));
  const double expected = sum_rows * sum_cols / total;
  const double max_index = 0.5 * (sum_rows + sum_cols);
  if (max_index == expected) return 1.0;  // both clusterings trivial
  return (sum_joint - expected) / (max_index - expected);
}

}  // namespace bayeslex
