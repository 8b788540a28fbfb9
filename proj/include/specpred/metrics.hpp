#pragma once

// Confusion matrices and quadratic-weighted Cohen's kappa.

#include <cmath>
#include <cstdint>
#include <vector>

#include "specpred/error.hpp"

namespace specpred {

// rows = ground truth, columns = predictions; label order low, medium, high.
struct ConfusionMatrix {
  std::vector<std::vector<std::int64_t>> counts;

  explicit ConfusionMatrix(int k = 3)
      : counts(static_cast<std::size_t>(k),
               std::vector<std::int64_t>(static_cast<std::size_t>(k), 0)) {}

  int size() const { return static_cast<int>(counts.size()); }

  std::int64_t total() const {
    std::int64_t t = 0;
    for (const auto& row : counts)
      for (auto c : row) t += c;
    return t;
  }

  void add(int truth, int pred) {
    counts.at(static_cast<std::size_t>(truth)).at(static_cast<std::size_t>(pred))++;
  }

  ConfusionMatrix transposed() const {
    ConfusionMatrix t(size());
    for (int i = 0; i < size(); ++i)
      for (int j = 0; j < size(); ++j) t.counts[j][i] = counts[i][j];
    return t;
  }
};

inline ConfusionMatrix confusion_matrix(const std::vector<int>& y_true,
                                        const std::vector<int>& y_pred, int k = 3) {
  if (y_true.size() != y_pred.size() || y_true.empty())
    throw DataError("confusion_matrix: length mismatch or empty input");
  ConfusionMatrix m(k);
  for (std::size_t i = 0; i < y_true.size(); ++i) m.add(y_true[i], y_pred[i]);
  return m;
}

// kappa = 1 - sum(w*O) / sum(w*E) with w_ij = (i-j)^2 / (k-1)^2 and
// E_ij = row_i * col_j / N. Degenerate marginals (expected disagreement 0)
// are kappa = 1 when observed agreement is perfect, an error otherwise.
inline double quadratic_weighted_kappa(const ConfusionMatrix& m) {
  const int k = m.size();
  const double n = static_cast<double>(m.total());
  if (n < 1) throw DataError("quadratic_weighted_kappa: empty matrix");
  std::vector<double> row(static_cast<std::size_t>(k), 0), col(static_cast<std::size_t>(k), 0);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      row[static_cast<std::size_t>(i)] += static_cast<double>(m.counts[i][j]);
      col[static_cast<std::size_t>(j)] += static_cast<double>(m.counts[i][j]);
    }
  const double denom_w = static_cast<double>((k - 1) * (k - 1));
  double observed = 0, expected = 0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      double w = static_cast<double>((i - j) * (i - j)) / denom_w;
      observed += w * static_cast<double>(m.counts[i][j]);
      expected += w * row[static_cast<std::size_t>(i)] * col[static_cast<std::size_t>(j)] / n;
    }
  if (expected == 0.0) {
    if (observed == 0.0) return 1.0;
    throw DataError("quadratic_weighted_kappa: degenerate marginals");
  }
  return 1.0 - observed / expected;
}

}  // namespace specpred
