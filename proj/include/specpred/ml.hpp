#pragma once

// Multinomial logistic regression trained by full-batch gradient descent,
// feature standardization, information-gain ranking and the interpretable
// pedagogical feature selection.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "specpred/error.hpp"

namespace specpred {

using Matrix = std::vector<std::vector<double>>;  // rows = samples

// Train-fold mean/sd scaling restricted to a column mask; sd = 0 columns
// pass through unscaled.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> sd;
  std::vector<bool> apply;

  void fit(const Matrix& X, const std::vector<bool>& mask) {
    if (X.empty()) throw DataError("standardizer: empty matrix");
    const std::size_t f = X[0].size();
    apply = mask;
    apply.resize(f, false);
    mean.assign(f, 0.0);
    sd.assign(f, 0.0);
    for (const auto& row : X)
      for (std::size_t j = 0; j < f; ++j) mean[j] += row[j];
    for (double& m : mean) m /= static_cast<double>(X.size());
    for (const auto& row : X)
      for (std::size_t j = 0; j < f; ++j) {
        double d = row[j] - mean[j];
        sd[j] += d * d;
      }
    for (double& s : sd) s = std::sqrt(s / static_cast<double>(X.size()));
  }

  std::vector<double> transform(std::vector<double> row) const {
    for (std::size_t j = 0; j < row.size() && j < mean.size(); ++j)
      if (apply[j] && sd[j] > 0) row[j] = (row[j] - mean[j]) / sd[j];
    return row;
  }

  void transform_in_place(Matrix& X) const {
    for (auto& row : X) row = transform(std::move(row));
  }
};

namespace detail {

inline std::vector<double> softmax(std::vector<double> z) {
  double m = *std::max_element(z.begin(), z.end());
  double sum = 0;
  for (double& v : z) {
    v = std::exp(v - m);
    sum += v;
  }
  for (double& v : z) v /= sum;
  return z;
}

}  // namespace detail

struct LinearModel {
  std::size_t n_labels = 3;
  std::size_t n_features = 0;
  std::vector<double> W;  // n_labels x n_features, row-major
  std::vector<double> b;  // n_labels
  double l2_strength = 0.0;
  std::vector<std::string> feature_names;

  std::vector<double> scores(const std::vector<double>& x) const {
    if (x.size() != n_features) throw DataError("feature vector does not match model schema");
    std::vector<double> z(n_labels, 0.0);
    for (std::size_t l = 0; l < n_labels; ++l) {
      double s = b[l];
      const double* w = W.data() + l * n_features;
      for (std::size_t j = 0; j < n_features; ++j) s += w[j] * x[j];
      z[l] = s;
    }
    return z;
  }

  std::vector<double> predict_proba(const std::vector<double>& x) const {
    return detail::softmax(scores(x));
  }

  // argmax; ties resolve to the lower ordinal
  int predict(const std::vector<double>& x) const {
    auto p = predict_proba(x);
    int best = 0;
    for (std::size_t l = 1; l < p.size(); ++l)
      if (p[l] > p[best]) best = static_cast<int>(l);
    return best;
  }

  nlohmann::json to_json() const {
    return {{"n_labels", n_labels}, {"n_features", n_features}, {"W", W},
            {"b", b},               {"l2", l2_strength},        {"features", feature_names}};
  }

  static LinearModel from_json(const nlohmann::json& j) {
    LinearModel m;
    m.n_labels = j.at("n_labels").get<std::size_t>();
    m.n_features = j.at("n_features").get<std::size_t>();
    m.W = j.at("W").get<std::vector<double>>();
    m.b = j.at("b").get<std::vector<double>>();
    m.l2_strength = j.at("l2").get<double>();
    m.feature_names = j.at("features").get<std::vector<std::string>>();
    return m;
  }
};

namespace detail {

// Mean cross-entropy plus (l2/2)||W||^2; bias unregularized. Gradient is
// written into gW/gb when non-null.
inline double logistic_loss_grad(const LinearModel& m, const Matrix& X,
                                 const std::vector<int>& y, double l2,
                                 std::vector<double>* gW, std::vector<double>* gb) {
  const std::size_t n = X.size(), f = m.n_features, k = m.n_labels;
  if (gW) gW->assign(k * f, 0.0);
  if (gb) gb->assign(k, 0.0);
  double loss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    auto p = softmax(m.scores(X[i]));
    loss += -std::log(std::max(p[static_cast<std::size_t>(y[i])], 1e-300));
    if (gW || gb) {
      for (std::size_t l = 0; l < k; ++l) {
        double d = p[l] - (static_cast<int>(l) == y[i] ? 1.0 : 0.0);
        if (gb) (*gb)[l] += d;
        if (gW) {
          double* g = gW->data() + l * f;
          const double* x = X[i].data();
          for (std::size_t j = 0; j < f; ++j) g[j] += d * x[j];
        }
      }
    }
  }
  loss /= static_cast<double>(n);
  if (gW)
    for (double& g : *gW) g /= static_cast<double>(n);
  if (gb)
    for (double& g : *gb) g /= static_cast<double>(n);
  for (std::size_t i = 0; i < m.W.size(); ++i) {
    loss += 0.5 * l2 * m.W[i] * m.W[i];
    if (gW) (*gW)[i] += l2 * m.W[i];
  }
  return loss;
}

}  // namespace detail

// Full-batch gradient descent with backtracking step halving; stops when the
// gradient infinity-norm drops below 1e-5 or after max_iters iterations.
// Zero initialization makes the result seed-independent; the seed parameter
// is reserved for a future mini-batch mode.
inline LinearModel train_logistic(const Matrix& X, const std::vector<int>& y,
                                  double l2 = 1.0, std::uint64_t /*seed*/ = 0,
                                  int n_labels = 3, int max_iters = 500,
                                  double grad_tol = 1e-5) {
  if (X.empty() || X.size() != y.size())
    throw DataError("train_logistic: empty data or size mismatch");
  std::set<int> distinct(y.begin(), y.end());
  if (distinct.size() < 2) throw DataError("train_logistic: single-label training set");
  for (const auto& row : X)
    for (double v : row)
      if (!std::isfinite(v)) throw DataError("train_logistic: non-finite feature value");

  LinearModel m;
  m.n_labels = static_cast<std::size_t>(n_labels);
  m.n_features = X[0].size();
  m.W.assign(m.n_labels * m.n_features, 0.0);
  m.b.assign(m.n_labels, 0.0);
  m.l2_strength = l2;

  std::vector<double> gW, gb;
  double loss = detail::logistic_loss_grad(m, X, y, l2, &gW, &gb);
  double step = 1.0;
  for (int it = 0; it < max_iters; ++it) {
    double gmax = 0;
    for (double g : gW) gmax = std::max(gmax, std::abs(g));
    for (double g : gb) gmax = std::max(gmax, std::abs(g));
    if (gmax < grad_tol) break;

    step *= 2.0;  // allow recovery after conservative steps
    LinearModel trial = m;
    double new_loss;
    for (;;) {
      for (std::size_t i = 0; i < m.W.size(); ++i) trial.W[i] = m.W[i] - step * gW[i];
      for (std::size_t i = 0; i < m.b.size(); ++i) trial.b[i] = m.b[i] - step * gb[i];
      new_loss = detail::logistic_loss_grad(trial, X, y, l2, nullptr, nullptr);
      if (new_loss < loss || step < 1e-12) break;
      step *= 0.5;
    }
    if (new_loss >= loss) break;  // no descent direction progress left
    m.W.swap(trial.W);
    m.b.swap(trial.b);
    loss = detail::logistic_loss_grad(m, X, y, l2, &gW, &gb);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Information gain

namespace detail {

inline double entropy_bits(const std::map<int, int>& counts, int total) {
  if (total == 0) return 0.0;
  double h = 0;
  for (const auto& [_, c] : counts) {
    if (c == 0) continue;
    double p = static_cast<double>(c) / total;
    h -= p * std::log2(p);
  }
  return h;
}

}  // namespace detail

// IG = H(Y) - sum_v p(v) H(Y|v), log base 2. Columns with more than two
// distinct values are discretized into equal-frequency bins.
inline double information_gain(const std::vector<double>& column,
                               const std::vector<int>& labels, int bins = 10) {
  if (column.size() != labels.size() || column.size() < 2)
    throw DataError("information_gain: length mismatch or too few rows");

  std::set<double> distinct(column.begin(), column.end());
  std::vector<int> cell(column.size());
  if (static_cast<int>(distinct.size()) <= 2) {
    std::map<double, int> id;
    for (double v : distinct) id.emplace(v, static_cast<int>(id.size()));
    for (std::size_t i = 0; i < column.size(); ++i) cell[i] = id[column[i]];
  } else {
    std::vector<double> sorted = column;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> edges;  // upper edges of all but the last bin
    for (int b = 1; b < bins; ++b) {
      std::size_t idx = (b * sorted.size()) / static_cast<std::size_t>(bins);
      edges.push_back(sorted[std::min(idx, sorted.size() - 1)]);
    }
    for (std::size_t i = 0; i < column.size(); ++i)
      cell[i] = static_cast<int>(
          std::lower_bound(edges.begin(), edges.end(), column[i]) - edges.begin());
  }

  std::map<int, int> label_counts;
  std::map<int, std::map<int, int>> cond;
  std::map<int, int> cell_counts;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    ++label_counts[labels[i]];
    ++cond[cell[i]][labels[i]];
    ++cell_counts[cell[i]];
  }
  const int n = static_cast<int>(labels.size());
  double ig = detail::entropy_bits(label_counts, n);
  for (const auto& [c, counts] : cond)
    ig -= (static_cast<double>(cell_counts[c]) / n) *
          detail::entropy_bits(counts, cell_counts[c]);
  return ig;
}

// ---------------------------------------------------------------------------
// Pedagogical feature selection: a fixed interpretable shallow subset plus
// the top-k information-gain features from the pronoun, named-entity and
// book sets. Ties break by schema order.

inline const std::vector<std::string>& pedagogical_fixed_features() {
  static const std::vector<std::string> fixed = {
      "sp_avg_imageability", "sp_strong_subjective", "sp_polar",
      "sp_avg_familiarity",  "sp_connectives",       "sp_stopword_frac"};
  return fixed;
}

inline std::vector<std::string> select_pedagogical_features(
    const Matrix& X, const std::vector<std::string>& names,
    const std::vector<int>& labels, const std::map<std::string, int>& k_per_set,
    std::ostream* warnings = nullptr) {
  std::vector<std::string> selected = pedagogical_fixed_features();

  auto columns_with_prefix = [&](const std::string& prefix) {
    std::vector<std::size_t> cols;
    for (std::size_t j = 0; j < names.size(); ++j)
      if (names[j].rfind(prefix, 0) == 0) cols.push_back(j);
    return cols;
  };
  static const std::map<std::string, std::string> prefixes = {
      {"pronoun", "pron_"}, {"ne", "ne_"}, {"book", "book_"}};

  for (const auto& [set_name, prefix] : prefixes) {
    auto it = k_per_set.find(set_name);
    int k = it != k_per_set.end() ? it->second : 0;
    if (k <= 0) continue;
    auto cols = columns_with_prefix(prefix);
    if (k > static_cast<int>(cols.size())) {
      if (warnings)
        *warnings << "warning: k=" << k << " exceeds " << set_name
                  << " set size; clamped to " << cols.size() << "\n";
      k = static_cast<int>(cols.size());
    }
    std::vector<std::pair<double, std::size_t>> ranked;
    for (std::size_t j : cols) {
      std::vector<double> col(X.size());
      for (std::size_t i = 0; i < X.size(); ++i) col[i] = X[i][j];
      ranked.push_back({information_gain(col, labels), j});
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (int i = 0; i < k; ++i) selected.push_back(names[ranked[static_cast<std::size_t>(i)].second]);
  }
  return selected;
}

// Features sorted by coefficient magnitude; for each feature the reported
// value is the signed weight of largest magnitude across the label rows.
inline std::vector<std::pair<std::string, double>> coefficient_report(
    const LinearModel& m) {
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t j = 0; j < m.n_features; ++j) {
    double best = 0;
    for (std::size_t l = 0; l < m.n_labels; ++l) {
      double w = m.W[l * m.n_features + j];
      if (std::abs(w) > std::abs(best)) best = w;
    }
    std::string name = j < m.feature_names.size() ? m.feature_names[j]
                                                  : "f" + std::to_string(j);
    out.push_back({name, best});
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::abs(a.second) > std::abs(b.second);
  });
  return out;
}

}  // namespace specpred
