#pragma once

// Threshold mapping and grid search over external scores, cross-validation
// driver, paired t-test and inter-rater agreement.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <numeric>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "specpred/corpus.hpp"
#include "specpred/error.hpp"
#include "specpred/features.hpp"
#include "specpred/metrics.hpp"
#include "specpred/ml.hpp"
#include "specpred/neural.hpp"

namespace specpred {

struct ThresholdPair {
  double t1 = 0.0;
  double t2 = 1.0;
};

// s <= t1 -> low; t1 < s <= t2 -> medium; s > t2 -> high
inline SpecificityLabel apply_thresholds(double score, const ThresholdPair& t) {
  if (score < 0.0 || score > 1.0) throw DataError("score out of range [0,1]");
  if (score <= t.t1) return SpecificityLabel::Low;
  if (score <= t.t2) return SpecificityLabel::Medium;
  return SpecificityLabel::High;
}

// Exhaustive grid over t1 <= t2 in {0, step, 2*step, ..., 1}; the first pair
// in lexicographic scan order attaining the maximal QWK wins.
inline std::pair<ThresholdPair, double> search_thresholds(
    const std::vector<double>& scores, const std::vector<int>& labels,
    double step = 0.001) {
  if (scores.size() != labels.size() || scores.empty())
    throw DataError("search_thresholds: length mismatch or empty input");
  if (step <= 0.0 || step > 1.0) throw DataError("search_thresholds: bad step");
  std::set<int> distinct(labels.begin(), labels.end());
  if (distinct.size() < 2) throw DataError("search_thresholds: single-category labels");

  std::array<std::vector<double>, 3> per_label;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] < 0.0 || scores[i] > 1.0)
      throw DataError("search_thresholds: score out of range [0,1]");
    per_label[static_cast<std::size_t>(labels[i])].push_back(scores[i]);
  }
  for (auto& v : per_label) std::sort(v.begin(), v.end());

  std::vector<double> grid;
  for (long i = 0;; ++i) {
    double t = static_cast<double>(i) * step;
    if (t >= 1.0 - 1e-12) break;
    grid.push_back(t);
  }
  grid.push_back(1.0);

  auto count_le = [](const std::vector<double>& v, double t) {
    return static_cast<std::int64_t>(
        std::upper_bound(v.begin(), v.end(), t) - v.begin());
  };

  ThresholdPair best;
  double best_qwk = -2.0;
  for (std::size_t a = 0; a < grid.size(); ++a) {
    std::array<std::int64_t, 3> le1{};
    for (int l = 0; l < 3; ++l)
      le1[static_cast<std::size_t>(l)] = count_le(per_label[static_cast<std::size_t>(l)], grid[a]);
    for (std::size_t bidx = a; bidx < grid.size(); ++bidx) {
      ConfusionMatrix m(3);
      for (int l = 0; l < 3; ++l) {
        const auto& v = per_label[static_cast<std::size_t>(l)];
        std::int64_t le2 = count_le(v, grid[bidx]);
        m.counts[l][0] = le1[static_cast<std::size_t>(l)];
        m.counts[l][1] = le2 - le1[static_cast<std::size_t>(l)];
        m.counts[l][2] = static_cast<std::int64_t>(v.size()) - le2;
      }
      double q = quadratic_weighted_kappa(m);
      if (q > best_qwk) {
        best_qwk = q;
        best = {grid[a], grid[bidx]};
      }
    }
  }
  return {best, best_qwk};
}

// ---------------------------------------------------------------------------
// Paired t-test (two-tailed), p from the regularized incomplete beta.

namespace detail {

inline double betacf(double a, double b, double x) {
  const int max_iter = 200;
  const double eps = 3e-14, fpmin = 1e-300;
  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::abs(d) < fpmin) d = fpmin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iter; ++m) {
    int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) break;
  }
  return h;
}

inline double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                 a * std::log(x) + b * std::log(1.0 - x);
  double bt = std::exp(ln_bt);
  if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
  return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

}  // namespace detail

inline double student_t_two_tailed_p(double t, double df) {
  return detail::incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

// t = mean(d) / (sd(d)/sqrt(n)) on d = a - b, df = n - 1.
inline std::pair<double, double> paired_t_test(const std::vector<double>& a,
                                               const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2)
    throw DataError("paired_t_test: need equal lengths >= 2");
  const double n = static_cast<double>(a.size());
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  double mean = std::accumulate(d.begin(), d.end(), 0.0) / n;
  double var = 0;
  for (double v : d) var += (v - mean) * (v - mean);
  var /= (n - 1.0);
  if (var == 0.0) throw DataError("paired_t_test: degenerate differences (zero variance)");
  double t = mean / (std::sqrt(var) / std::sqrt(n));
  return {t, student_t_two_tailed_p(t, n - 1.0)};
}

inline double interrater_agreement(const std::vector<int>& labels_a,
                                   const std::vector<int>& labels_b) {
  if (labels_a.size() != labels_b.size() || labels_a.empty())
    throw DataError("interrater_agreement: length mismatch or empty input");
  return quadratic_weighted_kappa(confusion_matrix(labels_a, labels_b));
}

// ---------------------------------------------------------------------------
// Cross-validation driver

struct CvConfig {
  std::set<std::string> feature_sets;  // subset of known_feature_sets()
  std::string model = "linear";        // linear | joint
  bool pedagogical = false;            // interpretable selection on top of linear
  std::map<std::string, int> pedagogical_k = {{"pronoun", 5}, {"ne", 5}, {"book", 5}};
  int folds = 10;
  double l2 = 1.0;
  bool fit_vocab_on_corpus = false;
  bool group_by_transcript = false;
  NeuralConfig neural;

  void validate() const {
    if (model != "linear" && model != "joint")
      throw ConfigError("model must be linear or joint");
    if (model == "joint") {
      // the joint model's handcrafted companion is fixed
      std::set<std::string> expected = {"speciteller", "semantic"};
      if (feature_sets != expected)
        throw ConfigError(
            "joint model requires exactly the speciteller+semantic feature sets");
    }
    if (feature_sets.empty()) throw ConfigError("empty feature-set config");
    if (folds < 2) throw ConfigError("folds must be >= 2");
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["feature_sets"] = std::vector<std::string>(feature_sets.begin(), feature_sets.end());
    j["model"] = model;
    j["pedagogical"] = pedagogical;
    j["folds"] = folds;
    j["l2"] = l2;
    j["fit_vocab_on_corpus"] = fit_vocab_on_corpus;
    j["group_by_transcript"] = group_by_transcript;
    if (model == "joint") {
      j["neural"] = {{"hidden", neural.hidden},
                     {"fc_out", neural.fc_out},
                     {"learning_rate", neural.learning_rate},
                     {"batch_size", neural.batch_size},
                     {"max_epochs", neural.max_epochs},
                     {"patience", neural.patience},
                     {"max_chars", neural.max_chars},
                     {"strict_charset", neural.strict_charset}};
    }
    return j;
  }
};

struct EvalReport {
  std::vector<double> fold_qwk;
  double mean_qwk = 0.0;
  double pooled_qwk = 0.0;
  ConfusionMatrix pooled{3};
  std::vector<std::pair<std::string, double>> coefficients;
  nlohmann::json config_echo;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["fold_qwk"] = fold_qwk;
    j["mean_qwk"] = mean_qwk;
    j["pooled_qwk"] = pooled_qwk;
    j["pooled_confusion"] = pooled.counts;
    nlohmann::json coefs = nlohmann::json::array();
    for (const auto& [name, w] : coefficients) coefs.push_back({{"feature", name}, {"weight", w}});
    j["coefficients"] = coefs;
    j["config"] = config_echo;
    return j;
  }
};

namespace detail {

inline std::vector<bool> dense_mask(const FeatureSchema& schema) {
  std::vector<bool> mask(schema.names.size(), false);
  for (std::size_t j = 0; j < schema.names.size(); ++j)
    mask[j] = schema.names[j].rfind("lex:", 0) != 0 &&
              schema.names[j].rfind("pos:", 0) != 0;
  return mask;
}

inline Matrix project_columns(const Matrix& X, const std::vector<std::size_t>& cols) {
  Matrix out;
  out.reserve(X.size());
  for (const auto& row : X) {
    std::vector<double> r;
    r.reserve(cols.size());
    for (std::size_t c : cols) r.push_back(row[c]);
    out.push_back(std::move(r));
  }
  return out;
}

struct FoldFit {
  FeatureSchema schema;
  Standardizer standardizer;
  std::vector<std::string> names;          // columns after any selection
  std::vector<std::size_t> selected_cols;  // into schema order
};

inline FoldFit fit_fold(const std::vector<Turn>& schema_turns,
                        const std::vector<Turn>& train_turns, const CvConfig& cfg,
                        const ExtractionContext& ctx, const std::string& fold_id,
                        Matrix& X_train, std::vector<int>& y_train) {
  FoldFit fit;
  std::set<std::string> sets = cfg.feature_sets;
  if (cfg.pedagogical) {
    sets.insert("speciteller");
    sets.insert("pronoun");
    sets.insert("ne");
    sets.insert("book");
  }
  fit.schema = fit_schema(schema_turns, sets, ctx, fold_id);

  X_train.clear();
  y_train.clear();
  for (const auto& t : train_turns) {
    X_train.push_back(vectorize(assemble_features(t, fit.schema, ctx), fit.schema));
    y_train.push_back(ordinal(*t.gold_label));
  }

  fit.selected_cols.clear();
  if (cfg.pedagogical) {
    auto selected = select_pedagogical_features(X_train, fit.schema.names, y_train,
                                                cfg.pedagogical_k);
    for (const auto& n : selected) {
      auto it = fit.schema.index.find(n);
      if (it != fit.schema.index.end()) fit.selected_cols.push_back(it->second);
    }
    fit.names.clear();
    for (std::size_t c : fit.selected_cols) fit.names.push_back(fit.schema.names[c]);
    X_train = project_columns(X_train, fit.selected_cols);
    fit.standardizer.fit(X_train, std::vector<bool>(fit.names.size(), true));
  } else {
    fit.names = fit.schema.names;
    fit.standardizer.fit(X_train, dense_mask(fit.schema));
  }
  fit.standardizer.transform_in_place(X_train);
  return fit;
}

inline std::vector<double> fold_row(const Turn& t, const FoldFit& fit,
                                    const ExtractionContext& ctx) {
  auto row = vectorize(assemble_features(t, fit.schema, ctx), fit.schema);
  if (!fit.selected_cols.empty()) {
    std::vector<double> r;
    r.reserve(fit.selected_cols.size());
    for (std::size_t c : fit.selected_cols) r.push_back(row[c]);
    row = std::move(r);
  }
  return fit.standardizer.transform(std::move(row));
}

}  // namespace detail

// Per fold: fit vocabularies, standardizer and selection on the train split,
// train the configured model, score the test split.
inline EvalReport cross_validate(const std::vector<Turn>& turns, const CvConfig& cfg,
                                 const ExtractionContext& ctx, std::uint64_t seed) {
  cfg.validate();
  for (const auto& t : turns)
    if (!t.gold_label) throw DataError("cross_validate: unlabeled turn " + t.key());

  auto folds = stratified_folds(turns, cfg.folds, seed, cfg.group_by_transcript);

  EvalReport report;
  report.config_echo = cfg.to_json();
  report.config_echo["seed"] = seed;
  report.pooled = ConfusionMatrix(3);

  for (int f = 0; f < cfg.folds; ++f) {
    std::vector<Turn> train, test;
    for (const auto& t : turns)
      (folds.fold_of(t) == f ? test : train).push_back(t);
    if (train.empty() || test.empty())
      throw DataError("cross_validate: empty train or test split in fold " +
                      std::to_string(f));

    const std::vector<Turn>& schema_turns = cfg.fit_vocab_on_corpus ? turns : train;
    Matrix X_train;
    std::vector<int> y_train;
    auto fit = detail::fit_fold(schema_turns, train, cfg, ctx,
                                "fold" + std::to_string(f), X_train, y_train);

    ConfusionMatrix fold_matrix(3);
    if (cfg.model == "linear") {
      auto model = train_logistic(X_train, y_train, cfg.l2, seed);
      model.feature_names = fit.names;
      for (const auto& t : test)
        fold_matrix.add(ordinal(*t.gold_label), model.predict(detail::fold_row(t, fit, ctx)));
    } else {
      NeuralConfig ncfg = cfg.neural;
      ncfg.seed = seed + static_cast<std::uint64_t>(f);
      std::vector<JointSample> samples;
      samples.reserve(train.size());
      for (std::size_t i = 0; i < train.size(); ++i) {
        samples.push_back({encode_chars(train[i].text, ncfg.strict_charset, ncfg.max_chars),
                           X_train[i], y_train[i]});
      }
      auto model = train_joint(samples, ncfg);
      for (const auto& t : test) {
        auto fwd = model.forward(encode_chars(t.text, ncfg.strict_charset, ncfg.max_chars),
                                 detail::fold_row(t, fit, ctx));
        int best = 0;
        for (int l = 1; l < JointModel::n_labels; ++l)
          if (fwd.probs[static_cast<std::size_t>(l)] > fwd.probs[static_cast<std::size_t>(best)])
            best = l;
        fold_matrix.add(ordinal(*t.gold_label), best);
      }
    }

    report.fold_qwk.push_back(quadratic_weighted_kappa(fold_matrix));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) report.pooled.counts[i][j] += fold_matrix.counts[i][j];
  }

  report.mean_qwk = std::accumulate(report.fold_qwk.begin(), report.fold_qwk.end(), 0.0) /
                    static_cast<double>(report.fold_qwk.size());
  report.pooled_qwk = quadratic_weighted_kappa(report.pooled);

  // coefficient summary from a linear model trained on the full corpus
  if (cfg.model == "linear") {
    Matrix X_all;
    std::vector<int> y_all;
    auto fit = detail::fit_fold(turns, turns, cfg, ctx, "all", X_all, y_all);
    auto model = train_logistic(X_all, y_all, cfg.l2, seed);
    model.feature_names = fit.names;
    auto coefs = coefficient_report(model);
    if (coefs.size() > 50) coefs.resize(50);
    report.coefficients = std::move(coefs);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Text rendering

inline std::string render_report(const EvalReport& r) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  os << "Feature sets / model: " << r.config_echo["model"].get<std::string>() << " [";
  bool first = true;
  for (const auto& s : r.config_echo["feature_sets"]) {
    if (!first) os << " + ";
    os << s.get<std::string>();
    first = false;
  }
  os << "]\n";
  os << "Mean QWKappa:   " << r.mean_qwk << "\n";
  os << "Pooled QWKappa: " << r.pooled_qwk << "\n";
  os << "Per-fold:";
  for (double q : r.fold_qwk) os << " " << q;
  os << "\n\nConfusion (rows = ground truth, cols = predictions)\n";
  os << "          low     med    high\n";
  const char* names[3] = {"low ", "med ", "high"};
  for (int i = 0; i < 3; ++i) {
    os << names[i];
    for (int j = 0; j < 3; ++j) os << std::setw(8) << r.pooled.counts[i][j];
    os << "\n";
  }
  if (!r.coefficients.empty()) {
    os << "\nFeature                              Coefficient\n";
    for (const auto& [name, w] : r.coefficients) {
      os << std::left << std::setw(37) << name << std::right << std::setw(10) << w << "\n";
    }
  }
  return os.str();
}

}  // namespace specpred
