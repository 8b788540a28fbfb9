#pragma once

// A trained end-to-end pipeline: fitted schema + standardizer + model,
// serializable to JSON so `train` and `score` can round-trip it.

#include <fstream>
#include <optional>
#include <string>

#include <json.hpp>

#include "specpred/eval.hpp"

namespace specpred {

inline constexpr const char* toolkit_version = "0.1.0";
inline constexpr int format_version = 1;

struct TrainedPipeline {
  CvConfig config;
  FeatureSchema schema;
  Standardizer standardizer;
  std::vector<std::string> names;          // model input columns
  std::vector<std::size_t> selected_cols;  // non-empty for pedagogical runs
  std::optional<LinearModel> linear;
  std::optional<JointModel> joint;

  int predict(const Turn& t, const ExtractionContext& ctx) const {
    detail::FoldFit fit;
    fit.schema = schema;
    fit.standardizer = standardizer;
    fit.names = names;
    fit.selected_cols = selected_cols;
    auto row = detail::fold_row(t, fit, ctx);
    if (linear) return linear->predict(row);
    auto fwd = joint->forward(
        encode_chars(t.text, joint->config().strict_charset, joint->config().max_chars), row);
    int best = 0;
    for (int l = 1; l < JointModel::n_labels; ++l)
      if (fwd.probs[static_cast<std::size_t>(l)] > fwd.probs[static_cast<std::size_t>(best)])
        best = l;
    return best;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["toolkit_version"] = toolkit_version;
    j["format_version"] = format_version;
    j["config"] = config.to_json();
    nlohmann::json js;
    js["sets"] = std::vector<std::string>(schema.sets.begin(), schema.sets.end());
    js["names"] = schema.names;
    js["lexical_ngrams"] =
        std::vector<std::string>(schema.lexical.ngrams.begin(), schema.lexical.ngrams.end());
    js["lexical_idf"] = schema.lexical.idf.values;
    js["lexical_idf_n"] = schema.lexical.idf.corpus_size;
    js["pos_vocab"] = std::vector<std::string>(schema.pos_vocab.begin(), schema.pos_vocab.end());
    js["embedding_dim"] = schema.embedding_dim;
    j["schema"] = js;
    j["standardizer"] = {{"mean", standardizer.mean},
                         {"sd", standardizer.sd},
                         {"apply", standardizer.apply}};
    j["columns"] = names;
    j["selected_cols"] = selected_cols;
    if (linear) j["linear"] = linear->to_json();
    if (joint) j["joint"] = joint->to_json();
    return j;
  }

  static TrainedPipeline from_json(const nlohmann::json& j) {
    TrainedPipeline p;
    const auto& js = j.at("schema");
    for (const auto& s : js.at("sets")) p.schema.sets.insert(s.get<std::string>());
    p.schema.freeze_names(js.at("names").get<std::vector<std::string>>());
    for (const auto& g : js.at("lexical_ngrams"))
      p.schema.lexical.ngrams.insert(g.get<std::string>());
    p.schema.lexical.idf.values =
        js.at("lexical_idf").get<std::unordered_map<std::string, double>>();
    p.schema.lexical.idf.corpus_size = js.at("lexical_idf_n").get<double>();
    for (const auto& g : js.at("pos_vocab")) p.schema.pos_vocab.insert(g.get<std::string>());
    p.schema.embedding_dim = js.at("embedding_dim").get<std::size_t>();
    p.standardizer.mean = j.at("standardizer").at("mean").get<std::vector<double>>();
    p.standardizer.sd = j.at("standardizer").at("sd").get<std::vector<double>>();
    p.standardizer.apply = j.at("standardizer").at("apply").get<std::vector<bool>>();
    p.names = j.at("columns").get<std::vector<std::string>>();
    p.selected_cols = j.at("selected_cols").get<std::vector<std::size_t>>();
    if (j.contains("linear")) p.linear = LinearModel::from_json(j["linear"]);
    if (j.contains("joint")) p.joint = JointModel::from_json(j["joint"]);
    if (!p.linear && !p.joint) throw DataError("pipeline file has no model");
    return p;
  }
};

// Fit schema + standardizer + model on the full labeled corpus.
inline TrainedPipeline train_pipeline(const std::vector<Turn>& turns, const CvConfig& cfg,
                                      const ExtractionContext& ctx, std::uint64_t seed) {
  cfg.validate();
  for (const auto& t : turns)
    if (!t.gold_label) throw DataError("train_pipeline: unlabeled turn " + t.key());

  TrainedPipeline p;
  p.config = cfg;
  Matrix X;
  std::vector<int> y;
  auto fit = detail::fit_fold(turns, turns, cfg, ctx, "all", X, y);
  p.schema = fit.schema;
  p.standardizer = fit.standardizer;
  p.names = fit.names;
  p.selected_cols = fit.selected_cols;

  if (cfg.model == "linear") {
    auto model = train_logistic(X, y, cfg.l2, seed);
    model.feature_names = p.names;
    p.linear = std::move(model);
  } else {
    NeuralConfig ncfg = cfg.neural;
    ncfg.seed = seed;
    std::vector<JointSample> samples;
    samples.reserve(turns.size());
    for (std::size_t i = 0; i < turns.size(); ++i)
      samples.push_back({encode_chars(turns[i].text, ncfg.strict_charset, ncfg.max_chars),
                         X[i], y[i]});
    p.joint = train_joint(samples, ncfg);
  }
  return p;
}

inline void save_pipeline(const TrainedPipeline& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write model file: " + path);
  out << p.to_json().dump(2) << "\n";
}

inline TrainedPipeline load_pipeline(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": malformed model file: " + e.what());
  }
  return TrainedPipeline::from_json(j);
}

}  // namespace specpred
