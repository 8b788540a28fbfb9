// Command-line front end: ingestion, feature extraction, cross-validation,
// training, scoring, threshold search, information-gain ranking, inter-rater
// agreement and synthetic corpus generation.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "specpred/pipeline.hpp"

namespace {

using namespace specpred;

constexpr int exit_config_error = 2;
constexpr int exit_data_error = 3;
constexpr int exit_runtime_error = 4;

struct ExperimentConfig {
  std::string corpus;
  std::string lexicons;
  std::string gazetteer;
  std::string tagger_corpus;
  std::map<std::string, std::string> books;  // transcript_id (or "*") -> path

  std::string feature_sets = "speciteller";  // plus-separated; "embeddings" => joint
  std::string model = "linear";
  bool pedagogical = false;
  int folds = 10;
  std::uint64_t seed = 7;
  double l2 = 1.0;
  double threshold_step = 0.001;
  std::string fit_vocab = "train";  // train | corpus
  bool group_by_transcript = false;
  bool allow_missing_lexicons = false;
  int jobs = 1;
  NeuralConfig neural;
};

// Key-value file with [section] headers; keys are flattened to section.key.
std::map<std::string, std::string> read_ini(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line, section;
  while (std::getline(in, line)) {
    line = detail::trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[' && line.back() == ']') {
      section = line.substr(1, line.size() - 2);
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("malformed config line: " + line);
    std::string key = detail::trim(line.substr(0, eq));
    std::string value = detail::trim(line.substr(eq + 1));
    kv[section.empty() ? key : section + "." + key] = value;
  }
  return kv;
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key " + key + " wants a boolean, got \"" + v + "\"");
}

void apply_config_file(ExperimentConfig& cfg, const std::string& path) {
  for (const auto& [key, value] : read_ini(path)) {
    if (key == "data.corpus") cfg.corpus = value;
    else if (key == "data.lexicons") cfg.lexicons = value;
    else if (key == "data.gazetteer") cfg.gazetteer = value;
    else if (key == "data.tagger_corpus") cfg.tagger_corpus = value;
    else if (key.rfind("data.book.", 0) == 0) cfg.books[key.substr(10)] = value;
    else if (key == "experiment.feature_sets") cfg.feature_sets = value;
    else if (key == "experiment.model") cfg.model = value;
    else if (key == "experiment.pedagogical") cfg.pedagogical = parse_bool(value, key);
    else if (key == "experiment.folds") cfg.folds = std::stoi(value);
    else if (key == "experiment.seed") cfg.seed = std::stoull(value);
    else if (key == "experiment.l2") cfg.l2 = std::stod(value);
    else if (key == "experiment.threshold_step") cfg.threshold_step = std::stod(value);
    else if (key == "experiment.fit_vocab") cfg.fit_vocab = value;
    else if (key == "experiment.group_by_transcript")
      cfg.group_by_transcript = parse_bool(value, key);
    else if (key == "neural.hidden") cfg.neural.hidden = std::stoi(value);
    else if (key == "neural.fc_out") cfg.neural.fc_out = std::stoi(value);
    else if (key == "neural.learning_rate") cfg.neural.learning_rate = std::stod(value);
    else if (key == "neural.batch_size") cfg.neural.batch_size = std::stoi(value);
    else if (key == "neural.max_epochs") cfg.neural.max_epochs = std::stoi(value);
    else if (key == "neural.patience") cfg.neural.patience = std::stoi(value);
    else if (key == "neural.max_chars") cfg.neural.max_chars = std::stoi(value);
    else if (key == "neural.strict_charset")
      cfg.neural.strict_charset = parse_bool(value, key);
    else throw ConfigError("unknown config key: " + key);
  }
}

CvConfig make_cv_config(const ExperimentConfig& cfg) {
  CvConfig cv;
  std::string sets = cfg.feature_sets;
  std::replace(sets.begin(), sets.end(), ',', '+');
  std::istringstream ss(sets);
  std::string item;
  bool embeddings = false;
  while (std::getline(ss, item, '+')) {
    item = detail::trim(item);
    if (item.empty()) continue;
    if (item == "embeddings") {
      embeddings = true;
    } else if (item == "pedagogical") {
      cv.pedagogical = true;
    } else {
      cv.feature_sets.insert(item);
    }
  }
  cv.model = embeddings ? "joint" : cfg.model;
  if (cv.pedagogical && cv.feature_sets.empty())
    cv.feature_sets = {"speciteller", "pronoun", "ne", "book"};
  cv.folds = cfg.folds;
  cv.l2 = cfg.l2;
  cv.fit_vocab_on_corpus = cfg.fit_vocab == "corpus";
  cv.group_by_transcript = cfg.group_by_transcript;
  cv.neural = cfg.neural;
  cv.validate();
  return cv;
}

struct LoadedContext {
  LexiconBundle bundle;
  std::optional<PosTagger> tagger;
  std::optional<Gazetteer> gazetteer;
  ExtractionContext ctx;
};

LoadedContext build_context(const ExperimentConfig& cfg, const CvConfig& cv) {
  LoadedContext lc;
  if (cfg.lexicons.empty() || !std::filesystem::is_directory(cfg.lexicons)) {
    if (!cfg.allow_missing_lexicons)
      throw ConfigError("lexicon directory missing: \"" + cfg.lexicons +
                        "\" (use --allow-missing-lexicons to proceed with empty tables)");
    std::cerr << "warning: proceeding with empty lexicon tables\n";
  } else {
    lc.bundle = load_bundle(cfg.lexicons);
  }
  if (cv.feature_sets.count("syntactic") && !cfg.tagger_corpus.empty()) {
    lc.tagger = train_pos_tagger(load_tagged_corpus(cfg.tagger_corpus), 8, cfg.seed);
  }
  if (!cfg.gazetteer.empty()) lc.gazetteer = load_gazetteer(cfg.gazetteer);
  lc.ctx.bundle = &lc.bundle;
  if (lc.tagger) lc.ctx.tagger = &*lc.tagger;
  if (lc.gazetteer) lc.ctx.gazetteer = &*lc.gazetteer;
  for (const auto& [id, path] : cfg.books) lc.ctx.books[id] = load_book(path);
  return lc;
}

std::vector<Turn> load_corpus_or_throw(const ExperimentConfig& cfg) {
  if (cfg.corpus.empty()) throw ConfigError("no corpus file configured");
  return load_transcripts(cfg.corpus);
}

nlohmann::json meta_block() {
  auto now = std::chrono::system_clock::now();
  return {{"toolkit_version", toolkit_version},
          {"format_version", format_version},
          {"timestamp",
           std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count()}};
}

void write_json(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write output file: " + path);
  out << j.dump(2) << "\n";
}

int run(int argc, char** argv) {
  CLI::App app{"Specificity prediction toolkit for classroom discussion transcripts"};
  app.set_version_flag("--version", std::string("specpred ") + toolkit_version +
                                        " (format " + std::to_string(format_version) + ")");
  app.require_subcommand(1);

  ExperimentConfig cfg;
  std::string config_path, out_path, model_path;
  int synth_n = 300;
  int ig_top = 30;

  // Config file values become defaults; explicit flags override them, so the
  // file is applied before CLI11 parses.
  for (int i = 1; i + 1 < argc; ++i) {
    std::string a = argv[i];
    if (a == "-c" || a == "--config") config_path = argv[i + 1];
  }
  if (!config_path.empty()) apply_config_file(cfg, config_path);

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "experiment config file");
    sub->add_option("--corpus", cfg.corpus, "transcript file (JSONL)");
    sub->add_option("--lexicons", cfg.lexicons, "lexicon directory");
    sub->add_option("--gazetteer", cfg.gazetteer, "gazetteer tsv");
    sub->add_option("--tagger-corpus", cfg.tagger_corpus, "POS tagger training corpus");
    sub->add_option("--book", cfg.books["*"], "default book file");
    sub->add_option("--feature-sets", cfg.feature_sets,
                    "plus-separated sets, e.g. speciteller+semantic+embeddings");
    sub->add_option("--model", cfg.model, "linear | joint");
    sub->add_option("--folds", cfg.folds, "cross-validation folds");
    sub->add_option("--seed", cfg.seed, "random seed");
    sub->add_option("--l2", cfg.l2, "L2 regularization strength");
    sub->add_option("--step", cfg.threshold_step, "threshold grid step");
    sub->add_option("--fit-vocab", cfg.fit_vocab, "train | corpus");
    sub->add_flag("--group-by-transcript", cfg.group_by_transcript,
                  "fold by transcript instead of by turn");
    sub->add_flag("--pedagogical", cfg.pedagogical, "interpretable feature selection");
    sub->add_flag("--allow-missing-lexicons", cfg.allow_missing_lexicons,
                  "proceed with empty lexicon tables");
    sub->add_option("--jobs", cfg.jobs, "parallelism degree (default 1, reproducible)");
    sub->add_option("--hidden", cfg.neural.hidden, "LSTM hidden size");
  };

  auto* c_ingest = app.add_subcommand("ingest", "validate and normalize a corpus");
  auto* c_extract = app.add_subcommand("extract", "emit the feature matrix as CSV");
  auto* c_cv = app.add_subcommand("cv", "cross-validated evaluation report");
  auto* c_train = app.add_subcommand("train", "train a model on the full corpus");
  auto* c_score = app.add_subcommand("score", "label turns with a trained model");
  auto* c_thresholds =
      app.add_subcommand("thresholds", "grid-search thresholds on external scores");
  auto* c_ig = app.add_subcommand("ig-report", "information-gain feature ranking");
  auto* c_kappa = app.add_subcommand("kappa", "inter-rater agreement (QWK)");
  auto* c_synth = app.add_subcommand("synth", "generate a synthetic labeled corpus");

  for (auto* sub : {c_ingest, c_extract, c_cv, c_train, c_score, c_thresholds, c_ig,
                    c_kappa, c_synth})
    add_common(sub);
  for (auto* sub : {c_ingest, c_extract, c_cv, c_train, c_score, c_thresholds, c_synth})
    sub->add_option("-o,--out", out_path, "output file");
  c_score->add_option("-m,--model-file", model_path, "trained model file")->required();
  c_synth->add_option("-n,--count", synth_n, "number of turns");
  c_ig->add_option("--top", ig_top, "rows to print");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (c_synth->parsed()) {
    auto turns = generate_synthetic_corpus(cfg.seed, synth_n);
    std::ostringstream os;
    for (const auto& t : turns) os << turn_to_json(t).dump() << "\n";
    if (out_path.empty()) {
      std::cout << os.str();
    } else {
      std::ofstream out(out_path);
      if (!out) throw DataError("cannot write output file: " + out_path);
      out << os.str();
    }
    return 0;
  }

  if (c_kappa->parsed()) {
    auto turns = load_corpus_or_throw(cfg);
    std::vector<int> a, b;
    for (const auto& t : turns) {
      if (t.gold_label && t.second_label) {
        a.push_back(ordinal(*t.gold_label));
        b.push_back(ordinal(*t.second_label));
      }
    }
    if (a.empty()) throw DataError("no double-coded turns (need label and label2)");
    std::cout << "double-coded turns: " << a.size() << "\n";
    std::cout << "quadratic-weighted kappa: " << interrater_agreement(a, b) << "\n";
    return 0;
  }

  if (c_ingest->parsed()) {
    auto turns = load_corpus_or_throw(cfg);
    std::ostringstream os;
    for (const auto& t : turns) os << turn_to_json(t).dump() << "\n";
    if (out_path.empty()) {
      std::cout << os.str();
    } else {
      std::ofstream out(out_path);
      if (!out) throw DataError("cannot write output file: " + out_path);
      out << os.str();
    }
    std::cerr << "validated " << turns.size() << " turns\n";
    return 0;
  }

  if (c_thresholds->parsed()) {
    auto turns = load_corpus_or_throw(cfg);
    std::vector<double> scores;
    std::vector<int> labels;
    for (const auto& t : turns) {
      if (!t.external_score || !t.gold_label) continue;
      scores.push_back(*t.external_score);
      labels.push_back(ordinal(*t.gold_label));
    }
    if (scores.empty()) throw DataError("no turns with both score and label");
    auto [best, qwk] = search_thresholds(scores, labels, cfg.threshold_step);
    std::cout << "t1=" << best.t1 << " t2=" << best.t2 << " qwk=" << qwk << "\n";
    if (!out_path.empty())
      write_json({{"meta", meta_block()},
                  {"t1", best.t1},
                  {"t2", best.t2},
                  {"qwk", qwk},
                  {"n", scores.size()}},
                 out_path);
    return 0;
  }

  // remaining subcommands need features
  auto cv_config = make_cv_config(cfg);
  auto lc = build_context(cfg, cv_config);
  auto turns = load_corpus_or_throw(cfg);

  if (c_extract->parsed()) {
    if (out_path.empty()) throw ConfigError("extract needs --out");
    std::set<std::string> sets = cv_config.feature_sets;
    auto schema = fit_schema(turns, sets, lc.ctx, "corpus");
    export_feature_matrix(turns, schema, lc.ctx, out_path);
    std::cerr << "wrote " << schema.names.size() << " features for " << turns.size()
              << " turns\n";
    return 0;
  }

  if (c_ig->parsed()) {
    std::vector<Turn> labeled;
    for (const auto& t : turns)
      if (t.gold_label) labeled.push_back(t);
    if (labeled.size() < 2) throw DataError("ig-report needs labeled turns");
    auto schema = fit_schema(labeled, cv_config.feature_sets, lc.ctx, "corpus");
    Matrix X;
    std::vector<int> y;
    for (const auto& t : labeled) {
      X.push_back(vectorize(assemble_features(t, schema, lc.ctx), schema));
      y.push_back(ordinal(*t.gold_label));
    }
    std::vector<std::pair<double, std::string>> ranked;
    for (std::size_t j = 0; j < schema.names.size(); ++j) {
      std::vector<double> col(X.size());
      for (std::size_t i = 0; i < X.size(); ++i) col[i] = X[i][j];
      ranked.push_back({information_gain(col, y), schema.names[j]});
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    std::cout << "information gain (bits)  feature\n";
    for (int i = 0; i < ig_top && i < static_cast<int>(ranked.size()); ++i)
      std::cout << "  " << ranked[static_cast<std::size_t>(i)].first << "\t"
                << ranked[static_cast<std::size_t>(i)].second << "\n";
    return 0;
  }

  if (c_cv->parsed()) {
    auto report = cross_validate(turns, cv_config, lc.ctx, cfg.seed);
    nlohmann::json j = {{"meta", meta_block()}, {"report", report.to_json()}};
    if (out_path.empty()) out_path = "cv_report.json";
    write_json(j, out_path);
    std::cout << render_report(report);
    std::cerr << "report written to " << out_path << "\n";
    return 0;
  }

  if (c_train->parsed()) {
    if (out_path.empty()) throw ConfigError("train needs --out");
    auto pipeline = train_pipeline(turns, cv_config, lc.ctx, cfg.seed);
    save_pipeline(pipeline, out_path);
    std::cerr << "model written to " << out_path << "\n";
    return 0;
  }

  if (c_score->parsed()) {
    auto pipeline = load_pipeline(model_path);
    std::ostringstream os;
    std::vector<int> y_true, y_pred;
    for (const auto& t : turns) {
      int pred = pipeline.predict(t, lc.ctx);
      auto j = turn_to_json(t);
      j["predicted"] = to_string(static_cast<SpecificityLabel>(pred));
      os << j.dump() << "\n";
      if (t.gold_label) {
        y_true.push_back(ordinal(*t.gold_label));
        y_pred.push_back(pred);
      }
    }
    if (out_path.empty()) {
      std::cout << os.str();
    } else {
      std::ofstream out(out_path);
      if (!out) throw DataError("cannot write output file: " + out_path);
      out << os.str();
    }
    if (y_true.size() == turns.size() && !turns.empty()) {
      std::cerr << "qwk against gold labels: "
                << quadratic_weighted_kappa(confusion_matrix(y_true, y_pred)) << "\n";
    }
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const specpred::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_config_error;
  } catch (const specpred::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return exit_data_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_runtime_error;
  }
}
