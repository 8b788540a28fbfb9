#pragma once

// Data model for transcripts, books and labels; ingestion, synthetic corpus
// generation and stratified fold assignment.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "specpred/error.hpp"
#include "specpred/textproc.hpp"

namespace specpred {

// 0=low, 1=medium, 2=high; the order is meaningful (quadratic penalties).
enum class SpecificityLabel : int { Low = 0, Medium = 1, High = 2 };

inline int ordinal(SpecificityLabel l) { return static_cast<int>(l); }

inline SpecificityLabel label_from_string(const std::string& s) {
  if (s == "low") return SpecificityLabel::Low;
  if (s == "med") return SpecificityLabel::Medium;
  if (s == "high") return SpecificityLabel::High;
  throw DataError("label string outside {low, med, high}: \"" + s + "\"");
}

inline std::string to_string(SpecificityLabel l) {
  switch (l) {
    case SpecificityLabel::Low: return "low";
    case SpecificityLabel::Medium: return "med";
    case SpecificityLabel::High: return "high";
  }
  return "low";
}

struct Turn {
  std::string transcript_id;
  std::string turn_id;
  std::string speaker_id;
  std::string text;
  std::optional<SpecificityLabel> gold_label;
  std::optional<SpecificityLabel> second_label;  // second annotator, agreement only
  std::optional<double> external_score;          // e.g. an upstream specificity score
  std::optional<std::vector<std::string>> external_pos;
  std::optional<std::vector<EntitySpan>> external_entities;

  std::string key() const { return transcript_id + "/" + turn_id; }
};

struct CharacterName {
  std::string first;
  std::optional<std::string> last;
  std::vector<std::string> nicknames;
};

struct Book {
  std::string title;
  std::vector<CharacterName> characters;
  std::string summary_text;
  std::vector<std::string> summary_sentences;  // split_sentences(summary_text)
};

struct FoldAssignment {
  int k = 0;
  std::unordered_map<std::string, int> assignment;  // turn key -> fold

  int fold_of(const Turn& t) const {
    auto it = assignment.find(t.key());
    if (it == assignment.end()) throw DataError("turn not in fold assignment: " + t.key());
    return it->second;
  }
};

inline Turn turn_from_json(const nlohmann::json& j) {
  Turn t;
  t.transcript_id = j.at("transcript_id").get<std::string>();
  t.turn_id = j.at("turn_id").get<std::string>();
  t.speaker_id = j.at("speaker_id").get<std::string>();
  t.text = j.at("text").get<std::string>();
  if (detail::trim(t.text).empty()) throw DataError("turn text empty after trim");
  if (j.contains("label") && !j["label"].is_null())
    t.gold_label = label_from_string(j["label"].get<std::string>());
  if (j.contains("label2") && !j["label2"].is_null())
    t.second_label = label_from_string(j["label2"].get<std::string>());
  if (j.contains("score") && !j["score"].is_null()) {
    double s = j["score"].get<double>();
    if (s < 0.0 || s > 1.0) throw DataError("score out of range [0,1]");
    t.external_score = s;
  }
  if (j.contains("pos") && !j["pos"].is_null()) {
    auto pos = j["pos"].get<std::vector<std::string>>();
    if (pos.size() != tokenize(t.text).size())
      throw DataError("pos tag count does not match token count");
    t.external_pos = std::move(pos);
  }
  if (j.contains("entities") && !j["entities"].is_null()) {
    std::vector<EntitySpan> spans;
    int ntok = static_cast<int>(tokenize(t.text).size());
    int prev_end = 0;
    for (const auto& e : j["entities"]) {
      EntitySpan span;
      span.token_start = e.at("start").get<int>();
      span.token_end = e.at("end").get<int>();
      span.category = entity_category_from_string(e.at("category").get<std::string>());
      if (span.token_start < 0 || span.token_start >= span.token_end ||
          span.token_end > ntok || span.token_start < prev_end)
        throw DataError("invalid entity span");
      prev_end = span.token_end;
      spans.push_back(span);
    }
    t.external_entities = std::move(spans);
  }
  return t;
}

inline nlohmann::json turn_to_json(const Turn& t) {
  nlohmann::json j;
  j["transcript_id"] = t.transcript_id;
  j["turn_id"] = t.turn_id;
  j["speaker_id"] = t.speaker_id;
  j["text"] = t.text;
  if (t.gold_label) j["label"] = to_string(*t.gold_label);
  if (t.second_label) j["label2"] = to_string(*t.second_label);
  if (t.external_score) j["score"] = *t.external_score;
  if (t.external_pos) j["pos"] = *t.external_pos;
  if (t.external_entities) {
    nlohmann::json spans = nlohmann::json::array();
    for (const auto& s : *t.external_entities) {
      spans.push_back({{"start", s.token_start},
                       {"end", s.token_end},
                       {"category", to_string(s.category)}});
    }
    j["entities"] = spans;
  }
  return j;
}

// One JSON object per line; duplicate (transcript_id, turn_id) pairs rejected.
inline std::vector<Turn> load_transcripts(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open transcript file: " + path);
  std::vector<Turn> turns;
  std::unordered_set<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    Turn t;
    try {
      t = turn_from_json(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": malformed record: " + e.what());
    } catch (const DataError& e) {
      throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (!seen.insert(t.key()).second)
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": duplicate (transcript_id, turn_id): " + t.key());
    turns.push_back(std::move(t));
  }
  return turns;
}

inline Book book_from_json(const nlohmann::json& j) {
  Book b;
  b.title = j.at("title").get<std::string>();
  if (!j.contains("summary")) throw DataError("book missing summary");
  b.summary_text = j["summary"].get<std::string>();
  if (j.contains("characters")) {
    for (const auto& c : j["characters"]) {
      CharacterName name;
      name.first = c.at("first").get<std::string>();
      if (name.first.empty()) throw DataError("character with empty first name");
      if (c.contains("last") && !c["last"].is_null())
        name.last = c["last"].get<std::string>();
      if (c.contains("nicknames"))
        name.nicknames = c["nicknames"].get<std::vector<std::string>>();
      b.characters.push_back(std::move(name));
    }
  }
  b.summary_sentences = split_sentences(b.summary_text);
  return b;
}

inline Book load_book(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open book file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": malformed book file: " + e.what());
  }
  try {
    return book_from_json(j);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

// Per label, shuffle then deal round-robin: per-fold counts of each label
// differ by at most one.
inline FoldAssignment stratified_folds(const std::vector<Turn>& turns, int k,
                                       std::uint64_t seed,
                                       bool group_by_transcript = false) {
  if (k < 2) throw DataError("fold count must be >= 2");
  for (const auto& t : turns)
    if (!t.gold_label) throw DataError("unlabeled turn present: " + t.key());

  FoldAssignment fa;
  fa.k = k;

  if (group_by_transcript) {
    // Greedy: largest transcripts first onto the currently smallest fold.
    std::map<std::string, std::vector<const Turn*>> by_tr;
    for (const auto& t : turns) by_tr[t.transcript_id].push_back(&t);
    std::vector<std::pair<std::string, std::size_t>> sizes;
    for (const auto& [id, v] : by_tr) sizes.push_back({id, v.size()});
    std::sort(sizes.begin(), sizes.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    std::vector<std::size_t> load(k, 0);
    for (const auto& [id, sz] : sizes) {
      int best = 0;
      for (int f = 1; f < k; ++f)
        if (load[f] < load[best]) best = f;
      load[best] += sz;
      for (const Turn* t : by_tr[id]) fa.assignment[t->key()] = best;
    }
    return fa;
  }

  std::map<int, std::vector<std::string>> by_label;
  for (const auto& t : turns) by_label[ordinal(*t.gold_label)].push_back(t.key());
  std::mt19937_64 rng(seed);
  int start = 0;
  for (auto& [label, keys] : by_label) {
    if (static_cast<int>(keys.size()) < k)
      throw DataError("k larger than smallest label count");
    std::shuffle(keys.begin(), keys.end(), rng);
    for (std::size_t i = 0; i < keys.size(); ++i)
      fa.assignment[keys[i]] = (start + static_cast<int>(i)) % k;
    start = (start + static_cast<int>(keys.size())) % k;
  }
  return fa;
}

// ---------------------------------------------------------------------------
// Synthetic corpus
//
// Labels correlate with turn length, connective count, book-vocabulary
// density and character-name mentions; strong enough that a sound pipeline
// reaches QWK > 0.6 under 10-fold CV. Word pools match the lexicon fixtures
// shipped under data/lexicons.

namespace synth {

inline const std::vector<std::string>& filler_words() {
  static const std::vector<std::string> v = {
      "the", "a", "of", "to", "and", "in", "it", "is", "was", "that",
      "i", "you", "we", "they", "she", "he", "like", "just", "kind",
      "really", "thing", "stuff", "people", "good", "idea", "mean",
      "think", "know", "sort", "maybe"};
  return v;
}

inline const std::vector<std::string>& content_words() {
  static const std::vector<std::string> v = {
      "lantern", "harbor", "keeper", "tide", "lighthouse", "storm",
      "promise", "letter", "voyage", "secret", "signal", "shore",
      "fisherman", "anchor", "beacon", "captain", "wreck", "journal"};
  return v;
}

inline const std::vector<std::string>& connective_phrases() {
  static const std::vector<std::string> v = {
      "because", "so", "but", "however", "for example", "on the other hand",
      "as a result", "in addition"};
  return v;
}

inline const std::vector<std::string>& character_names() {
  static const std::vector<std::string> v = {"Willa", "Bram", "Mara"};
  return v;
}

}  // namespace synth

// The book the synthetic discussions are "about"; its summary reuses the
// generator's content vocabulary.
inline Book synthetic_book() {
  nlohmann::json j = {
      {"title", "The Lantern Keeper"},
      {"characters",
       nlohmann::json::array({{{"first", "Willa"},
                               {"last", "Hart"},
                               {"nicknames", nlohmann::json::array({"Will"})}},
                              {{"first", "Bram"}, {"last", "Okafor"}},
                              {{"first", "Mara"}}})},
      {"summary",
       "Willa Hart tends the lantern in the harbor lighthouse. A storm wrecks "
       "the voyage of captain Bram Okafor and his letter washes to the shore. "
       "Mara finds the journal and keeps the secret of the wreck. The keeper "
       "lights the beacon and the tide carries a signal to the fisherman. "
       "Willa breaks her promise and drops the anchor at the wreck. In the end "
       "the harbor learns the secret from the letter."}};
  return book_from_json(j);
}

inline std::vector<Turn> generate_synthetic_corpus(std::uint64_t seed, int n) {
  if (n < 30) throw DataError("synthetic corpus needs n >= 30");
  std::mt19937_64 rng(seed);
  auto pick = [&](const std::vector<std::string>& pool) {
    return pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
  };
  auto uni = [&](int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); };

  std::vector<Turn> turns;
  turns.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    int label = u < 0.35 ? 0 : (u < 0.80 ? 1 : 2);

    int n_words, n_conn, n_names, n_content;
    if (label == 0) {
      n_words = uni(3, 7);
      n_conn = uni(0, 9) == 0 ? 1 : 0;
      n_names = uni(0, 9) == 0 ? 1 : 0;
      n_content = uni(0, 19) == 0 ? 1 : 0;
    } else if (label == 1) {
      n_words = uni(10, 16);
      n_conn = 1;
      n_names = uni(0, 4) == 0 ? 1 : 0;
      n_content = uni(1, 2);
    } else {
      n_words = uni(20, 30);
      n_conn = uni(3, 4);
      n_names = uni(1, 3);
      n_content = uni(4, 7);
    }

    std::vector<std::string> words;
    for (int c = 0; c < n_conn; ++c) words.push_back(pick(synth::connective_phrases()));
    for (int c = 0; c < n_names; ++c) words.push_back(pick(synth::character_names()));
    for (int c = 0; c < n_content; ++c) words.push_back(pick(synth::content_words()));
    while (static_cast<int>(words.size()) < n_words)
      words.push_back(pick(synth::filler_words()));
    std::shuffle(words.begin(), words.end(), rng);

    std::string text;
    for (std::size_t w = 0; w < words.size(); ++w) {
      if (w) text += ' ';
      text += words[w];
    }
    if (!text.empty())
      text[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
    text += '.';

    Turn t;
    t.transcript_id = "synthetic";
    t.turn_id = "t" + std::to_string(1000 + i);
    t.speaker_id = "S" + std::to_string(1 + uni(0, 7));
    t.text = std::move(text);
    t.gold_label = static_cast<SpecificityLabel>(label);
    turns.push_back(std::move(t));
  }
  return turns;
}

}  // namespace specpred
