#pragma once

// Tokenization, sentence splitting, averaged-perceptron POS tagging and
// gazetteer-based named entity recognition.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "specpred/error.hpp"

namespace specpred {

enum class TokenKind { Word, Number, Punct };

struct Token {
  std::string text;
  TokenKind kind = TokenKind::Word;
  std::size_t char_start = 0;  // byte offsets into the original string
  std::size_t char_end = 0;
};

namespace detail {

inline bool is_space_byte(unsigned char c) { return std::isspace(c) != 0; }
inline bool is_digit_byte(unsigned char c) { return std::isdigit(c) != 0; }
// Non-ASCII bytes are treated as letters so UTF-8 words stay intact.
inline bool is_word_byte(unsigned char c) {
  return std::isalpha(c) != 0 || c >= 0x80;
}

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && is_space_byte(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && is_space_byte(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

}  // namespace detail

// Whitespace-delimited chunks, clitics split on apostrophe ("it's" ->
// "it", "'s"), digit runs with an optional decimal point form one number
// token, every other symbol is a single punctuation token.
inline std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> out;
  const std::size_t n = text.size();
  std::size_t i = 0;
  while (i < n) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    if (detail::is_space_byte(c)) {
      ++i;
      continue;
    }
    std::size_t start = i;
    if (detail::is_digit_byte(c)) {
      ++i;
      while (i < n && detail::is_digit_byte(static_cast<unsigned char>(text[i]))) ++i;
      if (i + 1 < n && text[i] == '.' &&
          detail::is_digit_byte(static_cast<unsigned char>(text[i + 1]))) {
        i += 2;
        while (i < n && detail::is_digit_byte(static_cast<unsigned char>(text[i]))) ++i;
      }
      out.push_back({text.substr(start, i - start), TokenKind::Number, start, i});
    } else if (detail::is_word_byte(c) ||
               (c == '\'' && i + 1 < n &&
                detail::is_word_byte(static_cast<unsigned char>(text[i + 1])))) {
      if (c == '\'') ++i;  // clitic leads with the apostrophe
      while (i < n && detail::is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
      out.push_back({text.substr(start, i - start), TokenKind::Word, start, i});
    } else {
      ++i;
      out.push_back({text.substr(start, i - start), TokenKind::Punct, start, i});
    }
  }
  return out;
}

inline std::string lower_ascii(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

inline const std::set<std::string>& sentence_abbreviations() {
  static const std::set<std::string> abbrevs = {
      "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "vs",
      "etc", "e.g", "i.e", "inc", "co", "capt", "gen", "rev"};
  return abbrevs;
}

// Split on . ! ? followed by whitespace and a capital letter; a period
// preceded by a known abbreviation does not split.
inline std::vector<std::string> split_sentences(const std::string& text) {
  std::vector<std::string> out;
  const std::size_t n = text.size();
  std::size_t sent_start = 0;
  auto flush = [&](std::size_t end) {
    std::size_t a = sent_start;
    while (a < end && detail::is_space_byte(static_cast<unsigned char>(text[a]))) ++a;
    std::size_t b = end;
    while (b > a && detail::is_space_byte(static_cast<unsigned char>(text[b - 1]))) --b;
    if (b > a) out.push_back(text.substr(a, b - a));
  };
  for (std::size_t i = 0; i < n; ++i) {
    char c = text[i];
    if (c != '.' && c != '!' && c != '?') continue;
    std::size_t j = i + 1;
    std::size_t ws = 0;
    while (j < n && detail::is_space_byte(static_cast<unsigned char>(text[j]))) {
      ++j;
      ++ws;
    }
    bool boundary = ws > 0 && j < n &&
                    std::isupper(static_cast<unsigned char>(text[j])) != 0;
    if (boundary && c == '.') {
      std::size_t w_end = i;
      std::size_t w_start = w_end;
      while (w_start > sent_start &&
             detail::is_word_byte(static_cast<unsigned char>(text[w_start - 1]))) {
        --w_start;
      }
      std::string word = lower_ascii(text.substr(w_start, w_end - w_start));
      if (sentence_abbreviations().count(word)) boundary = false;
    }
    if (boundary) {
      flush(i + 1);
      sent_start = j;
      i = j - 1;
    }
  }
  flush(n);
  return out;
}

// ---------------------------------------------------------------------------
// Averaged-perceptron POS tagger

struct TaggedSentence {
  std::vector<std::string> tokens;
  std::vector<std::string> tags;
};

class PosTagger {
 public:
  using WeightTable = std::map<std::string, std::map<std::string, double>>;

  const std::set<std::string>& tagset() const { return tagset_; }
  const WeightTable& weights() const { return weights_; }

  void train(const std::vector<TaggedSentence>& corpus, int epochs, std::uint64_t seed) {
    if (corpus.empty()) throw DataError("pos tagger: empty training corpus");
    for (const auto& s : corpus) {
      if (s.tokens.size() != s.tags.size())
        throw DataError("pos tagger: token/tag length mismatch");
      for (const auto& t : s.tags) tagset_.insert(t);
    }
    weights_.clear();
    WeightTable totals;
    std::map<std::string, std::map<std::string, std::uint64_t>> stamps;
    std::uint64_t step = 0;
    std::vector<std::size_t> order(corpus.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937_64 rng(seed);
    for (int ep = 0; ep < epochs; ++ep) {
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t si : order) {
        const auto& sent = corpus[si];
        std::string prev = "-START-", prev2 = "-START2-";
        for (std::size_t i = 0; i < sent.tokens.size(); ++i) {
          auto feats = features(sent.tokens, i, prev, prev2);
          std::string guess = best_tag(feats);
          const std::string& truth = sent.tags[i];
          ++step;
          if (guess != truth) {
            for (const auto& f : feats) {
              update(totals, stamps, step, f, truth, 1.0);
              update(totals, stamps, step, f, guess, -1.0);
            }
          }
          prev2 = prev;
          prev = truth;
        }
      }
    }
    // fold outstanding averages in
    for (auto& [feat, by_tag] : weights_) {
      for (auto& [tag, w] : by_tag) {
        totals[feat][tag] +=
            static_cast<double>(step - stamps[feat][tag]) * w;
        w = totals[feat][tag] / static_cast<double>(step);
      }
    }
  }

  std::vector<std::string> tag(const std::vector<Token>& tokens) const {
    std::vector<std::string> words;
    words.reserve(tokens.size());
    for (const auto& t : tokens) words.push_back(t.text);
    return tag_words(words);
  }

  std::vector<std::string> tag_words(const std::vector<std::string>& words) const {
    std::vector<std::string> tags;
    tags.reserve(words.size());
    std::string prev = "-START-", prev2 = "-START2-";
    for (std::size_t i = 0; i < words.size(); ++i) {
      auto feats = features(words, i, prev, prev2);
      std::string t = best_tag(feats);
      tags.push_back(t);
      prev2 = prev;
      prev = t;
    }
    return tags;
  }

 private:
  void update(WeightTable& totals,
              std::map<std::string, std::map<std::string, std::uint64_t>>& stamps,
              std::uint64_t step, const std::string& feat, const std::string& tag,
              double delta) {
    double& w = weights_[feat][tag];
    totals[feat][tag] += static_cast<double>(step - stamps[feat][tag]) * w;
    stamps[feat][tag] = step;
    w += delta;
  }

  std::string best_tag(const std::vector<std::string>& feats) const {
    std::map<std::string, double> scores;
    for (const auto& f : feats) {
      auto it = weights_.find(f);
      if (it == weights_.end()) continue;
      for (const auto& [tag, w] : it->second) scores[tag] += w;
    }
    // std::map iteration gives the lexicographically smallest tag on ties
    std::string best;
    double best_score = -1e300;
    for (const auto& tag : tagset_) {
      double s = 0.0;
      auto it = scores.find(tag);
      if (it != scores.end()) s = it->second;
      if (s > best_score) {
        best_score = s;
        best = tag;
      }
    }
    return best.empty() ? std::string("NN") : best;
  }

  static std::string suffix3(const std::string& w) {
    return w.size() > 3 ? w.substr(w.size() - 3) : w;
  }

  static std::vector<std::string> features(const std::vector<std::string>& words,
                                           std::size_t i, const std::string& prev,
                                           const std::string& prev2) {
    const std::string w = lower_ascii(words[i]);
    std::vector<std::string> f;
    f.reserve(12);
    f.push_back("bias");
    f.push_back("w=" + w);
    f.push_back("suf=" + suffix3(w));
    f.push_back("pre=" + w.substr(0, 1));
    f.push_back("t-1=" + prev);
    f.push_back("t-2,t-1=" + prev2 + "|" + prev);
    f.push_back("w-1=" + (i > 0 ? lower_ascii(words[i - 1]) : std::string("-START-")));
    f.push_back("w+1=" + (i + 1 < words.size() ? lower_ascii(words[i + 1])
                                               : std::string("-END-")));
    bool cap = !words[i].empty() &&
               std::isupper(static_cast<unsigned char>(words[i][0])) != 0;
    bool digit = !words[i].empty() &&
                 std::isdigit(static_cast<unsigned char>(words[i][0])) != 0;
    if (cap) f.push_back("cap");
    if (digit) f.push_back("digit");
    return f;
  }

  WeightTable weights_;
  std::set<std::string> tagset_;
};

inline PosTagger train_pos_tagger(const std::vector<TaggedSentence>& corpus,
                                  int epochs, std::uint64_t seed) {
  PosTagger tagger;
  tagger.train(corpus, epochs, seed);
  return tagger;
}

// One sentence per line, token_tag pairs space-separated.
inline std::vector<TaggedSentence> load_tagged_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open tagger corpus: " + path);
  std::vector<TaggedSentence> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    TaggedSentence sent;
    std::istringstream ss(line);
    std::string pair;
    while (ss >> pair) {
      auto us = pair.rfind('_');
      if (us == std::string::npos || us == 0 || us + 1 == pair.size())
        throw DataError("malformed token_tag pair: " + pair);
      sent.tokens.push_back(pair.substr(0, us));
      sent.tags.push_back(pair.substr(us + 1));
    }
    if (!sent.tokens.empty()) out.push_back(std::move(sent));
  }
  if (out.empty()) throw DataError("tagger corpus has no sentences: " + path);
  return out;
}

// ---------------------------------------------------------------------------
// Gazetteer NER

enum class EntityCategory { Person, Location, Organization };

inline std::string to_string(EntityCategory c) {
  switch (c) {
    case EntityCategory::Person: return "PERSON";
    case EntityCategory::Location: return "LOCATION";
    case EntityCategory::Organization: return "ORGANIZATION";
  }
  return "PERSON";
}

inline EntityCategory entity_category_from_string(const std::string& s) {
  if (s == "PERSON") return EntityCategory::Person;
  if (s == "LOCATION") return EntityCategory::Location;
  if (s == "ORGANIZATION") return EntityCategory::Organization;
  throw DataError("unknown entity category: " + s);
}

struct EntitySpan {
  int token_start = 0;
  int token_end = 0;  // exclusive
  EntityCategory category = EntityCategory::Person;
};

class Gazetteer {
 public:
  void add(const std::string& phrase, EntityCategory cat) {
    std::vector<std::string> words;
    for (const auto& t : tokenize(phrase))
      if (t.kind != TokenKind::Punct) words.push_back(lower_ascii(t.text));
    if (words.empty()) return;
    entries_.push_back({std::move(words), cat});
    max_len_ = std::max(max_len_, entries_.back().first.size());
  }

  bool empty() const { return entries_.empty(); }
  std::size_t max_len() const { return max_len_; }

  // Longest entry matching the token sequence starting at position i.
  std::optional<std::pair<std::size_t, EntityCategory>> match(
      const std::vector<std::string>& lowered, std::size_t i) const {
    std::optional<std::pair<std::size_t, EntityCategory>> best;
    for (const auto& [words, cat] : entries_) {
      if (best && words.size() <= best->first) continue;
      if (i + words.size() > lowered.size()) continue;
      bool ok = true;
      for (std::size_t k = 0; k < words.size(); ++k) {
        if (lowered[i + k] != words[k]) {
          ok = false;
          break;
        }
      }
      if (ok) best = {words.size(), cat};
    }
    return best;
  }

 private:
  std::vector<std::pair<std::vector<std::string>, EntityCategory>> entries_;
  std::size_t max_len_ = 0;
};

inline Gazetteer load_gazetteer(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open gazetteer: " + path);
  Gazetteer g;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.rfind('\t');
    if (tab == std::string::npos) throw DataError("malformed gazetteer line: " + line);
    g.add(line.substr(0, tab), entity_category_from_string(line.substr(tab + 1)));
  }
  return g;
}

// Longest-match gazetteer hits, then remaining capitalized
// non-sentence-initial word runs become PERSON spans. Greedy left to right.
inline std::vector<EntitySpan> recognize_entities(const std::vector<Token>& tokens,
                                                  const Gazetteer& gazetteer) {
  std::vector<std::string> lowered;
  lowered.reserve(tokens.size());
  for (const auto& t : tokens) lowered.push_back(lower_ascii(t.text));

  auto sentence_initial = [&](std::size_t i) {
    if (i == 0) return true;
    const std::string& p = tokens[i - 1].text;
    return p == "." || p == "!" || p == "?";
  };
  auto capitalized_word = [&](std::size_t i) {
    return tokens[i].kind == TokenKind::Word && !tokens[i].text.empty() &&
           std::isupper(static_cast<unsigned char>(tokens[i].text[0])) != 0;
  };

  std::vector<EntitySpan> spans;
  std::size_t i = 0;
  while (i < tokens.size()) {
    if (auto m = gazetteer.match(lowered, i)) {
      spans.push_back({static_cast<int>(i), static_cast<int>(i + m->first), m->second});
      i += m->first;
      continue;
    }
    if (capitalized_word(i) && !sentence_initial(i)) {
      std::size_t j = i + 1;
      while (j < tokens.size() && capitalized_word(j) &&
             !gazetteer.match(lowered, j)) {
        ++j;
      }
      spans.push_back({static_cast<int>(i), static_cast<int>(j), EntityCategory::Person});
      i = j;
      continue;
    }
    ++i;
  }
  return spans;
}

}  // namespace specpred
