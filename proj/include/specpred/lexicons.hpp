#pragma once

// Word lists and tables used by the feature extractors: stopwords,
// connectives, subjectivity/polarity, psycholinguistic norms, pronoun
// categories, deictic words, IDF, word embeddings.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "specpred/error.hpp"
#include "specpred/textproc.hpp"

namespace specpred {

enum class PronounNumber { Singular, Plural, NA };

struct PronounInfo {
  int person = 3;  // 1, 2 or 3
  PronounNumber number = PronounNumber::NA;
  std::set<std::string> categories;  // personal, possessive, reflexive, ...
};

inline const std::set<std::string>& pronoun_category_names() {
  static const std::set<std::string> cats = {
      "personal",      "possessive",    "reflexive", "reciprocal",
      "relative",      "demonstrative", "interrogative", "indefinite"};
  return cats;
}

// idf(w) = ln(N / df(w)); words never seen resolve to ln(N / 1).
struct IdfTable {
  std::unordered_map<std::string, double> values;
  double corpus_size = 1.0;

  double lookup(const std::string& word) const {
    auto it = values.find(word);
    if (it != values.end()) return it->second;
    return std::log(std::max(corpus_size, 1.0));
  }
};

inline IdfTable build_idf_table(const std::vector<std::vector<std::string>>& documents) {
  if (documents.empty()) throw DataError("build_idf_table: empty document list");
  std::unordered_map<std::string, int> df;
  for (const auto& doc : documents) {
    std::set<std::string> seen(doc.begin(), doc.end());
    for (const auto& w : seen) ++df[w];
  }
  IdfTable t;
  t.corpus_size = static_cast<double>(documents.size());
  for (const auto& [w, d] : df) t.values[w] = std::log(t.corpus_size / d);
  return t;
}

struct LexiconBundle {
  std::set<std::string> stopwords;
  std::vector<std::vector<std::string>> connectives;  // lowercase token sequences
  std::map<std::string, std::string> subjectivity;    // word -> strong | weak
  std::map<std::string, std::string> polarity;        // word -> positive | negative
  std::map<std::string, std::pair<double, double>> norms;  // familiarity, imageability
  std::map<std::string, PronounInfo> pronouns;  // keys may be multiword phrases
  std::set<std::string> deictic;
  IdfTable idf;
  std::unordered_map<std::string, std::vector<double>> embeddings;
  std::size_t embedding_dim = 0;
};

namespace detail {

inline std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == '\t') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline double parse_real(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError("non-numeric value \"" + s + "\" in " + where);
  }
}

template <typename LineFn>
inline bool for_each_line(const std::filesystem::path& path, bool required,
                          LineFn&& fn) {
  std::ifstream in(path);
  if (!in) {
    if (required) throw DataError("missing lexicon file: " + path.string());
    return false;
  }
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    fn(line, lineno);
  }
  return true;
}

}  // namespace detail

// All tables are optional on disk; a missing file leaves the table empty
// (extractors have documented defaults) and prints a warning.
inline LexiconBundle load_bundle(const std::filesystem::path& dir,
                                 std::ostream& warnings = std::cerr) {
  LexiconBundle b;
  auto warn_missing = [&](const char* name) {
    warnings << "warning: " << name << " not found in " << dir.string()
             << "; table left empty\n";
  };

  if (!detail::for_each_line(dir / "stopwords.tsv", false, [&](const std::string& line, int) {
        b.stopwords.insert(lower_ascii(detail::trim(line)));
      }))
    warn_missing("stopwords.tsv");

  if (!detail::for_each_line(dir / "connectives.tsv", false, [&](const std::string& line, int) {
        std::vector<std::string> words;
        std::istringstream ss(lower_ascii(line));
        std::string w;
        while (ss >> w) words.push_back(w);
        if (!words.empty()) b.connectives.push_back(std::move(words));
      }))
    warn_missing("connectives.tsv");

  if (!detail::for_each_line(dir / "subjectivity.tsv", false, [&](const std::string& line, int lineno) {
        auto cols = detail::split_tabs(line);
        if (cols.size() < 3)
          throw DataError("subjectivity.tsv:" + std::to_string(lineno) +
                          ": expected word<TAB>strong|weak<TAB>polarity");
        std::string word = lower_ascii(cols[0]);
        if (cols[1] != "strong" && cols[1] != "weak")
          throw DataError("subjectivity.tsv:" + std::to_string(lineno) +
                          ": bad subjectivity \"" + cols[1] + "\"");
        b.subjectivity[word] = cols[1];
        if (cols[2] == "positive" || cols[2] == "negative")
          b.polarity[word] = cols[2];
        else if (cols[2] != "neutral")
          throw DataError("subjectivity.tsv:" + std::to_string(lineno) +
                          ": bad polarity \"" + cols[2] + "\"");
      }))
    warn_missing("subjectivity.tsv");

  if (!detail::for_each_line(dir / "norms.tsv", false, [&](const std::string& line, int lineno) {
        auto cols = detail::split_tabs(line);
        if (cols.size() < 3)
          throw DataError("norms.tsv:" + std::to_string(lineno) +
                          ": expected word<TAB>familiarity<TAB>imageability");
        b.norms[lower_ascii(cols[0])] = {
            detail::parse_real(cols[1], "norms.tsv:" + std::to_string(lineno)),
            detail::parse_real(cols[2], "norms.tsv:" + std::to_string(lineno))};
      }))
    warn_missing("norms.tsv");

  if (!detail::for_each_line(dir / "pronouns.tsv", false, [&](const std::string& line, int lineno) {
        auto cols = detail::split_tabs(line);
        if (cols.size() < 4)
          throw DataError("pronouns.tsv:" + std::to_string(lineno) +
                          ": expected word<TAB>person<TAB>number<TAB>category+");
        PronounInfo info;
        info.person = static_cast<int>(
            detail::parse_real(cols[1], "pronouns.tsv:" + std::to_string(lineno)));
        if (info.person < 1 || info.person > 3)
          throw DataError("pronouns.tsv:" + std::to_string(lineno) + ": person not in {1,2,3}");
        if (cols[2] == "sg")
          info.number = PronounNumber::Singular;
        else if (cols[2] == "pl")
          info.number = PronounNumber::Plural;
        else if (cols[2] == "n/a")
          info.number = PronounNumber::NA;
        else
          throw DataError("pronouns.tsv:" + std::to_string(lineno) +
                          ": number must be sg, pl or n/a");
        std::istringstream ss(cols[3]);
        std::string cat;
        while (std::getline(ss, cat, '+')) {
          if (!pronoun_category_names().count(cat))
            throw DataError("pronouns.tsv:" + std::to_string(lineno) +
                            ": unknown category \"" + cat + "\"");
          info.categories.insert(cat);
        }
        if (info.categories.empty())
          throw DataError("pronouns.tsv:" + std::to_string(lineno) +
                          ": pronoun needs at least one category");
        b.pronouns[lower_ascii(cols[0])] = std::move(info);
      }))
    warn_missing("pronouns.tsv");

  if (!detail::for_each_line(dir / "deictic.tsv", false, [&](const std::string& line, int) {
        b.deictic.insert(lower_ascii(detail::trim(line)));
      }))
    warn_missing("deictic.tsv");

  bool have_idf = detail::for_each_line(dir / "idf.tsv", false, [&](const std::string& line, int lineno) {
    if (line[0] == '#') {
      auto eq = line.find('=');
      if (line.rfind("#N=", 0) == 0 && eq != std::string::npos)
        b.idf.corpus_size =
            detail::parse_real(line.substr(eq + 1), "idf.tsv:" + std::to_string(lineno));
      return;
    }
    auto cols = detail::split_tabs(line);
    if (cols.size() < 2)
      throw DataError("idf.tsv:" + std::to_string(lineno) + ": expected word<TAB>idf");
    double v = detail::parse_real(cols[1], "idf.tsv:" + std::to_string(lineno));
    if (v < 0.0)
      throw DataError("idf.tsv:" + std::to_string(lineno) + ": negative idf");
    b.idf.values[lower_ascii(cols[0])] = v;
  });
  if (!have_idf) warn_missing("idf.tsv");

  if (!detail::for_each_line(dir / "embeddings.tsv", false, [&](const std::string& line, int lineno) {
        auto cols = detail::split_tabs(line);
        if (cols.size() < 2)
          throw DataError("embeddings.tsv:" + std::to_string(lineno) +
                          ": expected word<TAB>floats");
        std::vector<double> vec;
        vec.reserve(cols.size() - 1);
        for (std::size_t i = 1; i < cols.size(); ++i)
          vec.push_back(detail::parse_real(cols[i], "embeddings.tsv:" + std::to_string(lineno)));
        if (b.embedding_dim == 0)
          b.embedding_dim = vec.size();
        else if (vec.size() != b.embedding_dim)
          throw DataError("embeddings.tsv:" + std::to_string(lineno) +
                          ": inconsistent embedding dimension");
        b.embeddings[lower_ascii(cols[0])] = std::move(vec);
      }))
    warn_missing("embeddings.tsv");

  return b;
}

}  // namespace specpred
