#pragma once

// Feature extractors for the shallow, semantic, lexical, syntactic, pronoun,
// named-entity and book feature sets; vocabulary fitting and feature-vector
// assembly under a frozen named schema.

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "specpred/corpus.hpp"
#include "specpred/error.hpp"
#include "specpred/lexicons.hpp"
#include "specpred/textproc.hpp"

namespace specpred {

struct FeatureVector {
  std::map<std::string, double> dense;
  std::map<std::string, double> sparse;  // tf-idf and POS n-gram blocks

  void merge(const FeatureVector& other) {
    dense.insert(other.dense.begin(), other.dense.end());
    sparse.insert(other.sparse.begin(), other.sparse.end());
  }
};

// Unigram/bigram vocabulary (corpus frequency >= 5) plus an IDF table over
// the same n-grams, both fitted on training turns only.
struct LexicalVocab {
  std::set<std::string> ngrams;
  IdfTable idf;
};

struct ExtractionContext {
  const LexiconBundle* bundle = nullptr;
  const PosTagger* tagger = nullptr;
  const Gazetteer* gazetteer = nullptr;
  std::map<std::string, Book> books;  // transcript_id -> book; "*" = default

  const Book* book_for(const Turn& t) const {
    auto it = books.find(t.transcript_id);
    if (it != books.end()) return &it->second;
    it = books.find("*");
    return it != books.end() ? &it->second : nullptr;
  }
};

namespace detail {

inline std::vector<std::string> lowered_words(const std::vector<Token>& tokens) {
  std::vector<std::string> out;
  for (const auto& t : tokens)
    if (t.kind == TokenKind::Word) out.push_back(lower_ascii(t.text));
  return out;
}

inline std::vector<std::string> lowered_all(const std::vector<Token>& tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(lower_ascii(t.text));
  return out;
}

// Longest-match count of multiword phrases over a lowercase token sequence.
inline int count_phrase_matches(const std::vector<std::string>& tokens,
                                const std::vector<std::vector<std::string>>& phrases) {
  int count = 0;
  std::size_t i = 0;
  while (i < tokens.size()) {
    std::size_t best = 0;
    for (const auto& p : phrases) {
      if (p.size() <= best || i + p.size() > tokens.size()) continue;
      bool ok = true;
      for (std::size_t k = 0; k < p.size(); ++k)
        if (tokens[i + k] != p[k]) {
          ok = false;
          break;
        }
      if (ok) best = p.size();
    }
    if (best > 0) {
      ++count;
      i += best;
    } else {
      ++i;
    }
  }
  return count;
}

inline double mean_or_zero(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Shallow surface features + averaged embeddings (the "speciteller" set)

inline FeatureVector extract_speciteller_shallow(const Turn& turn,
                                                 const LexiconBundle& bundle) {
  FeatureVector fv;
  auto tokens = tokenize(turn.text);
  auto words = detail::lowered_words(tokens);
  auto all_lower = detail::lowered_all(tokens);
  const double nw = static_cast<double>(words.size());

  fv.dense["sp_connectives"] =
      detail::count_phrase_matches(all_lower, bundle.connectives);
  fv.dense["sp_word_count"] = nw;

  int numbers = 0;
  for (const auto& t : tokens)
    if (t.kind == TokenKind::Number) ++numbers;
  fv.dense["sp_number_count"] = numbers;

  int capitals = 0, symbols = 0;
  for (unsigned char c : turn.text) {
    if (std::isupper(c)) ++capitals;
    if (!std::isalnum(c) && !std::isspace(c)) ++symbols;
  }
  fv.dense["sp_capital_count"] = capitals;
  fv.dense["sp_symbol_count"] = symbols;

  double total_chars = 0;
  for (const auto& t : tokens)
    if (t.kind == TokenKind::Word) total_chars += static_cast<double>(t.text.size());
  fv.dense["sp_avg_word_len"] = nw > 0 ? total_chars / nw : 0.0;

  int stop = 0, strong = 0, polar = 0;
  std::vector<double> fams, imgs, idfs;
  for (const auto& w : words) {
    if (bundle.stopwords.count(w)) ++stop;
    auto subj = bundle.subjectivity.find(w);
    if (subj != bundle.subjectivity.end() && subj->second == "strong") ++strong;
    if (bundle.polarity.count(w)) ++polar;
    auto norm = bundle.norms.find(w);
    if (norm != bundle.norms.end()) {
      fams.push_back(norm->second.first);
      imgs.push_back(norm->second.second);
    }
    idfs.push_back(bundle.idf.lookup(w));
  }
  fv.dense["sp_stopword_frac"] = nw > 0 ? stop / nw : 0.0;
  fv.dense["sp_strong_subjective"] = strong;
  fv.dense["sp_polar"] = polar;
  fv.dense["sp_avg_familiarity"] = detail::mean_or_zero(fams);
  fv.dense["sp_avg_imageability"] = detail::mean_or_zero(imgs);
  fv.dense["sp_idf_min"] = idfs.empty() ? 0.0 : *std::min_element(idfs.begin(), idfs.end());
  fv.dense["sp_idf_max"] = idfs.empty() ? 0.0 : *std::max_element(idfs.begin(), idfs.end());
  fv.dense["sp_idf_avg"] = detail::mean_or_zero(idfs);
  return fv;
}

// Mean of in-vocabulary word vectors; all-OOV turns yield the zero vector.
inline std::vector<double> extract_embedding_average(const Turn& turn,
                                                     const LexiconBundle& bundle) {
  std::vector<double> acc(bundle.embedding_dim, 0.0);
  int hits = 0;
  for (const auto& w : detail::lowered_words(tokenize(turn.text))) {
    auto it = bundle.embeddings.find(w);
    if (it == bundle.embeddings.end()) continue;
    for (std::size_t d = 0; d < acc.size(); ++d) acc[d] += it->second[d];
    ++hits;
  }
  if (hits > 0)
    for (double& v : acc) v /= hits;
  return acc;
}

// ---------------------------------------------------------------------------
// Semantic features: deictic pronouns and word-length statistics with
// punctuation tokens included; the length histogram caps at 20.

inline FeatureVector extract_semantic(const Turn& turn, const LexiconBundle& bundle) {
  FeatureVector fv;
  auto tokens = tokenize(turn.text);

  int deictic = 0;
  for (const auto& t : tokens)
    if (t.kind == TokenKind::Word && bundle.deictic.count(lower_ascii(t.text)))
      ++deictic;
  fv.dense["sem_deictic"] = deictic;

  std::vector<double> lens;
  lens.reserve(tokens.size());
  for (const auto& t : tokens) lens.push_back(static_cast<double>(t.text.size()));
  std::vector<double> sorted = lens;
  std::sort(sorted.begin(), sorted.end());
  double median = 0.0;
  if (!sorted.empty()) {
    std::size_t m = sorted.size() / 2;
    median = sorted.size() % 2 ? sorted[m] : 0.5 * (sorted[m - 1] + sorted[m]);
  }
  fv.dense["sem_wlen_min"] = sorted.empty() ? 0.0 : sorted.front();
  fv.dense["sem_wlen_max"] = sorted.empty() ? 0.0 : sorted.back();
  fv.dense["sem_wlen_avg"] = detail::mean_or_zero(lens);
  fv.dense["sem_wlen_median"] = median;

  std::vector<int> hist(21, 0);
  for (double l : lens) hist[std::min<std::size_t>(static_cast<std::size_t>(l), 20)]++;
  for (int i = 1; i <= 20; ++i)
    fv.dense["sem_len" + std::to_string(i)] = hist[i];
  return fv;
}

// ---------------------------------------------------------------------------
// Lexical tf-idf features

namespace detail {

inline std::vector<std::string> turn_ngrams(const Turn& turn) {
  auto words = lowered_words(tokenize(turn.text));
  std::vector<std::string> grams = words;
  for (std::size_t i = 0; i + 1 < words.size(); ++i)
    grams.push_back(words[i] + " " + words[i + 1]);
  return grams;
}

}  // namespace detail

inline LexicalVocab fit_lexical_vocab(const std::vector<Turn>& train_turns,
                                      int min_frequency = 5) {
  std::unordered_map<std::string, int> freq;
  std::vector<std::vector<std::string>> docs;
  docs.reserve(train_turns.size());
  for (const auto& t : train_turns) {
    docs.push_back(detail::turn_ngrams(t));
    for (const auto& g : docs.back()) ++freq[g];
  }
  LexicalVocab v;
  for (const auto& [g, f] : freq)
    if (f >= min_frequency) v.ngrams.insert(g);
  if (!docs.empty()) v.idf = build_idf_table(docs);
  return v;
}

inline FeatureVector extract_lexical(const Turn& turn, const LexicalVocab& vocab) {
  FeatureVector fv;
  std::map<std::string, int> tf;
  for (const auto& g : detail::turn_ngrams(turn))
    if (vocab.ngrams.count(g)) ++tf[g];
  std::vector<double> values;
  for (const auto& [g, f] : tf) {
    double v = f * vocab.idf.lookup(g);
    fv.sparse["lex:" + g] = v;
    values.push_back(v);
  }
  fv.dense["lex_min"] = values.empty() ? 0.0 : *std::min_element(values.begin(), values.end());
  fv.dense["lex_max"] = values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
  fv.dense["lex_avg"] = detail::mean_or_zero(values);
  return fv;
}

// ---------------------------------------------------------------------------
// Syntactic features: POS 1/2/3-gram counts

inline std::vector<std::string> turn_pos_tags(const Turn& turn,
                                              const ExtractionContext& ctx) {
  if (turn.external_pos) return *turn.external_pos;
  if (!ctx.tagger)
    throw ConfigError("syntactic features need a trained tagger or external POS tags");
  return ctx.tagger->tag(tokenize(turn.text));
}

namespace detail {

inline std::vector<std::string> pos_ngrams(const std::vector<std::string>& tags) {
  std::vector<std::string> grams;
  for (std::size_t n = 1; n <= 3; ++n) {
    for (std::size_t i = 0; i + n <= tags.size(); ++i) {
      std::string g = tags[i];
      for (std::size_t k = 1; k < n; ++k) g += "_" + tags[i + k];
      grams.push_back(std::move(g));
    }
  }
  return grams;
}

}  // namespace detail

inline std::set<std::string> fit_pos_vocab(const std::vector<Turn>& train_turns,
                                           const ExtractionContext& ctx) {
  std::set<std::string> vocab;
  for (const auto& t : train_turns)
    for (const auto& g : detail::pos_ngrams(turn_pos_tags(t, ctx))) vocab.insert(g);
  return vocab;
}

inline FeatureVector extract_syntactic(const Turn& turn,
                                       const std::set<std::string>& pos_vocab,
                                       const ExtractionContext& ctx) {
  FeatureVector fv;
  for (const auto& g : detail::pos_ngrams(turn_pos_tags(turn, ctx)))
    if (pos_vocab.count(g)) fv.sparse["pos:" + g] += 1.0;
  return fv;
}

// ---------------------------------------------------------------------------
// Pronoun features (16): any-flag, total, person (3), number (3), and the
// eight grammatical categories.

inline FeatureVector extract_pronoun(const Turn& turn, const LexiconBundle& bundle) {
  FeatureVector fv;
  auto words = detail::lowered_words(tokenize(turn.text));

  int total = 0;
  std::array<int, 4> person{};  // index 1..3
  int sg = 0, pl = 0, na = 0;
  std::map<std::string, int> cats;
  for (const auto& c : pronoun_category_names()) cats[c] = 0;

  auto account = [&](const PronounInfo& info) {
    ++total;
    ++person[static_cast<std::size_t>(info.person)];
    switch (info.number) {
      case PronounNumber::Singular: ++sg; break;
      case PronounNumber::Plural: ++pl; break;
      case PronounNumber::NA: ++na; break;
    }
    for (const auto& c : info.categories) ++cats[c];
  };

  std::size_t i = 0;
  while (i < words.size()) {
    // multiword entries ("each other") take precedence over single words
    if (i + 1 < words.size()) {
      auto it = bundle.pronouns.find(words[i] + " " + words[i + 1]);
      if (it != bundle.pronouns.end()) {
        account(it->second);
        i += 2;
        continue;
      }
    }
    auto it = bundle.pronouns.find(words[i]);
    if (it != bundle.pronouns.end()) account(it->second);
    ++i;
  }

  fv.dense["pron_any"] = total > 0 ? 1.0 : 0.0;
  fv.dense["pron_total"] = total;
  fv.dense["pron_person1"] = person[1];
  fv.dense["pron_person2"] = person[2];
  fv.dense["pron_person3"] = person[3];
  fv.dense["pron_sg"] = sg;
  fv.dense["pron_pl"] = pl;
  fv.dense["pron_na"] = na;
  for (const auto& [c, n] : cats) fv.dense["pron_cat_" + c] = n;
  return fv;
}

// ---------------------------------------------------------------------------
// Named-entity features (16): flags and counts per category plus
// word-count-normalized versions of each.

inline std::vector<EntitySpan> turn_entities(const Turn& turn,
                                             const ExtractionContext& ctx) {
  if (turn.external_entities) return *turn.external_entities;
  static const Gazetteer empty;
  const Gazetteer& g = ctx.gazetteer ? *ctx.gazetteer : empty;
  return recognize_entities(tokenize(turn.text), g);
}

inline FeatureVector extract_named_entity(const Turn& turn,
                                          const std::vector<EntitySpan>& spans) {
  FeatureVector fv;
  auto tokens = tokenize(turn.text);
  double nw = 0;
  for (const auto& t : tokens)
    if (t.kind == TokenKind::Word) ++nw;

  std::map<EntityCategory, int> per_cat = {{EntityCategory::Person, 0},
                                           {EntityCategory::Location, 0},
                                           {EntityCategory::Organization, 0}};
  for (const auto& s : spans) ++per_cat[s.category];
  int total = static_cast<int>(spans.size());

  auto emit = [&](const std::string& name, double value) {
    fv.dense[name] = value;
    fv.dense[name + "_norm"] = nw > 0 ? value / nw : 0.0;
  };
  emit("ne_any", total > 0 ? 1.0 : 0.0);
  emit("ne_person_any", per_cat[EntityCategory::Person] > 0 ? 1.0 : 0.0);
  emit("ne_location_any", per_cat[EntityCategory::Location] > 0 ? 1.0 : 0.0);
  emit("ne_organization_any", per_cat[EntityCategory::Organization] > 0 ? 1.0 : 0.0);
  emit("ne_total", total);
  emit("ne_person", per_cat[EntityCategory::Person]);
  emit("ne_location", per_cat[EntityCategory::Location]);
  emit("ne_organization", per_cat[EntityCategory::Organization]);
  return fv;
}

// ---------------------------------------------------------------------------
// Book features: character mentions and stopword-filtered summary similarity
// (whole summary and max over summary sentences).

namespace detail {

struct BagStats {
  std::set<std::string> types;
  std::map<std::string, int> tf;
};

inline BagStats content_bag(const std::vector<std::string>& words,
                            const LexiconBundle& bundle) {
  BagStats b;
  for (const auto& w : words) {
    if (bundle.stopwords.count(w)) continue;
    b.types.insert(w);
    ++b.tf[w];
  }
  return b;
}

inline double tfidf_cosine(const BagStats& a, const BagStats& b,
                           const IdfTable& idf) {
  double dot = 0, na = 0, nb = 0;
  for (const auto& [w, f] : a.tf) {
    double va = f * idf.lookup(w);
    na += va * va;
    auto it = b.tf.find(w);
    if (it != b.tf.end()) dot += va * (it->second * idf.lookup(w));
  }
  for (const auto& [w, f] : b.tf) {
    double vb = f * idf.lookup(w);
    nb += vb * vb;
  }
  if (na == 0 || nb == 0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

struct Overlap {
  double count = 0, jaccard = 0, cosine = 0;
};

inline Overlap overlap_stats(const BagStats& turn, const BagStats& doc,
                             const IdfTable& idf) {
  Overlap o;
  std::size_t inter = 0;
  for (const auto& w : turn.types)
    if (doc.types.count(w)) ++inter;
  std::size_t uni = turn.types.size() + doc.types.size() - inter;
  o.count = static_cast<double>(inter);
  o.jaccard = uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
  o.cosine = tfidf_cosine(turn, doc, idf);
  return o;
}

// Name token sequences for a character: first name, last name and each
// nickname, matched case-insensitively against word tokens.
inline std::vector<std::vector<std::string>> character_patterns(const CharacterName& c) {
  std::vector<std::vector<std::string>> out;
  auto add = [&](const std::string& name) {
    std::vector<std::string> seq;
    for (const auto& t : tokenize(name))
      if (t.kind == TokenKind::Word) seq.push_back(lower_ascii(t.text));
    if (!seq.empty()) out.push_back(std::move(seq));
  };
  add(c.first);
  if (c.last) add(*c.last);
  for (const auto& n : c.nicknames) add(n);
  return out;
}

}  // namespace detail

inline FeatureVector extract_book(const Turn& turn, const Book& book,
                                  const LexiconBundle& bundle) {
  FeatureVector fv;
  auto words = detail::lowered_words(tokenize(turn.text));
  const double nw = static_cast<double>(words.size());

  int mentions = 0, distinct = 0;
  for (const auto& c : book.characters) {
    auto patterns = detail::character_patterns(c);
    int hits = detail::count_phrase_matches(words, patterns);
    mentions += hits;
    if (hits > 0) ++distinct;
  }
  fv.dense["book_char_any"] = mentions > 0 ? 1.0 : 0.0;
  fv.dense["book_char_count"] = mentions;
  fv.dense["book_char_count_norm"] = nw > 0 ? mentions / nw : 0.0;
  fv.dense["book_char_distinct"] = distinct;

  auto turn_bag = detail::content_bag(words, bundle);
  auto summary_words = detail::lowered_words(tokenize(book.summary_text));
  auto whole = detail::overlap_stats(turn_bag,
                                     detail::content_bag(summary_words, bundle),
                                     bundle.idf);
  fv.dense["book_overlap_whole"] = whole.count;
  fv.dense["book_jaccard_whole"] = whole.jaccard;
  fv.dense["book_cosine_whole"] = whole.cosine;

  detail::Overlap best;
  for (const auto& sent : book.summary_sentences) {
    auto bag = detail::content_bag(detail::lowered_words(tokenize(sent)), bundle);
    auto o = detail::overlap_stats(turn_bag, bag, bundle.idf);
    best.count = std::max(best.count, o.count);
    best.jaccard = std::max(best.jaccard, o.jaccard);
    best.cosine = std::max(best.cosine, o.cosine);
  }
  fv.dense["book_overlap_maxsent"] = best.count;
  fv.dense["book_jaccard_maxsent"] = best.jaccard;
  fv.dense["book_cosine_maxsent"] = best.cosine;
  return fv;
}

// ---------------------------------------------------------------------------
// Schema fitting and assembly

inline const std::vector<std::string>& known_feature_sets() {
  static const std::vector<std::string> sets = {
      "speciteller", "semantic", "lexical", "syntactic", "pronoun", "ne", "book"};
  return sets;
}

struct FeatureSchema {
  std::set<std::string> sets;
  std::vector<std::string> names;  // frozen extraction order
  std::unordered_map<std::string, std::size_t> index;
  LexicalVocab lexical;
  std::set<std::string> pos_vocab;
  std::size_t embedding_dim = 0;
  std::string fitted_on;

  void freeze_names(std::vector<std::string> ordered) {
    names = std::move(ordered);
    index.clear();
    for (std::size_t i = 0; i < names.size(); ++i) index[names[i]] = i;
  }
};

inline FeatureVector assemble_features(const Turn& turn, const FeatureSchema& schema,
                                       const ExtractionContext& ctx) {
  if (schema.sets.empty()) throw ConfigError("empty feature-set config");
  if (!ctx.bundle) throw ConfigError("extraction context has no lexicon bundle");
  FeatureVector fv;
  if (schema.sets.count("speciteller")) {
    fv.merge(extract_speciteller_shallow(turn, *ctx.bundle));
    auto emb = extract_embedding_average(turn, *ctx.bundle);
    for (std::size_t d = 0; d < emb.size(); ++d)
      fv.dense["sp_emb_" + std::to_string(d)] = emb[d];
  }
  if (schema.sets.count("semantic")) fv.merge(extract_semantic(turn, *ctx.bundle));
  if (schema.sets.count("lexical")) fv.merge(extract_lexical(turn, schema.lexical));
  if (schema.sets.count("syntactic"))
    fv.merge(extract_syntactic(turn, schema.pos_vocab, ctx));
  if (schema.sets.count("pronoun")) fv.merge(extract_pronoun(turn, *ctx.bundle));
  if (schema.sets.count("ne"))
    fv.merge(extract_named_entity(turn, turn_entities(turn, ctx)));
  if (schema.sets.count("book")) {
    const Book* book = ctx.book_for(turn);
    if (book) {
      fv.merge(extract_book(turn, *book, *ctx.bundle));
    } else {
      Book empty;
      fv.merge(extract_book(turn, empty, *ctx.bundle));
    }
  }
  return fv;
}

inline FeatureSchema fit_schema(const std::vector<Turn>& train_turns,
                                const std::set<std::string>& sets,
                                const ExtractionContext& ctx,
                                const std::string& fold_id = "") {
  if (sets.empty()) throw ConfigError("empty feature-set config");
  for (const auto& s : sets) {
    const auto& known = known_feature_sets();
    if (std::find(known.begin(), known.end(), s) == known.end())
      throw ConfigError("unknown feature set: " + s);
  }
  FeatureSchema schema;
  schema.sets = sets;
  schema.fitted_on = fold_id;
  schema.embedding_dim = ctx.bundle ? ctx.bundle->embedding_dim : 0;
  if (sets.count("lexical")) schema.lexical = fit_lexical_vocab(train_turns);
  if (sets.count("syntactic")) schema.pos_vocab = fit_pos_vocab(train_turns, ctx);

  // Names come from a probe extraction over training turns; dense names are
  // identical for every turn, sparse names are the fitted vocabularies.
  std::set<std::string> dense_names;
  if (!train_turns.empty()) {
    auto fv = assemble_features(train_turns.front(), schema, ctx);
    for (const auto& [n, v] : fv.dense) dense_names.insert(n);
  }
  std::vector<std::string> ordered(dense_names.begin(), dense_names.end());
  for (const auto& g : schema.lexical.ngrams) ordered.push_back("lex:" + g);
  for (const auto& g : schema.pos_vocab) ordered.push_back("pos:" + g);
  schema.freeze_names(std::move(ordered));
  return schema;
}

inline std::vector<double> vectorize(const FeatureVector& fv,
                                     const FeatureSchema& schema) {
  std::vector<double> row(schema.names.size(), 0.0);
  auto put = [&](const std::map<std::string, double>& block) {
    for (const auto& [n, v] : block) {
      auto it = schema.index.find(n);
      if (it != schema.index.end()) row[it->second] = v;
    }
  };
  put(fv.dense);
  put(fv.sparse);
  return row;
}

// CSV with header = schema order plus a sparse sidecar of name:value pairs.
inline void export_feature_matrix(const std::vector<Turn>& turns,
                                  const FeatureSchema& schema,
                                  const ExtractionContext& ctx,
                                  const std::string& csv_path) {
  std::ofstream csv(csv_path);
  if (!csv) throw DataError("cannot write feature matrix: " + csv_path);
  std::ofstream sidecar(csv_path + ".sparse");
  csv << "transcript_id,turn_id";
  for (const auto& n : schema.names)
    if (n.rfind("lex:", 0) != 0 && n.rfind("pos:", 0) != 0) csv << "," << n;
  csv << "\n";
  for (const auto& t : turns) {
    auto fv = assemble_features(t, schema, ctx);
    csv << t.transcript_id << "," << t.turn_id;
    for (const auto& n : schema.names) {
      if (n.rfind("lex:", 0) == 0 || n.rfind("pos:", 0) == 0) continue;
      auto it = fv.dense.find(n);
      csv << "," << (it != fv.dense.end() ? it->second : 0.0);
    }
    csv << "\n";
    sidecar << t.key();
    for (const auto& [n, v] : fv.sparse) sidecar << "\t" << n << ":" << v;
    sidecar << "\n";
  }
}

}  // namespace specpred
