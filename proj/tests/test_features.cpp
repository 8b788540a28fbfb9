#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "specpred/features.hpp"

using namespace specpred;

namespace {

const LexiconBundle& fixture_bundle() {
  static const LexiconBundle b = [] {
    std::ostringstream warnings;
    return load_bundle(std::filesystem::path(SPECPRED_DATA_DIR) / "lexicons", warnings);
  }();
  return b;
}

Turn make_turn(const std::string& text) {
  Turn t;
  t.transcript_id = "t";
  t.turn_id = "1";
  t.speaker_id = "S";
  t.text = text;
  return t;
}

}  // namespace

TEST_CASE("speciteller shallow features") {
  const auto& bundle = fixture_bundle();

  SUBCASE("single lowercase word") {
    auto fv = extract_speciteller_shallow(make_turn("hello"), bundle);
    CHECK(fv.dense.at("sp_word_count") == 1);
    CHECK(fv.dense.at("sp_capital_count") == 0);
    CHECK(fv.dense.at("sp_number_count") == 0);
    CHECK(fv.dense.at("sp_symbol_count") == 0);
    CHECK(fv.dense.at("sp_avg_word_len") == 5);
  }
  SUBCASE("stopword fraction against the shipped list") {
    Turn t = make_turn("It's just kind of a maintaining personality");
    auto tokens = tokenize(t.text);
    int words = 0, stops = 0;
    for (const auto& tok : tokens) {
      if (tok.kind != TokenKind::Word) continue;
      ++words;
      if (bundle.stopwords.count(lower_ascii(tok.text))) ++stops;
    }
    REQUIRE(words > 0);
    auto fv = extract_speciteller_shallow(t, bundle);
    CHECK(fv.dense.at("sp_stopword_frac") ==
          doctest::Approx(static_cast<double>(stops) / words));
  }
  SUBCASE("idf statistics are min/max/avg over word lookups") {
    LexiconBundle custom;
    custom.idf.corpus_size = 4.0;
    custom.idf.values["common"] = 0.0;
    custom.idf.values["rare"] = 1.39;
    auto fv = extract_speciteller_shallow(make_turn("common rare"), custom);
    CHECK(fv.dense.at("sp_idf_min") == doctest::Approx(0.0));
    CHECK(fv.dense.at("sp_idf_max") == doctest::Approx(1.39));
    CHECK(fv.dense.at("sp_idf_avg") == doctest::Approx(0.695));
  }
  SUBCASE("empty-token turn yields all zeros") {
    auto fv = extract_speciteller_shallow(make_turn("   .  "), bundle);
    CHECK(fv.dense.at("sp_word_count") == 0);
    CHECK(fv.dense.at("sp_stopword_frac") == 0);
    CHECK(fv.dense.at("sp_avg_familiarity") == 0);
    CHECK(fv.dense.at("sp_idf_avg") == 0);
  }
  SUBCASE("counts of capitals, numbers and symbols") {
    auto fv = extract_speciteller_shallow(make_turn("We got 3 points (OK!)"), bundle);
    CHECK(fv.dense.at("sp_number_count") == 1);
    CHECK(fv.dense.at("sp_capital_count") == 3);  // W, O, K
    CHECK(fv.dense.at("sp_symbol_count") == 3);   // ( ! )
  }
  SUBCASE("connective phrases counted longest-match") {
    auto fv = extract_speciteller_shallow(
        make_turn("on the other hand it works because we tried"), bundle);
    CHECK(fv.dense.at("sp_connectives") == 2);
  }
}

TEST_CASE("embedding average") {
  LexiconBundle b;
  b.embedding_dim = 3;
  b.embeddings["cat"] = {1.0, 2.0, 3.0};
  b.embeddings["dog"] = {3.0, 4.0, 5.0};

  SUBCASE("one in-vocab word returns its vector") {
    CHECK(extract_embedding_average(make_turn("cat"), b) ==
          std::vector<double>{1.0, 2.0, 3.0});
  }
  SUBCASE("two words average elementwise") {
    CHECK(extract_embedding_average(make_turn("cat dog"), b) ==
          std::vector<double>{2.0, 3.0, 4.0});
  }
  SUBCASE("all-OOV turn gives the zero vector") {
    CHECK(extract_embedding_average(make_turn("zebra llama"), b) ==
          std::vector<double>{0.0, 0.0, 0.0});
  }
  SUBCASE("OOV words are skipped, not averaged as zeros") {
    CHECK(extract_embedding_average(make_turn("cat zebra"), b) ==
          std::vector<double>{1.0, 2.0, 3.0});
  }
}

TEST_CASE("semantic features") {
  const auto& bundle = fixture_bundle();

  SUBCASE("word-length stats include punctuation tokens") {
    auto fv = extract_semantic(make_turn("a bb !"), bundle);
    CHECK(fv.dense.at("sem_wlen_min") == 1);
    CHECK(fv.dense.at("sem_wlen_max") == 2);
    CHECK(fv.dense.at("sem_wlen_median") == 1);
    CHECK(fv.dense.at("sem_wlen_avg") == doctest::Approx(4.0 / 3.0));
  }
  SUBCASE("length histogram with the 20-cap overflow") {
    std::string long_word(25, 'x');
    auto fv = extract_semantic(make_turn(long_word + " ok"), bundle);
    CHECK(fv.dense.at("sem_len20") == 1);
    CHECK(fv.dense.at("sem_len2") == 1);
    double total = 0;
    for (int i = 1; i <= 20; ++i) total += fv.dense.at("sem_len" + std::to_string(i));
    CHECK(total == 2);
  }
  SUBCASE("deictic count from the fixture lexicon") {
    auto fv = extract_semantic(make_turn("this that"), bundle);
    CHECK(fv.dense.at("sem_deictic") == 2);
  }
  SUBCASE("empty turn is all zeros") {
    auto fv = extract_semantic(make_turn(" . "), bundle);
    CHECK(fv.dense.at("sem_deictic") == 0);
    CHECK(fv.dense.at("sem_wlen_avg") == 1);  // the lone punctuation token
  }
}

TEST_CASE("lexical vocabulary and tf-idf") {
  SUBCASE("frequency threshold at 5") {
    std::vector<Turn> turns;
    for (int i = 0; i < 5; ++i) turns.push_back(make_turn("included word"));
    for (int i = 0; i < 4; ++i) turns.push_back(make_turn("excluded term"));
    auto vocab = fit_lexical_vocab(turns);
    CHECK(vocab.ngrams.count("included") == 1);
    CHECK(vocab.ngrams.count("included word") == 1);  // bigram also at 5
    CHECK(vocab.ngrams.count("excluded") == 0);
    CHECK(vocab.ngrams.count("excluded term") == 0);
  }
  SUBCASE("turn with no in-vocab terms") {
    auto vocab = fit_lexical_vocab({make_turn("one off")});
    auto fv = extract_lexical(make_turn("totally different words"), vocab);
    CHECK(fv.sparse.empty());
    CHECK(fv.dense.at("lex_min") == 0);
    CHECK(fv.dense.at("lex_max") == 0);
    CHECK(fv.dense.at("lex_avg") == 0);
  }
  SUBCASE("tf times idf with direct arithmetic") {
    LexicalVocab vocab;
    vocab.ngrams = {"echo"};
    vocab.idf.corpus_size = 1.0;
    vocab.idf.values["echo"] = 1.5;
    auto fv = extract_lexical(make_turn("echo and echo"), vocab);
    CHECK(fv.sparse.at("lex:echo") == doctest::Approx(3.0));  // tf 2 * idf 1.5
    CHECK(fv.dense.at("lex_min") == doctest::Approx(3.0));
    CHECK(fv.dense.at("lex_max") == doctest::Approx(3.0));
    CHECK(fv.dense.at("lex_avg") == doctest::Approx(3.0));
  }
  SUBCASE("stats over two distinct tf-idf values") {
    LexicalVocab vocab;
    vocab.ngrams = {"lo", "hi"};
    vocab.idf.values["lo"] = 1.0;
    vocab.idf.values["hi"] = 3.0;
    auto fv = extract_lexical(make_turn("lo hi"), vocab);
    CHECK(fv.dense.at("lex_min") == doctest::Approx(1.0));
    CHECK(fv.dense.at("lex_max") == doctest::Approx(3.0));
    CHECK(fv.dense.at("lex_avg") == doctest::Approx(2.0));
  }
  SUBCASE("no leakage: vocab fitted without a turn ignores its terms") {
    std::vector<Turn> train;
    for (int i = 0; i < 6; ++i) train.push_back(make_turn("train only words"));
    auto vocab = fit_lexical_vocab(train);
    auto fv = extract_lexical(make_turn("testfold testfold testfold testfold testfold"), vocab);
    CHECK(fv.sparse.empty());
  }
}

TEST_CASE("syntactic POS n-grams") {
  ExtractionContext ctx;
  ctx.bundle = &fixture_bundle();

  Turn t = make_turn("a b");
  t.external_pos = std::vector<std::string>{"DT", "NN"};
  std::set<std::string> vocab = fit_pos_vocab({t}, ctx);
  CHECK(vocab == std::set<std::string>{"DT", "NN", "DT_NN"});

  auto fv = extract_syntactic(t, vocab, ctx);
  CHECK(fv.sparse.at("pos:DT") == 1);
  CHECK(fv.sparse.at("pos:NN") == 1);
  CHECK(fv.sparse.at("pos:DT_NN") == 1);

  SUBCASE("three tags add the trigram") {
    Turn t3 = make_turn("a b c");
    t3.external_pos = std::vector<std::string>{"DT", "NN", "VB"};
    auto vocab3 = fit_pos_vocab({t3}, ctx);
    CHECK(vocab3.count("DT_NN_VB") == 1);
    auto fv3 = extract_syntactic(t3, vocab3, ctx);
    CHECK(fv3.sparse.at("pos:DT_NN_VB") == 1);
  }
  SUBCASE("no tagger and no external tags raises") {
    CHECK_THROWS_AS(extract_syntactic(make_turn("unseen"), {}, ctx), ConfigError);
  }
  SUBCASE("empty turn emits nothing") {
    Turn e = make_turn(".");
    e.external_pos = std::vector<std::string>{"."};
    auto fv2 = extract_syntactic(e, {}, ctx);
    CHECK(fv2.sparse.empty());
  }
  SUBCASE("external tags bypass the tagger entirely") {
    // no tagger in ctx, yet extraction succeeds via external_pos
    auto fv4 = extract_syntactic(t, vocab, ctx);
    CHECK(fv4.sparse.size() == 3);
  }
}

TEST_CASE("pronoun features") {
  const auto& bundle = fixture_bundle();

  SUBCASE("she") {
    auto fv = extract_pronoun(make_turn("she laughed"), bundle);
    CHECK(fv.dense.at("pron_any") == 1);
    CHECK(fv.dense.at("pron_total") == 1);
    CHECK(fv.dense.at("pron_person3") == 1);
    CHECK(fv.dense.at("pron_sg") == 1);
    CHECK(fv.dense.at("pron_cat_personal") == 1);
  }
  SUBCASE("no pronouns") {
    auto fv = extract_pronoun(make_turn("lighthouse storm beacon"), bundle);
    CHECK(fv.dense.at("pron_any") == 0);
    CHECK(fv.dense.at("pron_total") == 0);
    for (const auto& [name, v] : fv.dense) CHECK(v == 0);
  }
  SUBCASE("their themselves") {
    auto fv = extract_pronoun(make_turn("their themselves"), bundle);
    CHECK(fv.dense.at("pron_cat_possessive") == 1);
    CHECK(fv.dense.at("pron_cat_reflexive") == 1);
    CHECK(fv.dense.at("pron_pl") == 2);
    CHECK(fv.dense.at("pron_person3") == 2);
  }
  SUBCASE("reciprocal multiword entry") {
    auto fv = extract_pronoun(make_turn("they helped each other"), bundle);
    CHECK(fv.dense.at("pron_cat_reciprocal") == 1);
    CHECK(fv.dense.at("pron_total") == 2);  // they + each other
  }
  SUBCASE("exactly 16 features emitted") {
    auto fv = extract_pronoun(make_turn("she"), bundle);
    CHECK(fv.dense.size() == 16);
  }
}

TEST_CASE("named-entity features") {
  SUBCASE("one person in a five-word turn") {
    Turn t = make_turn("I did not like Biff");
    std::vector<EntitySpan> spans = {{4, 5, EntityCategory::Person}};
    auto fv = extract_named_entity(t, spans);
    CHECK(fv.dense.at("ne_person") == 1);
    CHECK(fv.dense.at("ne_person_norm") == doctest::Approx(0.2));
    CHECK(fv.dense.at("ne_any") == 1);
    CHECK(fv.dense.at("ne_total") == 1);
  }
  SUBCASE("no entities") {
    auto fv = extract_named_entity(make_turn("nothing here"), {});
    for (const auto& [name, v] : fv.dense) CHECK(v == 0);
    CHECK(fv.dense.size() == 16);
  }
  SUBCASE("two entities across categories in ten words") {
    Turn t = make_turn("one two three four five six seven eight nine ten");
    std::vector<EntitySpan> spans = {{0, 1, EntityCategory::Person},
                                     {5, 6, EntityCategory::Location}};
    auto fv = extract_named_entity(t, spans);
    CHECK(fv.dense.at("ne_total") == 2);
    CHECK(fv.dense.at("ne_total_norm") == doctest::Approx(0.2));
    CHECK(fv.dense.at("ne_person_any") == 1);
    CHECK(fv.dense.at("ne_location_any") == 1);
    CHECK(fv.dense.at("ne_organization_any") == 0);
  }
}

TEST_CASE("book features") {
  const auto& bundle = fixture_bundle();

  SUBCASE("character mention count and normalization") {
    Book book;
    book.title = "Salesman";
    book.characters.push_back({"Biff", std::nullopt, {}});
    book.summary_text = "Biff struggles.";
    book.summary_sentences = split_sentences(book.summary_text);
    auto fv = extract_book(make_turn("I did not like Biff"), book, bundle);
    CHECK(fv.dense.at("book_char_any") == 1);
    CHECK(fv.dense.at("book_char_count") == 1);
    CHECK(fv.dense.at("book_char_count_norm") == doctest::Approx(0.2));
    CHECK(fv.dense.at("book_char_distinct") == 1);
  }
  SUBCASE("turn identical to the summary after stopword removal") {
    Book book = synthetic_book();
    auto fv = extract_book(make_turn(book.summary_text), book, bundle);
    CHECK(fv.dense.at("book_jaccard_whole") == doctest::Approx(1.0));
    CHECK(fv.dense.at("book_cosine_whole") == doctest::Approx(1.0));
  }
  SUBCASE("disjoint vocabulary") {
    Book book = synthetic_book();
    auto fv = extract_book(make_turn("quantum chromodynamics excites physicists"),
                           book, bundle);
    CHECK(fv.dense.at("book_overlap_whole") == 0);
    CHECK(fv.dense.at("book_jaccard_whole") == 0);
    CHECK(fv.dense.at("book_cosine_whole") == 0);
    CHECK(fv.dense.at("book_overlap_maxsent") == 0);
  }
  SUBCASE("empty book gives zero features") {
    Book empty;
    auto fv = extract_book(make_turn("anything at all"), empty, bundle);
    for (const auto& [name, v] : fv.dense) CHECK(v == 0);
  }
  SUBCASE("similarities bounded in [0,1]") {
    Book book = synthetic_book();
    for (const std::string& text :
         {"the keeper lights the lantern", "storm wreck storm wreck storm",
          "Willa and Bram and Mara", "totally unrelated content"}) {
      auto fv = extract_book(make_turn(text), book, bundle);
      for (const char* f : {"book_jaccard_whole", "book_cosine_whole",
                            "book_jaccard_maxsent", "book_cosine_maxsent"}) {
        CHECK(fv.dense.at(f) >= 0.0);
        CHECK(fv.dense.at(f) <= 1.0 + 1e-12);
      }
    }
  }
  SUBCASE("max-over-sentences at least matches one sentence's overlap") {
    Book book = synthetic_book();
    auto fv = extract_book(make_turn(book.summary_sentences.front()), book, bundle);
    CHECK(fv.dense.at("book_jaccard_maxsent") == doctest::Approx(1.0));
  }
  SUBCASE("nickname matches count as mentions") {
    Book book = synthetic_book();  // Willa Hart, nickname "Will"
    auto fv = extract_book(make_turn("Will disagreed strongly here"), book, bundle);
    CHECK(fv.dense.at("book_char_count") == 1);
  }
}

TEST_CASE("schema fitting and assembly") {
  ExtractionContext ctx;
  ctx.bundle = &fixture_bundle();
  ctx.books["*"] = synthetic_book();
  auto turns = generate_synthetic_corpus(3, 40);

  SUBCASE("speciteller set = shallow features + embedding dims") {
    auto schema = fit_schema(turns, {"speciteller"}, ctx);
    CHECK(schema.names.size() == 14 + ctx.bundle->embedding_dim);
  }
  SUBCASE("empty config rejected") {
    CHECK_THROWS_AS(fit_schema(turns, {}, ctx), ConfigError);
  }
  SUBCASE("unknown set rejected") {
    CHECK_THROWS_AS(fit_schema(turns, {"bogus"}, ctx), ConfigError);
  }
  SUBCASE("schema stability: same turn twice, identical vectors") {
    auto schema = fit_schema(turns, {"speciteller", "semantic", "lexical"}, ctx);
    auto a = vectorize(assemble_features(turns[5], schema, ctx), schema);
    auto b = vectorize(assemble_features(turns[5], schema, ctx), schema);
    CHECK(a == b);
  }
  SUBCASE("all values finite for awkward inputs") {
    auto schema = fit_schema(turns, {"speciteller", "semantic", "pronoun", "ne", "book"}, ctx);
    for (const std::string& text : {"!", "...", "99 99 99", "\xC3\xA9 caf\xC3\xA9"}) {
      auto row = vectorize(assemble_features(make_turn(text), schema, ctx), schema);
      for (double v : row) CHECK(std::isfinite(v));
    }
  }
  SUBCASE("test-fold extraction introduces no names outside the schema") {
    std::vector<Turn> train(turns.begin(), turns.begin() + 30);
    std::vector<Turn> test(turns.begin() + 30, turns.end());
    auto schema = fit_schema(train, {"lexical"}, ctx);
    for (const auto& t : test) {
      auto fv = extract_lexical(t, schema.lexical);
      for (const auto& [name, v] : fv.sparse)
        CHECK(schema.index.count(name) == 1);
    }
  }
}
