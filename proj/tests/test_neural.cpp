#include <doctest.h>

#include <cmath>
#include <random>

#include "specpred/neural.hpp"

using namespace specpred;

namespace {

NeuralConfig small_config(int hidden = 8, std::uint64_t seed = 1) {
  NeuralConfig cfg;
  cfg.hidden = hidden;
  cfg.fc_out = 4;
  cfg.seed = seed;
  return cfg;
}

JointModel small_model(int n_handcrafted = 3, int hidden = 8, std::uint64_t seed = 1) {
  return JointModel(n_handcrafted, small_config(hidden, seed), /*validate_range=*/false);
}

}  // namespace

TEST_CASE("char alphabet and encoding") {
  CHECK(CharAlphabet::index_of('a') == 0);
  CHECK(CharAlphabet::index_of('Z') == 25);
  CHECK(CharAlphabet::index_of('0') == 26);
  CHECK(CharAlphabet::index_of('9') == 35);
  CHECK(CharAlphabet::index_of(' ') == CharAlphabet::space_index);
  CHECK(CharAlphabet::index_of(' ', /*strict=*/true) == -1);
  CHECK(CharAlphabet::index_of('!') == -1);

  SUBCASE("ab1 encodes to three indices") {
    CHECK(encode_chars("ab1") == std::vector<int>{0, 1, 27});
  }
  SUBCASE("case folded, out-of-alphabet characters dropped") {
    CHECK(encode_chars("A,b") == std::vector<int>{0, 1});
  }
  SUBCASE("strict mode drops spaces too") {
    CHECK(encode_chars("a b") == std::vector<int>{0, CharAlphabet::space_index, 1});
    CHECK(encode_chars("a b", /*strict=*/true) == std::vector<int>{0, 1});
  }
  SUBCASE("no in-alphabet characters leaves the sentinel step") {
    CHECK(encode_chars("!!!") == std::vector<int>{-1});
    CHECK(encode_chars("") == std::vector<int>{-1});
  }
  SUBCASE("truncation at max_chars") {
    CHECK(encode_chars("abcdefgh", false, 3).size() == 3);
  }
}

TEST_CASE("config validation") {
  NeuralConfig cfg;
  cfg.hidden = 49;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.hidden = 201;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.hidden = 50;
  CHECK_NOTHROW(cfg.validate());
  cfg.hidden = 200;
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("forward pass") {
  auto model = small_model();
  std::vector<double> hand = {0.3, -1.2, 0.8};

  SUBCASE("output lies on the 3-simplex") {
    auto f = model.forward(encode_chars("hello there 42"), hand);
    double sum = 0;
    for (double p : f.probs) {
      CHECK(p > 0);
      CHECK(p < 1);
      sum += p;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(f.embedding.size() == 8);
  }
  SUBCASE("zeroed parameters give the uniform distribution") {
    auto zero = small_model();
    for (double& p : zero.params()) p = 0.0;
    auto f = zero.forward(encode_chars("anything"), hand);
    for (double p : f.probs) CHECK(p == doctest::Approx(1.0 / 3.0));
  }
  SUBCASE("deterministic on identical inputs") {
    auto a = model.forward(encode_chars("same text"), hand);
    auto b = model.forward(encode_chars("same text"), hand);
    CHECK(a.probs == b.probs);
    CHECK(a.embedding == b.embedding);
  }
  SUBCASE("invariant to case and out-of-alphabet characters") {
    auto a = model.forward(encode_chars("Hello, there!"), hand);
    auto b = model.forward(encode_chars("hello there"), hand);
    CHECK(a.probs == b.probs);
  }
  SUBCASE("handcrafted size mismatch raises") {
    CHECK_THROWS_AS(model.forward(encode_chars("x"), {1.0}), DataError);
  }
  SUBCASE("json round trip preserves the forward pass") {
    auto back = JointModel::from_json(model.to_json());
    auto a = model.forward(encode_chars("round trip"), hand);
    auto b = back.forward(encode_chars("round trip"), hand);
    CHECK(a.probs == b.probs);
  }
}

TEST_CASE("gradient check against central finite differences") {
  SUBCASE("small model, one sample") {
    auto model = small_model(3, 8, 3);
    JointSample s{encode_chars("short sample 7"), {0.4, -0.2, 1.1}, 2};
    CHECK(gradient_check(model, s, 200) < 1e-4);
  }
  SUBCASE("sentinel (empty) sequence keeps gradients finite and correct") {
    auto model = small_model(3, 8, 4);
    JointSample s{encode_chars("!!!"), {0.4, -0.2, 1.1}, 1};
    CHECK(gradient_check(model, s, 200) < 1e-4);
  }
  SUBCASE("longer sequence through full BPTT") {
    auto model = small_model(2, 6, 5);
    JointSample s{encode_chars("the quick brown fox jumps over 13 lazy dogs"),
                  {0.9, -0.6}, 0};
    CHECK(gradient_check(model, s, 300) < 1e-4);
  }
}

TEST_CASE("joint training") {
  // tiny synthetic task: label 0 = digits, 1 = short words, 2 = long words
  std::vector<JointSample> data;
  std::mt19937_64 rng(17);
  auto rand_text = [&](int label) {
    std::string s;
    int len = label == 0 ? 6 : (label == 1 ? 5 : 30);
    const char* pool = label == 0 ? "0123456789" : "abcdefghij ";
    int pool_len = label == 0 ? 10 : 11;
    for (int i = 0; i < len; ++i) s += pool[rng() % static_cast<std::uint64_t>(pool_len)];
    return s;
  };
  for (int i = 0; i < 90; ++i) {
    int label = i % 3;
    double h0 = label == 2 ? 1.0 : 0.0;
    data.push_back({encode_chars(rand_text(label)), {h0, 0.5}, label});
  }

  NeuralConfig cfg;
  cfg.hidden = 50;
  cfg.fc_out = 8;
  cfg.max_epochs = 10;
  cfg.patience = 4;
  cfg.seed = 9;

  SUBCASE("training loss decreases from the first epoch") {
    std::vector<double> losses;
    train_joint(data, cfg, &losses);
    REQUIRE(losses.size() >= 2);
    CHECK(losses.back() < losses.front());
  }
  SUBCASE("same seed and data give identical parameters") {
    auto a = train_joint(data, cfg);
    auto b = train_joint(data, cfg);
    CHECK(a.params() == b.params());
  }
  SUBCASE("empty training set rejected") {
    CHECK_THROWS_AS(train_joint({}, cfg), DataError);
  }
  SUBCASE("trained embeddings separate the task better than untrained ones") {
    auto trained = train_joint(data, cfg);
    JointModel untrained(2, cfg);
    auto probe_accuracy = [&](const JointModel& m) {
      // 1-nearest-centroid probe over the LSTM embeddings
      std::vector<std::vector<double>> centroid(3, std::vector<double>(static_cast<std::size_t>(cfg.hidden), 0.0));
      std::vector<int> n(3, 0);
      std::vector<std::vector<double>> embs;
      for (const auto& s : data) {
        auto f = m.forward(s.chars, s.handcrafted);
        embs.push_back(f.embedding);
        for (std::size_t d = 0; d < f.embedding.size(); ++d)
          centroid[static_cast<std::size_t>(s.label)][d] += f.embedding[d];
        ++n[static_cast<std::size_t>(s.label)];
      }
      for (int l = 0; l < 3; ++l)
        for (double& v : centroid[static_cast<std::size_t>(l)]) v /= n[static_cast<std::size_t>(l)];
      int hits = 0;
      for (std::size_t i = 0; i < data.size(); ++i) {
        int best = 0;
        double best_d = 1e300;
        for (int l = 0; l < 3; ++l) {
          double d2 = 0;
          for (std::size_t d = 0; d < embs[i].size(); ++d) {
            double diff = embs[i][d] - centroid[static_cast<std::size_t>(l)][d];
            d2 += diff * diff;
          }
          if (d2 < best_d) {
            best_d = d2;
            best = l;
          }
        }
        if (best == data[i].label) ++hits;
      }
      return static_cast<double>(hits) / static_cast<double>(data.size());
    };
    CHECK(probe_accuracy(trained) > probe_accuracy(untrained));
  }
}
