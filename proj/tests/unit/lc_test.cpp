#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>

#include "coheval/diff/gradcheck.hpp"
#include "coheval/models/lc.hpp"

using namespace coheval;
using namespace coheval::models;
using diff::Rng;
using diff::Tape;
using diff::Tensor;
using diff::Var;

namespace {

std::shared_ptr<text::EmbeddingTable> make_table(std::size_t vocab,
                                                 std::size_t dim,
                                                 std::uint64_t seed,
                                                 double scale = 0.5) {
  Rng rng(seed);
  return std::make_shared<text::EmbeddingTable>(vocab, dim, rng, scale);
}

LcConfig tiny_config(std::size_t k, std::size_t d_lstm, std::size_t d_cnn,
                     std::size_t m) {
  LcConfig cfg;
  cfg.embed_dim = k;
  cfg.lstm_dim = d_lstm;
  cfg.cnn_dim = d_cnn;
  cfg.window = m;
  cfg.dropout = 0.0;
  cfg.init_scale = 0.2;
  return cfg;
}

text::Essay essay_with(std::vector<std::vector<text::TokenId>> sentences) {
  text::Essay e;
  e.id = "t";
  e.sentences = std::move(sentences);
  return e;
}

}  // namespace

TEST_CASE("sentence_repr of a one-word sentence equals a single lstm step") {
  auto table = make_table(6, 3, 1);
  Rng rng(2);
  LcModel model(tiny_config(3, 4, 4, 2), table, rng);

  Tape tape;
  Var repr = model.sentence_repr(tape, {5});

  Tape oracle;
  Var x = oracle.embed(table->rows, 5);
  Var h0 = oracle.constant(Tensor({4}));
  Var c0 = oracle.constant(Tensor({4}));
  auto step = diff::lstm_step(oracle, x, h0, c0, model.sentence_lstm());
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(tape.value(repr)[i] ==
          doctest::Approx(oracle.value(step.h)[i]).epsilon(1e-15));
  }
}

TEST_CASE("sentence_repr with zero LSTM weights is the zero vector") {
  auto table = make_table(6, 3, 1);
  Rng rng(2);
  LcConfig cfg = tiny_config(3, 4, 4, 2);
  cfg.init_scale = 0.0;
  LcModel model(cfg, table, rng);
  Tape tape;
  Var repr = model.sentence_repr(tape, {0, 1, 2, 3});
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(tape.value(repr)[i] == 0.0);
  }
}

TEST_CASE("sentence_repr chains lstm steps over the sentence") {
  auto table = make_table(8, 2, 3);
  Rng rng(4);
  LcModel model(tiny_config(2, 3, 3, 2), table, rng);
  const std::vector<text::TokenId> sentence = {2, 5, 7};

  Tape tape;
  Var repr = model.sentence_repr(tape, sentence);

  // Step-chaining oracle: explicit state threading.
  Tape oracle;
  Var h = oracle.constant(Tensor({3}));
  Var c = oracle.constant(Tensor({3}));
  for (text::TokenId id : sentence) {
    auto out = diff::lstm_step(oracle, oracle.embed(table->rows, id), h, c,
                               model.sentence_lstm());
    h = out.h;
    c = out.c;
  }
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(tape.value(repr)[i] ==
          doctest::Approx(oracle.value(h)[i]).epsilon(1e-14));
  }
}

TEST_CASE("sentence_repr rejects an empty sentence") {
  auto table = make_table(4, 2, 1);
  Rng rng(2);
  LcModel model(tiny_config(2, 3, 3, 2), table, rng);
  Tape tape;
  CHECK_THROWS_AS(model.sentence_repr(tape, {}), std::invalid_argument);
}

TEST_CASE("clique_repr with a zero filter is the zero vector") {
  auto table = make_table(4, 2, 1);
  Rng rng(2);
  LcModel model(tiny_config(2, 3, 5, 2), table, rng);
  model.clique_filter().value.fill(0.0);
  Tape tape;
  std::vector<Var> sents = {tape.constant(Tensor::vector({1.0, 2.0, 3.0})),
                            tape.constant(Tensor::vector({-1.0, 0.5, 2.0}))};
  auto reprs = model.clique_reprs(tape, sents, false, nullptr);
  REQUIRE(reprs.size() == 1);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(tape.value(reprs[0])[i] == 0.0);
  }
}

TEST_CASE("clique_repr with window 1 and a permuted identity filter") {
  auto table = make_table(4, 2, 1);
  Rng rng(2);
  LcModel model(tiny_config(2, 3, 3, 1), table, rng);
  // Filter rows pick out sentence entries in rotated order.
  model.clique_filter().value.fill(0.0);
  model.clique_filter().value.at(0, 1) = 1.0;
  model.clique_filter().value.at(1, 2) = 1.0;
  model.clique_filter().value.at(2, 0) = 1.0;
  Tape tape;
  std::vector<Var> sents = {tape.constant(Tensor::vector({0.3, -0.6, 1.1}))};
  auto reprs = model.clique_reprs(tape, sents, false, nullptr);
  REQUIRE(reprs.size() == 1);
  CHECK(tape.value(reprs[0])[0] == doctest::Approx(std::tanh(-0.6)));
  CHECK(tape.value(reprs[0])[1] == doctest::Approx(std::tanh(1.1)));
  CHECK(tape.value(reprs[0])[2] == doctest::Approx(std::tanh(0.3)));
}

TEST_CASE("clique_repr matches the concatenate-then-matmul oracle") {
  auto table = make_table(4, 2, 7);
  Rng rng(8);
  const std::size_t d_lstm = 4, d_cnn = 2, m = 3;
  LcModel model(tiny_config(2, d_lstm, d_cnn, m), table, rng);

  Rng data_rng(9);
  std::vector<std::vector<double>> sent_values;
  Tape tape;
  std::vector<Var> sents;
  for (std::size_t s = 0; s < m; ++s) {
    std::vector<double> v(d_lstm);
    for (auto& e : v) e = data_rng.uniform_symmetric(1.0);
    sent_values.push_back(v);
    sents.push_back(tape.constant(Tensor::vector(v)));
  }
  auto reprs = model.clique_reprs(tape, sents, false, nullptr);
  REQUIRE(reprs.size() == 1);

  // Dense oracle: flat concatenation then an explicit matrix multiply.
  std::vector<double> flat;
  for (const auto& v : sent_values) flat.insert(flat.end(), v.begin(), v.end());
  for (std::size_t r = 0; r < d_cnn; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < m * d_lstm; ++c) {
      acc += model.clique_filter().value.at(r, c) * flat[c];
    }
    CHECK(tape.value(reprs[0])[r] ==
          doctest::Approx(std::tanh(acc)).epsilon(1e-14));
  }
}

TEST_CASE("clique count is N - m + 1 and short essays fall back to one") {
  auto table = make_table(4, 2, 7);
  Rng rng(8);
  LcModel model(tiny_config(2, 3, 3, 3), table, rng);
  Tape tape;
  auto mk = [&](int n) {
    std::vector<Var> sents;
    for (int i = 0; i < n; ++i) {
      sents.push_back(tape.constant(Tensor::vector({0.1 * i, 0.2, 0.3})));
    }
    return model.clique_reprs(tape, sents, false, nullptr).size();
  };
  CHECK(mk(7) == 5);
  CHECK(mk(3) == 1);
  CHECK(mk(2) == 1);  // N < m: single truncated clique
  CHECK(mk(1) == 1);
}

TEST_CASE("clique_score fixed points") {
  auto table = make_table(4, 2, 7);
  Rng rng(8);
  LcModel model(tiny_config(2, 2, 2, 1), table, rng);

  SUBCASE("zero score vector gives 0.5 for every clique") {
    model.score_vector().value.fill(0.0);
    Tape tape;
    std::vector<Var> reprs = {tape.constant(Tensor::vector({0.9, -0.2}))};
    auto scores = model.clique_scores(tape, reprs);
    CHECK(tape.value(scores[0]).item() == doctest::Approx(0.5));
  }

  SUBCASE("orthogonal representation gives 0.5") {
    model.score_vector().value[0] = 2.0;
    model.score_vector().value[1] = 2.0;
    Tape tape;
    std::vector<Var> reprs = {tape.constant(Tensor::vector({0.5, -0.5}))};
    auto scores = model.clique_scores(tape, reprs);
    CHECK(tape.value(scores[0]).item() == doctest::Approx(0.5));
  }
}

TEST_CASE("local_loss reproduces hand-computed BCE values") {
  auto table = make_table(4, 2, 7);
  Rng rng(8);
  LcModel model(tiny_config(2, 2, 2, 1), table, rng);
  Tape tape;

  SUBCASE("single 0.5 clique against gold 1 is ln 2") {
    std::vector<Var> scores = {tape.scalar(0.5)};
    CHECK(tape.value(model.local_loss(tape, scores, 1.0)).item() ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));
  }

  SUBCASE("loss decreases monotonically as prediction approaches gold") {
    double prev = 1e9;
    for (double p = 0.5; p < 0.999; p += 0.1) {
      std::vector<Var> scores = {tape.scalar(p)};
      const double loss =
          tape.value(model.local_loss(tape, scores, 1.0)).item();
      CHECK(loss < prev);
      prev = loss;
    }
  }

  SUBCASE("two cliques against gold 0") {
    std::vector<Var> scores = {tape.scalar(0.2), tape.scalar(0.7)};
    const double expect = (-std::log(0.8) - std::log(0.3)) / 2.0;
    CHECK(tape.value(model.local_loss(tape, scores, 0.0)).item() ==
          doctest::Approx(expect).epsilon(1e-12));
    CHECK(expect == doctest::Approx(0.7136).epsilon(1e-3));
  }

  SUBCASE("no cliques is an error") {
    std::vector<Var> none;
    CHECK_THROWS_AS(model.local_loss(tape, none, 1.0), std::invalid_argument);
  }
}

TEST_CASE("document score: mean and product variants") {
  auto table = make_table(4, 2, 7);
  Rng rng(8);
  LcConfig cfg = tiny_config(2, 2, 2, 1);
  LcModel mean_model(cfg, table, rng);
  cfg.multiplicative = true;
  Rng rng2(8);
  LcModel mul_model(cfg, table, rng2);

  Tape tape;
  std::vector<Var> abc = {tape.scalar(0.2), tape.scalar(0.4),
                          tape.scalar(0.9)};
  CHECK(tape.value(mean_model.document_score(tape, abc)).item() ==
        doctest::Approx(0.5));

  std::vector<Var> single = {tape.scalar(0.37)};
  CHECK(tape.value(mean_model.document_score(tape, single)).item() ==
        doctest::Approx(0.37));

  std::vector<Var> halves = {tape.scalar(0.5), tape.scalar(0.5)};
  CHECK(tape.value(mul_model.document_score(tape, halves)).item() ==
        doctest::Approx(0.25));

  std::vector<Var> nines;
  for (int i = 0; i < 10; ++i) nines.push_back(tape.scalar(0.9));
  CHECK(tape.value(mul_model.document_score(tape, nines)).item() ==
        doctest::Approx(std::pow(0.9, 10)).epsilon(1e-12));

  // 50 random scores against a plain summation oracle.
  Rng data(5);
  std::vector<Var> rand_scores;
  double sum = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double v = 0.01 + 0.98 * data.uniform01();
    sum += v;
    rand_scores.push_back(tape.scalar(v));
  }
  CHECK(std::fabs(tape.value(mean_model.document_score(tape, rand_scores))
                      .item() -
                  sum / 50.0) < 1e-12);
}

TEST_CASE("mean of clique scores dominates their product") {
  auto table = make_table(4, 2, 7);
  Rng rng(8);
  LcConfig cfg = tiny_config(2, 2, 2, 1);
  LcModel mean_model(cfg, table, rng);
  cfg.multiplicative = true;
  Rng rng2(8);
  LcModel mul_model(cfg, table, rng2);

  Rng data(17);
  for (int trial = 0; trial < 500; ++trial) {
    Tape tape;
    const int t = 1 + static_cast<int>(data.below(12));
    std::vector<Var> scores;
    for (int i = 0; i < t; ++i) {
      scores.push_back(tape.scalar(0.001 + 0.998 * data.uniform01()));
    }
    const double mean = tape.value(mean_model.document_score(tape, scores)).item();
    const double prod = tape.value(mul_model.document_score(tape, scores)).item();
    CHECK(mean >= prod - 1e-15);
    CHECK(mean > 0.0);
    CHECK(mean < 1.0);
    CHECK(prod > 0.0);
    CHECK(prod < 1.0);
  }
}

TEST_CASE("clique_vector_max matches a per-dimension scan") {
  auto table = make_table(4, 2, 7);
  Rng rng(8);
  LcModel model(tiny_config(2, 2, 2, 1), table, rng);
  Tape tape;

  std::vector<Var> two = {tape.constant(Tensor::vector({1.0, -2.0})),
                          tape.constant(Tensor::vector({0.0, 5.0}))};
  Var mx = tape.max_stack(two);
  CHECK(tape.value(mx)[0] == 1.0);
  CHECK(tape.value(mx)[1] == 5.0);

  Rng data(3);
  std::vector<Var> many;
  std::vector<std::vector<double>> raw;
  for (int i = 0; i < 20; ++i) {
    std::vector<double> v = {data.uniform_symmetric(2.0),
                             data.uniform_symmetric(2.0)};
    raw.push_back(v);
    many.push_back(tape.constant(Tensor::vector(v)));
  }
  Var mx2 = tape.max_stack(many);
  for (std::size_t dim = 0; dim < 2; ++dim) {
    double best = raw[0][dim];
    for (const auto& v : raw) best = std::max(best, v[dim]);
    CHECK(tape.value(mx2)[dim] == best);
  }
}

TEST_CASE("full model gradient check stays under 1e-4") {
  auto table = make_table(6, 3, 21, 0.3);
  Rng rng(22);
  LcModel model(tiny_config(3, 4, 3, 2), table, rng);
  text::Essay essay = essay_with({{0, 3}, {2}, {4, 1, 5}});
  essay.coherence_label = 1.0;

  auto forward = [&](Tape& tape) {
    return model.training_loss(tape, essay, nullptr);
  };
  CHECK(diff::gradient_check(forward, model.parameters()) < 1e-4);
}

TEST_CASE("predictions are deterministic and in the open unit interval") {
  auto table = make_table(6, 3, 21);
  Rng rng(22);
  LcModel model(tiny_config(3, 4, 3, 3), table, rng);
  text::Essay essay = essay_with({{0, 3}, {2}, {4, 1, 5}, {1, 1}});
  const double a = model.predict(essay);
  const double b = model.predict(essay);
  CHECK(a == b);
  CHECK(a > 0.0);
  CHECK(a < 1.0);
}
