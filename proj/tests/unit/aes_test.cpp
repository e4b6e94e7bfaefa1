#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>

#include "coheval/diff/gradcheck.hpp"
#include "coheval/models/aes.hpp"
#include "coheval/synth/prompt_spec.hpp"

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

text::Essay essay_with(std::vector<std::vector<text::TokenId>> sentences) {
  text::Essay e;
  e.id = "t";
  e.sentences = std::move(sentences);
  return e;
}

AesConfig tiny_config(std::size_t k, std::size_t d) {
  return AesConfig{k, d, 0.2};
}

}  // namespace

TEST_CASE("essay_repr of a one-token essay equals that token's lstm state") {
  auto table = make_table(5, 2, 1);
  Rng rng(2);
  AesModel model(tiny_config(2, 3), table, rng);
  text::Essay essay = essay_with({{4}});

  Tape tape;
  Var repr = model.essay_repr(tape, essay);

  Tape oracle;
  Var x = oracle.embed(table->rows, 4);
  Var h0 = oracle.constant(Tensor({3}));
  Var c0 = oracle.constant(Tensor({3}));
  auto step = diff::lstm_step(oracle, x, h0, c0, model.essay_lstm());
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(tape.value(repr)[i] == doctest::Approx(oracle.value(step.h)[i]));
  }
}

TEST_CASE("essay_repr with zero weights is zero") {
  auto table = make_table(5, 2, 1);
  Rng rng(2);
  AesConfig cfg = tiny_config(2, 3);
  cfg.init_scale = 0.0;
  AesModel model(cfg, table, rng);
  text::Essay essay = essay_with({{0, 1}, {2, 3}});
  Tape tape;
  Var repr = model.essay_repr(tape, essay);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(tape.value(repr)[i] == 0.0);
  }
}

TEST_CASE("essay_repr averages chained lstm states across sentences") {
  auto table = make_table(8, 2, 5);
  Rng rng(6);
  AesModel model(tiny_config(2, 3), table, rng);
  // Sentence boundaries are ignored: 5 tokens in document order.
  text::Essay essay = essay_with({{1, 3}, {0}, {7, 2}});

  Tape tape;
  Var repr = model.essay_repr(tape, essay);

  Tape oracle;
  Var h = oracle.constant(Tensor({3}));
  Var c = oracle.constant(Tensor({3}));
  std::vector<Var> states;
  for (text::TokenId id : {1, 3, 0, 7, 2}) {
    auto out = diff::lstm_step(oracle, oracle.embed(table->rows, id), h, c,
                               model.essay_lstm());
    h = out.h;
    c = out.c;
    states.push_back(out.h);
  }
  Var mean = oracle.mean_stack(states);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(tape.value(repr)[i] ==
          doctest::Approx(oracle.value(mean)[i]).epsilon(1e-14));
  }
}

TEST_CASE("essay_repr rejects an empty essay") {
  auto table = make_table(5, 2, 1);
  Rng rng(2);
  AesModel model(tiny_config(2, 3), table, rng);
  text::Essay essay;
  Tape tape;
  CHECK_THROWS_AS(model.essay_repr(tape, essay), std::invalid_argument);
}

TEST_CASE("essay_score with all-zero weights is 0.5") {
  auto table = make_table(5, 2, 1);
  Rng rng(2);
  AesConfig cfg = tiny_config(2, 3);
  cfg.init_scale = 0.0;
  AesModel model(cfg, table, rng);
  model.score_weights().value.fill(0.0);
  text::Essay essay = essay_with({{0, 1, 2}});
  CHECK(model.predict(essay) == doctest::Approx(0.5));
}

TEST_CASE("essay_score composes repr and affine sigmoid") {
  auto table = make_table(6, 2, 9);
  Rng rng(10);
  AesModel model(tiny_config(2, 3), table, rng);
  text::Essay essay = essay_with({{0, 5, 2}, {3}});

  const auto repr = model.essay_repr_values(essay);
  double z = model.score_bias().value.item();
  for (std::size_t i = 0; i < repr.size(); ++i) {
    z += repr[i] * model.score_weights().value[i];
  }
  const double expect = 1.0 / (1.0 + std::exp(-z));
  CHECK(model.predict(essay) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("squared error loss values") {
  auto table = make_table(5, 2, 1);
  Rng rng(2);
  AesModel model(tiny_config(2, 3), table, rng);
  Tape tape;
  CHECK(tape.value(tape.squared_error(tape.scalar(0.7), 0.7)).item() == 0.0);
  CHECK(tape.value(tape.squared_error(tape.scalar(0.0), 1.0)).item() == 1.0);
  CHECK(tape.value(tape.squared_error(tape.scalar(0.3), 0.8)).item() ==
        doctest::Approx(0.25));
}

TEST_CASE("score scaling matches the prompt ranges") {
  ScoreScale prompt1{1, 2, 12};
  CHECK(prompt1.scale(7.0) == doctest::Approx(0.5));
  CHECK(prompt1.unscale(0.5) == doctest::Approx(7.0));
  CHECK(prompt1.scale(2.0) == 0.0);
  CHECK(prompt1.scale(12.0) == 1.0);

  ScoreScale prompt7{7, 0, 30};
  CHECK(prompt7.scale(23.0) == doctest::Approx(23.0 / 30.0).epsilon(1e-12));

  CHECK_THROWS_AS(prompt1.scale(13.0), std::out_of_range);
  CHECK_THROWS_AS(prompt1.unscale(1.5), std::out_of_range);
}

TEST_CASE("scale/unscale round-trips exactly for all bundled prompt ranges") {
  for (const auto& [id, spec] : synth::asap_prompt_specs()) {
    const ScoreScale scale = spec.scale();
    for (double raw = spec.min_score; raw <= spec.max_score; raw += 1.0) {
      CHECK(std::fabs(scale.unscale(scale.scale(raw)) - raw) < 1e-12);
    }
  }
}

TEST_CASE("unscaled predictions always land inside the prompt range") {
  auto table = make_table(6, 2, 9);
  Rng rng(10);
  AesModel model(tiny_config(2, 3), table, rng);
  ScoreScale scale{1, 2, 12};
  Rng data(11);
  for (int i = 0; i < 20; ++i) {
    text::Essay essay = essay_with(
        {{static_cast<text::TokenId>(data.below(6)),
          static_cast<text::TokenId>(data.below(6))}});
    const double scaled = model.predict(essay);
    CHECK(scaled > 0.0);
    CHECK(scaled < 1.0);
    const double raw = scale.unscale(scaled);
    CHECK(raw >= 2.0);
    CHECK(raw <= 12.0);
  }
}

TEST_CASE("full scorer gradient check stays under 1e-4") {
  auto table = make_table(6, 3, 31, 0.3);
  Rng rng(32);
  AesModel model(tiny_config(3, 4), table, rng);
  text::Essay essay = essay_with({{0, 3, 2}, {4, 1}});

  auto forward = [&](Tape& tape) {
    return model.training_loss(tape, essay, 0.7);
  };
  CHECK(diff::gradient_check(forward, model.parameters()) < 1e-4);
}
