#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>

#include "coheval/diff/gradcheck.hpp"
#include "coheval/models/joint.hpp"

using namespace coheval;
using namespace coheval::models;
using diff::Rng;
using diff::Tape;
using diff::Var;

namespace {

std::shared_ptr<text::EmbeddingTable> make_table(std::size_t vocab,
                                                 std::size_t dim,
                                                 std::uint64_t seed) {
  Rng rng(seed);
  return std::make_shared<text::EmbeddingTable>(vocab, dim, rng, 0.4);
}

JointConfig tiny_config() {
  JointConfig cfg;
  cfg.embed_dim = 2;
  cfg.lstm_dim = 3;
  cfg.cnn_dim = 3;
  cfg.window = 2;
  cfg.dropout = 0.0;
  cfg.init_scale = 0.2;
  return cfg;
}

text::Essay two_sentence_essay() {
  text::Essay e;
  e.id = "j";
  e.sentences = {{0, 3}, {2, 1}};
  return e;
}

}  // namespace

TEST_CASE("joint loss equals the sum of independently computed branch losses") {
  auto table = make_table(5, 2, 41);
  Rng rng(42);
  JointModel model(tiny_config(), table, rng);
  text::Essay essay = two_sentence_essay();
  GoldAssignment gold{0.6, 0.9};

  Tape tape;
  const double joint =
      tape.value(model.training_loss(tape, essay, gold, nullptr)).item();

  Tape branch;
  const double aes_loss =
      branch.value(model.aes().training_loss(branch, essay, 0.6)).item();
  Tape branch2;
  const double lc_loss =
      branch2.value(model.lc().training_loss(branch2, essay, nullptr, 0.9))
          .item();
  CHECK(joint == doctest::Approx(aes_loss + lc_loss).epsilon(1e-14));
}

TEST_CASE("joint loss vanishes when both branches predict their golds") {
  auto table = make_table(5, 2, 41);
  Rng rng(42);
  JointModel model(tiny_config(), table, rng);
  text::Essay essay = two_sentence_essay();
  // The golds that make each loss zero: the branch predictions themselves.
  // Squared error is exactly zero there; BCE reaches its minimum, so use
  // the predicted coherence as gold and check the gradient of the combined
  // loss with respect to the score vector is ~0 at the optimum instead of
  // asserting an exactly-zero loss (BCE of a non-saturated prediction is
  // positive).
  auto pred = model.predict(essay);
  GoldAssignment gold{pred.essay_score_scaled, pred.coherence_score};
  Tape tape;
  Var loss = model.training_loss(tape, essay, gold, nullptr);
  // Squared-error side contributes exactly zero at its own prediction.
  Tape aes_tape;
  CHECK(aes_tape
            .value(model.aes().training_loss(aes_tape, essay,
                                             pred.essay_score_scaled))
            .item() == 0.0);
  CHECK(tape.value(loss).item() >= 0.0);
}

TEST_CASE("zero coherence weight decouples the coherence branch") {
  auto table = make_table(5, 2, 41);
  Rng rng(42);
  JointConfig cfg = tiny_config();
  cfg.lambda_lc = 0.0;
  JointModel model(cfg, table, rng);
  text::Essay essay = two_sentence_essay();
  GoldAssignment gold{0.3, 0.0};

  for (diff::Parameter* p : model.parameters()) p->zero_grad();
  Tape tape;
  Var loss = model.training_loss(tape, essay, gold, nullptr);
  tape.backward(loss);

  for (std::size_t i = 0; i < model.lc().clique_filter().grad.size(); ++i) {
    CHECK(model.lc().clique_filter().grad[i] == 0.0);
  }
  for (std::size_t i = 0; i < model.lc().score_vector().grad.size(); ++i) {
    CHECK(model.lc().score_vector().grad[i] == 0.0);
  }
}

TEST_CASE("joint gradient check stays under 1e-4") {
  auto table = make_table(6, 2, 51);
  Rng rng(52);
  JointModel model(tiny_config(), table, rng);
  text::Essay essay = two_sentence_essay();
  GoldAssignment gold{0.4, 0.8};

  auto forward = [&](Tape& tape) {
    return model.training_loss(tape, essay, gold, nullptr);
  };
  CHECK(diff::gradient_check(forward, model.parameters()) < 1e-4);
}

TEST_CASE("shared embeddings are one table; updates reach both branches") {
  auto table = make_table(5, 2, 41);
  Rng rng(42);
  JointModel model(tiny_config(), table, rng);
  CHECK(&model.aes().embedding() == &model.lc().embedding());
  // Exactly one embedding parameter appears in the parameter list.
  std::size_t embedding_params = 0;
  for (diff::Parameter* p : model.parameters()) {
    if (p->name == "embedding") ++embedding_params;
  }
  CHECK(embedding_params == 1);
}

TEST_CASE("unshared embeddings are distinct tables with identical values") {
  Rng init(77);
  auto a = std::make_shared<text::EmbeddingTable>(5, 2, init, 0.4);
  auto b = std::make_shared<text::EmbeddingTable>(5, 2, *&init, 0.0);
  b->rows.value = a->rows.value;  // identical initialization
  JointConfig cfg = tiny_config();
  cfg.share_embeddings = false;
  Rng rng(42);
  JointModel model(cfg, a, b, rng);
  CHECK(&model.aes().embedding() != &model.lc().embedding());
  CHECK(model.parameters().size() >= 2);
}

TEST_CASE("assign_gold covers originals and both strategies") {
  ScoreScale scale{1, 2, 12};
  std::map<std::string, double> origins = {{"orig", 10.0}};

  text::Essay original;
  original.id = "orig";
  original.gold_score = 10.0;
  auto g0 = assign_gold(original, origins, scale, GoldStrategy::kMain);
  CHECK(g0.essay_gold_scaled == doctest::Approx(0.8));
  CHECK(g0.coherence_gold == doctest::Approx(0.8));

  text::Essay perm;
  perm.id = "orig#p1";
  perm.is_synthetic = true;
  perm.origin_id = "orig";
  perm.coherence_label = 0.0;
  auto g1 = assign_gold(perm, origins, scale, GoldStrategy::kMain);
  CHECK(g1.essay_gold_scaled == doctest::Approx(0.8));
  CHECK(g1.coherence_gold == 0.0);

  auto g2 = assign_gold(perm, origins, scale, GoldStrategy::kZeroScore);
  CHECK(g2.essay_gold_scaled == 0.0);
  CHECK(g2.coherence_gold == 0.0);

  text::Essay dangling;
  dangling.id = "x#p1";
  dangling.is_synthetic = true;
  dangling.origin_id = "missing";
  CHECK_THROWS_AS(assign_gold(dangling, origins, scale, GoldStrategy::kMain),
                  std::invalid_argument);
}

TEST_CASE("compute_threshold is the mean difference") {
  std::vector<JointModel::Prediction> preds = {{0.8, 0.5}, {0.9, 0.4}};
  auto t = compute_threshold(preds);
  CHECK(t.value == doctest::Approx(0.4));
  CHECK(t.sample_count == 2);

  std::vector<JointModel::Prediction> zeros = {{0.5, 0.5}, {0.2, 0.2}};
  CHECK(compute_threshold(zeros).value == doctest::Approx(0.0));

  CHECK_THROWS_AS(compute_threshold({}), std::invalid_argument);
}

TEST_CASE("compute_threshold matches a brute-force accumulation") {
  Rng rng(123);
  std::vector<JointModel::Prediction> preds;
  double sum = 0.0;
  for (int i = 0; i < 100; ++i) {
    JointModel::Prediction p{rng.uniform01(), rng.uniform01()};
    sum += p.essay_score_scaled - p.coherence_score;
    preds.push_back(p);
  }
  CHECK(compute_threshold(preds).value ==
        doctest::Approx(sum / 100.0).epsilon(1e-12));
}

TEST_CASE("detection uses a strict inequality and zeroes flagged scores") {
  ScoreScale scale{1, 2, 12};
  DetectionThreshold threshold{0.25, 10};

  auto at = detect_adversarial("a", 1, {0.75, 0.5}, threshold, scale);
  CHECK(!at.flagged);  // difference exactly at the threshold
  CHECK(at.final_score == doctest::Approx(scale.unscale(0.75)));

  auto above = detect_adversarial("b", 1, {0.75, 0.49}, threshold, scale);
  CHECK(above.flagged);
  CHECK(above.final_score == 0.0);

  // Coherence at or above the essay score is never flagged for any
  // non-negative threshold.
  auto inverted = detect_adversarial("c", 1, {0.5, 0.7}, threshold, scale);
  CHECK(!inverted.flagged);
  auto equal = detect_adversarial("d", 1, {0.5, 0.5}, DetectionThreshold{0.0, 1},
                                  scale);
  CHECK(!equal.flagged);
}

TEST_CASE("raising the threshold never flags more essays") {
  ScoreScale scale{1, 0, 4};
  Rng rng(9);
  std::vector<JointModel::Prediction> preds;
  for (int i = 0; i < 50; ++i) {
    preds.push_back({rng.uniform01(), rng.uniform01()});
  }
  std::size_t prev_flagged = preds.size() + 1;
  for (double t = -1.0; t <= 1.0; t += 0.1) {
    std::size_t flagged = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      auto fp = detect_adversarial("e" + std::to_string(i), 1, preds[i],
                                   DetectionThreshold{t, 1}, scale);
      if (fp.flagged) ++flagged;
      CHECK((fp.final_score == 0.0) == fp.flagged);
    }
    CHECK(flagged <= prev_flagged);
    prev_flagged = flagged;
  }
}
