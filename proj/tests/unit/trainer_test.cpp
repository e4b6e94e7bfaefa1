#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <memory>

#include "coheval/harness/experiment.hpp"
#include "coheval/synth/build.hpp"
#include "coheval/synth/toygen.hpp"
#include "coheval/train/trainer.hpp"

using namespace coheval;
using diff::Rng;

namespace {

synth::ToyCorpus scoring_toy(std::size_t size, std::uint64_t seed) {
  synth::ToygenOptions opts;
  opts.kind = synth::ToyKind::kScoring;
  opts.size = size;
  opts.seed = seed;
  return synth::generate_toy_corpus(opts);
}

}  // namespace

TEST_CASE("zero learning rate leaves the coherence model untouched") {
  synth::ToygenOptions opts;
  opts.kind = synth::ToyKind::kCoherence;
  opts.size = 24;
  opts.seed = 2;
  auto toy = synth::generate_toy_corpus(opts);
  auto set = synth::build_synthetic_set(toy.train, toy.dev, toy.test,
                                        toy.specs, {});

  std::vector<std::vector<std::string>> docs;
  for (const auto& e : set.train) {
    std::vector<std::string> flat;
    for (const auto& s : text::tokenized_sentences(e.raw_text)) {
      flat.insert(flat.end(), s.begin(), s.end());
    }
    docs.push_back(flat);
  }
  auto vocab = text::Vocab::build(docs);
  Rng rng(3);
  auto table = std::make_shared<text::EmbeddingTable>(vocab.size(), 8, rng);
  models::LcConfig cfg;
  cfg.embed_dim = 8;
  cfg.lstm_dim = 8;
  cfg.cnn_dim = 8;
  models::LcModel model(cfg, table, rng);

  preprocess(set.train, vocab);
  preprocess(set.dev, vocab);

  const auto before = table->rows.value;
  const double filter_before = model.clique_filter().value[0];

  train::TrainOptions options;
  options.learning_rate = 0.0;
  options.epochs = 3;
  auto log = train::train_lc(model, set.train, set.dev, options);

  CHECK(model.clique_filter().value[0] == filter_before);
  for (std::size_t i = 0; i < before.size(); ++i) {
    CHECK(table->rows.value[i] == before[i]);
  }
  // Dev PRA never moves either.
  for (const auto& e : log.epochs) {
    CHECK(e.dev_metric == log.epochs.front().dev_metric);
  }
}

TEST_CASE("the 40-essay scoring toy reaches dev QWK above 0.5") {
  auto toy = scoring_toy(40, 31);

  harness::TrainRunConfig config;
  config.model_kind = harness::kind::kAes;
  config.embed_dim = 24;
  config.lstm_dim = 24;
  config.epochs = 60;
  config.batch_size = 1;  // tiny corpus needs per-essay updates
  config.seed = 31;

  harness::TrainData data;
  data.original_train = toy.train;
  data.original_dev = toy.dev;
  auto artifacts = harness::run_training(config, data, toy.specs);
  CHECK(artifacts.log.best_metric > 0.5);
}

TEST_CASE("essay-scorer loss decreases over the first steps") {
  auto toy = scoring_toy(24, 32);

  std::vector<std::vector<std::string>> docs;
  for (const auto& e : toy.train) {
    std::vector<std::string> flat;
    for (const auto& s : text::tokenized_sentences(e.raw_text)) {
      flat.insert(flat.end(), s.begin(), s.end());
    }
    docs.push_back(flat);
  }
  auto vocab = text::Vocab::build(docs);
  Rng rng(33);
  auto table = std::make_shared<text::EmbeddingTable>(vocab.size(), 8, rng);
  models::AesModel model(models::AesConfig{8, 8, 0.05}, table, rng);
  preprocess(toy.train, vocab);
  preprocess(toy.dev, vocab);

  // One optimizer step per epoch: batch covers the whole fixed set.
  train::TrainOptions options;
  options.epochs = 10;
  options.batch_size = toy.train.size();
  options.seed = 33;
  auto log = train::train_aes(model, toy.train, toy.dev, toy.specs, options);
  REQUIRE(log.epochs.size() == 10);
  CHECK(log.epochs.back().train_loss < log.epochs.front().train_loss);
}

TEST_CASE("joint training degenerates to essay scoring when lambda_lc is 0") {
  auto toy = scoring_toy(30, 34);

  harness::TrainRunConfig config;
  config.model_kind = harness::kind::kJoint;
  config.embed_dim = 8;
  config.lstm_dim = 8;
  config.cnn_dim = 8;
  config.lambda_lc = 0.0;
  config.epochs = 2;
  config.seed = 34;

  harness::TrainData data;
  data.original_train = toy.train;
  data.original_dev = toy.dev;
  // No synthetic data at all: allowed in this configuration.
  auto artifacts = harness::run_training(config, data, toy.specs);
  CHECK(artifacts.threshold.sample_count == 0);
  REQUIRE(artifacts.log.epochs.size() == 2);
  // Selection reduces to the scoring metric alone.
  for (double pra : artifacts.dev_pra_per_epoch) CHECK(pra == 0.0);
}

TEST_CASE("joint training without synthetic data errors when coherence is on") {
  auto toy = scoring_toy(30, 35);
  harness::TrainRunConfig config;
  config.model_kind = harness::kind::kJoint;
  config.embed_dim = 8;
  config.lstm_dim = 8;
  config.cnn_dim = 8;
  config.epochs = 1;
  harness::TrainData data;
  data.original_train = toy.train;
  data.original_dev = toy.dev;
  CHECK_THROWS_AS(harness::run_training(config, data, toy.specs),
                  std::invalid_argument);
}

TEST_CASE("unshared embedding tables diverge after one step") {
  Rng init(40);
  auto aes_table = std::make_shared<text::EmbeddingTable>(8, 4, init, 0.1,
                                                          "embedding.aes");
  Rng zero(0);
  auto lc_table = std::make_shared<text::EmbeddingTable>(8, 4, zero, 0.0,
                                                         "embedding.lc");
  lc_table->rows.value = aes_table->rows.value;

  models::JointConfig cfg;
  cfg.embed_dim = 4;
  cfg.lstm_dim = 3;
  cfg.cnn_dim = 3;
  cfg.window = 2;
  cfg.dropout = 0.0;
  cfg.init_scale = 0.2;
  cfg.share_embeddings = false;
  Rng rng(41);
  models::JointModel model(cfg, aes_table, lc_table, rng);

  text::Essay essay;
  essay.id = "d";
  essay.sentences = {{2, 3}, {4, 5}};
  models::GoldAssignment gold{0.9, 0.8};

  diff::Tape tape;
  auto loss = model.training_loss(tape, essay, gold, nullptr);
  tape.backward(loss);
  diff::RmsProp opt({.learning_rate = 0.001, .decay = 0.9, .epsilon = 1e-6,
                     .clip_norm = 10.0});
  opt.step(model.parameters());

  double distance_sq = 0.0;
  for (std::size_t i = 0; i < aes_table->rows.value.size(); ++i) {
    const double d = aes_table->rows.value[i] - lc_table->rows.value[i];
    distance_sq += d * d;
  }
  CHECK(distance_sq > 0.0);
}
