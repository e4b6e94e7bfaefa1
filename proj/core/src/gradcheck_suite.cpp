#include "coheval/harness/gradcheck_suite.hpp"

#include <memory>

#include "coheval/diff/gradcheck.hpp"
#include "coheval/models/joint.hpp"

namespace coheval::harness {

using diff::Rng;
using diff::Tape;

namespace {

text::Essay random_essay(Rng& rng, std::size_t vocab_size) {
  text::Essay e;
  e.id = "gc";
  const std::size_t n_sentences = 2 + rng.below(3);
  for (std::size_t s = 0; s < n_sentences; ++s) {
    std::vector<text::TokenId> sent(1 + rng.below(4));
    for (auto& id : sent) {
      id = static_cast<text::TokenId>(rng.below(vocab_size));
    }
    e.sentences.push_back(std::move(sent));
  }
  return e;
}

}  // namespace

std::vector<GradCheckCase> run_gradcheck_suite(std::size_t configs,
                                               std::uint64_t seed) {
  std::vector<GradCheckCase> results;
  Rng master(seed);

  for (std::size_t c = 0; c < configs; ++c) {
    Rng rng = master.derive("config-" + std::to_string(c));
    const std::size_t vocab_size = 4 + rng.below(5);
    const std::size_t embed_dim = 2 + rng.below(3);
    const std::size_t lstm_dim = 2 + rng.below(4);
    const std::size_t cnn_dim = 2 + rng.below(3);
    const std::size_t window = 1 + rng.below(3);
    const double gold_coherence = 0.1 + 0.8 * rng.uniform01();
    const double gold_essay = 0.1 + 0.8 * rng.uniform01();
    const std::string tag = "#" + std::to_string(c);

    {
      auto table = std::make_shared<text::EmbeddingTable>(
          vocab_size, embed_dim, rng, 0.3);
      models::LcConfig cfg;
      cfg.embed_dim = embed_dim;
      cfg.lstm_dim = lstm_dim;
      cfg.cnn_dim = cnn_dim;
      cfg.window = window;
      cfg.dropout = 0.0;
      cfg.init_scale = 0.2;
      models::LcModel model(cfg, table, rng);
      text::Essay essay = random_essay(rng, vocab_size);
      essay.coherence_label = gold_coherence;
      auto forward = [&](Tape& tape) {
        return model.training_loss(tape, essay, nullptr);
      };
      results.push_back(
          {"lc" + tag, diff::gradient_check(forward, model.parameters())});
    }

    {
      auto table = std::make_shared<text::EmbeddingTable>(
          vocab_size, embed_dim, rng, 0.3);
      models::AesConfig cfg{embed_dim, lstm_dim, 0.2};
      models::AesModel model(cfg, table, rng);
      text::Essay essay = random_essay(rng, vocab_size);
      auto forward = [&](Tape& tape) {
        return model.training_loss(tape, essay, gold_essay);
      };
      results.push_back(
          {"aes" + tag, diff::gradient_check(forward, model.parameters())});
    }

    {
      auto table = std::make_shared<text::EmbeddingTable>(
          vocab_size, embed_dim, rng, 0.3);
      models::JointConfig cfg;
      cfg.embed_dim = embed_dim;
      cfg.lstm_dim = lstm_dim;
      cfg.cnn_dim = cnn_dim;
      cfg.window = window;
      cfg.dropout = 0.0;
      cfg.init_scale = 0.2;
      models::JointModel model(cfg, table, rng);
      text::Essay essay = random_essay(rng, vocab_size);
      models::GoldAssignment gold{gold_essay, gold_coherence};
      auto forward = [&](Tape& tape) {
        return model.training_loss(tape, essay, gold, nullptr);
      };
      results.push_back(
          {"joint" + tag, diff::gradient_check(forward, model.parameters())});
    }
  }
  return results;
}

}  // namespace coheval::harness
