#pragma once

#include <memory>
#include <vector>

#include "coheval/diff/lstm.hpp"
#include "coheval/diff/ops.hpp"
#include "coheval/diff/rng.hpp"
#include "coheval/diff/tape.hpp"
#include "coheval/text/corpus.hpp"
#include "coheval/text/embeddings.hpp"

namespace coheval::models {

// Closed score range of one prompt; model-internal scores live in [0,1] and
// are mapped back for evaluation.
struct ScoreScale {
  int prompt_id = 0;
  double min_score = 0.0;
  double max_score = 0.0;

  double scale(double raw) const;    // [min,max] -> [0,1]
  double unscale(double v01) const;  // [0,1] -> [min,max]
};

struct AesConfig {
  std::size_t embed_dim = 50;
  std::size_t lstm_dim = 100;
  double init_scale = 0.05;
};

// Essay scorer: one LSTM over the essay's full word sequence (sentence
// boundaries ignored), mean over time of all hidden states, then a
// sigmoid-bounded affine score.
class AesModel {
 public:
  AesModel(AesConfig cfg, std::shared_ptr<text::EmbeddingTable> embedding,
           diff::Rng& rng);

  const AesConfig& config() const { return cfg_; }
  text::EmbeddingTable& embedding() { return *embedding_; }
  std::shared_ptr<text::EmbeddingTable> embedding_ptr() { return embedding_; }

  // Mean over time of the LSTM hidden states over all tokens.
  diff::Var essay_repr(diff::Tape& tape, const text::Essay& essay);

  // sigmoid(essay_repr . w + b), in (0,1).
  diff::Var essay_score(diff::Tape& tape, const text::Essay& essay);

  // Squared error against a scaled gold in [0,1].
  diff::Var training_loss(diff::Tape& tape, const text::Essay& essay,
                          double gold_scaled);

  double predict(const text::Essay& essay);
  std::vector<double> essay_repr_values(const text::Essay& essay);

  std::vector<diff::Parameter*> parameters(bool include_embedding = true);

  diff::LstmParams& essay_lstm() { return essay_lstm_; }
  diff::Parameter& score_weights() { return score_weights_; }
  diff::Parameter& score_bias() { return score_bias_; }

 private:
  AesConfig cfg_;
  std::shared_ptr<text::EmbeddingTable> embedding_;
  diff::LstmParams essay_lstm_;
  diff::Parameter score_weights_;  // (lstm_dim)
  diff::Parameter score_bias_;     // scalar
};

}  // namespace coheval::models
