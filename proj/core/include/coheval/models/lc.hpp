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

struct LcConfig {
  std::size_t embed_dim = 50;
  std::size_t lstm_dim = 100;
  std::size_t cnn_dim = 100;
  std::size_t window = 3;     // sentences per clique
  double dropout = 0.3;       // on the clique representation, training only
  double init_scale = 0.05;
  bool multiplicative = false;  // combine clique scores by product, not mean
};

// Local-coherence network: a shared sentence LSTM (state reset per
// sentence), a window convolution over consecutive sentence representations,
// and a per-clique sigmoid score. The document score is the mean of the
// clique scores (or their product in the multiplicative variant).
class LcModel {
 public:
  LcModel(LcConfig cfg, std::shared_ptr<text::EmbeddingTable> embedding,
          diff::Rng& rng);

  const LcConfig& config() const { return cfg_; }
  text::EmbeddingTable& embedding() { return *embedding_; }
  std::shared_ptr<text::EmbeddingTable> embedding_ptr() { return embedding_; }

  // Final hidden state of the sentence LSTM run over one sentence.
  diff::Var sentence_repr(diff::Tape& tape,
                          const std::vector<text::TokenId>& sentence);

  // tanh of the window filter applied to the concatenation of `window`
  // consecutive sentence representations (no bias). Essays shorter than the
  // window fall back to a single clique over all sentences, using the
  // leading columns of the filter.
  std::vector<diff::Var> clique_reprs(diff::Tape& tape,
                                      const std::vector<diff::Var>& sentences,
                                      bool training, diff::Rng* dropout_rng);

  // sigmoid(h_clq . V), one scalar per clique, each in (0,1).
  std::vector<diff::Var> clique_scores(diff::Tape& tape,
                                       const std::vector<diff::Var>& reprs);

  // Mean (or product) of the clique scores.
  diff::Var document_score(diff::Tape& tape,
                           const std::vector<diff::Var>& scores);

  // Mean binary cross-entropy of the clique scores against the document
  // gold coherence; every clique inherits the document label.
  diff::Var local_loss(diff::Tape& tape, const std::vector<diff::Var>& scores,
                       double gold_coherence);

  // Full forward for training: returns the loss node. The gold defaults to
  // the essay's coherence label; joint training passes its own assignment.
  diff::Var training_loss(diff::Tape& tape, const text::Essay& essay,
                          diff::Rng* dropout_rng);
  diff::Var training_loss(diff::Tape& tape, const text::Essay& essay,
                          diff::Rng* dropout_rng, double gold_coherence);

  // Evaluation-mode document coherence score.
  double predict(const text::Essay& essay);

  // Evaluation-mode clique representations aggregated with an elementwise
  // max, the feature block consumed by the concatenation baseline.
  std::vector<double> clique_vector_max(const text::Essay& essay);

  std::vector<diff::Parameter*> parameters(bool include_embedding = true);

  diff::LstmParams& sentence_lstm() { return sentence_lstm_; }
  diff::Parameter& clique_filter() { return clique_filter_; }
  diff::Parameter& score_vector() { return score_vector_; }

 private:
  std::vector<diff::Var> sentence_reprs(diff::Tape& tape,
                                        const text::Essay& essay);

  LcConfig cfg_;
  std::shared_ptr<text::EmbeddingTable> embedding_;
  diff::LstmParams sentence_lstm_;
  diff::Parameter clique_filter_;  // (cnn_dim, window * lstm_dim)
  diff::Parameter score_vector_;   // (cnn_dim)
};

}  // namespace coheval::models
