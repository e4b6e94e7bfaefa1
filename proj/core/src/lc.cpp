#include "coheval/models/lc.hpp"

#include <stdexcept>

namespace coheval::models {

using diff::Rng;
using diff::Tape;
using diff::Tensor;
using diff::Var;

namespace {

Tensor uniform_init(std::vector<std::size_t> shape, Rng& rng, double scale) {
  Tensor t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = rng.uniform_symmetric(scale);
  }
  return t;
}

}  // namespace

LcModel::LcModel(LcConfig cfg, std::shared_ptr<text::EmbeddingTable> embedding,
                 Rng& rng)
    : cfg_(cfg),
      embedding_(std::move(embedding)),
      sentence_lstm_("lc.sentence_lstm", cfg.embed_dim, cfg.lstm_dim, rng,
                     cfg.init_scale),
      clique_filter_("lc.clique_filter",
                     uniform_init({cfg.cnn_dim, cfg.window * cfg.lstm_dim},
                                  rng, cfg.init_scale)),
      score_vector_("lc.score_vector",
                    uniform_init({cfg.cnn_dim}, rng, cfg.init_scale)) {
  if (cfg_.window < 1) {
    throw std::invalid_argument("LcModel: window must be >= 1");
  }
  if (embedding_->dim != cfg_.embed_dim) {
    throw std::invalid_argument("LcModel: embedding dim mismatch");
  }
}

Var LcModel::sentence_repr(Tape& tape,
                           const std::vector<text::TokenId>& sentence) {
  if (sentence.empty()) {
    throw std::invalid_argument("LcModel::sentence_repr: empty sentence");
  }
  diff::LstmCell cell(tape, sentence_lstm_);
  Var h;
  for (text::TokenId id : sentence) {
    h = cell.step(tape.embed(embedding_->rows, id));
  }
  return h;
}

std::vector<Var> LcModel::sentence_reprs(Tape& tape, const text::Essay& essay) {
  std::vector<Var> reprs;
  reprs.reserve(essay.sentences.size());
  // One shared LSTM, state reset at each sentence boundary.
  diff::LstmCell cell(tape, sentence_lstm_);
  for (const auto& sentence : essay.sentences) {
    if (sentence.empty()) {
      throw std::invalid_argument("LcModel: empty sentence in essay " +
                                  essay.id);
    }
    cell.reset_state();
    Var h;
    for (text::TokenId id : sentence) {
      h = cell.step(tape.embed(embedding_->rows, id));
    }
    reprs.push_back(h);
  }
  return reprs;
}

std::vector<Var> LcModel::clique_reprs(Tape& tape,
                                       const std::vector<Var>& sentences,
                                       bool training, Rng* dropout_rng) {
  if (sentences.empty()) {
    throw std::invalid_argument("LcModel::clique_reprs: no sentences");
  }
  const std::size_t n = sentences.size();
  const std::size_t m = cfg_.window;
  Var filter = tape.param(clique_filter_);

  std::vector<Var> reprs;
  auto emit = [&](std::vector<Var> window_vars) {
    Var cat = window_vars.size() == 1 ? window_vars[0]
                                      : tape.concat(window_vars);
    // Short essays use the leading columns of the filter.
    Var z = tape.matvec_prefix(filter, cat);
    Var h = tape.tanh_act(z);
    if (training && cfg_.dropout > 0.0) {
      if (dropout_rng == nullptr) {
        throw std::invalid_argument("LcModel::clique_reprs: dropout needs rng");
      }
      h = tape.dropout(h, cfg_.dropout, *dropout_rng, true);
    }
    reprs.push_back(h);
  };

  if (n < m) {
    emit(sentences);
    return reprs;
  }
  for (std::size_t j = 0; j + m <= n; ++j) {
    std::vector<Var> window_vars(sentences.begin() + j,
                                 sentences.begin() + j + m);
    emit(std::move(window_vars));
  }
  return reprs;
}

std::vector<Var> LcModel::clique_scores(Tape& tape,
                                        const std::vector<Var>& reprs) {
  std::vector<Var> scores;
  scores.reserve(reprs.size());
  Var v = tape.param(score_vector_);
  for (Var h : reprs) {
    scores.push_back(tape.sigmoid(tape.dot(h, v)));
  }
  return scores;
}

Var LcModel::document_score(Tape& tape, const std::vector<Var>& scores) {
  if (scores.empty()) {
    throw std::invalid_argument("LcModel::document_score: no cliques");
  }
  return cfg_.multiplicative ? tape.product_scalars(scores)
                             : tape.mean_stack(scores);
}

Var LcModel::local_loss(Tape& tape, const std::vector<Var>& scores,
                        double gold_coherence) {
  if (scores.empty()) {
    throw std::invalid_argument("LcModel::local_loss: no cliques");
  }
  std::vector<Var> losses;
  losses.reserve(scores.size());
  for (Var s : scores) {
    losses.push_back(tape.bce(s, gold_coherence));
  }
  return tape.mean_stack(losses);
}

Var LcModel::training_loss(Tape& tape, const text::Essay& essay,
                           Rng* dropout_rng) {
  return training_loss(tape, essay, dropout_rng, essay.coherence_label);
}

Var LcModel::training_loss(Tape& tape, const text::Essay& essay,
                           Rng* dropout_rng, double gold_coherence) {
  auto sents = sentence_reprs(tape, essay);
  auto reprs = clique_reprs(tape, sents, /*training=*/true, dropout_rng);
  auto scores = clique_scores(tape, reprs);
  return local_loss(tape, scores, gold_coherence);
}

double LcModel::predict(const text::Essay& essay) {
  Tape tape;
  auto sents = sentence_reprs(tape, essay);
  auto reprs = clique_reprs(tape, sents, /*training=*/false, nullptr);
  auto scores = clique_scores(tape, reprs);
  return tape.value(document_score(tape, scores)).item();
}

std::vector<double> LcModel::clique_vector_max(const text::Essay& essay) {
  Tape tape;
  auto sents = sentence_reprs(tape, essay);
  auto reprs = clique_reprs(tape, sents, /*training=*/false, nullptr);
  Var mx = tape.max_stack(reprs);
  return tape.value(mx).data();
}

std::vector<diff::Parameter*> LcModel::parameters(bool include_embedding) {
  std::vector<diff::Parameter*> out;
  if (include_embedding) out.push_back(&embedding_->rows);
  for (diff::Parameter* p : sentence_lstm_.parameters()) out.push_back(p);
  out.push_back(&clique_filter_);
  out.push_back(&score_vector_);
  return out;
}

}  // namespace coheval::models
