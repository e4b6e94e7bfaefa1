#include "coheval/models/aes.hpp"

#include <stdexcept>

namespace coheval::models {

using diff::Rng;
using diff::Tape;
using diff::Tensor;
using diff::Var;

double ScoreScale::scale(double raw) const {
  if (max_score <= min_score) {
    throw std::invalid_argument("ScoreScale: empty range for prompt " +
                                std::to_string(prompt_id));
  }
  if (raw < min_score || raw > max_score) {
    throw std::out_of_range("ScoreScale: raw score " + std::to_string(raw) +
                            " outside prompt " + std::to_string(prompt_id) +
                            " range");
  }
  return (raw - min_score) / (max_score - min_score);
}

double ScoreScale::unscale(double v01) const {
  if (v01 < 0.0 || v01 > 1.0) {
    throw std::out_of_range("ScoreScale: scaled value outside [0,1]");
  }
  return min_score + v01 * (max_score - min_score);
}

AesModel::AesModel(AesConfig cfg,
                   std::shared_ptr<text::EmbeddingTable> embedding, Rng& rng)
    : cfg_(cfg),
      embedding_(std::move(embedding)),
      essay_lstm_("aes.essay_lstm", cfg.embed_dim, cfg.lstm_dim, rng,
                  cfg.init_scale),
      score_weights_("aes.score_weights", Tensor({cfg.lstm_dim})),
      score_bias_("aes.score_bias", Tensor::scalar(0.0)) {
  if (embedding_->dim != cfg_.embed_dim) {
    throw std::invalid_argument("AesModel: embedding dim mismatch");
  }
  for (std::size_t i = 0; i < cfg_.lstm_dim; ++i) {
    score_weights_.value[i] = rng.uniform_symmetric(cfg.init_scale);
  }
}

Var AesModel::essay_repr(Tape& tape, const text::Essay& essay) {
  const auto tokens = essay.flat_tokens();
  if (tokens.empty()) {
    throw std::invalid_argument("AesModel::essay_repr: empty essay " +
                                essay.id);
  }
  diff::LstmCell cell(tape, essay_lstm_);
  std::vector<Var> states;
  states.reserve(tokens.size());
  for (text::TokenId id : tokens) {
    states.push_back(cell.step(tape.embed(embedding_->rows, id)));
  }
  return diff::mean_over_time(tape, states);
}

Var AesModel::essay_score(Tape& tape, const text::Essay& essay) {
  Var repr = essay_repr(tape, essay);
  return diff::affine_sigmoid(tape, repr, tape.param(score_weights_),
                              tape.param(score_bias_));
}

Var AesModel::training_loss(Tape& tape, const text::Essay& essay,
                            double gold_scaled) {
  return tape.squared_error(essay_score(tape, essay), gold_scaled);
}

double AesModel::predict(const text::Essay& essay) {
  Tape tape;
  return tape.value(essay_score(tape, essay)).item();
}

std::vector<double> AesModel::essay_repr_values(const text::Essay& essay) {
  Tape tape;
  return tape.value(essay_repr(tape, essay)).data();
}

std::vector<diff::Parameter*> AesModel::parameters(bool include_embedding) {
  std::vector<diff::Parameter*> out;
  if (include_embedding) out.push_back(&embedding_->rows);
  for (diff::Parameter* p : essay_lstm_.parameters()) out.push_back(p);
  out.push_back(&score_weights_);
  out.push_back(&score_bias_);
  return out;
}

}  // namespace coheval::models
