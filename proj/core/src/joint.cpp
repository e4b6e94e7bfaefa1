#include "coheval/models/joint.hpp"

#include <stdexcept>

namespace coheval::models {

using diff::Rng;
using diff::Tape;
using diff::Var;

JointModel::JointModel(JointConfig cfg,
                       std::shared_ptr<text::EmbeddingTable> embedding,
                       Rng& rng)
    : cfg_(cfg), aes_embedding_(embedding), lc_embedding_(embedding) {
  if (!cfg_.share_embeddings) {
    throw std::invalid_argument(
        "JointModel: unshared config requires two tables");
  }
  AesConfig aes_cfg{cfg_.embed_dim, cfg_.lstm_dim, cfg_.init_scale};
  aes_ = std::make_unique<AesModel>(aes_cfg, aes_embedding_, rng);
  LcConfig lc_cfg{cfg_.embed_dim, cfg_.lstm_dim,   cfg_.cnn_dim,
                  cfg_.window,    cfg_.dropout,    cfg_.init_scale,
                  /*multiplicative=*/false};
  lc_ = std::make_unique<LcModel>(lc_cfg, lc_embedding_, rng);
}

JointModel::JointModel(JointConfig cfg,
                       std::shared_ptr<text::EmbeddingTable> aes_table,
                       std::shared_ptr<text::EmbeddingTable> lc_table,
                       Rng& rng)
    : cfg_(cfg),
      aes_embedding_(std::move(aes_table)),
      lc_embedding_(std::move(lc_table)) {
  if (cfg_.share_embeddings && aes_embedding_ != lc_embedding_) {
    throw std::invalid_argument(
        "JointModel: shared config requires one table");
  }
  AesConfig aes_cfg{cfg_.embed_dim, cfg_.lstm_dim, cfg_.init_scale};
  aes_ = std::make_unique<AesModel>(aes_cfg, aes_embedding_, rng);
  LcConfig lc_cfg{cfg_.embed_dim, cfg_.lstm_dim,   cfg_.cnn_dim,
                  cfg_.window,    cfg_.dropout,    cfg_.init_scale,
                  /*multiplicative=*/false};
  lc_ = std::make_unique<LcModel>(lc_cfg, lc_embedding_, rng);
}

Var JointModel::training_loss(Tape& tape, const text::Essay& essay,
                              const GoldAssignment& gold, Rng* dropout_rng) {
  Var aes_loss = aes_->training_loss(tape, essay, gold.essay_gold_scaled);
  Var lc_loss = tape.scalar(0.0);
  if (cfg_.lambda_lc != 0.0) {
    lc_loss = lc_->training_loss(tape, essay, dropout_rng,
                                 gold.coherence_gold);
  }
  return tape.weighted_sum(cfg_.lambda_aes, aes_loss, cfg_.lambda_lc, lc_loss);
}

JointModel::Prediction JointModel::predict(const text::Essay& essay) {
  Prediction p;
  p.essay_score_scaled = aes_->predict(essay);
  p.coherence_score = lc_->predict(essay);
  return p;
}

std::vector<diff::Parameter*> JointModel::parameters() {
  std::vector<diff::Parameter*> out;
  out.push_back(&aes_embedding_->rows);
  if (lc_embedding_ != aes_embedding_) out.push_back(&lc_embedding_->rows);
  for (diff::Parameter* p : aes_->parameters(false)) out.push_back(p);
  for (diff::Parameter* p : lc_->parameters(false)) out.push_back(p);
  return out;
}

GoldAssignment assign_gold(const text::Essay& essay,
                           const std::map<std::string, double>& origin_scores,
                           const ScoreScale& scale, GoldStrategy strategy) {
  GoldAssignment gold;
  if (!essay.is_synthetic) {
    const double scaled = scale.scale(essay.gold_score);
    gold.essay_gold_scaled = scaled;
    gold.coherence_gold = scaled;
    return gold;
  }
  gold.coherence_gold = 0.0;
  if (strategy == GoldStrategy::kZeroScore) {
    gold.essay_gold_scaled = 0.0;
    return gold;
  }
  if (!essay.origin_id) {
    throw std::invalid_argument("assign_gold: synthetic essay " + essay.id +
                                " lacks origin_id");
  }
  auto it = origin_scores.find(*essay.origin_id);
  if (it == origin_scores.end()) {
    throw std::invalid_argument("assign_gold: dangling origin_id " +
                                *essay.origin_id + " for essay " + essay.id);
  }
  gold.essay_gold_scaled = scale.scale(it->second);
  return gold;
}

DetectionThreshold compute_threshold(
    const std::vector<JointModel::Prediction>& dev_synthetic) {
  if (dev_synthetic.empty()) {
    throw std::invalid_argument("compute_threshold: no synthetic dev essays");
  }
  double sum = 0.0;
  for (const auto& p : dev_synthetic) {
    sum += p.essay_score_scaled - p.coherence_score;
  }
  DetectionThreshold t;
  t.value = sum / static_cast<double>(dev_synthetic.size());
  t.sample_count = dev_synthetic.size();
  return t;
}

FinalPrediction detect_adversarial(const std::string& id, int prompt_id,
                                   const JointModel::Prediction& pred,
                                   const DetectionThreshold& threshold,
                                   const ScoreScale& scale) {
  FinalPrediction out;
  out.id = id;
  out.prompt_id = prompt_id;
  out.essay_score_scaled = pred.essay_score_scaled;
  out.coherence_score = pred.coherence_score;
  out.essay_score_unscaled = scale.unscale(pred.essay_score_scaled);
  out.flagged =
      (pred.essay_score_scaled - pred.coherence_score) > threshold.value;
  out.final_score = out.flagged ? 0.0 : out.essay_score_unscaled;
  return out;
}

}  // namespace coheval::models
