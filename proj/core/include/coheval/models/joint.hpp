#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "coheval/models/aes.hpp"
#include "coheval/models/lc.hpp"

namespace coheval::models {

enum class GoldStrategy {
  kMain,       // permuted: coherence 0, essay score of the origin
  kZeroScore,  // permuted: coherence 0, essay score 0
};

// Training targets for one essay, both in scaled [0,1] space.
struct GoldAssignment {
  double essay_gold_scaled = 0.0;
  double coherence_gold = 0.0;
};

// Dev-set statistic behind the adversarial flagging rule.
struct DetectionThreshold {
  double value = 0.0;
  std::size_t sample_count = 0;  // synthetic dev essays averaged over
};

struct FinalPrediction {
  std::string id;
  int prompt_id = 0;
  double essay_score_unscaled = 0.0;
  double coherence_score = 0.0;
  double essay_score_scaled = 0.0;
  bool flagged = false;
  double final_score = 0.0;  // 0 when flagged, else essay_score_unscaled
};

struct JointConfig {
  std::size_t embed_dim = 50;
  std::size_t lstm_dim = 100;
  std::size_t cnn_dim = 100;
  std::size_t window = 3;
  double dropout = 0.3;
  double init_scale = 0.05;
  double lambda_aes = 1.0;
  double lambda_lc = 1.0;
  bool share_embeddings = true;
};

// Two-branch network: the essay scorer and the coherence model trained
// together. With share_embeddings both branches read and update one
// embedding table; the ablation keeps two identically initialized copies.
class JointModel {
 public:
  JointModel(JointConfig cfg, std::shared_ptr<text::EmbeddingTable> embedding,
             diff::Rng& rng);

  // Ablation constructor: separate tables, same initial values.
  JointModel(JointConfig cfg, std::shared_ptr<text::EmbeddingTable> aes_table,
             std::shared_ptr<text::EmbeddingTable> lc_table, diff::Rng& rng);

  const JointConfig& config() const { return cfg_; }
  AesModel& aes() { return *aes_; }
  LcModel& lc() { return *lc_; }
  bool shares_embeddings() const { return cfg_.share_embeddings; }

  // lambda_aes * squared error + lambda_lc * mean clique BCE with the
  // coherence gold as every clique's target.
  diff::Var training_loss(diff::Tape& tape, const text::Essay& essay,
                          const GoldAssignment& gold, diff::Rng* dropout_rng);

  struct Prediction {
    double essay_score_scaled = 0.0;
    double coherence_score = 0.0;
  };
  Prediction predict(const text::Essay& essay);

  std::vector<diff::Parameter*> parameters();

 private:
  JointConfig cfg_;
  std::shared_ptr<text::EmbeddingTable> aes_embedding_;
  std::shared_ptr<text::EmbeddingTable> lc_embedding_;
  std::unique_ptr<AesModel> aes_;
  std::unique_ptr<LcModel> lc_;
};

// Resolves the training targets for an essay. Originals take their own
// scaled gold for both tasks; permuted essays take coherence 0 and, under
// the main strategy, the scaled gold of their origin. origin_scores maps
// origin essay id -> raw gold score; a synthetic essay whose origin is
// missing is an error.
GoldAssignment assign_gold(const text::Essay& essay,
                           const std::map<std::string, double>& origin_scores,
                           const ScoreScale& scale, GoldStrategy strategy);

// Mean of (scaled essay score - coherence score) over the synthetic dev
// set; errors on an empty input.
DetectionThreshold compute_threshold(
    const std::vector<JointModel::Prediction>& dev_synthetic);

// Flags iff the scaled difference strictly exceeds the threshold; flagged
// essays receive a final score of exactly zero.
FinalPrediction detect_adversarial(const std::string& id, int prompt_id,
                                   const JointModel::Prediction& pred,
                                   const DetectionThreshold& threshold,
                                   const ScoreScale& scale);

}  // namespace coheval::models
