#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coheval/eval/metrics.hpp"
#include "coheval/harness/model_io.hpp"
#include "coheval/synth/prompt_spec.hpp"
#include "coheval/text/corpus.hpp"
#include "coheval/train/trainer.hpp"

namespace coheval::harness {

// Everything a training run needs beyond its data. Defaults: hidden sizes
// 100, window 3, dropout 0.3, learning rate 0.001 with RMSProp, 60 epochs,
// init scale 0.05.
struct TrainRunConfig {
  std::string model_kind = kind::kLc;
  std::size_t embed_dim = 50;
  std::size_t lstm_dim = 100;
  std::size_t cnn_dim = 100;
  std::size_t window = 3;
  double dropout = 0.3;
  double init_scale = 0.05;
  double learning_rate = 0.001;
  double rms_decay = 0.9;
  double rms_epsilon = 1e-6;
  double clip_norm = 10.0;
  int epochs = 60;
  std::size_t batch_size = 8;
  double lambda_aes = 1.0;
  double lambda_lc = 1.0;
  std::uint64_t seed = 1;
  std::string embeddings_path;  // optional pre-trained vectors
};

struct TrainData {
  text::Corpus original_train;
  text::Corpus original_dev;
  text::Corpus synthetic_train;
  text::Corpus synthetic_dev;
};

struct TrainArtifacts {
  Checkpoint checkpoint;
  train::TrainLog log;
  models::DetectionThreshold threshold;   // joint kinds only
  std::vector<double> dev_pra_per_epoch;  // joint kinds only
};

// Builds the vocabulary from the kind's training split, initializes the
// embedding table (optionally from a vectors file), constructs the model,
// trains it, and returns the selected checkpoint. Handles kinds lc, lc_mul,
// aes, joint, joint_no_share and joint_zero_score.
TrainArtifacts run_training(const TrainRunConfig& config, TrainData data,
                            const synth::PromptSpecTable& specs);

// Fits the concatenation baseline from two frozen checkpoints. Training
// features cover the originals and the synthetic permutations; targets are
// the scaled essay golds under the main gold-assignment strategy.
TrainArtifacts run_vecconcat_fit(const std::string& aes_ckpt_path,
                                 const std::string& lc_ckpt_path,
                                 const text::Corpus& original_train,
                                 const text::Corpus& synthetic_train,
                                 const synth::PromptSpecTable& specs,
                                 double alpha = 0.1, double gamma = 0.1);

// Scoring front-end over a loaded model of any kind.
class Scorer {
 public:
  // For vecconcat the two extractor checkpoints are required; their content
  // hashes must match the ones recorded at fit time.
  Scorer(LoadedModel model, std::optional<std::string> aes_ckpt_path,
         std::optional<std::string> lc_ckpt_path);

  const std::string& kind() const { return model_.kind; }
  const models::DetectionThreshold& threshold() const {
    return model_.threshold;
  }

  // Score used for PRA/TPRA ranking: the coherence branch for coherence and
  // joint models, the scaled essay score for the plain scorer, the
  // regression output for the concatenation baseline.
  double ranking_score(const text::Essay& raw_essay);

  // Scaled essay score in [0,1]; absent for pure coherence models.
  std::optional<double> essay_score_scaled(const text::Essay& raw_essay);

  // Coherence branch score; absent for models without one.
  std::optional<double> coherence_score(const text::Essay& raw_essay);

  // With per_prompt_threshold, a prompt-specific dev threshold is used when
  // one was recorded at training time; the global value is the fallback.
  models::FinalPrediction detect(const text::Essay& raw_essay,
                                 const models::ScoreScale& scale,
                                 bool per_prompt_threshold = false);

 private:
  text::Essay preprocessed(const text::Essay& raw, const text::Vocab& vocab);
  models::FeatureVector extract_features(const text::Essay& raw);

  LoadedModel model_;
  std::unique_ptr<LoadedModel> frozen_aes_;  // vecconcat extractors
  std::unique_ptr<LoadedModel> frozen_lc_;
};

struct EvaluationResult {
  eval::MetricReport report;
  std::string predictions_jsonl;  // one row per essay
};

// Evaluates a scorer on an original test corpus (QWK) and a synthetic test
// corpus (PRA/TPRA); either may be empty.
EvaluationResult evaluate_model(Scorer& scorer,
                                const text::Corpus& original_test,
                                const text::Corpus& synthetic_test,
                                const synth::PromptSpecTable& specs,
                                bool pooled_ranking = false);

std::string report_to_json(const eval::MetricReport& report);

// Pools per-essay prediction rows (as emitted by evaluate_model) from one
// or more files and scores them together: the cross-validation fold
// aggregation path, where each fold was predicted by its own model.
eval::MetricReport evaluate_prediction_files(
    const std::vector<std::string>& jsonl_paths,
    const synth::PromptSpecTable& specs, bool pooled_ranking = false);

}  // namespace coheval::harness
