#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "coheval/diff/rmsprop.hpp"
#include "coheval/eval/metrics.hpp"
#include "coheval/models/joint.hpp"
#include "coheval/synth/prompt_spec.hpp"
#include "coheval/text/corpus.hpp"

namespace coheval::train {

struct TrainOptions {
  double learning_rate = 0.001;
  double rms_decay = 0.9;
  double rms_epsilon = 1e-6;
  double clip_norm = 10.0;
  int epochs = 60;
  std::size_t batch_size = 8;
  std::uint64_t seed = 1;
};

struct EpochRecord {
  int epoch = 0;             // 1-based
  double train_loss = 0.0;   // mean per-essay loss over the epoch
  double dev_metric = 0.0;   // PRA for the coherence model, QWK otherwise
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
  // 0 = initialization. Exact metric ties resolve to the later epoch, so
  // saturated runs keep the most-trained checkpoint.
  int selected_epoch = 0;
  double best_metric = 0.0;
  std::string selection_metric;
};

// Ranking pools per prompt from a synthetic corpus and a scoring function;
// shared by trainers and the evaluation command.
std::map<int, eval::RankedPool> build_ranked_pools(
    const text::Corpus& corpus,
    const std::function<double(const text::Essay&)>& score);

// Macro average of a per-prompt metric over pools that have pairs.
double macro_pra(const std::map<int, eval::RankedPool>& pools);
double macro_tpra(const std::map<int, eval::RankedPool>& pools);

// Macro-averaged QWK over prompts, from unscaled rounded predictions against
// integer golds.
double macro_qwk(const text::Corpus& corpus,
                 const std::function<double(const text::Essay&)>& scaled_score,
                 const synth::PromptSpecTable& specs);

// Trains the coherence model on labeled coherent/permuted essays, selecting
// the epoch with the highest dev PRA. Parameters end at the selected
// checkpoint. Corpora must be preprocessed.
TrainLog train_lc(models::LcModel& model, const text::Corpus& train_set,
                  const text::Corpus& dev_set, const TrainOptions& options);

// Trains the essay scorer on scaled golds, selecting by dev QWK.
TrainLog train_aes(models::AesModel& model, const text::Corpus& train_set,
                   const text::Corpus& dev_set,
                   const synth::PromptSpecTable& specs,
                   const TrainOptions& options);

struct JointTrainResult {
  TrainLog log;
  models::DetectionThreshold threshold;  // global, over all dev prompts
  std::map<int, models::DetectionThreshold> per_prompt_thresholds;
  std::vector<double> dev_pra_per_epoch;  // recorded alongside dev QWK
};

// Trains the two branches together on the aggregate of the original corpus
// and the synthetic permutations, selecting by QWK on the original dev set.
// The detection threshold is computed on the synthetic dev set with the
// selected checkpoint.
JointTrainResult train_joint(models::JointModel& model,
                             const text::Corpus& original_train,
                             const text::Corpus& synthetic_train,
                             const text::Corpus& original_dev,
                             const text::Corpus& synthetic_dev,
                             const synth::PromptSpecTable& specs,
                             models::GoldStrategy strategy,
                             const TrainOptions& options);

}  // namespace coheval::train
