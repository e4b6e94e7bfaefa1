#include "coheval/train/trainer.hpp"

#include <functional>
#include <numeric>
#include <stdexcept>

namespace coheval::train {

using diff::Rng;
using diff::Tape;
using text::Corpus;
using text::Essay;

std::map<int, eval::RankedPool> build_ranked_pools(
    const Corpus& corpus,
    const std::function<double(const Essay&)>& score) {
  std::map<int, eval::RankedPool> pools;
  for (const Essay& e : corpus) {
    if (e.sentences.empty()) continue;
    if (e.is_synthetic) {
      pools[e.prompt_id].permutations[e.id] = {*e.origin_id, score(e)};
    } else {
      pools[e.prompt_id].originals[e.id] = score(e);
    }
  }
  return pools;
}

namespace {

double macro_over_pools(
    const std::map<int, eval::RankedPool>& pools,
    const std::function<double(const eval::RankedPool&)>& metric) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& [prompt, pool] : pools) {
    if (pool.permutations.empty() || pool.originals.empty()) continue;
    sum += metric(pool);
    ++n;
  }
  if (n == 0) {
    throw std::invalid_argument("macro metric: no pools with pairs");
  }
  return sum / static_cast<double>(n);
}

// Snapshot/restore of parameter values around best-epoch selection.
std::vector<diff::Tensor> snapshot(const std::vector<diff::Parameter*>& ps) {
  std::vector<diff::Tensor> out;
  out.reserve(ps.size());
  for (const diff::Parameter* p : ps) out.push_back(p->value);
  return out;
}

void restore(const std::vector<diff::Parameter*>& ps,
             const std::vector<diff::Tensor>& values) {
  for (std::size_t i = 0; i < ps.size(); ++i) {
    ps[i]->value = values[i];
    ps[i]->zero_grad();
  }
}

// Shared epoch loop: shuffles, accumulates batch gradients of a per-essay
// loss, steps the optimizer, then lets the caller score the dev set.
class EpochRunner {
 public:
  EpochRunner(std::vector<diff::Parameter*> params,
              const TrainOptions& options)
      : params_(std::move(params)),
        options_(options),
        optimizer_({options.learning_rate, options.rms_decay,
                    options.rms_epsilon, options.clip_norm}),
        master_rng_(options.seed),
        dropout_rng_(master_rng_.derive("dropout")) {
    for (diff::Parameter* p : params_) p->zero_grad();
  }

  double run_epoch(int epoch, std::size_t train_size,
                   const std::function<double(std::size_t, Rng&)>& loss_of) {
    std::vector<std::size_t> order(train_size);
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng = master_rng_.derive("epoch-" + std::to_string(epoch));
    shuffle_rng.shuffle(order);

    double loss_sum = 0.0;
    std::size_t in_batch = 0;
    for (std::size_t idx : order) {
      loss_sum += loss_of(idx, dropout_rng_);
      ++in_batch;
      if (in_batch == options_.batch_size) {
        apply_step(in_batch);
        in_batch = 0;
      }
    }
    if (in_batch > 0) apply_step(in_batch);
    return loss_sum / static_cast<double>(train_size);
  }

 private:
  void apply_step(std::size_t batch_count) {
    const double inv = 1.0 / static_cast<double>(batch_count);
    for (diff::Parameter* p : params_) {
      for (std::size_t i = 0; i < p->grad.size(); ++i) p->grad[i] *= inv;
    }
    optimizer_.step(params_);
  }

  std::vector<diff::Parameter*> params_;
  TrainOptions options_;
  diff::RmsProp optimizer_;
  Rng master_rng_;
  Rng dropout_rng_;
};

void require_nonempty(const Corpus& corpus, const char* which) {
  for (const Essay& e : corpus) {
    if (!e.sentences.empty()) return;
  }
  throw std::invalid_argument(std::string(which) +
                              " corpus is empty or entirely untokenizable");
}

}  // namespace

double macro_pra(const std::map<int, eval::RankedPool>& pools) {
  return macro_over_pools(pools, eval::pra);
}

double macro_tpra(const std::map<int, eval::RankedPool>& pools) {
  return macro_over_pools(pools, eval::tpra);
}

double macro_qwk(const Corpus& corpus,
                 const std::function<double(const Essay&)>& scaled_score,
                 const synth::PromptSpecTable& specs) {
  std::map<int, eval::RatingPairSet> per_prompt;
  for (const Essay& e : corpus) {
    if (e.sentences.empty() || e.is_synthetic) continue;
    const auto& spec = synth::require_spec(specs, e.prompt_id);
    const models::ScoreScale scale = spec.scale();
    auto& pairs = per_prompt[e.prompt_id];
    pairs.min_score = static_cast<int>(spec.min_score);
    pairs.max_score = static_cast<int>(spec.max_score);
    pairs.gold.push_back(eval::discretize_rating(e.gold_score, pairs.min_score,
                                                 pairs.max_score));
    pairs.predicted.push_back(eval::discretize_rating(
        scale.unscale(scaled_score(e)), pairs.min_score, pairs.max_score));
  }
  if (per_prompt.empty()) {
    throw std::invalid_argument("macro_qwk: no scoreable essays");
  }
  double sum = 0.0;
  for (const auto& [prompt, pairs] : per_prompt) sum += eval::qwk(pairs);
  return sum / static_cast<double>(per_prompt.size());
}

TrainLog train_lc(models::LcModel& model, const Corpus& train_set,
                  const Corpus& dev_set, const TrainOptions& options) {
  require_nonempty(train_set, "train");
  require_nonempty(dev_set, "dev");

  std::vector<const Essay*> train;
  for (const Essay& e : train_set) {
    if (!e.sentences.empty()) train.push_back(&e);
  }

  auto params = model.parameters();
  EpochRunner runner(params, options);

  auto dev_pra = [&]() {
    auto pools = build_ranked_pools(
        dev_set, [&](const Essay& e) { return model.predict(e); });
    return macro_pra(pools);
  };

  TrainLog log;
  log.selection_metric = "dev_pra";
  log.best_metric = dev_pra();
  log.selected_epoch = 0;
  auto best_values = snapshot(params);

  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    const double train_loss =
        runner.run_epoch(epoch, train.size(), [&](std::size_t idx, Rng& rng) {
          Tape tape;
          diff::Var loss = model.training_loss(tape, *train[idx], &rng);
          tape.backward(loss);
          return tape.value(loss).item();
        });
    const double metric = dev_pra();
    log.epochs.push_back({epoch, train_loss, metric});
    if (metric >= log.best_metric) {
      log.best_metric = metric;
      log.selected_epoch = epoch;
      best_values = snapshot(params);
    }
  }
  restore(params, best_values);
  return log;
}

TrainLog train_aes(models::AesModel& model, const Corpus& train_set,
                   const Corpus& dev_set, const synth::PromptSpecTable& specs,
                   const TrainOptions& options) {
  require_nonempty(train_set, "train");
  require_nonempty(dev_set, "dev");

  struct Row {
    const Essay* essay;
    double gold_scaled;
  };
  std::vector<Row> train;
  for (const Essay& e : train_set) {
    if (e.sentences.empty()) continue;
    const auto scale = synth::require_spec(specs, e.prompt_id).scale();
    train.push_back({&e, scale.scale(e.gold_score)});
  }

  auto params = model.parameters();
  EpochRunner runner(params, options);

  auto dev_qwk = [&]() {
    return macro_qwk(
        dev_set, [&](const Essay& e) { return model.predict(e); }, specs);
  };

  TrainLog log;
  log.selection_metric = "dev_qwk";
  log.best_metric = dev_qwk();
  log.selected_epoch = 0;
  auto best_values = snapshot(params);

  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    const double train_loss =
        runner.run_epoch(epoch, train.size(), [&](std::size_t idx, Rng&) {
          Tape tape;
          diff::Var loss = model.training_loss(tape, *train[idx].essay,
                                               train[idx].gold_scaled);
          tape.backward(loss);
          return tape.value(loss).item();
        });
    const double metric = dev_qwk();
    log.epochs.push_back({epoch, train_loss, metric});
    if (metric >= log.best_metric) {
      log.best_metric = metric;
      log.selected_epoch = epoch;
      best_values = snapshot(params);
    }
  }
  restore(params, best_values);
  return log;
}

JointTrainResult train_joint(models::JointModel& model,
                             const Corpus& original_train,
                             const Corpus& synthetic_train,
                             const Corpus& original_dev,
                             const Corpus& synthetic_dev,
                             const synth::PromptSpecTable& specs,
                             models::GoldStrategy strategy,
                             const TrainOptions& options) {
  require_nonempty(original_train, "original train");
  require_nonempty(original_dev, "original dev");
  // With the coherence loss switched off entirely the synthetic subsets may
  // be empty and training degenerates to plain essay scoring.
  const bool coherence_active = model.config().lambda_lc != 0.0;
  if (coherence_active) {
    require_nonempty(synthetic_train, "synthetic train");
    require_nonempty(synthetic_dev, "synthetic dev");
  }

  // Raw gold scores of originals, for the main gold-assignment strategy.
  std::map<std::string, double> origin_scores;
  for (const Essay& e : original_train) {
    if (!e.is_synthetic) origin_scores[e.id] = e.gold_score;
  }
  for (const Essay& e : synthetic_train) {
    if (!e.is_synthetic) origin_scores[e.id] = e.gold_score;
  }

  // Aggregate: all originals plus the synthetic permutations. Originals
  // present in the synthetic set are already covered by the original
  // corpus, so only permutation rows are added from it.
  struct Row {
    const Essay* essay;
    models::GoldAssignment gold;
  };
  std::vector<Row> train;
  for (const Essay& e : original_train) {
    if (e.sentences.empty() || e.is_synthetic) continue;
    const auto scale = synth::require_spec(specs, e.prompt_id).scale();
    train.push_back({&e, assign_gold(e, origin_scores, scale, strategy)});
  }
  for (const Essay& e : synthetic_train) {
    if (e.sentences.empty() || !e.is_synthetic) continue;
    const auto scale = synth::require_spec(specs, e.prompt_id).scale();
    train.push_back({&e, assign_gold(e, origin_scores, scale, strategy)});
  }

  auto params = model.parameters();
  EpochRunner runner(params, options);

  auto dev_qwk = [&]() {
    return macro_qwk(
        original_dev,
        [&](const Essay& e) { return model.aes().predict(e); }, specs);
  };
  auto dev_pra = [&]() {
    if (synthetic_dev.empty()) return 0.0;
    auto pools = build_ranked_pools(synthetic_dev, [&](const Essay& e) {
      return model.lc().predict(e);
    });
    return macro_pra(pools);
  };

  // Selection balances the two dev metrics with equal weight, mirroring the
  // loss weighting. Selecting on dev QWK alone stalls the coherence branch
  // whenever the scoring task saturates first.
  JointTrainResult result;
  result.log.selection_metric = "dev_qwk_plus_pra";
  result.log.best_metric = dev_qwk() + dev_pra();
  result.log.selected_epoch = 0;
  auto best_values = snapshot(params);

  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    const double train_loss =
        runner.run_epoch(epoch, train.size(), [&](std::size_t idx, Rng& rng) {
          Tape tape;
          diff::Var loss = model.training_loss(tape, *train[idx].essay,
                                               train[idx].gold, &rng);
          tape.backward(loss);
          return tape.value(loss).item();
        });
    const double epoch_qwk = dev_qwk();
    const double epoch_pra = dev_pra();
    result.log.epochs.push_back({epoch, train_loss, epoch_qwk});
    result.dev_pra_per_epoch.push_back(epoch_pra);
    if (epoch_qwk + epoch_pra >= result.log.best_metric) {
      result.log.best_metric = epoch_qwk + epoch_pra;
      result.log.selected_epoch = epoch;
      best_values = snapshot(params);
    }
  }
  restore(params, best_values);

  // Thresholds from the selected checkpoint over the full synthetic dev set
  // (selected originals and their permutations), one global value plus a
  // per-prompt table. Skipped in the degenerate coherence-free
  // configuration.
  std::vector<models::JointModel::Prediction> dev_predictions;
  std::map<int, std::vector<models::JointModel::Prediction>> by_prompt;
  for (const Essay& e : synthetic_dev) {
    if (e.sentences.empty()) continue;
    const auto pred = model.predict(e);
    dev_predictions.push_back(pred);
    by_prompt[e.prompt_id].push_back(pred);
  }
  if (!dev_predictions.empty()) {
    result.threshold = models::compute_threshold(dev_predictions);
    for (const auto& [prompt, preds] : by_prompt) {
      result.per_prompt_thresholds[prompt] = models::compute_threshold(preds);
    }
  }
  return result;
}

}  // namespace coheval::train
