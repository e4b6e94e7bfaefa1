#include "coheval/harness/experiment.hpp"

#include <stdexcept>

#include <json.hpp>

#include "coheval/harness/io.hpp"
#include "coheval/text/embeddings.hpp"
#include "coheval/text/segment.hpp"

namespace coheval::harness {

using diff::Rng;
using nlohmann::json;
using text::Corpus;
using text::Essay;

namespace {

text::Vocab vocab_from(const std::vector<const Corpus*>& corpora) {
  std::vector<std::vector<std::string>> docs;
  for (const Corpus* corpus : corpora) {
    for (const Essay& e : *corpus) {
      std::vector<std::string> flat;
      for (const auto& sent : text::tokenized_sentences(e.raw_text)) {
        flat.insert(flat.end(), sent.begin(), sent.end());
      }
      docs.push_back(std::move(flat));
    }
  }
  return text::Vocab::build(docs);
}

std::shared_ptr<text::EmbeddingTable> make_embedding(
    const TrainRunConfig& config, const text::Vocab& vocab, Rng& rng,
    const std::string& name, std::size_t* embed_dim_out) {
  if (!config.embeddings_path.empty()) {
    auto table = std::make_shared<text::EmbeddingTable>(text::load_embeddings(
        config.embeddings_path, vocab, rng, config.init_scale));
    table->rows.name = name;
    *embed_dim_out = table->dim;
    return table;
  }
  *embed_dim_out = config.embed_dim;
  return std::make_shared<text::EmbeddingTable>(vocab.size(), config.embed_dim,
                                                rng, config.init_scale, name);
}

train::TrainOptions train_options(const TrainRunConfig& c) {
  train::TrainOptions o;
  o.learning_rate = c.learning_rate;
  o.rms_decay = c.rms_decay;
  o.rms_epsilon = c.rms_epsilon;
  o.clip_norm = c.clip_norm;
  o.epochs = c.epochs;
  o.batch_size = c.batch_size;
  o.seed = c.seed;
  return o;
}

}  // namespace

TrainArtifacts run_training(const TrainRunConfig& config, TrainData data,
                            const synth::PromptSpecTable& specs) {
  const std::string& kind_tag = config.model_kind;
  Rng init_rng(Rng::mix(config.seed, Rng::fnv1a("init")));
  TrainArtifacts out;

  if (kind_tag == kind::kLc || kind_tag == kind::kLcMul) {
    text::Vocab vocab = vocab_from({&data.synthetic_train});
    std::size_t embed_dim = 0;
    auto table =
        make_embedding(config, vocab, init_rng, "embedding", &embed_dim);
    models::LcConfig lc_cfg;
    lc_cfg.embed_dim = embed_dim;
    lc_cfg.lstm_dim = config.lstm_dim;
    lc_cfg.cnn_dim = config.cnn_dim;
    lc_cfg.window = config.window;
    lc_cfg.dropout = config.dropout;
    lc_cfg.init_scale = config.init_scale;
    lc_cfg.multiplicative = (kind_tag == kind::kLcMul);
    models::LcModel model(lc_cfg, table, init_rng);

    preprocess(data.synthetic_train, vocab);
    preprocess(data.synthetic_dev, vocab);
    out.log = train::train_lc(model, data.synthetic_train, data.synthetic_dev,
                              train_options(config));
    out.checkpoint = lc_to_checkpoint(model, vocab);
    return out;
  }

  if (kind_tag == kind::kAes) {
    text::Vocab vocab = vocab_from({&data.original_train});
    std::size_t embed_dim = 0;
    auto table =
        make_embedding(config, vocab, init_rng, "embedding", &embed_dim);
    models::AesConfig aes_cfg{embed_dim, config.lstm_dim, config.init_scale};
    models::AesModel model(aes_cfg, table, init_rng);

    preprocess(data.original_train, vocab);
    preprocess(data.original_dev, vocab);
    out.log = train::train_aes(model, data.original_train, data.original_dev,
                               specs, train_options(config));
    out.checkpoint = aes_to_checkpoint(model, vocab);
    return out;
  }

  if (kind_tag == kind::kJoint || kind_tag == kind::kJointNoShare ||
      kind_tag == kind::kJointZeroScore) {
    text::Vocab vocab =
        vocab_from({&data.original_train, &data.synthetic_train});
    std::size_t embed_dim = 0;

    models::JointConfig joint_cfg;
    joint_cfg.lstm_dim = config.lstm_dim;
    joint_cfg.cnn_dim = config.cnn_dim;
    joint_cfg.window = config.window;
    joint_cfg.dropout = config.dropout;
    joint_cfg.init_scale = config.init_scale;
    joint_cfg.lambda_aes = config.lambda_aes;
    joint_cfg.lambda_lc = config.lambda_lc;
    joint_cfg.share_embeddings = (kind_tag != kind::kJointNoShare);

    std::unique_ptr<models::JointModel> model;
    if (joint_cfg.share_embeddings) {
      auto table =
          make_embedding(config, vocab, init_rng, "embedding", &embed_dim);
      joint_cfg.embed_dim = embed_dim;
      model = std::make_unique<models::JointModel>(joint_cfg, table, init_rng);
    } else {
      // Two tables, identical initial values, independent gradients.
      auto aes_table = make_embedding(config, vocab, init_rng,
                                      "embedding.aes", &embed_dim);
      Rng unused(0);
      auto lc_table = std::make_shared<text::EmbeddingTable>(
          vocab.size(), embed_dim, unused, 0.0, "embedding.lc");
      lc_table->rows.value = aes_table->rows.value;
      joint_cfg.embed_dim = embed_dim;
      model = std::make_unique<models::JointModel>(joint_cfg, aes_table,
                                                   lc_table, init_rng);
    }

    preprocess(data.original_train, vocab);
    preprocess(data.original_dev, vocab);
    preprocess(data.synthetic_train, vocab);
    preprocess(data.synthetic_dev, vocab);

    const models::GoldStrategy strategy = kind_tag == kind::kJointZeroScore
                                              ? models::GoldStrategy::kZeroScore
                                              : models::GoldStrategy::kMain;
    auto result = train::train_joint(*model, data.original_train,
                                     data.synthetic_train, data.original_dev,
                                     data.synthetic_dev, specs, strategy,
                                     train_options(config));
    out.log = std::move(result.log);
    out.threshold = result.threshold;
    out.dev_pra_per_epoch = std::move(result.dev_pra_per_epoch);
    out.checkpoint = joint_to_checkpoint(*model, vocab, kind_tag,
                                         out.threshold,
                                         result.per_prompt_thresholds);
    return out;
  }

  throw std::invalid_argument("run_training: unknown model kind " + kind_tag);
}

TrainArtifacts run_vecconcat_fit(const std::string& aes_ckpt_path,
                                 const std::string& lc_ckpt_path,
                                 const Corpus& original_train,
                                 const Corpus& synthetic_train,
                                 const synth::PromptSpecTable& specs,
                                 double alpha, double gamma) {
  LoadedModel aes_side = load_model(aes_ckpt_path);
  LoadedModel lc_side = load_model(lc_ckpt_path);
  if (!aes_side.aes) {
    throw std::invalid_argument("run_vecconcat_fit: " + aes_ckpt_path +
                                " is not an essay-scorer checkpoint");
  }
  if (!lc_side.lc) {
    throw std::invalid_argument("run_vecconcat_fit: " + lc_ckpt_path +
                                " is not a coherence checkpoint");
  }

  std::map<std::string, double> origin_scores;
  for (const Essay& e : original_train) {
    if (!e.is_synthetic) origin_scores[e.id] = e.gold_score;
  }
  for (const Essay& e : synthetic_train) {
    if (!e.is_synthetic) origin_scores[e.id] = e.gold_score;
  }

  std::vector<models::FeatureVector> features;
  std::vector<double> targets;
  auto add_rows = [&](const Corpus& corpus, bool synthetic_only) {
    for (const Essay& raw : corpus) {
      if (synthetic_only && !raw.is_synthetic) continue;
      Essay for_aes = raw;
      preprocess(for_aes, aes_side.vocab);
      Essay for_lc = raw;
      preprocess(for_lc, lc_side.vocab);
      if (for_aes.sentences.empty() || for_lc.sentences.empty()) continue;

      models::FeatureVector f;
      f.values = aes_side.aes->essay_repr_values(for_aes);
      const auto clique = lc_side.lc->clique_vector_max(for_lc);
      f.values.insert(f.values.end(), clique.begin(), clique.end());
      features.push_back(std::move(f));

      const auto scale = synth::require_spec(specs, raw.prompt_id).scale();
      targets.push_back(
          assign_gold(raw, origin_scores, scale, models::GoldStrategy::kMain)
              .essay_gold_scaled);
    }
  };
  add_rows(original_train, false);
  add_rows(synthetic_train, true);

  auto ridge =
      models::KernelRidgeModel::fit(std::move(features), targets, alpha, gamma);

  TrainArtifacts out;
  out.checkpoint = ridge_to_checkpoint(ridge, file_content_hash(aes_ckpt_path),
                                       file_content_hash(lc_ckpt_path));
  out.log.selection_metric = "closed_form";
  return out;
}

Scorer::Scorer(LoadedModel model, std::optional<std::string> aes_ckpt_path,
               std::optional<std::string> lc_ckpt_path)
    : model_(std::move(model)) {
  if (model_.kind == kind::kVecConcat) {
    if (!aes_ckpt_path || !lc_ckpt_path) {
      throw std::invalid_argument(
          "vecconcat scoring needs the two extractor checkpoints");
    }
    if (file_content_hash(*aes_ckpt_path) != model_.aes_ckpt_hash ||
        file_content_hash(*lc_ckpt_path) != model_.lc_ckpt_hash) {
      throw std::runtime_error(
          "vecconcat scoring: extractor checkpoints differ from the ones "
          "used at fit time");
    }
    frozen_aes_ = std::make_unique<LoadedModel>(load_model(*aes_ckpt_path));
    frozen_lc_ = std::make_unique<LoadedModel>(load_model(*lc_ckpt_path));
  }
}

Essay Scorer::preprocessed(const Essay& raw, const text::Vocab& vocab) {
  Essay e = raw;
  preprocess(e, vocab);
  if (e.sentences.empty()) {
    throw std::invalid_argument("Scorer: essay " + raw.id +
                                " has no tokenizable sentences");
  }
  return e;
}

double Scorer::ranking_score(const Essay& raw) {
  if (model_.kind == kind::kLc || model_.kind == kind::kLcMul) {
    return model_.lc->predict(preprocessed(raw, model_.vocab));
  }
  if (model_.kind == kind::kAes) {
    return model_.aes->predict(preprocessed(raw, model_.vocab));
  }
  if (model_.kind == kind::kVecConcat) {
    // Unclipped regression output: clipping would tie essays saturating the
    // same bound, and ties rank as incorrect.
    return model_.ridge->predict_unclipped(extract_features(raw));
  }
  return model_.joint->lc().predict(preprocessed(raw, model_.vocab));
}

std::optional<double> Scorer::essay_score_scaled(const Essay& raw) {
  if (model_.kind == kind::kLc || model_.kind == kind::kLcMul) {
    return std::nullopt;
  }
  if (model_.kind == kind::kAes) {
    return model_.aes->predict(preprocessed(raw, model_.vocab));
  }
  if (model_.kind == kind::kVecConcat) {
    return model_.ridge->predict(extract_features(raw));
  }
  return model_.joint->aes().predict(preprocessed(raw, model_.vocab));
}

models::FeatureVector Scorer::extract_features(const Essay& raw) {
  models::FeatureVector f;
  f.values = frozen_aes_->aes->essay_repr_values(
      preprocessed(raw, frozen_aes_->vocab));
  const auto clique = frozen_lc_->lc->clique_vector_max(
      preprocessed(raw, frozen_lc_->vocab));
  f.values.insert(f.values.end(), clique.begin(), clique.end());
  return f;
}

std::optional<double> Scorer::coherence_score(const Essay& raw) {
  if (model_.kind == kind::kLc || model_.kind == kind::kLcMul) {
    return model_.lc->predict(preprocessed(raw, model_.vocab));
  }
  if (model_.kind == kind::kAes || model_.kind == kind::kVecConcat) {
    return std::nullopt;
  }
  return model_.joint->lc().predict(preprocessed(raw, model_.vocab));
}

models::FinalPrediction Scorer::detect(const Essay& raw,
                                       const models::ScoreScale& scale,
                                       bool per_prompt_threshold) {
  if (!model_.joint) {
    throw std::invalid_argument("detect: model kind " + model_.kind +
                                " has no detection component");
  }
  const auto pred = model_.joint->predict(preprocessed(raw, model_.vocab));
  models::DetectionThreshold threshold = model_.threshold;
  if (per_prompt_threshold) {
    auto it = model_.per_prompt_thresholds.find(raw.prompt_id);
    if (it != model_.per_prompt_thresholds.end()) threshold = it->second;
  }
  return models::detect_adversarial(raw.id, raw.prompt_id, pred, threshold,
                                    scale);
}

EvaluationResult evaluate_model(Scorer& scorer, const Corpus& original_test,
                                const Corpus& synthetic_test,
                                const synth::PromptSpecTable& specs,
                                bool pooled_ranking) {
  EvaluationResult out;
  std::string rows;

  // QWK over the original essays, where the model scores essays at all.
  std::map<int, eval::RatingPairSet> qwk_pairs;
  for (const Essay& e : original_test) {
    if (e.is_synthetic) continue;
    const auto& spec = synth::require_spec(specs, e.prompt_id);
    const auto scaled = scorer.essay_score_scaled(e);
    const auto coherence = scorer.coherence_score(e);
    json row{{"id", e.id}, {"prompt", e.prompt_id}, {"gold", e.gold_score}};
    if (scaled) {
      const double unscaled = spec.scale().unscale(*scaled);
      row["essay_score_scaled"] = *scaled;
      row["essay_score"] = unscaled;
      auto& pairs = qwk_pairs[e.prompt_id];
      pairs.min_score = static_cast<int>(spec.min_score);
      pairs.max_score = static_cast<int>(spec.max_score);
      pairs.gold.push_back(eval::discretize_rating(
          e.gold_score, pairs.min_score, pairs.max_score));
      pairs.predicted.push_back(eval::discretize_rating(
          unscaled, pairs.min_score, pairs.max_score));
    }
    if (coherence) row["coherence_score"] = *coherence;
    rows += row.dump();
    rows += '\n';
  }

  // Ranking metrics over the synthetic pool.
  std::map<int, eval::RankedPool> pools;
  for (const Essay& e : synthetic_test) {
    const double score = scorer.ranking_score(e);
    const int pool_key = pooled_ranking ? 0 : e.prompt_id;
    if (e.is_synthetic) {
      pools[pool_key].permutations[e.id] = {*e.origin_id, score};
    } else {
      pools[pool_key].originals[e.id] = score;
    }
    json row{{"id", e.id},
             {"prompt", e.prompt_id},
             {"gold", e.gold_score},
             {"ranking_score", score},
             {"synthetic", e.is_synthetic}};
    if (e.origin_id) row["origin_id"] = *e.origin_id;
    rows += row.dump();
    rows += '\n';
  }

  for (const auto& [prompt, pairs] : qwk_pairs) {
    auto& m = out.report.per_prompt[prompt];
    m.qwk = eval::qwk(pairs);
    m.has_qwk = true;
  }
  for (const auto& [prompt, pool] : pools) {
    if (pool.originals.empty() || pool.permutations.empty()) continue;
    auto& m = out.report.per_prompt[prompt];
    m.pra = eval::pra(pool);
    m.tpra = eval::tpra(pool);
    m.has_ranking = true;
  }
  out.report.finalize();
  out.predictions_jsonl = std::move(rows);
  return out;
}

eval::MetricReport evaluate_prediction_files(
    const std::vector<std::string>& jsonl_paths,
    const synth::PromptSpecTable& specs, bool pooled_ranking) {
  std::map<int, eval::RatingPairSet> qwk_pairs;
  std::map<int, eval::RankedPool> pools;

  for (const std::string& path : jsonl_paths) {
    std::istringstream lines(read_file(path));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(lines, line)) {
      ++line_no;
      if (line.empty()) continue;
      json row;
      try {
        row = json::parse(line);
      } catch (const json::parse_error& e) {
        throw std::runtime_error("evaluate_prediction_files: " + path + ":" +
                                 std::to_string(line_no) + ": " + e.what());
      }
      const int prompt = row.at("prompt").get<int>();
      const auto& spec = synth::require_spec(specs, prompt);
      if (row.contains("essay_score")) {
        auto& pairs = qwk_pairs[prompt];
        pairs.min_score = static_cast<int>(spec.min_score);
        pairs.max_score = static_cast<int>(spec.max_score);
        pairs.gold.push_back(eval::discretize_rating(
            row.at("gold").get<double>(), pairs.min_score, pairs.max_score));
        pairs.predicted.push_back(eval::discretize_rating(
            row.at("essay_score").get<double>(), pairs.min_score,
            pairs.max_score));
      }
      if (row.contains("ranking_score")) {
        const int pool_key = pooled_ranking ? 0 : prompt;
        const std::string id = row.at("id").get<std::string>();
        if (row.value("synthetic", false)) {
          pools[pool_key].permutations[id] = {
              row.at("origin_id").get<std::string>(),
              row.at("ranking_score").get<double>()};
        } else {
          pools[pool_key].originals[id] =
              row.at("ranking_score").get<double>();
        }
      }
    }
  }

  eval::MetricReport report;
  for (const auto& [prompt, pairs] : qwk_pairs) {
    auto& m = report.per_prompt[prompt];
    m.qwk = eval::qwk(pairs);
    m.has_qwk = true;
  }
  for (const auto& [prompt, pool] : pools) {
    if (pool.originals.empty() || pool.permutations.empty()) continue;
    auto& m = report.per_prompt[prompt];
    m.pra = eval::pra(pool);
    m.tpra = eval::tpra(pool);
    m.has_ranking = true;
  }
  report.finalize();
  return report;
}

std::string report_to_json(const eval::MetricReport& report) {
  json per_prompt = json::object();
  auto fill = [](const eval::MetricReport::PromptMetrics& m) {
    json j = json::object();
    if (m.has_qwk) j["qwk"] = m.qwk;
    if (m.has_ranking) {
      j["pra"] = m.pra;
      j["tpra"] = m.tpra;
    }
    return j;
  };
  for (const auto& [prompt, m] : report.per_prompt) {
    per_prompt[std::to_string(prompt)] = fill(m);
  }
  return json{{"per_prompt", per_prompt}, {"macro", fill(report.macro)}}
      .dump(2);
}

}  // namespace coheval::harness
