#include "coheval/harness/model_io.hpp"

#include <stdexcept>

#include <json.hpp>

namespace coheval::harness {

using nlohmann::json;

namespace {

void append_params(Checkpoint& ckpt,
                   const std::vector<diff::Parameter*>& params) {
  for (const diff::Parameter* p : params) {
    ckpt.tensors.emplace_back(p->name, p->value);
  }
}

void restore_params(const Checkpoint& ckpt,
                    const std::vector<diff::Parameter*>& params) {
  for (diff::Parameter* p : params) {
    const diff::Tensor& stored = ckpt.tensor(p->name);
    if (!stored.same_shape(p->value)) {
      throw std::runtime_error("checkpoint: shape mismatch for " + p->name);
    }
    p->value = stored;
    p->zero_grad();
  }
}

json lc_config_json(const models::LcConfig& cfg) {
  return json{{"embed_dim", cfg.embed_dim}, {"lstm_dim", cfg.lstm_dim},
              {"cnn_dim", cfg.cnn_dim},     {"window", cfg.window},
              {"dropout", cfg.dropout},     {"multiplicative",
                                             cfg.multiplicative}};
}

models::LcConfig lc_config_from_json(const json& j) {
  models::LcConfig cfg;
  cfg.embed_dim = j.at("embed_dim").get<std::size_t>();
  cfg.lstm_dim = j.at("lstm_dim").get<std::size_t>();
  cfg.cnn_dim = j.at("cnn_dim").get<std::size_t>();
  cfg.window = j.at("window").get<std::size_t>();
  cfg.dropout = j.at("dropout").get<double>();
  cfg.multiplicative = j.at("multiplicative").get<bool>();
  return cfg;
}

std::shared_ptr<text::EmbeddingTable> blank_table(std::size_t vocab_size,
                                                  std::size_t dim,
                                                  const std::string& name) {
  diff::Rng rng(0);
  return std::make_shared<text::EmbeddingTable>(vocab_size, dim, rng, 0.0,
                                                name);
}

}  // namespace

Checkpoint lc_to_checkpoint(models::LcModel& model, const text::Vocab& vocab) {
  Checkpoint ckpt;
  ckpt.kind = model.config().multiplicative ? kind::kLcMul : kind::kLc;
  ckpt.config_json = lc_config_json(model.config()).dump();
  ckpt.vocab_tokens = vocab.tokens();
  append_params(ckpt, model.parameters());
  return ckpt;
}

Checkpoint aes_to_checkpoint(models::AesModel& model,
                             const text::Vocab& vocab) {
  Checkpoint ckpt;
  ckpt.kind = kind::kAes;
  ckpt.config_json = json{{"embed_dim", model.config().embed_dim},
                          {"lstm_dim", model.config().lstm_dim}}
                         .dump();
  ckpt.vocab_tokens = vocab.tokens();
  append_params(ckpt, model.parameters());
  return ckpt;
}

Checkpoint joint_to_checkpoint(
    models::JointModel& model, const text::Vocab& vocab,
    const std::string& kind_tag, const models::DetectionThreshold& threshold,
    const std::map<int, models::DetectionThreshold>& per_prompt_thresholds) {
  const models::JointConfig& cfg = model.config();
  json per_prompt = json::object();
  for (const auto& [prompt, t] : per_prompt_thresholds) {
    per_prompt[std::to_string(prompt)] = {{"value", t.value},
                                          {"samples", t.sample_count}};
  }
  Checkpoint ckpt;
  ckpt.kind = kind_tag;
  ckpt.config_json = json{{"embed_dim", cfg.embed_dim},
                          {"lstm_dim", cfg.lstm_dim},
                          {"cnn_dim", cfg.cnn_dim},
                          {"window", cfg.window},
                          {"dropout", cfg.dropout},
                          {"lambda_aes", cfg.lambda_aes},
                          {"lambda_lc", cfg.lambda_lc},
                          {"share_embeddings", cfg.share_embeddings},
                          {"threshold", threshold.value},
                          {"threshold_samples", threshold.sample_count},
                          {"per_prompt_thresholds", per_prompt}}
                         .dump();
  ckpt.vocab_tokens = vocab.tokens();
  append_params(ckpt, model.parameters());
  return ckpt;
}

Checkpoint ridge_to_checkpoint(const models::KernelRidgeModel& model,
                               const std::string& aes_ckpt_hash,
                               const std::string& lc_ckpt_hash) {
  const std::size_t n = model.training_features().size();
  const std::size_t dim =
      n == 0 ? 0 : model.training_features()[0].values.size();
  Checkpoint ckpt;
  ckpt.kind = kind::kVecConcat;
  ckpt.config_json = json{{"alpha", model.alpha()},
                          {"gamma", model.gamma()},
                          {"aes_checkpoint_hash", aes_ckpt_hash},
                          {"lc_checkpoint_hash", lc_ckpt_hash}}
                         .dump();
  diff::Tensor features({n, dim});
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = model.training_features()[i].values;
    if (row.size() != dim) {
      throw std::invalid_argument("ridge_to_checkpoint: ragged features");
    }
    for (std::size_t j = 0; j < dim; ++j) features.at(i, j) = row[j];
  }
  diff::Tensor dual({n});
  for (std::size_t i = 0; i < n; ++i) dual[i] = model.dual_coefficients()[i];
  ckpt.tensors.emplace_back("ridge.features", std::move(features));
  ckpt.tensors.emplace_back("ridge.dual", std::move(dual));
  return ckpt;
}

LoadedModel model_from_checkpoint(const Checkpoint& ckpt) {
  LoadedModel out;
  out.kind = ckpt.kind;
  out.vocab = text::Vocab::from_tokens(ckpt.vocab_tokens);
  const json cfg = json::parse(ckpt.config_json);
  diff::Rng rng(0);

  if (ckpt.kind == kind::kLc || ckpt.kind == kind::kLcMul) {
    models::LcConfig lc_cfg = lc_config_from_json(cfg);
    out.embedding =
        blank_table(out.vocab.size(), lc_cfg.embed_dim, "embedding");
    out.lc = std::make_unique<models::LcModel>(lc_cfg, out.embedding, rng);
    restore_params(ckpt, out.lc->parameters());
    return out;
  }

  if (ckpt.kind == kind::kAes) {
    models::AesConfig aes_cfg;
    aes_cfg.embed_dim = cfg.at("embed_dim").get<std::size_t>();
    aes_cfg.lstm_dim = cfg.at("lstm_dim").get<std::size_t>();
    out.embedding =
        blank_table(out.vocab.size(), aes_cfg.embed_dim, "embedding");
    out.aes = std::make_unique<models::AesModel>(aes_cfg, out.embedding, rng);
    restore_params(ckpt, out.aes->parameters());
    return out;
  }

  if (ckpt.kind == kind::kJoint || ckpt.kind == kind::kJointNoShare ||
      ckpt.kind == kind::kJointZeroScore) {
    models::JointConfig joint_cfg;
    joint_cfg.embed_dim = cfg.at("embed_dim").get<std::size_t>();
    joint_cfg.lstm_dim = cfg.at("lstm_dim").get<std::size_t>();
    joint_cfg.cnn_dim = cfg.at("cnn_dim").get<std::size_t>();
    joint_cfg.window = cfg.at("window").get<std::size_t>();
    joint_cfg.dropout = cfg.at("dropout").get<double>();
    joint_cfg.lambda_aes = cfg.at("lambda_aes").get<double>();
    joint_cfg.lambda_lc = cfg.at("lambda_lc").get<double>();
    joint_cfg.share_embeddings = cfg.at("share_embeddings").get<bool>();
    out.threshold.value = cfg.at("threshold").get<double>();
    out.threshold.sample_count =
        cfg.at("threshold_samples").get<std::size_t>();
    if (cfg.contains("per_prompt_thresholds")) {
      for (const auto& [key, entry] :
           cfg.at("per_prompt_thresholds").items()) {
        models::DetectionThreshold t;
        t.value = entry.at("value").get<double>();
        t.sample_count = entry.at("samples").get<std::size_t>();
        out.per_prompt_thresholds[std::stoi(key)] = t;
      }
    }
    if (joint_cfg.share_embeddings) {
      out.embedding =
          blank_table(out.vocab.size(), joint_cfg.embed_dim, "embedding");
      out.joint = std::make_unique<models::JointModel>(joint_cfg,
                                                       out.embedding, rng);
    } else {
      out.embedding = blank_table(out.vocab.size(), joint_cfg.embed_dim,
                                  "embedding.aes");
      out.lc_embedding = blank_table(out.vocab.size(), joint_cfg.embed_dim,
                                     "embedding.lc");
      out.joint = std::make_unique<models::JointModel>(
          joint_cfg, out.embedding, out.lc_embedding, rng);
    }
    restore_params(ckpt, out.joint->parameters());
    return out;
  }

  if (ckpt.kind == kind::kVecConcat) {
    const diff::Tensor& features = ckpt.tensor("ridge.features");
    const diff::Tensor& dual = ckpt.tensor("ridge.dual");
    std::vector<models::FeatureVector> rows(features.rows());
    for (std::size_t i = 0; i < features.rows(); ++i) {
      rows[i].values.resize(features.cols());
      for (std::size_t j = 0; j < features.cols(); ++j) {
        rows[i].values[j] = features.at(i, j);
      }
    }
    std::vector<double> coefs(dual.size());
    for (std::size_t i = 0; i < dual.size(); ++i) coefs[i] = dual[i];
    out.ridge = std::make_unique<models::KernelRidgeModel>(
        std::move(rows), std::move(coefs), cfg.at("alpha").get<double>(),
        cfg.at("gamma").get<double>());
    out.aes_ckpt_hash = cfg.at("aes_checkpoint_hash").get<std::string>();
    out.lc_ckpt_hash = cfg.at("lc_checkpoint_hash").get<std::string>();
    return out;
  }

  throw std::runtime_error("checkpoint: unknown model kind " + ckpt.kind);
}

}  // namespace coheval::harness
