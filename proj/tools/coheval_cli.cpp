// Command-line front end: corpus synthesis, training, evaluation,
// adversarial detection, gradient verification and toy-corpus generation.

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "coheval/harness/experiment.hpp"
#include "coheval/harness/gradcheck_suite.hpp"
#include "coheval/harness/io.hpp"
#include "coheval/synth/build.hpp"
#include "coheval/synth/toygen.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace coheval;

namespace {

text::Corpus read_optional_corpus(const std::string& path) {
  if (path.empty()) return {};
  return text::read_corpus_jsonl(path);
}

// Every command records its inputs, configuration and outputs next to its
// primary artifact.
struct ManifestBuilder {
  explicit ManifestBuilder(std::string command) {
    body["command"] = std::move(command);
    body["config"] = json::object();
    body["inputs"] = json::object();
    body["outputs"] = json::array();
  }

  void config(const std::string& key, const json& value) {
    body["config"][key] = value;
  }
  void input(const std::string& path) {
    if (path.empty()) return;
    body["inputs"][path] = harness::file_content_hash(path);
  }
  void output(const std::string& path) { body["outputs"].push_back(path); }

  void write(const std::string& primary_output) {
    harness::atomic_write_file(primary_output + ".manifest.json",
                               body.dump(2) + "\n");
  }

  json body;
};

json log_to_json(const train::TrainLog& log,
                 const std::vector<double>& dev_pra_per_epoch) {
  // For joint kinds dev_metric is the dev QWK and dev_pra is recorded
  // alongside; the selection score combines them.
  json epochs = json::array();
  for (std::size_t i = 0; i < log.epochs.size(); ++i) {
    const auto& e = log.epochs[i];
    json row{{"epoch", e.epoch},
             {"train_loss", e.train_loss},
             {"dev_metric", e.dev_metric}};
    if (i < dev_pra_per_epoch.size()) row["dev_pra"] = dev_pra_per_epoch[i];
    epochs.push_back(row);
  }
  return json{{"epochs", epochs},
              {"selected_epoch", log.selected_epoch},
              {"selection_metric", log.selection_metric},
              {"best_metric", log.best_metric}};
}

int run_toygen(const std::string& kind, std::size_t size, std::uint64_t seed,
               const std::string& out_dir, double train_fraction,
               double dev_fraction) {
  synth::ToygenOptions options;
  options.kind = synth::toy_kind_from_string(kind);
  options.size = size;
  options.seed = seed;
  options.train_fraction = train_fraction;
  options.dev_fraction = dev_fraction;
  const auto corpus = synth::generate_toy_corpus(options);

  fs::create_directories(out_dir);
  const std::string train_path = out_dir + "/orig_train.jsonl";
  const std::string dev_path = out_dir + "/orig_dev.jsonl";
  const std::string test_path = out_dir + "/orig_test.jsonl";
  const std::string spec_path = out_dir + "/prompt_specs.json";
  harness::atomic_write_file(train_path, text::corpus_to_jsonl(corpus.train));
  harness::atomic_write_file(dev_path, text::corpus_to_jsonl(corpus.dev));
  harness::atomic_write_file(test_path, text::corpus_to_jsonl(corpus.test));
  synth::write_prompt_specs(spec_path, corpus.specs);

  ManifestBuilder manifest("toygen");
  manifest.config("kind", kind);
  manifest.config("size", size);
  manifest.config("seed", seed);
  manifest.config("train_fraction", train_fraction);
  manifest.config("dev_fraction", dev_fraction);
  for (const auto& p : {train_path, dev_path, test_path, spec_path}) {
    manifest.output(p);
  }
  manifest.write(out_dir + "/toygen");
  std::cout << "wrote " << corpus.train.size() << "/" << corpus.dev.size()
            << "/" << corpus.test.size() << " train/dev/test essays to "
            << out_dir << "\n";
  return 0;
}

int run_synth(const std::string& train_path, const std::string& dev_path,
              const std::string& test_path, const std::string& spec_path,
              std::uint64_t seed, const std::string& out_dir,
              int permutations, int train_perms, int dev_perms,
              int test_perms) {
  const auto specs = synth::read_prompt_specs(spec_path);
  synth::SynthesisOptions options;
  options.permutations_per_essay = permutations;
  options.train_subset = train_perms;
  options.dev_subset = dev_perms;
  options.test_subset = test_perms;
  options.seed = seed;

  const auto set = synth::build_synthetic_set(
      read_optional_corpus(train_path), read_optional_corpus(dev_path),
      read_optional_corpus(test_path), specs, options);

  fs::create_directories(out_dir);
  const std::string out_train = out_dir + "/synthetic_train.jsonl";
  const std::string out_dev = out_dir + "/synthetic_dev.jsonl";
  const std::string out_test = out_dir + "/synthetic_test.jsonl";
  harness::atomic_write_file(out_train, text::corpus_to_jsonl(set.train));
  harness::atomic_write_file(out_dev, text::corpus_to_jsonl(set.dev));
  harness::atomic_write_file(out_test, text::corpus_to_jsonl(set.test));

  ManifestBuilder manifest("synth");
  manifest.config("seed", seed);
  manifest.config("permutations", permutations);
  manifest.config("train_perms", train_perms);
  manifest.config("dev_perms", dev_perms);
  manifest.config("test_perms", test_perms);
  for (const auto& p : {train_path, dev_path, test_path, spec_path}) {
    manifest.input(p);
  }
  for (const auto& p : {out_train, out_dev, out_test}) manifest.output(p);
  manifest.write(out_dir + "/synth");
  std::cout << "wrote " << set.train.size() << "/" << set.dev.size() << "/"
            << set.test.size() << " synthetic train/dev/test rows to "
            << out_dir << "\n";
  return 0;
}

struct TrainCliOptions {
  harness::TrainRunConfig config;
  std::string train_path, dev_path;
  std::string synthetic_train_path, synthetic_dev_path;
  std::string spec_path;
  std::string out_path;
  std::string aes_ckpt, lc_ckpt;  // vecconcat
  double alpha = 0.1, gamma = 0.1;
};

int run_train(const TrainCliOptions& opt) {
  const auto specs = synth::read_prompt_specs(opt.spec_path);
  harness::TrainArtifacts artifacts;

  if (opt.config.model_kind == harness::kind::kVecConcat) {
    artifacts = harness::run_vecconcat_fit(
        opt.aes_ckpt, opt.lc_ckpt, read_optional_corpus(opt.train_path),
        read_optional_corpus(opt.synthetic_train_path), specs, opt.alpha,
        opt.gamma);
  } else {
    harness::TrainData data;
    data.original_train = read_optional_corpus(opt.train_path);
    data.original_dev = read_optional_corpus(opt.dev_path);
    data.synthetic_train = read_optional_corpus(opt.synthetic_train_path);
    data.synthetic_dev = read_optional_corpus(opt.synthetic_dev_path);
    artifacts = harness::run_training(opt.config, std::move(data), specs);
  }

  harness::save_checkpoint(opt.out_path, artifacts.checkpoint);

  ManifestBuilder manifest("train");
  manifest.config("model", opt.config.model_kind);
  manifest.config("embed_dim", opt.config.embed_dim);
  manifest.config("lstm_dim", opt.config.lstm_dim);
  manifest.config("cnn_dim", opt.config.cnn_dim);
  manifest.config("window", opt.config.window);
  manifest.config("dropout", opt.config.dropout);
  manifest.config("init_scale", opt.config.init_scale);
  manifest.config("learning_rate", opt.config.learning_rate);
  manifest.config("rms_decay", opt.config.rms_decay);
  manifest.config("rms_epsilon", opt.config.rms_epsilon);
  manifest.config("clip_norm", opt.config.clip_norm);
  manifest.config("epochs", opt.config.epochs);
  manifest.config("batch_size", opt.config.batch_size);
  manifest.config("lambda_aes", opt.config.lambda_aes);
  manifest.config("lambda_lc", opt.config.lambda_lc);
  manifest.config("seed", opt.config.seed);
  if (opt.config.model_kind == harness::kind::kVecConcat) {
    manifest.config("alpha", opt.alpha);
    manifest.config("gamma", opt.gamma);
    manifest.input(opt.aes_ckpt);
    manifest.input(opt.lc_ckpt);
  }
  for (const auto& p : {opt.train_path, opt.dev_path,
                        opt.synthetic_train_path, opt.synthetic_dev_path,
                        opt.spec_path, opt.config.embeddings_path}) {
    manifest.input(p);
  }
  manifest.output(opt.out_path);
  manifest.body["training"] =
      log_to_json(artifacts.log, artifacts.dev_pra_per_epoch);
  if (opt.config.model_kind == harness::kind::kJoint ||
      opt.config.model_kind == harness::kind::kJointNoShare ||
      opt.config.model_kind == harness::kind::kJointZeroScore) {
    manifest.body["threshold"] = {{"value", artifacts.threshold.value},
                                  {"samples",
                                   artifacts.threshold.sample_count}};
  }
  manifest.write(opt.out_path);

  std::cout << "model " << opt.config.model_kind << " -> " << opt.out_path
            << " (selected epoch " << artifacts.log.selected_epoch;
  if (!artifacts.log.selection_metric.empty()) {
    std::cout << ", best " << artifacts.log.selection_metric << " "
              << artifacts.log.best_metric;
  }
  std::cout << ")\n";
  return 0;
}

int run_eval(const std::string& model_path, const std::string& test_path,
             const std::string& synthetic_test_path,
             const std::string& spec_path, const std::string& report_path,
             const std::string& predictions_path, bool pooled_ranking,
             const std::string& aes_ckpt, const std::string& lc_ckpt,
             const std::vector<std::string>& from_predictions) {
  const auto specs = synth::read_prompt_specs(spec_path);
  ManifestBuilder manifest("eval");
  manifest.config("pooled_ranking", pooled_ranking);

  std::string report_json;
  if (!from_predictions.empty()) {
    // Fold aggregation: pool previously emitted prediction rows (each fold
    // scored by its own model) and evaluate them together.
    if (!model_path.empty()) {
      throw std::invalid_argument(
          "eval: pass either --model or --from-predictions, not both");
    }
    const auto report =
        harness::evaluate_prediction_files(from_predictions, specs,
                                           pooled_ranking);
    report_json = harness::report_to_json(report);
    for (const auto& p : from_predictions) manifest.input(p);
    manifest.input(spec_path);
  } else {
    harness::Scorer scorer(
        harness::load_model(model_path),
        aes_ckpt.empty() ? std::nullopt : std::make_optional(aes_ckpt),
        lc_ckpt.empty() ? std::nullopt : std::make_optional(lc_ckpt));
    const auto result = harness::evaluate_model(
        scorer, read_optional_corpus(test_path),
        read_optional_corpus(synthetic_test_path), specs, pooled_ranking);
    report_json = harness::report_to_json(result.report);
    if (!predictions_path.empty()) {
      harness::atomic_write_file(predictions_path, result.predictions_jsonl);
    }
    for (const auto& p :
         {model_path, test_path, synthetic_test_path, spec_path, aes_ckpt,
          lc_ckpt}) {
      manifest.input(p);
    }
  }

  harness::atomic_write_file(report_path, report_json + "\n");
  manifest.output(report_path);
  if (!predictions_path.empty() && from_predictions.empty()) {
    manifest.output(predictions_path);
  }
  manifest.write(report_path);

  std::cout << report_json << "\n";
  return 0;
}

int run_detect(const std::string& model_path, const std::string& corpus_path,
               const std::string& spec_path, const std::string& out_path,
               bool per_prompt_threshold) {
  const auto specs = synth::read_prompt_specs(spec_path);
  harness::Scorer scorer(harness::load_model(model_path), std::nullopt,
                         std::nullopt);

  std::string rows;
  std::size_t flagged = 0, total = 0;
  for (const text::Essay& e : text::read_corpus_jsonl(corpus_path)) {
    const auto scale = synth::require_spec(specs, e.prompt_id).scale();
    const auto pred = scorer.detect(e, scale, per_prompt_threshold);
    json row{{"id", pred.id},
             {"prompt", pred.prompt_id},
             {"essay_score", pred.essay_score_unscaled},
             {"essay_score_scaled", pred.essay_score_scaled},
             {"coherence_score", pred.coherence_score},
             {"flagged", pred.flagged},
             {"final_score", pred.final_score}};
    rows += row.dump();
    rows += '\n';
    ++total;
    if (pred.flagged) ++flagged;
  }
  harness::atomic_write_file(out_path, rows);

  ManifestBuilder manifest("detect");
  manifest.config("threshold", scorer.threshold().value);
  manifest.config("threshold_samples", scorer.threshold().sample_count);
  manifest.config("per_prompt_threshold", per_prompt_threshold);
  manifest.input(model_path);
  manifest.input(corpus_path);
  manifest.input(spec_path);
  manifest.output(out_path);
  manifest.write(out_path);

  std::cout << "flagged " << flagged << " of " << total << " essays -> "
            << out_path << "\n";
  return 0;
}

int run_gradcheck(std::size_t configs, std::uint64_t seed, double tolerance) {
  const auto cases = harness::run_gradcheck_suite(configs, seed);
  double worst = 0.0;
  std::string worst_name;
  for (const auto& c : cases) {
    if (c.max_rel_error > worst) {
      worst = c.max_rel_error;
      worst_name = c.name;
    }
    std::cout << (c.max_rel_error < tolerance ? "ok   " : "FAIL ") << c.name
              << "  max_rel_error=" << c.max_rel_error << "\n";
  }
  std::cout << "worst " << worst_name << ": " << worst
            << (worst < tolerance ? " < " : " >= ") << tolerance << "\n";
  return worst < tolerance ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Local-coherence and essay-scoring toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from an INI file "
                                 "(sections name subcommands)");

  // toygen
  std::string toy_kind = "coherence", toy_out_dir = "toy";
  std::size_t toy_size = 400;
  std::uint64_t toy_seed = 1;
  double toy_train_fraction = 0.6, toy_dev_fraction = 0.2;
  auto* toygen = app.add_subcommand(
      "toygen", "Generate a deterministic toy corpus with fold splits");
  toygen->add_option("--kind", toy_kind, "coherence | scoring | joint")
      ->required();
  toygen->add_option("--size", toy_size, "Original essay count (>= 20)");
  toygen->add_option("--seed", toy_seed, "Master seed");
  toygen->add_option("--out-dir", toy_out_dir, "Output directory")->required();
  toygen->add_option("--train-fraction", toy_train_fraction, "");
  toygen->add_option("--dev-fraction", toy_dev_fraction, "");

  // synth
  std::string synth_train, synth_dev, synth_test, synth_specs,
      synth_out_dir = "synthetic";
  std::uint64_t synth_seed = 1;
  int synth_permutations = 10, synth_train_perms = 4, synth_dev_perms = 10,
      synth_test_perms = 10;
  auto* synth = app.add_subcommand(
      "synth", "Select high-scoring essays and build permuted corpora");
  synth->add_option("--train", synth_train, "Original train fold (JSONL)");
  synth->add_option("--dev", synth_dev, "Original dev fold (JSONL)");
  synth->add_option("--test", synth_test, "Original test fold (JSONL)");
  synth->add_option("--prompt-spec", synth_specs, "Prompt spec JSON")
      ->required();
  synth->add_option("--seed", synth_seed, "Master seed");
  synth->add_option("--out-dir", synth_out_dir, "Output directory")
      ->required();
  synth->add_option("--permutations", synth_permutations,
                    "Permutations generated per selected essay");
  synth->add_option("--train-perms", synth_train_perms,
                    "Permutations kept per train origin");
  synth->add_option("--dev-perms", synth_dev_perms,
                    "Permutations kept per dev origin");
  synth->add_option("--test-perms", synth_test_perms,
                    "Permutations kept per test origin");

  // train
  TrainCliOptions tr;
  auto* train_cmd = app.add_subcommand("train", "Train a model");
  train_cmd
      ->add_option("--model", tr.config.model_kind,
                   "lc | lc_mul | aes | joint | joint_no_share | "
                   "joint_zero_score | vecconcat")
      ->required();
  train_cmd->add_option("--train", tr.train_path, "Original train corpus");
  train_cmd->add_option("--dev", tr.dev_path, "Original dev corpus");
  train_cmd->add_option("--synthetic-train", tr.synthetic_train_path,
                        "Synthetic train corpus");
  train_cmd->add_option("--synthetic-dev", tr.synthetic_dev_path,
                        "Synthetic dev corpus");
  train_cmd->add_option("--prompt-spec", tr.spec_path, "Prompt spec JSON")
      ->required();
  train_cmd->add_option("--out", tr.out_path, "Checkpoint path")->required();
  train_cmd->add_option("--embeddings", tr.config.embeddings_path,
                        "Pre-trained word vectors (word2vec text format)");
  train_cmd->add_option("--embed-dim", tr.config.embed_dim, "");
  train_cmd->add_option("--lstm-dim", tr.config.lstm_dim, "");
  train_cmd->add_option("--cnn-dim", tr.config.cnn_dim, "");
  train_cmd->add_option("--window", tr.config.window, "");
  train_cmd->add_option("--dropout", tr.config.dropout, "");
  train_cmd->add_option("--init-scale", tr.config.init_scale, "");
  train_cmd->add_option("--lr", tr.config.learning_rate, "");
  train_cmd->add_option("--rms-decay", tr.config.rms_decay, "");
  train_cmd->add_option("--rms-epsilon", tr.config.rms_epsilon, "");
  train_cmd->add_option("--clip-norm", tr.config.clip_norm,
                        "Global gradient norm clip; <= 0 disables");
  train_cmd->add_option("--epochs", tr.config.epochs, "");
  train_cmd->add_option("--batch-size", tr.config.batch_size, "");
  train_cmd->add_option("--lambda-aes", tr.config.lambda_aes, "");
  train_cmd->add_option("--lambda-lc", tr.config.lambda_lc, "");
  train_cmd->add_option("--seed", tr.config.seed, "");
  train_cmd->add_option("--aes-ckpt", tr.aes_ckpt,
                        "Frozen essay-scorer checkpoint (vecconcat)");
  train_cmd->add_option("--lc-ckpt", tr.lc_ckpt,
                        "Frozen coherence checkpoint (vecconcat)");
  train_cmd->add_option("--alpha", tr.alpha, "Ridge regularization");
  train_cmd->add_option("--gamma", tr.gamma, "RBF kernel width");

  // eval
  std::string eval_model, eval_test, eval_synth_test, eval_specs,
      eval_report = "report.json", eval_predictions, eval_aes_ckpt,
      eval_lc_ckpt;
  std::vector<std::string> eval_from_predictions;
  bool eval_pooled = false;
  auto* eval_cmd =
      app.add_subcommand("eval", "Evaluate a checkpoint and emit a report");
  eval_cmd->add_option("--model", eval_model, "Checkpoint");
  eval_cmd->add_option("--test", eval_test, "Original test corpus");
  eval_cmd->add_option("--synthetic-test", eval_synth_test,
                       "Synthetic test corpus");
  eval_cmd->add_option("--prompt-spec", eval_specs, "Prompt spec JSON")
      ->required();
  eval_cmd->add_option("--report", eval_report, "Metrics JSON output")
      ->required();
  eval_cmd->add_option("--predictions", eval_predictions,
                       "Per-essay prediction JSONL output");
  eval_cmd->add_flag("--pooled-ranking", eval_pooled,
                     "Rank across prompts in one pool instead of per prompt");
  eval_cmd->add_option("--aes-ckpt", eval_aes_ckpt,
                       "Frozen essay-scorer checkpoint (vecconcat)");
  eval_cmd->add_option("--lc-ckpt", eval_lc_ckpt,
                       "Frozen coherence checkpoint (vecconcat)");
  eval_cmd->add_option("--from-predictions", eval_from_predictions,
                       "Aggregate existing prediction files (repeatable) "
                       "instead of scoring a model");

  // detect
  std::string det_model, det_corpus, det_specs, det_out = "detections.jsonl";
  bool det_per_prompt = false;
  auto* detect_cmd = app.add_subcommand(
      "detect", "Apply a joint model's adversarial detector to a corpus");
  detect_cmd->add_option("--model", det_model, "Joint checkpoint")->required();
  detect_cmd->add_option("--corpus", det_corpus, "Corpus JSONL")->required();
  detect_cmd->add_option("--prompt-spec", det_specs, "Prompt spec JSON")
      ->required();
  detect_cmd->add_option("--out", det_out, "Prediction JSONL output");
  detect_cmd->add_flag("--per-prompt-threshold", det_per_prompt,
                       "Use per-prompt dev thresholds where available");

  // gradcheck
  std::size_t gc_configs = 20;
  std::uint64_t gc_seed = 7;
  double gc_tolerance = 1e-4;
  auto* gradcheck_cmd = app.add_subcommand(
      "gradcheck", "Verify analytic gradients against finite differences");
  gradcheck_cmd->add_option("--configs", gc_configs,
                            "Random configurations per model");
  gradcheck_cmd->add_option("--seed", gc_seed, "");
  gradcheck_cmd->add_option("--tolerance", gc_tolerance, "");

  CLI11_PARSE(app, argc, argv);

  try {
    if (toygen->parsed()) {
      return run_toygen(toy_kind, toy_size, toy_seed, toy_out_dir,
                        toy_train_fraction, toy_dev_fraction);
    }
    if (synth->parsed()) {
      return run_synth(synth_train, synth_dev, synth_test, synth_specs,
                       synth_seed, synth_out_dir, synth_permutations,
                       synth_train_perms, synth_dev_perms, synth_test_perms);
    }
    if (train_cmd->parsed()) return run_train(tr);
    if (eval_cmd->parsed()) {
      if (eval_model.empty() && eval_from_predictions.empty()) {
        std::cerr << "error: eval needs --model or --from-predictions\n";
        return 1;
      }
      return run_eval(eval_model, eval_test, eval_synth_test, eval_specs,
                      eval_report, eval_predictions, eval_pooled,
                      eval_aes_ckpt, eval_lc_ckpt, eval_from_predictions);
    }
    if (detect_cmd->parsed()) {
      return run_detect(det_model, det_corpus, det_specs, det_out,
                        det_per_prompt);
    }
    if (gradcheck_cmd->parsed()) {
      return run_gradcheck(gc_configs, gc_seed, gc_tolerance);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
