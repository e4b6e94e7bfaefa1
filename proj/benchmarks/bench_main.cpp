#include <benchmark/benchmark.h>

#include <memory>

#include "coheval/diff/lstm.hpp"
#include "coheval/eval/metrics.hpp"
#include "coheval/models/lc.hpp"
#include "coheval/models/vecconcat.hpp"
#include "coheval/synth/build.hpp"

using namespace coheval;
using diff::Rng;

namespace {

static void BM_LstmCellForward(benchmark::State& state) {
  const std::size_t k = 50, d = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  diff::LstmParams params("bench", k, d, rng, 0.05);
  std::vector<double> x(k);
  for (auto& v : x) v = rng.uniform_symmetric(1.0);
  for (auto _ : state) {
    diff::Tape tape;
    diff::LstmCell cell(tape, params);
    benchmark::DoNotOptimize(cell.step(tape.constant(diff::Tensor::vector(x))));
  }
}
BENCHMARK(BM_LstmCellForward)->Arg(32)->Arg(100);

static void BM_LcTrainingStep(benchmark::State& state) {
  const std::size_t d = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  auto table = std::make_shared<text::EmbeddingTable>(200, 50, rng);
  models::LcConfig cfg;
  cfg.embed_dim = 50;
  cfg.lstm_dim = d;
  cfg.cnn_dim = d;
  cfg.window = 3;
  cfg.dropout = 0.0;
  models::LcModel model(cfg, table, rng);

  text::Essay essay;
  essay.id = "bench";
  for (int s = 0; s < 6; ++s) {
    std::vector<text::TokenId> sent;
    for (int t = 0; t < 8; ++t) {
      sent.push_back(static_cast<text::TokenId>(rng.below(200)));
    }
    essay.sentences.push_back(std::move(sent));
  }

  for (auto _ : state) {
    for (auto* p : model.parameters()) p->zero_grad();
    diff::Tape tape;
    auto loss = model.training_loss(tape, essay, nullptr);
    tape.backward(loss);
    benchmark::DoNotOptimize(tape.value(loss).item());
  }
}
BENCHMARK(BM_LcTrainingStep)->Arg(32)->Arg(100);

static void BM_Qwk(benchmark::State& state) {
  Rng rng(3);
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  eval::RatingPairSet pairs;
  pairs.min_score = 0;
  pairs.max_score = 10;
  for (std::size_t i = 0; i < n; ++i) {
    pairs.gold.push_back(static_cast<int>(rng.below(11)));
    pairs.predicted.push_back(static_cast<int>(rng.below(11)));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(eval::qwk(pairs));
  }
}
BENCHMARK(BM_Qwk)->Arg(1000)->Arg(10000);

static void BM_PermuteEssay(benchmark::State& state) {
  text::Essay essay;
  essay.id = "bench";
  std::string body;
  for (int i = 0; i < 12; ++i) {
    body += "The anchor held the line. ";
  }
  essay.raw_text = body;
  for (auto _ : state) {
    benchmark::DoNotOptimize(synth::permute_essay(essay, 10, 9));
  }
}
BENCHMARK(BM_PermuteEssay);

static void BM_KernelRidgeFit(benchmark::State& state) {
  Rng rng(4);
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  std::vector<models::FeatureVector> features(n);
  std::vector<double> targets(n);
  for (std::size_t i = 0; i < n; ++i) {
    features[i].values.resize(64);
    for (auto& v : features[i].values) v = rng.uniform_symmetric(1.0);
    targets[i] = rng.uniform01();
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        models::KernelRidgeModel::fit(features, targets, 0.1, 0.1));
  }
}
BENCHMARK(BM_KernelRidgeFit)->Arg(100)->Arg(300);

}  // namespace

BENCHMARK_MAIN();
