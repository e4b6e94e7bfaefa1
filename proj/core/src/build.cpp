#include "coheval/synth/build.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "coheval/diff/rng.hpp"
#include "coheval/text/segment.hpp"

namespace coheval::synth {

using diff::Rng;
using text::Corpus;
using text::Essay;

std::vector<const Essay*> select_high_scoring(const Corpus& corpus,
                                              const PromptSpec& spec) {
  std::vector<const Essay*> out;
  for (const Essay& e : corpus) {
    if (e.prompt_id != spec.prompt_id) continue;
    if (e.is_synthetic) continue;
    if (e.gold_score < spec.selection_threshold) continue;
    if (text::split_sentences(e.raw_text).size() < 2) continue;
    out.push_back(&e);
  }
  return out;
}

std::vector<PermutationRecord> permute_essay(const Essay& essay, int count,
                                             std::uint64_t seed) {
  const auto sentence_strings = text::split_sentences(essay.raw_text);
  const std::size_t n = sentence_strings.size();
  if (n < 2) {
    throw std::invalid_argument("permute_essay: essay " + essay.id +
                                " has fewer than 2 sentences");
  }
  Rng rng(Rng::mix(seed, Rng::fnv1a(essay.id)));
  std::vector<PermutationRecord> records;
  records.reserve(static_cast<std::size_t>(count));
  for (int i = 1; i <= count; ++i) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    do {
      rng.shuffle(order);
    } while (std::is_sorted(order.begin(), order.end()));
    records.push_back({essay.id, i, std::move(order)});
  }
  return records;
}

Essay materialize_permutation(const Essay& origin,
                              const PermutationRecord& record) {
  const auto sentence_strings = text::split_sentences(origin.raw_text);
  if (record.sentence_order.size() != sentence_strings.size()) {
    throw std::invalid_argument(
        "materialize_permutation: order length mismatch for " + origin.id);
  }
  std::string body;
  for (std::size_t idx : record.sentence_order) {
    if (idx >= sentence_strings.size()) {
      throw std::invalid_argument("materialize_permutation: bad index");
    }
    if (!body.empty()) body += ' ';
    body += sentence_strings[idx];
  }
  Essay e;
  e.id = origin.id + "#p" + std::to_string(record.permutation_index);
  e.prompt_id = origin.prompt_id;
  e.raw_text = std::move(body);
  e.gold_score = origin.gold_score;
  e.coherence_label = 0.0;
  e.is_synthetic = true;
  e.origin_id = origin.id;
  e.permutation_index = record.permutation_index;
  return e;
}

namespace {

// Seeded choice of `subset` distinct permutation indices out of `total`.
std::vector<int> choose_subset(int total, int subset, Rng& rng) {
  std::vector<int> indices(static_cast<std::size_t>(total));
  std::iota(indices.begin(), indices.end(), 1);
  if (subset >= total) return indices;
  rng.shuffle(indices);
  indices.resize(static_cast<std::size_t>(subset));
  std::sort(indices.begin(), indices.end());
  return indices;
}

void build_fold(const Corpus& fold, const PromptSpecTable& specs,
                const SynthesisOptions& options, int subset, Corpus& out) {
  for (const Essay& e : fold) {
    // A missing spec is an error even for unselected essays in the prompt.
    require_spec(specs, e.prompt_id);
  }
  for (const auto& [prompt_id, spec] : specs) {
    auto selected = select_high_scoring(fold, spec);
    for (const Essay* origin : selected) {
      out.push_back(*origin);
      auto records = permute_essay(*origin, options.permutations_per_essay,
                                   options.seed);
      Rng subset_rng =
          Rng(Rng::mix(options.seed, Rng::fnv1a(origin->id + "#subset")));
      const auto keep =
          choose_subset(options.permutations_per_essay, subset, subset_rng);
      for (const auto& record : records) {
        if (!std::binary_search(keep.begin(), keep.end(),
                                record.permutation_index)) {
          continue;
        }
        out.push_back(materialize_permutation(*origin, record));
      }
    }
  }
}

}  // namespace

SyntheticSet build_synthetic_set(const Corpus& train_fold,
                                 const Corpus& dev_fold,
                                 const Corpus& test_fold,
                                 const PromptSpecTable& specs,
                                 const SynthesisOptions& options) {
  if (options.permutations_per_essay < 1) {
    throw std::invalid_argument("build_synthetic_set: need >= 1 permutation");
  }
  SyntheticSet set;
  build_fold(train_fold, specs, options, options.train_subset, set.train);
  build_fold(dev_fold, specs, options, options.dev_subset, set.dev);
  build_fold(test_fold, specs, options, options.test_subset, set.test);
  return set;
}

}  // namespace coheval::synth
