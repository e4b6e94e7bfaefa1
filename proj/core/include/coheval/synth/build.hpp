#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "coheval/synth/prompt_spec.hpp"
#include "coheval/text/corpus.hpp"

namespace coheval::synth {

// One random reordering of an origin essay's sentences. Never the identity;
// for tiny essays whose non-identity orderings are fewer than the requested
// count, duplicates are allowed.
struct PermutationRecord {
  std::string origin_id;
  int permutation_index = 0;                // 1-based
  std::vector<std::size_t> sentence_order;  // permutation of 0..N-1
};

// Essays eligible for permutation: gold score at or above the prompt's
// selection threshold and at least two sentences.
std::vector<const text::Essay*> select_high_scoring(const text::Corpus& corpus,
                                                    const PromptSpec& spec);

// `count` seeded shuffles of the essay's sentence order, identity redrawn.
// The stream is derived from (seed, essay id), so generation order across
// essays does not matter.
std::vector<PermutationRecord> permute_essay(const text::Essay& essay,
                                             int count, std::uint64_t seed);

// Joins the origin's sentences in the permuted order into a new essay with
// coherence 0, carrying provenance.
text::Essay materialize_permutation(const text::Essay& origin,
                                    const PermutationRecord& record);

struct SynthesisOptions {
  int permutations_per_essay = 10;
  int train_subset = 4;  // permutations per train origin kept for training
  int dev_subset = 10;   // permutations per dev origin kept for thresholding
  int test_subset = 10;  // permutations per test origin kept for testing
  std::uint64_t seed = 1;
};

// Selected originals (coherence 1) plus their permutations (coherence 0),
// one corpus per fold. A permutation always lands in its origin's fold.
struct SyntheticSet {
  text::Corpus train;
  text::Corpus dev;
  text::Corpus test;
};

SyntheticSet build_synthetic_set(const text::Corpus& train_fold,
                                 const text::Corpus& dev_fold,
                                 const text::Corpus& test_fold,
                                 const PromptSpecTable& specs,
                                 const SynthesisOptions& options);

}  // namespace coheval::synth
