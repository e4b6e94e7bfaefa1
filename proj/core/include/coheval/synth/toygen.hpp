#pragma once

#include <cstdint>
#include <string>

#include "coheval/synth/prompt_spec.hpp"
#include "coheval/text/corpus.hpp"

namespace coheval::synth {

enum class ToyKind { kCoherence, kScoring, kJoint };

ToyKind toy_kind_from_string(const std::string& s);

struct ToygenOptions {
  ToyKind kind = ToyKind::kCoherence;
  std::size_t size = 400;  // original essays across all folds
  std::uint64_t seed = 1;
  double train_fraction = 0.6;
  double dev_fraction = 0.2;
};

// Original essays split into folds, plus the matching prompt spec table.
//
// Kinds:
//  - coherence: 4-8 sentence essays whose consecutive sentences are linked
//    by a shared content word (sentence i+1 opens with sentence i's closing
//    noun), so window models can separate ordered text from shuffled text.
//    All essays take the maximum score.
//  - scoring: fixed-shape essays whose gold score s in 0..4 is encoded as
//    exactly 2*s marked "quality" adjectives; the gold is recoverable from
//    the token counts alone.
//  - joint: chained essays as in `coherence` with per-sentence quality
//    slots carrying a score signal, so both tasks are learnable on one
//    corpus. Only top-scored essays clear the permutation threshold.
struct ToyCorpus {
  text::Corpus train;
  text::Corpus dev;
  text::Corpus test;
  PromptSpecTable specs;
  int prompt_id = 0;
};

ToyCorpus generate_toy_corpus(const ToygenOptions& options);

// Number of quality-marked tokens in an essay's text; the scoring oracle.
std::size_t count_quality_tokens(const std::string& raw_text);

// Fraction of sentence adjacencies (i, i+1 in the given order) that were
// adjacent in-order in the original; the chain-breaking oracle.
double preserved_adjacency_fraction(const std::vector<std::size_t>& order);

inline constexpr int kToyCoherencePrompt = 101;
inline constexpr int kToyScoringPrompt = 102;
inline constexpr int kToyJointPrompt = 103;

}  // namespace coheval::synth
