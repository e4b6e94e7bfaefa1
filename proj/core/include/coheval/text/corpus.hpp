#pragma once

#include <optional>
#include <string>
#include <vector>

#include "coheval/text/vocab.hpp"

namespace coheval::text {

// One essay. `sentences` is filled by preprocess(); synthetic (permuted)
// essays carry a link to their origin and a 1-based permutation index.
struct Essay {
  std::string id;
  int prompt_id = 0;
  std::string raw_text;
  std::vector<std::vector<TokenId>> sentences;
  double gold_score = 0.0;
  double coherence_label = 1.0;
  bool is_synthetic = false;
  std::optional<std::string> origin_id;
  std::optional<int> permutation_index;

  // All token ids in document order, sentence boundaries dropped.
  std::vector<TokenId> flat_tokens() const;
  std::size_t sentence_count() const { return sentences.size(); }
};

using Corpus = std::vector<Essay>;

// JSON Lines corpus IO. One object per line with fields
//   {"id", "prompt", "text", "score"}
// plus, for synthetic rows,
//   {"origin_id", "permutation_index", "coherence"}.
Corpus read_corpus_jsonl(const std::string& path);
std::string corpus_to_jsonl(const Corpus& corpus);
void write_corpus_jsonl(const std::string& path, const Corpus& corpus);

// Splits raw text into sentences and resolves tokens against the vocab.
// Essays whose text yields no sentences end up with an empty sentence list;
// callers filter or reject those per their own contracts.
void preprocess(Essay& essay, const Vocab& vocab);
void preprocess(Corpus& corpus, const Vocab& vocab);

// Tokenized sentences of the raw text (no vocab resolution), shared by
// vocab construction and the synthetic-data generator.
std::vector<std::vector<std::string>> tokenized_sentences(
    const std::string& raw_text);

}  // namespace coheval::text
