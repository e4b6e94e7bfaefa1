#pragma once

#include <string>

#include "coheval/diff/rng.hpp"
#include "coheval/diff/tape.hpp"
#include "coheval/text/vocab.hpp"

namespace coheval::text {

// Vocabulary-indexed word vectors, trainable like any other parameter.
// Row ids follow the Vocab: 0 = PAD, 1 = UNK, then real tokens.
struct EmbeddingTable {
  EmbeddingTable(std::size_t vocab_size, std::size_t dim, diff::Rng& rng,
                 double init_scale = 0.05,
                 const std::string& name = "embedding");

  std::size_t dim;
  diff::Parameter rows;  // (vocab_size, dim)
  bool trainable = true;

  std::size_t vocab_size() const { return rows.value.rows(); }
};

// Reads a word2vec-style text file: optionally a "count dim" header line,
// then one line per token: the token followed by `dim` floats. Tokens found
// in the vocab get the file vector; everything else (including UNK and PAD)
// keeps its random initialization with the given scale.
//
// The embedding dimension is inferred from the file and must be consistent
// across rows; a mismatch raises a format error.
EmbeddingTable load_embeddings(const std::string& path, const Vocab& vocab,
                               diff::Rng& rng, double init_scale = 0.05);

}  // namespace coheval::text
