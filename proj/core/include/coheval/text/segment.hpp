#pragma once

#include <string>
#include <vector>

namespace coheval::text {

// Deterministic rule-based sentence splitter. Splits after terminal
// punctuation (. ! ?) followed by whitespace and an uppercase letter or
// digit, unless the preceding token is a known abbreviation. Never returns
// empty sentences; text without any alphabetic content yields an empty list.
std::vector<std::string> split_sentences(const std::string& raw_text);

// Lowercases, splits on whitespace, and detaches leading/trailing
// punctuation into separate tokens. Apostrophes and hyphens inside a word
// stay attached ("don't" is one token).
std::vector<std::string> tokenize(const std::string& sentence);

}  // namespace coheval::text
