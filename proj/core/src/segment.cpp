#include "coheval/text/segment.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace coheval::text {

namespace {

bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }

bool is_space(char c) {
  return std::isspace(static_cast<unsigned char>(c)) != 0;
}

bool is_upper_or_digit(char c) {
  const auto u = static_cast<unsigned char>(c);
  return std::isupper(u) != 0 || std::isdigit(u) != 0;
}

bool has_alpha(const std::string& s) {
  return std::any_of(s.begin(), s.end(), [](char c) {
    return std::isalpha(static_cast<unsigned char>(c)) != 0;
  });
}

// Common abbreviations that take a period without ending a sentence.
const std::array<const char*, 18> kAbbreviations = {
    "mr",  "mrs",  "ms",  "dr",  "prof", "st",  "jr",  "sr",  "vs",
    "etc", "e.g",  "i.e", "fig", "no",   "inc", "dept", "approx", "est"};

// Word immediately before position `i` (exclusive), lowercased, with any
// trailing periods beyond the one at `i` retained (handles "e.g.").
std::string preceding_word(const std::string& s, std::size_t i) {
  std::size_t end = i;
  std::size_t start = end;
  while (start > 0 && !is_space(s[start - 1])) --start;
  std::string w = s.substr(start, end - start);
  std::transform(w.begin(), w.end(), w.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return w;
}

bool is_abbreviation(const std::string& word) {
  for (const char* abbr : kAbbreviations) {
    if (word == abbr) return true;
  }
  // Single letters ("J. Smith") behave like abbreviations too.
  return word.size() == 1 && std::isalpha(static_cast<unsigned char>(word[0]));
}

std::string trimmed(const std::string& s, std::size_t begin, std::size_t end) {
  while (begin < end && is_space(s[begin])) ++begin;
  while (end > begin && is_space(s[end - 1])) --end;
  return s.substr(begin, end - begin);
}

}  // namespace

std::vector<std::string> split_sentences(const std::string& raw_text) {
  std::vector<std::string> sentences;
  if (!has_alpha(raw_text)) return sentences;

  std::size_t begin = 0;
  const std::size_t n = raw_text.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_terminal(raw_text[i])) continue;
    // Run of terminal punctuation counts as one boundary candidate.
    std::size_t j = i;
    while (j + 1 < n && is_terminal(raw_text[j + 1])) ++j;
    // Boundary requires whitespace and then an uppercase letter or digit.
    std::size_t k = j + 1;
    if (k >= n) break;  // trailing punctuation, handled after the loop
    if (!is_space(raw_text[k])) continue;
    while (k < n && is_space(raw_text[k])) ++k;
    if (k >= n || !is_upper_or_digit(raw_text[k])) {
      i = j;
      continue;
    }
    if (raw_text[i] == '.' && j == i &&
        is_abbreviation(preceding_word(raw_text, i))) {
      continue;
    }
    std::string sent = trimmed(raw_text, begin, j + 1);
    if (has_alpha(sent)) sentences.push_back(std::move(sent));
    begin = k;
    i = k - 1;
  }
  std::string tail = trimmed(raw_text, begin, n);
  if (has_alpha(tail)) sentences.push_back(std::move(tail));
  return sentences;
}

std::vector<std::string> tokenize(const std::string& sentence) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  const std::size_t n = sentence.size();
  while (i < n) {
    while (i < n && is_space(sentence[i])) ++i;
    if (i >= n) break;
    std::size_t start = i;
    while (i < n && !is_space(sentence[i])) ++i;
    std::string word = sentence.substr(start, i - start);
    std::transform(word.begin(), word.end(), word.begin(), [](unsigned char c) {
      return static_cast<char>(std::tolower(c));
    });

    auto is_word_char = [](char c) {
      const auto u = static_cast<unsigned char>(c);
      return std::isalnum(u) != 0 || c == '\'' || c == '-';
    };

    std::size_t lead = 0;
    while (lead < word.size() && !is_word_char(word[lead])) {
      tokens.push_back(std::string(1, word[lead]));
      ++lead;
    }
    std::size_t core_end = word.size();
    while (core_end > lead && !is_word_char(word[core_end - 1])) --core_end;
    if (core_end > lead) {
      tokens.push_back(word.substr(lead, core_end - lead));
    }
    for (std::size_t t = core_end; t < word.size(); ++t) {
      tokens.push_back(std::string(1, word[t]));
    }
  }
  return tokens;
}

}  // namespace coheval::text
