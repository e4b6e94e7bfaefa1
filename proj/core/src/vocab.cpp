#include "coheval/text/vocab.hpp"

#include <stdexcept>

namespace coheval::text {

Vocab Vocab::build(const std::vector<std::vector<std::string>>& corpus,
                   std::size_t min_count) {
  if (corpus.empty()) {
    throw std::invalid_argument("Vocab::build: empty corpus");
  }
  std::unordered_map<std::string, std::size_t> counts;
  std::vector<std::string> order;  // first-seen order keeps ids stable
  for (const auto& doc : corpus) {
    for (const auto& tok : doc) {
      auto [it, inserted] = counts.try_emplace(tok, 0);
      if (inserted) order.push_back(tok);
      ++it->second;
    }
  }
  Vocab v;
  for (const auto& tok : order) {
    if (counts[tok] >= min_count) {
      v.ids_.emplace(tok, static_cast<TokenId>(v.tokens_.size() + kReserved));
      v.tokens_.push_back(tok);
    }
  }
  return v;
}

Vocab Vocab::from_tokens(std::vector<std::string> tokens) {
  Vocab v;
  v.tokens_ = std::move(tokens);
  for (std::size_t i = 0; i < v.tokens_.size(); ++i) {
    v.ids_.emplace(v.tokens_[i], static_cast<TokenId>(i + kReserved));
  }
  return v;
}

}  // namespace coheval::text
