#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace coheval::text {

using TokenId = std::uint32_t;

// Token-to-id map built from a training corpus. Tokens seen fewer than
// min_count times resolve to UNK at lookup time; ids 0 and 1 are reserved
// for PAD and UNK.
class Vocab {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kUnk = 1;
  static constexpr std::size_t kReserved = 2;

  Vocab() = default;

  // Counts tokens across the training corpus (a flat stream of tokens) and
  // assigns ids, in first-seen order, to tokens with frequency >= min_count.
  static Vocab build(const std::vector<std::vector<std::string>>& corpus,
                     std::size_t min_count = 2);

  TokenId lookup(const std::string& token) const {
    auto it = ids_.find(token);
    return it == ids_.end() ? kUnk : it->second;
  }

  bool contains(const std::string& token) const {
    return ids_.find(token) != ids_.end();
  }

  // Total id count including the reserved entries; embedding tables have
  // exactly this many rows.
  std::size_t size() const { return tokens_.size() + kReserved; }

  // Tokens in id order (id = index + kReserved).
  const std::vector<std::string>& tokens() const { return tokens_; }

  // Rebuilds the map from an explicit token list, for checkpoint loading.
  static Vocab from_tokens(std::vector<std::string> tokens);

 private:
  std::unordered_map<std::string, TokenId> ids_;
  std::vector<std::string> tokens_;
};

}  // namespace coheval::text
