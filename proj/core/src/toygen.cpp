#include "coheval/synth/toygen.hpp"

#include <array>
#include <cctype>
#include <cstdio>
#include <stdexcept>

#include "coheval/diff/rng.hpp"
#include "coheval/text/segment.hpp"

namespace coheval::synth {

using diff::Rng;
using text::Corpus;
using text::Essay;

namespace {

// Essays chain consecutive sentences through a marker word: sentence i
// closes with marker[offset+i] and sentence i+1 opens with the same word.
// The marker list is globally ordered and the offset varies per essay, so
// ordered windows are recognizable without memorizing absolute positions.
const std::array<const char*, 12> kMarkers = {
    "january", "february", "march",     "april",   "may",      "june",
    "july",    "august",   "september", "october", "november", "december"};

const std::array<const char*, 18> kNouns = {
    "otter",  "falcon", "maple",  "lantern", "harbor", "meadow",
    "copper", "violin", "sparrow", "anchor",  "orchard", "beacon",
    "walrus", "canyon", "ferry",   "magnet",  "raven",   "willow"};

const std::array<const char*, 8> kVerbs = {
    "watched", "followed", "circled", "greeted",
    "passed",  "studied",  "carried", "joined"};

const std::array<const char*, 6> kQualityAdjectives = {
    "lucid", "cogent", "polished", "precise", "vivid", "balanced"};

const std::array<const char*, 6> kPlainAdjectives = {
    "plain", "grey", "mild", "flat", "common", "rough"};

const std::array<const char*, 6> kFillerNouns = {
    "morning", "garden", "street", "window", "market", "evening"};

std::string capitalized(std::string word) {
  word[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(word[0])));
  return word;
}

// First sentence: "The <noun> <verb> the <noun> before <m0>."
// Later sentences: "<M_{i-1}> passed and the <noun> <verb> the <noun>
// before <m_i>." so each sentence opens with the previous closing marker.
std::string chain_sentence(const char* opener, const char* closer, Rng& rng) {
  const char* a = kNouns[rng.below(kNouns.size())];
  const char* b = kNouns[rng.below(kNouns.size())];
  const char* verb = kVerbs[rng.below(kVerbs.size())];
  std::string body = std::string("the ") + a + " " + verb + " the " + b +
                     " before " + closer + ".";
  if (opener == nullptr) return capitalized(std::move(body));
  return capitalized(std::string(opener)) + " passed and " + body;
}

// Chain sentence with two adjective slots for the quality signal.
std::string chain_quality_sentence(const char* opener, const char* closer,
                                   int quality_slots, Rng& rng) {
  auto adj = [&](int slot) -> const char* {
    if (slot < quality_slots) {
      return kQualityAdjectives[rng.below(kQualityAdjectives.size())];
    }
    return kPlainAdjectives[rng.below(kPlainAdjectives.size())];
  };
  // Slot order alternates so quality words do not pin to one position.
  const bool flip = rng.below(2) == 1;
  const char* first = adj(flip ? 1 : 0);
  const char* second = adj(flip ? 0 : 1);
  const char* noun = kNouns[rng.below(kNouns.size())];
  std::string body = std::string("the ") + noun + " seemed " + first +
                     " and " + second + " before " + closer + ".";
  if (opener == nullptr) return capitalized(std::move(body));
  return capitalized(std::string(opener)) + " passed and " + body;
}

Essay make_coherence_essay(const std::string& id, Rng& rng) {
  const std::size_t n = 4 + rng.below(5);  // 4..8 sentences
  const std::size_t offset = rng.below(kMarkers.size() - n + 1);
  std::string body;
  for (std::size_t i = 0; i < n; ++i) {
    if (!body.empty()) body += ' ';
    body += chain_sentence(i == 0 ? nullptr : kMarkers[offset + i - 1],
                           kMarkers[offset + i], rng);
  }
  Essay e;
  e.id = id;
  e.prompt_id = kToyCoherencePrompt;
  e.raw_text = std::move(body);
  e.gold_score = 4.0;  // everything clears the selection threshold
  return e;
}

Essay make_scoring_essay(const std::string& id, std::size_t index, Rng& rng) {
  // Scores 0, 2, 4 on the 0..4 range; eight adjective slots carry exactly
  // 2*score quality words, so the gold is recoverable from the counts and
  // the per-class contrast stays wide enough for very small corpora. Slot
  // j is a quality slot iff ((3j + offset) mod 8) < 2*score, which marks
  // exactly 2*score of the eight slots.
  const int score = 2 * static_cast<int>(rng.below(3));
  const int offset = static_cast<int>(index % 8);
  std::string body;
  int slot = 0;
  for (int s = 0; s < 4; ++s) {
    auto take = [&]() -> const char* {
      const int key = (3 * slot++ + offset) % 8;
      if (key < 2 * score) {
        return kQualityAdjectives[rng.below(kQualityAdjectives.size())];
      }
      return kPlainAdjectives[rng.below(kPlainAdjectives.size())];
    };
    const char* noun = kFillerNouns[rng.below(kFillerNouns.size())];
    const char* a1 = take();
    const char* a2 = take();
    if (!body.empty()) body += ' ';
    body += "The " + std::string(noun) + " seemed " + a1 + " and " + a2 +
            ".";
  }
  Essay e;
  e.id = id;
  e.prompt_id = kToyScoringPrompt;
  e.raw_text = std::move(body);
  e.gold_score = score;
  return e;
}

Essay make_joint_essay(const std::string& id, Rng& rng) {
  // Longer than the pure coherence corpus: more windows per essay keep the
  // mean coherence of a shuffled essay low even when one ordered window
  // survives the permutation, which the threshold detector relies on.
  //
  // Scores sit in the upper half of the range so that the gold-assignment
  // rule (coherence gold = scaled essay gold for originals) stays
  // consistent with every original being fully chained; low-scored chained
  // essays would otherwise teach the coherence branch that ordered text is
  // incoherent. Score s maps to exactly s-2 quality adjectives per
  // sentence, so the gold stays a function of the token counts.
  const std::size_t n = 6 + rng.below(4);
  const int score = 2 + static_cast<int>(rng.below(3));
  const std::size_t offset = rng.below(kMarkers.size() - n + 1);
  std::string body;
  for (std::size_t i = 0; i < n; ++i) {
    const int quota = score - 2;
    if (!body.empty()) body += ' ';
    body += chain_quality_sentence(i == 0 ? nullptr : kMarkers[offset + i - 1],
                                   kMarkers[offset + i], quota, rng);
  }
  Essay e;
  e.id = id;
  e.prompt_id = kToyJointPrompt;
  e.raw_text = std::move(body);
  e.gold_score = score;
  return e;
}

}  // namespace

ToyKind toy_kind_from_string(const std::string& s) {
  if (s == "coherence") return ToyKind::kCoherence;
  if (s == "scoring") return ToyKind::kScoring;
  if (s == "joint") return ToyKind::kJoint;
  throw std::invalid_argument("unknown toy corpus kind: " + s);
}

ToyCorpus generate_toy_corpus(const ToygenOptions& options) {
  if (options.size < 20) {
    throw std::invalid_argument("generate_toy_corpus: size must be >= 20");
  }
  if (options.train_fraction <= 0.0 || options.dev_fraction <= 0.0 ||
      options.train_fraction + options.dev_fraction >= 1.0) {
    throw std::invalid_argument("generate_toy_corpus: bad fold fractions");
  }

  ToyCorpus out;
  std::string prefix;
  switch (options.kind) {
    case ToyKind::kCoherence:
      out.prompt_id = kToyCoherencePrompt;
      prefix = "toy-coh-";
      break;
    case ToyKind::kScoring:
      out.prompt_id = kToyScoringPrompt;
      prefix = "toy-scr-";
      break;
    case ToyKind::kJoint:
      out.prompt_id = kToyJointPrompt;
      prefix = "toy-jnt-";
      break;
  }
  out.specs[out.prompt_id] = PromptSpec{out.prompt_id, 0, 4, 4};

  Rng master(options.seed);
  const std::size_t train_count = static_cast<std::size_t>(
      static_cast<double>(options.size) * options.train_fraction);
  const std::size_t dev_count = static_cast<std::size_t>(
      static_cast<double>(options.size) * options.dev_fraction);

  for (std::size_t i = 0; i < options.size; ++i) {
    char num[8];
    std::snprintf(num, sizeof(num), "%05zu", i);
    const std::string id = prefix + num;
    Rng rng = master.derive(id);
    Essay e;
    switch (options.kind) {
      case ToyKind::kCoherence:
        e = make_coherence_essay(id, rng);
        break;
      case ToyKind::kScoring:
        e = make_scoring_essay(id, i, rng);
        break;
      case ToyKind::kJoint:
        e = make_joint_essay(id, rng);
        break;
    }
    if (i < train_count) {
      out.train.push_back(std::move(e));
    } else if (i < train_count + dev_count) {
      out.dev.push_back(std::move(e));
    } else {
      out.test.push_back(std::move(e));
    }
  }
  return out;
}

std::size_t count_quality_tokens(const std::string& raw_text) {
  std::size_t count = 0;
  for (const auto& sentence : text::tokenized_sentences(raw_text)) {
    for (const auto& tok : sentence) {
      for (const char* q : kQualityAdjectives) {
        if (tok == q) {
          ++count;
          break;
        }
      }
    }
  }
  return count;
}

double preserved_adjacency_fraction(const std::vector<std::size_t>& order) {
  if (order.size() < 2) {
    throw std::invalid_argument("preserved_adjacency_fraction: too short");
  }
  std::size_t preserved = 0;
  for (std::size_t i = 0; i + 1 < order.size(); ++i) {
    if (order[i + 1] == order[i] + 1) ++preserved;
  }
  return static_cast<double>(preserved) /
         static_cast<double>(order.size() - 1);
}

}  // namespace coheval::synth
