#pragma once

#include <map>
#include <string>

#include "coheval/models/aes.hpp"

namespace coheval::synth {

// Score range and high-score selection threshold (inclusive) for a prompt.
struct PromptSpec {
  int prompt_id = 0;
  double min_score = 0.0;
  double max_score = 0.0;
  double selection_threshold = 0.0;

  models::ScoreScale scale() const {
    return models::ScoreScale{prompt_id, min_score, max_score};
  }
};

using PromptSpecTable = std::map<int, PromptSpec>;

// The eight ASAP prompts: ranges 2-12, 1-6, 0-3, 0-3, 0-4, 0-4, 0-30, 0-60
// and selection thresholds 10, 5, 3, 3, 4, 4, 23, 45.
PromptSpecTable asap_prompt_specs();

// JSON file format: {"prompts": [{"prompt", "min_score", "max_score",
// "threshold"}, ...]}.
PromptSpecTable read_prompt_specs(const std::string& path);
void write_prompt_specs(const std::string& path, const PromptSpecTable& specs);

const PromptSpec& require_spec(const PromptSpecTable& specs, int prompt_id);

}  // namespace coheval::synth
