#include "coheval/synth/prompt_spec.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace coheval::synth {

using nlohmann::json;

PromptSpecTable asap_prompt_specs() {
  PromptSpecTable t;
  t[1] = {1, 2, 12, 10};
  t[2] = {2, 1, 6, 5};
  t[3] = {3, 0, 3, 3};
  t[4] = {4, 0, 3, 3};
  t[5] = {5, 0, 4, 4};
  t[6] = {6, 0, 4, 4};
  t[7] = {7, 0, 30, 23};
  t[8] = {8, 0, 60, 45};
  return t;
}

PromptSpecTable read_prompt_specs(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("read_prompt_specs: cannot open " + path);
  }
  json j;
  in >> j;
  PromptSpecTable t;
  for (const auto& row : j.at("prompts")) {
    PromptSpec spec;
    spec.prompt_id = row.at("prompt").get<int>();
    spec.min_score = row.at("min_score").get<double>();
    spec.max_score = row.at("max_score").get<double>();
    spec.selection_threshold = row.at("threshold").get<double>();
    if (spec.min_score > spec.selection_threshold ||
        spec.selection_threshold > spec.max_score) {
      throw std::runtime_error("read_prompt_specs: threshold outside range "
                               "for prompt " +
                               std::to_string(spec.prompt_id));
    }
    t[spec.prompt_id] = spec;
  }
  return t;
}

void write_prompt_specs(const std::string& path, const PromptSpecTable& specs) {
  json rows = json::array();
  for (const auto& [id, spec] : specs) {
    rows.push_back({{"prompt", spec.prompt_id},
                    {"min_score", spec.min_score},
                    {"max_score", spec.max_score},
                    {"threshold", spec.selection_threshold}});
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw std::runtime_error("write_prompt_specs: cannot open " + path);
  }
  out << json{{"prompts", rows}}.dump(2) << '\n';
}

const PromptSpec& require_spec(const PromptSpecTable& specs, int prompt_id) {
  auto it = specs.find(prompt_id);
  if (it == specs.end()) {
    throw std::runtime_error("no prompt spec for prompt " +
                             std::to_string(prompt_id));
  }
  return it->second;
}

}  // namespace coheval::synth
