#include "coheval/text/corpus.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "coheval/text/segment.hpp"

namespace coheval::text {

using nlohmann::json;

std::vector<TokenId> Essay::flat_tokens() const {
  std::vector<TokenId> out;
  for (const auto& s : sentences) out.insert(out.end(), s.begin(), s.end());
  return out;
}

Corpus read_corpus_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("read_corpus_jsonl: cannot open " + path);
  }
  Corpus corpus;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw std::runtime_error("read_corpus_jsonl: " + path + ":" +
                               std::to_string(line_no) + ": " + e.what());
    }
    Essay e;
    e.id = j.at("id").get<std::string>();
    e.prompt_id = j.at("prompt").get<int>();
    e.raw_text = j.at("text").get<std::string>();
    e.gold_score = j.at("score").get<double>();
    if (j.contains("coherence")) {
      e.coherence_label = j.at("coherence").get<double>();
    }
    if (j.contains("origin_id")) {
      e.origin_id = j.at("origin_id").get<std::string>();
      e.is_synthetic = true;
    }
    if (j.contains("permutation_index")) {
      e.permutation_index = j.at("permutation_index").get<int>();
    }
    if (e.is_synthetic != e.origin_id.has_value()) {
      throw std::runtime_error("read_corpus_jsonl: essay " + e.id +
                               ": origin_id must be present exactly for "
                               "synthetic rows");
    }
    corpus.push_back(std::move(e));
  }
  return corpus;
}

std::string corpus_to_jsonl(const Corpus& corpus) {
  std::string out;
  for (const Essay& e : corpus) {
    json j;
    j["id"] = e.id;
    j["prompt"] = e.prompt_id;
    j["text"] = e.raw_text;
    j["score"] = e.gold_score;
    if (e.is_synthetic) {
      j["origin_id"] = *e.origin_id;
      if (e.permutation_index) j["permutation_index"] = *e.permutation_index;
      j["coherence"] = e.coherence_label;
    } else if (e.coherence_label != 1.0) {
      j["coherence"] = e.coherence_label;
    }
    out += j.dump();
    out += '\n';
  }
  return out;
}

void write_corpus_jsonl(const std::string& path, const Corpus& corpus) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw std::runtime_error("write_corpus_jsonl: cannot open " + path);
  }
  out << corpus_to_jsonl(corpus);
  if (!out) {
    throw std::runtime_error("write_corpus_jsonl: write failed for " + path);
  }
}

std::vector<std::vector<std::string>> tokenized_sentences(
    const std::string& raw_text) {
  std::vector<std::vector<std::string>> out;
  for (const std::string& sent : split_sentences(raw_text)) {
    auto toks = tokenize(sent);
    if (!toks.empty()) out.push_back(std::move(toks));
  }
  return out;
}

void preprocess(Essay& essay, const Vocab& vocab) {
  essay.sentences.clear();
  for (const auto& toks : tokenized_sentences(essay.raw_text)) {
    std::vector<TokenId> ids;
    ids.reserve(toks.size());
    for (const auto& t : toks) ids.push_back(vocab.lookup(t));
    essay.sentences.push_back(std::move(ids));
  }
}

void preprocess(Corpus& corpus, const Vocab& vocab) {
  for (Essay& e : corpus) preprocess(e, vocab);
}

}  // namespace coheval::text
