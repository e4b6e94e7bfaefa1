#include "coheval/text/embeddings.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace coheval::text {

EmbeddingTable::EmbeddingTable(std::size_t vocab_size, std::size_t dim,
                               diff::Rng& rng, double init_scale,
                               const std::string& name)
    : dim(dim), rows(name, diff::Tensor({vocab_size, dim})) {
  if (dim == 0) {
    throw std::invalid_argument("EmbeddingTable: dim must be positive");
  }
  for (std::size_t i = 0; i < rows.value.size(); ++i) {
    rows.value[i] = rng.uniform_symmetric(init_scale);
  }
}

namespace {

// A header line is exactly two whitespace-separated non-negative integers.
bool is_header(const std::string& line) {
  std::istringstream ss(line);
  std::string a, b, extra;
  if (!(ss >> a >> b) || (ss >> extra)) return false;
  auto all_digits = [](const std::string& s) {
    if (s.empty()) return false;
    for (char c : s) {
      if (std::isdigit(static_cast<unsigned char>(c)) == 0) return false;
    }
    return true;
  };
  return all_digits(a) && all_digits(b);
}

}  // namespace

EmbeddingTable load_embeddings(const std::string& path, const Vocab& vocab,
                               diff::Rng& rng, double init_scale) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("load_embeddings: cannot open " + path);
  }

  std::string line;
  std::vector<std::pair<std::string, std::vector<double>>> entries;
  std::size_t dim = 0;
  bool first = true;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (first && is_header(line)) {
      first = false;
      continue;
    }
    first = false;
    std::istringstream ss(line);
    std::string token;
    ss >> token;
    std::vector<double> vec;
    double v;
    while (ss >> v) vec.push_back(v);
    if (vec.empty()) {
      throw std::runtime_error("load_embeddings: no values on line " +
                               std::to_string(line_no));
    }
    if (dim == 0) {
      dim = vec.size();
    } else if (vec.size() != dim) {
      throw std::runtime_error("load_embeddings: inconsistent vector length " +
                               std::to_string(vec.size()) + " vs " +
                               std::to_string(dim) + " on line " +
                               std::to_string(line_no));
    }
    entries.emplace_back(std::move(token), std::move(vec));
  }
  if (dim == 0) {
    throw std::runtime_error("load_embeddings: no vectors in " + path);
  }

  EmbeddingTable table(vocab.size(), dim, rng, init_scale);
  for (const auto& [token, vec] : entries) {
    if (!vocab.contains(token)) continue;
    const TokenId id = vocab.lookup(token);
    for (std::size_t j = 0; j < dim; ++j) {
      table.rows.value.at(id, j) = vec[j];
    }
  }
  return table;
}

}  // namespace coheval::text
