#pragma once

#include <string>
#include <utility>
#include <vector>

#include "coheval/diff/tensor.hpp"

namespace coheval::harness {

// Versioned binary model container. Layout (all integers little-endian,
// doubles as IEEE-754 bit patterns in little-endian u64):
//
//   bytes 0..7   magic "COHEVAL1"
//   u32          format version (currently 1)
//   string       model kind tag ("lc", "lc_mul", "aes", "joint", ...)
//   string       config JSON (dims, window, dropout, thresholds, ...)
//   u32 n        vocab size, then n strings (tokens in id order, reserved
//                PAD/UNK rows excluded)
//   u32 m        tensor count, then m records:
//                  string name; u32 rank; u64 dims[rank]; f64 data[payload]
//
// where string = u32 byte length + bytes. Containers are written through a
// temporary file and renamed into place.
struct Checkpoint {
  std::string kind;
  std::string config_json;
  std::vector<std::string> vocab_tokens;
  std::vector<std::pair<std::string, diff::Tensor>> tensors;

  const diff::Tensor& tensor(const std::string& name) const;
  bool has_tensor(const std::string& name) const;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace coheval::harness
