#pragma once

#include <cstdint>
#include <string>

namespace coheval::harness {

// Writes content to a temporary file in the target's directory and renames
// it into place, so partially written artifacts are never observable.
void atomic_write_file(const std::string& path, const std::string& content);

// 64-bit FNV-1a over the file bytes, as a 16-digit hex string. Used to
// fingerprint run inputs in manifests.
std::string file_content_hash(const std::string& path);

std::string read_file(const std::string& path);

}  // namespace coheval::harness
