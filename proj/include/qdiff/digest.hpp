#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace qdiff {

/// Streaming 64-bit FNV-1a checksum. Used to tie stage outputs to the exact
/// input files they were computed from; not a cryptographic hash.
class Digest {
 public:
  void update(const char* data, std::size_t size) noexcept;
  void update(std::string_view bytes) noexcept { update(bytes.data(), bytes.size()); }

  std::uint64_t value() const noexcept { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string digest_string(std::string_view bytes);

// Throws IoError if the file cannot be read.
std::string digest_file(const std::filesystem::path& path);

}  // namespace qdiff
