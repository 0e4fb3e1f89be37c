#include "qdiff/digest.hpp"

#include <array>
#include <cstdio>
#include <fstream>

#include "qdiff/error.hpp"

namespace qdiff {

void Digest::update(const char* data, std::size_t size) noexcept {
  constexpr std::uint64_t prime = 0x100000001b3ULL;
  std::uint64_t h = state_;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= prime;
  }
  state_ = h;
}

std::string Digest::hex() const {
  std::array<char, 17> buf{};
  std::snprintf(buf.data(), buf.size(), "%016llx", static_cast<unsigned long long>(state_));
  return std::string(buf.data(), 16);
}

std::string digest_string(std::string_view bytes) {
  Digest d;
  d.update(bytes);
  return d.hex();
}

std::string digest_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  Digest d;
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    d.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  if (in.bad()) throw IoError("read failed: " + path.string());
  return d.hex();
}

}  // namespace qdiff
