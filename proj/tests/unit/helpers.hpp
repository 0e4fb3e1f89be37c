#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "qdiff/embedding.hpp"

namespace testing {

// Small hand-rolled generator; tests draw everything from it.
struct Gen {
  std::mt19937_64 eng;
  explicit Gen(std::uint64_t seed) : eng(seed) {}
  double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(eng); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(eng); }
  std::size_t below(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(eng); }
  std::vector<float> vec(std::size_t dim) {
    std::vector<float> v(dim);
    for (auto& x : v) x = static_cast<float>(normal());
    return v;
  }
  std::string word(std::size_t min_len = 3, std::size_t max_len = 8) {
    const std::size_t len = min_len + below(max_len - min_len + 1);
    std::string w;
    for (std::size_t i = 0; i < len; ++i) w += static_cast<char>('a' + below(26));
    return w;
  }
};

inline qdiff::EmbeddingSpace space_from(const std::vector<std::pair<std::string, std::vector<float>>>& entries) {
  qdiff::EmbeddingSpaceBuilder b(entries.front().second.size());
  for (const auto& [w, v] : entries) b.add(w, v);
  return std::move(b).build();
}

inline qdiff::EmbeddingSpace load_text(const std::string& text,
                                       const std::unordered_set<std::string>* filter = nullptr) {
  std::istringstream in(text);
  return qdiff::load_embeddings(in, qdiff::EmbeddingFormat::text, filter).space;
}

// Angle oracle written without a cosine: atan2 of the Lagrange-identity
// cross magnitude against the dot product, in long double.
template <typename A, typename B>
long double oracle_angle(const A& x, const B& y) {
  long double xx = 0, yy = 0, xy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xx += static_cast<long double>(x[i]) * x[i];
    yy += static_cast<long double>(y[i]) * y[i];
    xy += static_cast<long double>(x[i]) * y[i];
  }
  long double cross2 = xx * yy - xy * xy;
  if (cross2 < 0) cross2 = 0;
  return std::atan2(std::sqrt(cross2), xy) * 180.0L / 3.141592653589793238462643383279502884L;
}

}  // namespace testing
