#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <iosfwd>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "qdiff/error.hpp"

namespace qdiff {

enum class EmbeddingFormat { binary, text };

/// Immutable word -> dense vector map. Vectors are stored as read (float32,
/// row-major, no renormalization); squared norms are cached in double.
class EmbeddingSpace {
 public:
  EmbeddingSpace() = default;

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return words_.size(); }
  bool empty() const noexcept { return words_.empty(); }

  std::optional<std::size_t> find(const std::string& word) const;
  bool contains(const std::string& word) const { return find(word).has_value(); }

  const std::string& word(std::size_t index) const { return words_[index]; }
  std::span<const float> vector(std::size_t index) const {
    return {values_.data() + index * dimension_, dimension_};
  }
  // Throws ArgumentError if the word is not in the space.
  std::span<const float> vector(const std::string& word) const;
  double squared_norm(std::size_t index) const { return squared_norms_[index]; }

  // Contiguous row-major storage, size() * dimension() floats.
  std::span<const float> data() const noexcept { return values_; }
  const std::string& source_digest() const noexcept { return digest_; }

 private:
  friend class EmbeddingSpaceBuilder;

  std::size_t dimension_ = 0;
  std::vector<std::string> words_;
  std::vector<float> values_;
  std::vector<double> squared_norms_;
  std::unordered_map<std::string, std::size_t> index_;
  std::string digest_;
};

class EmbeddingSpaceBuilder {
 public:
  enum class AddResult { added, zero_norm, duplicate, filtered };

  explicit EmbeddingSpaceBuilder(std::size_t dimension);

  // Throws ArgumentError on dimension mismatch. Duplicate words keep the
  // first occurrence.
  AddResult add(std::string word, std::span<const float> values);
  void reserve(std::size_t entries);

  EmbeddingSpace build(std::string source_digest = {}) &&;

 private:
  EmbeddingSpace space_;
};

struct EmbeddingLoadReport {
  std::size_t declared = 0;  // header count, 0 when absent
  std::size_t loaded = 0;
  std::size_t skipped_zero_norm = 0;
  std::size_t skipped_duplicate = 0;
  std::size_t filtered_out = 0;

  std::string to_json() const;
};

struct LoadedEmbeddings {
  EmbeddingSpace space;
  EmbeddingLoadReport report;
};

// Binary: "<count> <dim>\n", then per entry the token terminated by a space,
// dim little-endian float32, optional '\n'. Text: optional "<count> <dim>"
// header line, then "token v1 ... vdim" per line. Throws FormatError (with
// byte offset where applicable).
LoadedEmbeddings load_embeddings(std::istream& in, EmbeddingFormat format,
                                 const std::unordered_set<std::string>* vocab_filter = nullptr);

void save_embeddings(const EmbeddingSpace& space, std::ostream& out, EmbeddingFormat format);

// ---- vector operations -------------------------------------------------

template <std::floating_point T, std::floating_point U>
double dot(std::span<const T> x, std::span<const U> y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += static_cast<double>(x[i]) * static_cast<double>(y[i]);
  return acc;
}

template <std::floating_point T>
double norm(std::span<const T> x) {
  return std::sqrt(dot(x, x));
}

// Cosine clamped to [-1, 1]; no argument checks. One square root of the
// product keeps a vector's cosine with itself at exactly 1.
template <std::floating_point T, std::floating_point U>
double clamped_cosine(std::span<const T> x, std::span<const U> y) {
  const double c = dot(x, y) / std::sqrt(dot(x, x) * dot(y, y));
  return std::clamp(c, -1.0, 1.0);
}

inline double degrees_from_cosine(double c) {
  return std::acos(std::clamp(c, -1.0, 1.0)) * (180.0 / std::numbers::pi);
}

template <std::floating_point T, std::floating_point U>
double angle_between(std::span<const T> x, std::span<const U> y) {
  if (x.size() != y.size()) throw ArgumentError("angle_between: dimension mismatch");
  if (!(norm(x) > 0.0) || !(norm(y) > 0.0)) throw ArgumentError("angle_between: zero vector");
  return degrees_from_cosine(clamped_cosine(x, y));
}

template <std::floating_point T, std::floating_point U>
double euclidean_distance(std::span<const T> x, std::span<const U> y) {
  if (x.size() != y.size()) throw ArgumentError("euclidean_distance: dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = static_cast<double>(x[i]) - static_cast<double>(y[i]);
    acc += d * d;
  }
  return std::sqrt(acc);
}

struct VectorSum {
  std::vector<double> values;
  bool zero_norm = false;
};

// Componentwise sum, magnitude preserved. Throws ArgumentError on an empty
// list or mixed dimensions.
VectorSum vector_sum(std::span<const std::span<const float>> vectors);

}  // namespace qdiff
