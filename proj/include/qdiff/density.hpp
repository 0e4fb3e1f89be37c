#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qdiff/embedding.hpp"

namespace qdiff {

/// How "shares N% of the same letters" is measured between two words.
/// Both count the multiset intersection of ASCII-lowercased characters.
enum class OverlapMeasure {
  shorter_word,  // |a ∩ b| / min(|a|, |b|): stem containment ("etch" vs "etched" = 1.0)
  longer_word,   // |a ∩ b| / max(|a|, |b|)
};

double letter_overlap(std::string_view a, std::string_view b, OverlapMeasure measure = OverlapMeasure::shorter_word);

struct DensityOptions {
  double overlap_threshold = 0.9;  // candidates with overlap >= threshold are stems
  OverlapMeasure measure = OverlapMeasure::shorter_word;
};

struct Neighbor {
  std::size_t index = 0;  // into the embedding space
  double distance = 0.0;  // canonical double-precision euclidean distance
};

/// Exact nearest non-stem neighbor search over a fixed search universe.
/// Candidate distances are screened with a float GEMM and a rigorous
/// rounding-error bound, then the surviving candidates are re-measured with
/// euclidean_distance; the result is identical to an exhaustive scan.
/// Exact distance ties go to the lexicographically smaller word.
class NeighborSearch {
 public:
  // vocab: indices into space; duplicates are removed.
  NeighborSearch(const EmbeddingSpace& space, std::vector<std::size_t> vocab, DensityOptions options = {});

  // One result per answer index; nullopt when every candidate is the answer
  // itself or a stem of it. Parallel over answer batches; the output does
  // not depend on the thread count.
  std::vector<std::optional<Neighbor>> nearest(std::span<const std::size_t> answers, int threads = 0) const;

  std::size_t vocab_size() const noexcept { return vocab_.size(); }

 private:
  void nearest_batch(std::span<const std::size_t> answers, std::span<std::optional<Neighbor>> out) const;

  const EmbeddingSpace& space_;
  std::vector<std::size_t> vocab_;
  std::vector<float> packed_;  // vocab vectors, column per candidate
  std::vector<double> norms_;  // euclidean norms of candidates
  DensityOptions options_;
};

namespace serial {

// Exhaustive reference scan in double precision.
std::optional<Neighbor> nearest_non_stem(const EmbeddingSpace& space, std::span<const std::size_t> vocab,
                                         std::size_t answer, const DensityOptions& options = {});

}  // namespace serial

// 1 / distance to the nearest non-stem neighbor in search_vocab. nullopt when
// no candidate survives or the nearest one coincides with the answer vector.
// Throws ArgumentError if the answer is not in the space.
std::optional<double> answer_density(const EmbeddingSpace& space, const std::string& answer,
                                     std::span<const std::string> search_vocab, const DensityOptions& options = {});

}  // namespace qdiff
