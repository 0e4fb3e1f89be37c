#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qdiff/corpus.hpp"
#include "qdiff/embedding.hpp"
#include "qdiff/metrics.hpp"

namespace qdiff {

enum class OpacityModel { synergistic, independent, keyword };
std::string_view to_string(OpacityModel m);

std::optional<double> model_angle(const ScoredRecord& r, OpacityModel m);

// ---- null model ----------------------------------------------------------

struct NullModelResult {
  OpacityModel model = OpacityModel::synergistic;
  std::size_t repetitions = 0;
  double mean = 0.0;     // mean of repetition means
  double spread = 0.0;   // sd of repetition means (0 for one repetition)
  std::vector<double> repetition_means;
  std::vector<double> pooled_angles;  // every defined per-record null angle, repetition-major
};

// Each repetition r shuffles answers across records uniformly with
// seeded_engine(seed, r) and recomputes the model angle for every record.
// Throws ArgumentError for fewer than 2 records or repetitions < 1.
NullModelResult null_model_mean(std::span<const QuestionRecord> records, const EmbeddingSpace& space,
                                OpacityModel model, std::uint64_t seed, std::size_t repetitions = 10,
                                IndependentAggregation aggregation = IndependentAggregation::mean_cosine,
                                int threads = 0);

namespace serial {
NullModelResult null_model_mean(std::span<const QuestionRecord> records, const EmbeddingSpace& space,
                                OpacityModel model, std::uint64_t seed, std::size_t repetitions = 10,
                                IndependentAggregation aggregation = IndependentAggregation::mean_cosine);
}  // namespace serial

// ---- grouping ------------------------------------------------------------

enum class Grouping { difficulty, pun_flag, frequency_bin_by_difficulty };

struct ModelStats {
  std::size_t n = 0;
  double mean = 0.0;
  double se = 0.0;  // bootstrap
};

struct GroupSummary {
  std::optional<int> difficulty;
  std::optional<bool> is_pun;
  std::optional<int> frequency_bin;  // 1..4, quartiles of log10 answer fpm
  std::size_t n = 0;
  ModelStats synergistic;
  ModelStats independent;
  ModelStats keyword;
  std::optional<double> median_fpm;

  std::string key() const;
  // independent - synergistic mean angle
  double synergy_gap() const { return independent.mean - synergistic.mean; }
};

struct GroupReport {
  std::vector<GroupSummary> groups;
  std::vector<std::string> warnings;
};

// Quartile cut points (25/50/75%) of log10 answer fpm over records with a
// frequency. Throws ArgumentError when no record has one.
std::array<double, 3> frequency_quartiles(std::span<const ScoredRecord> records);
int frequency_bin(double log10_fpm, const std::array<double, 3>& cuts);

// Throws ArgumentError on an empty corpus.
GroupReport group_means(std::span<const ScoredRecord> records, Grouping grouping, std::uint64_t seed,
                        std::size_t bootstrap_repetitions = 1000, int threads = 0);

// Summary of an arbitrary subset (e.g. the whole corpus); n may be 0.
GroupSummary summarize(std::span<const ScoredRecord> records, const std::function<bool(const ScoredRecord&)>& select,
                       std::uint64_t seed, std::size_t bootstrap_repetitions = 1000, int threads = 0);

// Exact median of answer fpm over selected records that have a frequency.
// Throws ArgumentError when the subset is empty.
double median_frequency(std::span<const ScoredRecord> records,
                        const std::function<bool(const ScoredRecord&)>& select);

std::vector<double> model_angles(std::span<const ScoredRecord> records, OpacityModel m,
                                 const std::function<bool(const ScoredRecord&)>& select = {});

}  // namespace qdiff
