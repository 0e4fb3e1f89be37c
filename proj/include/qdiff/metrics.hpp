#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "qdiff/corpus.hpp"
#include "qdiff/density.hpp"
#include "qdiff/embedding.hpp"
#include "qdiff/lexicon.hpp"

namespace qdiff {

/// How the per-word cosines of the Independent model become one angle.
enum class IndependentAggregation {
  mean_cosine,  // arccos(mean cos): the literal formula
  mean_angle,   // mean of per-word angles
};

struct OpacityProfile {
  std::optional<double> synergistic_deg;  // nullopt when the clue vectors sum to zero
  double independent_deg = 0.0;
  double keyword_deg = 0.0;
};

// All three take the resolved clue tokens and answer; every token must be in
// the space (ArgumentError otherwise, or when content_tokens is empty).
std::optional<double> synergistic_opacity(const EmbeddingSpace& space, std::span<const std::string> content_tokens,
                                          const std::string& answer);
double independent_opacity(const EmbeddingSpace& space, std::span<const std::string> content_tokens,
                           const std::string& answer,
                           IndependentAggregation aggregation = IndependentAggregation::mean_cosine);
double keyword_opacity(const EmbeddingSpace& space, std::span<const std::string> content_tokens,
                       const std::string& answer);

OpacityProfile opacity_profile(const EmbeddingSpace& space, std::span<const std::string> content_tokens,
                               const std::string& answer,
                               IndependentAggregation aggregation = IndependentAggregation::mean_cosine);

const std::unordered_set<std::string>& default_conjunctions();

struct QuestionFeatures {
  int q_length = 0;        // raw tokens
  int content_length = 0;  // in-vocabulary content tokens
  std::optional<double> min_q_word_freq;  // log10 fpm of the rarest in-lexicon raw token
  double conjunction_freq = 0.0;          // conjunctions / raw tokens
};

// Throws ArgumentError when the record has no raw tokens.
QuestionFeatures question_features(const QuestionRecord& record, const FrequencyTable& table,
                                   const std::unordered_set<std::string>& conjunctions = default_conjunctions());

struct FeatureVector {
  std::optional<double> obscurity;
  std::optional<double> opacity;  // synergistic degrees
  std::optional<double> answer_density;
  int q_length = 0;
  int content_length = 0;
  std::optional<double> min_q_word_freq;
  double conjunction_freq = 0.0;
  int difficulty = 0;
};

namespace flags {
inline constexpr std::uint32_t undefined_opacity = 1u << 0;
inline constexpr std::uint32_t undefined_density = 1u << 1;
inline constexpr std::uint32_t missing_answer_frequency = 1u << 2;
inline constexpr std::uint32_t missing_question_frequency = 1u << 3;
}  // namespace flags

std::vector<std::string> flag_names(std::uint32_t bits);
std::uint32_t flag_from_name(const std::string& name);

struct ScoredRecord {
  std::size_t id = 0;
  Source source = Source::crossword;
  int difficulty = 0;
  bool is_pun = false;
  std::string answer;
  std::optional<double> answer_fpm;
  OpacityProfile opacity;
  FeatureVector features;
  std::optional<std::string> density_neighbor;
  std::uint32_t flags = 0;
};

enum class DensityVocab { corpus, top100k, full };
std::string_view to_string(DensityVocab v);
DensityVocab density_vocab_from_string(std::string_view name);

struct ScoreConfig {
  DensityVocab density_vocab = DensityVocab::top100k;
  std::size_t top_n = 100000;
  DensityOptions density;
  IndependentAggregation aggregation = IndependentAggregation::mean_cosine;
  std::unordered_set<std::string> conjunctions = default_conjunctions();
  int threads = 0;
};

// Indices of the density search universe for the given mode: distinct
// answers, plus the top_n lexicon words for top100k, or every word for full.
std::vector<std::size_t> density_search_vocab(std::span<const QuestionRecord> records, const EmbeddingSpace& space,
                                              const FrequencyTable& table, const ScoreConfig& config);

// Words the score stage needs from the embedding file, for vocab_filter;
// nullopt for DensityVocab::full.
std::optional<std::unordered_set<std::string>> score_vocab_filter(std::span<const QuestionRecord> records,
                                                                  const FrequencyTable& table,
                                                                  const ScoreConfig& config);

// Output order follows input order; independent of config.threads.
std::vector<ScoredRecord> score_corpus(std::span<const QuestionRecord> records, const EmbeddingSpace& space,
                                       const FrequencyTable& table, const ScoreConfig& config = {});

namespace serial {
std::vector<ScoredRecord> score_corpus(std::span<const QuestionRecord> records, const EmbeddingSpace& space,
                                       const FrequencyTable& table, const ScoreConfig& config = {});
}  // namespace serial

}  // namespace qdiff
