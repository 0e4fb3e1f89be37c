#include "qdiff/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include <omp.h>

#include "qdiff/error.hpp"

namespace qdiff {

namespace {

std::span<const float> lookup(const EmbeddingSpace& space, const std::string& word) {
  auto idx = space.find(word);
  if (!idx) throw ArgumentError("token not in embedding space: " + word);
  return space.vector(*idx);
}

// Per-token clamped cosines with the answer, in token order.
std::vector<double> token_cosines(const EmbeddingSpace& space, std::span<const std::string> tokens,
                                  std::span<const float> answer) {
  if (tokens.empty()) throw ArgumentError("opacity needs at least one clue token");
  std::vector<double> cos;
  cos.reserve(tokens.size());
  for (const auto& t : tokens) cos.push_back(clamped_cosine(answer, lookup(space, t)));
  return cos;
}

double independent_from_cosines(std::span<const double> cos, IndependentAggregation aggregation) {
  const auto [lo, hi] = std::minmax_element(cos.begin(), cos.end());
  const double n = static_cast<double>(cos.size());
  if (aggregation == IndependentAggregation::mean_cosine) {
    const double mean = std::accumulate(cos.begin(), cos.end(), 0.0) / n;
    // Rounding must not push the mean outside [min, max].
    return degrees_from_cosine(std::clamp(mean, *lo, *hi));
  }
  double sum = 0.0;
  for (double c : cos) sum += degrees_from_cosine(c);
  return std::clamp(sum / n, degrees_from_cosine(*hi), degrees_from_cosine(*lo));
}

std::optional<double> synergistic_from(const EmbeddingSpace& space, std::span<const std::string> tokens,
                                       std::span<const float> answer) {
  if (tokens.empty()) throw ArgumentError("opacity needs at least one clue token");
  std::vector<std::span<const float>> vecs;
  vecs.reserve(tokens.size());
  for (const auto& t : tokens) vecs.push_back(lookup(space, t));
  const VectorSum sum = vector_sum(vecs);
  if (sum.zero_norm) return std::nullopt;
  return degrees_from_cosine(clamped_cosine(answer, std::span<const double>(sum.values)));
}

}  // namespace

std::optional<double> synergistic_opacity(const EmbeddingSpace& space, std::span<const std::string> content_tokens,
                                          const std::string& answer) {
  return synergistic_from(space, content_tokens, lookup(space, answer));
}

double independent_opacity(const EmbeddingSpace& space, std::span<const std::string> content_tokens,
                           const std::string& answer, IndependentAggregation aggregation) {
  const auto cos = token_cosines(space, content_tokens, lookup(space, answer));
  return independent_from_cosines(cos, aggregation);
}

double keyword_opacity(const EmbeddingSpace& space, std::span<const std::string> content_tokens,
                       const std::string& answer) {
  const auto cos = token_cosines(space, content_tokens, lookup(space, answer));
  return degrees_from_cosine(*std::max_element(cos.begin(), cos.end()));
}

OpacityProfile opacity_profile(const EmbeddingSpace& space, std::span<const std::string> content_tokens,
                               const std::string& answer, IndependentAggregation aggregation) {
  const auto a = lookup(space, answer);
  const auto cos = token_cosines(space, content_tokens, a);
  OpacityProfile p;
  p.synergistic_deg = synergistic_from(space, content_tokens, a);
  p.independent_deg = independent_from_cosines(cos, aggregation);
  p.keyword_deg = degrees_from_cosine(*std::max_element(cos.begin(), cos.end()));
  return p;
}

const std::unordered_set<std::string>& default_conjunctions() {
  static const std::unordered_set<std::string> list{"and", "or", "but", "nor", "yet", "so"};
  return list;
}

QuestionFeatures question_features(const QuestionRecord& record, const FrequencyTable& table,
                                   const std::unordered_set<std::string>& conjunctions) {
  if (record.raw_tokens.empty()) throw ArgumentError("question_features: record has no raw tokens");
  QuestionFeatures f;
  f.q_length = static_cast<int>(record.raw_tokens.size());
  f.content_length = static_cast<int>(record.content_tokens.size());
  std::size_t conj = 0;
  std::optional<double> rarest;
  for (const auto& t : record.raw_tokens) {
    if (conjunctions.contains(t)) ++conj;
    if (auto fpm = table.per_million_folded(t)) {
      if (!rarest || *fpm < *rarest) rarest = fpm;
    }
  }
  if (rarest) f.min_q_word_freq = std::log10(*rarest);
  f.conjunction_freq = static_cast<double>(conj) / static_cast<double>(record.raw_tokens.size());
  return f;
}

std::vector<std::string> flag_names(std::uint32_t bits) {
  std::vector<std::string> out;
  if (bits & flags::undefined_opacity) out.emplace_back("undefined_opacity");
  if (bits & flags::undefined_density) out.emplace_back("undefined_density");
  if (bits & flags::missing_answer_frequency) out.emplace_back("missing_answer_frequency");
  if (bits & flags::missing_question_frequency) out.emplace_back("missing_question_frequency");
  return out;
}

std::uint32_t flag_from_name(const std::string& name) {
  if (name == "undefined_opacity") return flags::undefined_opacity;
  if (name == "undefined_density") return flags::undefined_density;
  if (name == "missing_answer_frequency") return flags::missing_answer_frequency;
  if (name == "missing_question_frequency") return flags::missing_question_frequency;
  throw FormatError("unknown flag '" + name + "'");
}

std::string_view to_string(DensityVocab v) {
  switch (v) {
    case DensityVocab::corpus: return "corpus";
    case DensityVocab::top100k: return "top100k";
    case DensityVocab::full: return "full";
  }
  return "unknown";
}

DensityVocab density_vocab_from_string(std::string_view name) {
  if (name == "corpus") return DensityVocab::corpus;
  if (name == "top100k") return DensityVocab::top100k;
  if (name == "full") return DensityVocab::full;
  throw ArgumentError("unknown density vocabulary '" + std::string(name) + "'");
}

std::vector<std::size_t> density_search_vocab(std::span<const QuestionRecord> records, const EmbeddingSpace& space,
                                              const FrequencyTable& table, const ScoreConfig& config) {
  std::vector<std::size_t> vocab;
  if (config.density_vocab == DensityVocab::full) {
    vocab.resize(space.size());
    std::iota(vocab.begin(), vocab.end(), std::size_t{0});
    return vocab;
  }
  for (const auto& r : records) {
    if (auto idx = space.find(r.answer)) vocab.push_back(*idx);
  }
  if (config.density_vocab == DensityVocab::top100k) {
    for (const auto& w : table.most_frequent(config.top_n)) {
      if (auto idx = space.find(w)) vocab.push_back(*idx);
    }
  }
  std::sort(vocab.begin(), vocab.end());
  vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());
  return vocab;
}

std::optional<std::unordered_set<std::string>> score_vocab_filter(std::span<const QuestionRecord> records,
                                                                  const FrequencyTable& table,
                                                                  const ScoreConfig& config) {
  if (config.density_vocab == DensityVocab::full) return std::nullopt;
  std::unordered_set<std::string> words;
  for (const auto& r : records) {
    words.insert(r.answer);
    words.insert(r.content_tokens.begin(), r.content_tokens.end());
  }
  if (config.density_vocab == DensityVocab::top100k) {
    for (auto& w : table.most_frequent(config.top_n)) words.insert(std::move(w));
  }
  return words;
}

namespace {

struct AnswerIndex {
  std::vector<std::size_t> distinct;                     // sorted space indices
  std::unordered_map<std::size_t, std::size_t> position;  // space index -> slot in distinct
};

AnswerIndex distinct_answers(std::span<const QuestionRecord> records, const EmbeddingSpace& space) {
  AnswerIndex ai;
  for (const auto& r : records) {
    auto idx = space.find(r.answer);
    if (!idx) throw ArgumentError("answer not in embedding space: " + r.answer);
    ai.distinct.push_back(*idx);
  }
  std::sort(ai.distinct.begin(), ai.distinct.end());
  ai.distinct.erase(std::unique(ai.distinct.begin(), ai.distinct.end()), ai.distinct.end());
  for (std::size_t i = 0; i < ai.distinct.size(); ++i) ai.position.emplace(ai.distinct[i], i);
  return ai;
}

ScoredRecord score_one(const QuestionRecord& r, const EmbeddingSpace& space, const FrequencyTable& table,
                       const ScoreConfig& config, const std::optional<Neighbor>& neighbor) {
  ScoredRecord s;
  s.id = r.id;
  s.source = r.source;
  s.difficulty = r.difficulty;
  s.is_pun = r.is_pun;
  s.answer = r.answer;
  s.opacity = opacity_profile(space, r.content_tokens, r.answer, config.aggregation);

  const QuestionFeatures q = question_features(r, table, config.conjunctions);
  FeatureVector& f = s.features;
  f.difficulty = r.difficulty;
  f.opacity = s.opacity.synergistic_deg;
  f.q_length = q.q_length;
  f.content_length = q.content_length;
  f.min_q_word_freq = q.min_q_word_freq;
  f.conjunction_freq = q.conjunction_freq;

  s.answer_fpm = table.per_million_folded(r.answer);
  if (s.answer_fpm) f.obscurity = obscurity_from_fpm(*s.answer_fpm);
  if (neighbor && neighbor->distance > 0.0) {
    f.answer_density = 1.0 / neighbor->distance;
    s.density_neighbor = space.word(neighbor->index);
  }

  if (!s.opacity.synergistic_deg) s.flags |= flags::undefined_opacity;
  if (!f.answer_density) s.flags |= flags::undefined_density;
  if (!s.answer_fpm) s.flags |= flags::missing_answer_frequency;
  if (!f.min_q_word_freq) s.flags |= flags::missing_question_frequency;
  return s;
}

void check_records(std::span<const QuestionRecord> records, const EmbeddingSpace& space) {
  for (const auto& r : records) {
    if (r.raw_tokens.empty() || r.content_tokens.empty()) {
      throw ArgumentError("record " + std::to_string(r.id) + " has no clue tokens");
    }
    for (const auto& t : r.content_tokens) {
      if (!space.contains(t)) throw ArgumentError("record " + std::to_string(r.id) + ": '" + t + "' not in space");
    }
  }
}

}  // namespace

std::vector<ScoredRecord> score_corpus(std::span<const QuestionRecord> records, const EmbeddingSpace& space,
                                       const FrequencyTable& table, const ScoreConfig& config) {
  check_records(records, space);
  const AnswerIndex answers = distinct_answers(records, space);
  const NeighborSearch search(space, density_search_vocab(records, space, table, config), config.density);
  const auto neighbors = search.nearest(answers.distinct, config.threads);

  std::vector<ScoredRecord> out(records.size());
  const int threads = config.threads > 0 ? config.threads : omp_get_max_threads();
  const auto n = static_cast<std::ptrdiff_t>(records.size());
#pragma omp parallel for schedule(dynamic, 512) num_threads(threads)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& r = records[static_cast<std::size_t>(i)];
    const std::size_t slot = answers.position.at(*space.find(r.answer));
    out[static_cast<std::size_t>(i)] = score_one(r, space, table, config, neighbors[slot]);
  }
  return out;
}

namespace serial {

std::vector<ScoredRecord> score_corpus(std::span<const QuestionRecord> records, const EmbeddingSpace& space,
                                       const FrequencyTable& table, const ScoreConfig& config) {
  check_records(records, space);
  const auto vocab = density_search_vocab(records, space, table, config);
  std::unordered_map<std::size_t, std::optional<Neighbor>> cache;
  std::vector<ScoredRecord> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    const std::size_t a = *space.find(r.answer);
    auto it = cache.find(a);
    if (it == cache.end()) it = cache.emplace(a, nearest_non_stem(space, vocab, a, config.density)).first;
    out.push_back(score_one(r, space, table, config, it->second));
  }
  return out;
}

}  // namespace serial

}  // namespace qdiff
