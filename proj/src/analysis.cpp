#include "qdiff/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <omp.h>

#include "qdiff/digest.hpp"
#include "qdiff/error.hpp"
#include "qdiff/stats.hpp"

namespace qdiff {

std::string_view to_string(OpacityModel m) {
  switch (m) {
    case OpacityModel::synergistic: return "synergistic";
    case OpacityModel::independent: return "independent";
    case OpacityModel::keyword: return "keyword";
  }
  return "unknown";
}

std::optional<double> model_angle(const ScoredRecord& r, OpacityModel m) {
  switch (m) {
    case OpacityModel::synergistic: return r.opacity.synergistic_deg;
    case OpacityModel::independent: return r.opacity.independent_deg;
    case OpacityModel::keyword: return r.opacity.keyword_deg;
  }
  return std::nullopt;
}

std::vector<double> model_angles(std::span<const ScoredRecord> records, OpacityModel m,
                                 const std::function<bool(const ScoredRecord&)>& select) {
  std::vector<double> out;
  for (const auto& r : records) {
    if (select && !select(r)) continue;
    if (auto a = model_angle(r, m)) out.push_back(*a);
  }
  return out;
}

// ---- null model ----------------------------------------------------------

namespace {

struct ResolvedRecord {
  std::vector<std::size_t> tokens;
  std::size_t answer = 0;
  std::vector<double> clue_sum;
  bool zero_sum = false;
};

std::vector<ResolvedRecord> resolve_all(std::span<const QuestionRecord> records, const EmbeddingSpace& space) {
  std::vector<ResolvedRecord> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    ResolvedRecord rr;
    auto a = space.find(r.answer);
    if (!a) throw ArgumentError("answer not in embedding space: " + r.answer);
    rr.answer = *a;
    std::vector<std::span<const float>> vecs;
    for (const auto& t : r.content_tokens) {
      auto idx = space.find(t);
      if (!idx) throw ArgumentError("token not in embedding space: " + t);
      rr.tokens.push_back(*idx);
      vecs.push_back(space.vector(*idx));
    }
    if (vecs.empty()) throw ArgumentError("record " + std::to_string(r.id) + " has no clue tokens");
    auto sum = vector_sum(vecs);
    rr.clue_sum = std::move(sum.values);
    rr.zero_sum = sum.zero_norm;
    out.push_back(std::move(rr));
  }
  return out;
}

std::optional<double> angle_for(const ResolvedRecord& clue, std::size_t answer, const EmbeddingSpace& space,
                                OpacityModel model, IndependentAggregation aggregation) {
  const auto a = space.vector(answer);
  if (model == OpacityModel::synergistic) {
    if (clue.zero_sum) return std::nullopt;
    return degrees_from_cosine(clamped_cosine(a, std::span<const double>(clue.clue_sum)));
  }
  std::vector<double> cos;
  cos.reserve(clue.tokens.size());
  for (std::size_t t : clue.tokens) cos.push_back(clamped_cosine(a, space.vector(t)));
  const auto [lo, hi] = std::minmax_element(cos.begin(), cos.end());
  if (model == OpacityModel::keyword) return degrees_from_cosine(*hi);
  const double n = static_cast<double>(cos.size());
  if (aggregation == IndependentAggregation::mean_cosine) {
    return degrees_from_cosine(std::clamp(std::accumulate(cos.begin(), cos.end(), 0.0) / n, *lo, *hi));
  }
  double sum = 0.0;
  for (double c : cos) sum += degrees_from_cosine(c);
  return std::clamp(sum / n, degrees_from_cosine(*hi), degrees_from_cosine(*lo));
}

std::vector<double> null_repetition(const std::vector<ResolvedRecord>& resolved, const EmbeddingSpace& space,
                                    OpacityModel model, IndependentAggregation aggregation, std::uint64_t seed,
                                    std::uint64_t rep) {
  std::vector<std::size_t> perm(resolved.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  auto rng = seeded_engine(seed, rep);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<double> angles;
  angles.reserve(resolved.size());
  for (std::size_t i = 0; i < resolved.size(); ++i) {
    if (auto a = angle_for(resolved[i], resolved[perm[i]].answer, space, model, aggregation)) angles.push_back(*a);
  }
  return angles;
}

void check_null_args(std::span<const QuestionRecord> records, std::size_t repetitions) {
  if (records.size() < 2) throw ArgumentError("null model needs at least two records");
  if (repetitions < 1) throw ArgumentError("null model needs at least one repetition");
}

NullModelResult finish_null(OpacityModel model, std::vector<std::vector<double>> reps) {
  NullModelResult out;
  out.model = model;
  out.repetitions = reps.size();
  for (auto& angles : reps) {
    if (angles.empty()) throw DataError("null model: no record has a defined angle");
    out.repetition_means.push_back(mean(angles));
    out.pooled_angles.insert(out.pooled_angles.end(), angles.begin(), angles.end());
  }
  out.mean = mean(out.repetition_means);
  out.spread = out.repetition_means.size() > 1 ? std::sqrt(sample_variance(out.repetition_means)) : 0.0;
  return out;
}

}  // namespace

NullModelResult null_model_mean(std::span<const QuestionRecord> records, const EmbeddingSpace& space,
                                OpacityModel model, std::uint64_t seed, std::size_t repetitions,
                                IndependentAggregation aggregation, int threads) {
  check_null_args(records, repetitions);
  const auto resolved = resolve_all(records, space);
  std::vector<std::vector<double>> reps(repetitions);
  const int nthreads = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(nthreads)
  for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(repetitions); ++r) {
    reps[static_cast<std::size_t>(r)] =
        null_repetition(resolved, space, model, aggregation, seed, static_cast<std::uint64_t>(r));
  }
  return finish_null(model, std::move(reps));
}

namespace serial {

NullModelResult null_model_mean(std::span<const QuestionRecord> records, const EmbeddingSpace& space,
                                OpacityModel model, std::uint64_t seed, std::size_t repetitions,
                                IndependentAggregation aggregation) {
  check_null_args(records, repetitions);
  const auto resolved = resolve_all(records, space);
  std::vector<std::vector<double>> reps;
  for (std::size_t r = 0; r < repetitions; ++r) reps.push_back(null_repetition(resolved, space, model, aggregation, seed, r));
  return finish_null(model, std::move(reps));
}

}  // namespace serial

// ---- grouping ------------------------------------------------------------

std::string GroupSummary::key() const {
  std::string k;
  auto add = [&k](const std::string& part) {
    if (!k.empty()) k += ",";
    k += part;
  };
  if (difficulty) add("difficulty=" + std::to_string(*difficulty));
  if (is_pun) add(std::string("pun=") + (*is_pun ? "true" : "false"));
  if (frequency_bin) add("frequency_bin=" + std::to_string(*frequency_bin));
  return k.empty() ? "all" : k;
}

std::array<double, 3> frequency_quartiles(std::span<const ScoredRecord> records) {
  std::vector<double> logs;
  for (const auto& r : records) {
    if (r.answer_fpm) logs.push_back(std::log10(*r.answer_fpm));
  }
  if (logs.empty()) throw ArgumentError("no record has an answer frequency");
  return {quantile(logs, 0.25), quantile(logs, 0.5), quantile(logs, 0.75)};
}

int frequency_bin(double log10_fpm, const std::array<double, 3>& cuts) {
  int bin = 1;
  for (double c : cuts) {
    if (log10_fpm > c) ++bin;
  }
  return bin;
}

namespace {

std::uint64_t stream_seed(std::uint64_t seed, const std::string& label) {
  Digest d;
  d.update(label);
  return seed ^ d.value();
}

ModelStats model_stats(const std::vector<double>& angles, std::uint64_t seed, std::size_t reps, int threads) {
  ModelStats s;
  s.n = angles.size();
  if (angles.empty()) return s;
  s.mean = mean(angles);
  s.se = bootstrap_se(angles, reps, seed, threads);
  return s;
}

}  // namespace

GroupSummary summarize(std::span<const ScoredRecord> records, const std::function<bool(const ScoredRecord&)>& select,
                       std::uint64_t seed, std::size_t bootstrap_repetitions, int threads) {
  GroupSummary g;
  std::vector<double> fpm;
  for (const auto& r : records) {
    if (select && !select(r)) continue;
    ++g.n;
    if (r.answer_fpm) fpm.push_back(*r.answer_fpm);
  }
  if (g.n == 0) return g;
  if (!fpm.empty()) g.median_fpm = median(fpm);
  g.synergistic = model_stats(model_angles(records, OpacityModel::synergistic, select),
                              stream_seed(seed, "synergistic"), bootstrap_repetitions, threads);
  g.independent = model_stats(model_angles(records, OpacityModel::independent, select),
                              stream_seed(seed, "independent"), bootstrap_repetitions, threads);
  g.keyword = model_stats(model_angles(records, OpacityModel::keyword, select), stream_seed(seed, "keyword"),
                          bootstrap_repetitions, threads);
  return g;
}

GroupReport group_means(std::span<const ScoredRecord> records, Grouping grouping, std::uint64_t seed,
                        std::size_t bootstrap_repetitions, int threads) {
  if (records.empty()) throw ArgumentError("group_means on an empty corpus");
  std::set<int> difficulties;
  for (const auto& r : records) difficulties.insert(r.difficulty);

  std::vector<GroupSummary> candidates;
  auto candidate = [&](std::optional<int> d, std::optional<bool> pun, std::optional<int> bin) {
    GroupSummary g;
    g.difficulty = d;
    g.is_pun = pun;
    g.frequency_bin = bin;
    candidates.push_back(g);
  };
  std::optional<std::array<double, 3>> cuts;
  switch (grouping) {
    case Grouping::difficulty:
      for (int d : difficulties) candidate(d, std::nullopt, std::nullopt);
      break;
    case Grouping::pun_flag:
      candidate(std::nullopt, false, std::nullopt);
      candidate(std::nullopt, true, std::nullopt);
      break;
    case Grouping::frequency_bin_by_difficulty:
      cuts = frequency_quartiles(records);
      for (int bin = 1; bin <= 4; ++bin) {
        for (int d : difficulties) candidate(d, std::nullopt, bin);
      }
      break;
  }

  GroupReport report;
  for (const auto& g : candidates) {
    auto select = [&](const ScoredRecord& r) {
      if (g.difficulty && r.difficulty != *g.difficulty) return false;
      if (g.is_pun && r.is_pun != *g.is_pun) return false;
      if (g.frequency_bin) {
        if (!r.answer_fpm || frequency_bin(std::log10(*r.answer_fpm), *cuts) != *g.frequency_bin) return false;
      }
      return true;
    };
    GroupSummary filled = summarize(records, select, stream_seed(seed, g.key()), bootstrap_repetitions, threads);
    if (filled.n == 0) {
      report.warnings.push_back("empty group omitted: " + g.key());
      continue;
    }
    filled.difficulty = g.difficulty;
    filled.is_pun = g.is_pun;
    filled.frequency_bin = g.frequency_bin;
    report.groups.push_back(std::move(filled));
  }
  return report;
}

double median_frequency(std::span<const ScoredRecord> records,
                        const std::function<bool(const ScoredRecord&)>& select) {
  std::vector<double> fpm;
  for (const auto& r : records) {
    if (select && !select(r)) continue;
    if (r.answer_fpm) fpm.push_back(*r.answer_fpm);
  }
  if (fpm.empty()) throw ArgumentError("median_frequency: empty subset");
  return median(fpm);
}

}  // namespace qdiff
