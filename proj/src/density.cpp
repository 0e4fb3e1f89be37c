#include "qdiff/density.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <omp.h>

#include "qdiff/error.hpp"

namespace qdiff {

double letter_overlap(std::string_view a, std::string_view b, OverlapMeasure measure) {
  const std::size_t denom = measure == OverlapMeasure::shorter_word ? std::min(a.size(), b.size())
                                                                     : std::max(a.size(), b.size());
  if (denom == 0) return 0.0;
  std::array<int, 256> counts{};
  auto fold = [](char c) {
    auto u = static_cast<unsigned char>(c);
    return (u >= 'A' && u <= 'Z') ? static_cast<unsigned char>(u - 'A' + 'a') : u;
  };
  for (char c : a) ++counts[fold(c)];
  std::size_t shared = 0;
  for (char c : b) {
    int& slot = counts[fold(c)];
    if (slot > 0) {
      --slot;
      ++shared;
    }
  }
  return static_cast<double>(shared) / static_cast<double>(denom);
}

namespace {

constexpr std::size_t answer_batch = 32;
constexpr std::size_t candidate_block = 2048;

bool is_stem(const EmbeddingSpace& space, std::size_t answer, std::size_t candidate, const DensityOptions& o) {
  return letter_overlap(space.word(answer), space.word(candidate), o.measure) >= o.overlap_threshold;
}

// True when (distance, word) of a sorts before b.
bool closer(const EmbeddingSpace& space, const Neighbor& a, const Neighbor& b) {
  if (a.distance != b.distance) return a.distance < b.distance;
  return space.word(a.index) < space.word(b.index);
}

std::vector<std::size_t> sorted_unique(std::vector<std::size_t> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

NeighborSearch::NeighborSearch(const EmbeddingSpace& space, std::vector<std::size_t> vocab, DensityOptions options)
    : space_(space), vocab_(sorted_unique(std::move(vocab))), options_(options) {
  const std::size_t dim = space_.dimension();
  packed_.resize(vocab_.size() * dim);
  norms_.resize(vocab_.size());
  for (std::size_t j = 0; j < vocab_.size(); ++j) {
    if (vocab_[j] >= space_.size()) throw ArgumentError("search vocabulary index out of range");
    auto v = space_.vector(vocab_[j]);
    std::copy(v.begin(), v.end(), packed_.begin() + static_cast<std::ptrdiff_t>(j * dim));
    norms_[j] = std::sqrt(space_.squared_norm(vocab_[j]));
  }
}

std::vector<std::optional<Neighbor>> NeighborSearch::nearest(std::span<const std::size_t> answers, int threads) const {
  for (std::size_t a : answers) {
    if (a >= space_.size()) throw ArgumentError("answer index out of range");
  }
  std::vector<std::optional<Neighbor>> out(answers.size());
  const std::size_t batches = (answers.size() + answer_batch - 1) / answer_batch;
  const int nthreads = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(nthreads)
  for (std::ptrdiff_t bi = 0; bi < static_cast<std::ptrdiff_t>(batches); ++bi) {
    const std::size_t start = static_cast<std::size_t>(bi) * answer_batch;
    const std::size_t len = std::min(answer_batch, answers.size() - start);
    nearest_batch(answers.subspan(start, len), std::span(out).subspan(start, len));
  }
  return out;
}

void NeighborSearch::nearest_batch(std::span<const std::size_t> answers,
                                   std::span<std::optional<Neighbor>> out) const {
  using MatrixXf = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic>;
  const std::size_t dim = space_.dimension();
  const std::size_t nb = answers.size();
  const auto edim = static_cast<Eigen::Index>(dim);

  MatrixXf A(edim, static_cast<Eigen::Index>(nb));
  std::vector<double> a_sq(nb);
  std::vector<double> a_norm(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    auto v = space_.vector(answers[b]);
    for (std::size_t i = 0; i < dim; ++i) A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(b)) = v[i];
    a_sq[b] = space_.squared_norm(answers[b]);
    a_norm[b] = std::sqrt(a_sq[b]);
  }

  // |fl(a.c) - a.c| <= gamma_n |a||c| for any summation order in float;
  // doubled, plus a relative allowance for the double-precision terms.
  const double u = std::ldexp(1.0, -24);
  const double nu = static_cast<double>(dim) * u;
  const double gamma = nu / (1.0 - nu);
  const double dot_slack = 2.0 * 2.0 * gamma;
  const double sq_slack = 1e-12;

  struct Pending {
    double lower;
    std::size_t pos;
  };
  std::vector<double> upper(nb, std::numeric_limits<double>::infinity());
  std::vector<std::vector<Pending>> pending(nb);
  std::vector<std::pair<double, std::size_t>> collected;
  MatrixXf G;

  for (std::size_t start = 0; start < vocab_.size(); start += candidate_block) {
    const std::size_t mb = std::min(candidate_block, vocab_.size() - start);
    Eigen::Map<const MatrixXf> V(packed_.data() + start * dim, edim, static_cast<Eigen::Index>(mb));
    G.noalias() = V.transpose() * A;

    for (std::size_t b = 0; b < nb; ++b) {
      const float* g = G.col(static_cast<Eigen::Index>(b)).data();
      double& U = upper[b];
      collected.clear();
      for (std::size_t j = 0; j < mb; ++j) {
        const std::size_t pos = start + j;
        const double c_norm = norms_[pos];
        const double approx = a_sq[b] + c_norm * c_norm - 2.0 * static_cast<double>(g[j]);
        const double margin = dot_slack * a_norm[b] * c_norm + sq_slack * (a_sq[b] + c_norm * c_norm);
        if (approx - margin <= U) collected.emplace_back(approx, pos);
      }
      std::sort(collected.begin(), collected.end());
      for (const auto& [approx, pos] : collected) {
        const double c_norm = norms_[pos];
        const double margin = dot_slack * a_norm[b] * c_norm + sq_slack * (a_sq[b] + c_norm * c_norm);
        if (approx - margin > U) continue;
        const std::size_t cand = vocab_[pos];
        if (cand == answers[b] || is_stem(space_, answers[b], cand, options_)) continue;
        U = std::min(U, approx + margin);
        pending[b].push_back({approx - margin, pos});
      }
    }
  }

  for (std::size_t b = 0; b < nb; ++b) {
    std::optional<Neighbor> best;
    auto a = space_.vector(answers[b]);
    for (const auto& p : pending[b]) {
      if (p.lower > upper[b]) continue;
      const std::size_t cand = vocab_[p.pos];
      Neighbor n{cand, euclidean_distance(a, space_.vector(cand))};
      if (!best || closer(space_, n, *best)) best = n;
    }
    out[b] = best;
  }
}

namespace serial {

std::optional<Neighbor> nearest_non_stem(const EmbeddingSpace& space, std::span<const std::size_t> vocab,
                                         std::size_t answer, const DensityOptions& options) {
  std::optional<Neighbor> best;
  auto a = space.vector(answer);
  for (std::size_t cand : vocab) {
    if (cand == answer || is_stem(space, answer, cand, options)) continue;
    Neighbor n{cand, euclidean_distance(a, space.vector(cand))};
    if (!best || closer(space, n, *best)) best = n;
  }
  return best;
}

}  // namespace serial

std::optional<double> answer_density(const EmbeddingSpace& space, const std::string& answer,
                                     std::span<const std::string> search_vocab, const DensityOptions& options) {
  auto a = space.find(answer);
  if (!a) throw ArgumentError("answer not in embedding space: " + answer);
  std::vector<std::size_t> vocab;
  vocab.reserve(search_vocab.size());
  for (const auto& w : search_vocab) {
    if (auto idx = space.find(w)) vocab.push_back(*idx);
  }
  NeighborSearch search(space, std::move(vocab), options);
  const std::size_t answers[] = {*a};
  auto n = search.nearest(answers, 1).front();
  if (!n || !(n->distance > 0.0)) return std::nullopt;
  return 1.0 / n->distance;
}

}  // namespace qdiff
