// Serial reference vs OpenMP kernels on synthetic data.
//   bench_kernels [--words N] [--dim D] [--records R] [--threads T]
// Each kernel is timed once per implementation and the outputs are compared.

#include <chrono>
#include <cstdio>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include <omp.h>

#include "CLI11.hpp"
#include "qdiff/analysis.hpp"
#include "qdiff/density.hpp"
#include "qdiff/kde.hpp"
#include "qdiff/lexicon.hpp"
#include "qdiff/metrics.hpp"
#include "qdiff/stats.hpp"

using namespace qdiff;
using Clock = std::chrono::steady_clock;

namespace {

template <class F>
double timed(F&& f) {
  const auto t0 = Clock::now();
  f();
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void row(const char* kernel, double serial_s, double parallel_s, bool same) {
  std::printf("%-14s %10.3f %10.3f %8.2fx  %s\n", kernel, serial_s, parallel_s, serial_s / parallel_s,
              same ? "identical" : "DIFFERENT");
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t words = 20000;
  std::size_t dim = 300;
  std::size_t records = 20000;
  int threads = 0;
  CLI::App app{"serial vs parallel kernel timings"};
  app.add_option("--words", words, "embedding vocabulary size");
  app.add_option("--dim", dim, "vector dimension");
  app.add_option("--records", records, "question records");
  app.add_option("--threads", threads, "OpenMP threads, 0 for the runtime default");
  CLI11_PARSE(app, argc, argv);
  const int used = threads > 0 ? threads : omp_get_max_threads();

  std::mt19937_64 g(42);
  std::normal_distribution<float> normal(0.0f, 1.0f);
  EmbeddingSpaceBuilder b(dim);
  b.reserve(words);
  std::unordered_map<std::string, double> fpm;
  std::vector<float> v(dim);
  for (std::size_t i = 0; i < words; ++i) {
    for (auto& x : v) x = normal(g);
    std::string w = "w" + std::to_string(i);
    fpm.emplace(w, 1e4 / static_cast<double>(i + 1));
    b.add(std::move(w), v);
  }
  const auto space = std::move(b).build();
  const FrequencyTable table(std::move(fpm), "bench");

  std::uniform_int_distribution<std::size_t> pick(0, words - 1);
  std::vector<QuestionRecord> recs(records);
  for (std::size_t i = 0; i < records; ++i) {
    auto& r = recs[i];
    r.id = i;
    r.difficulty = 1 + static_cast<int>(i % 6);
    for (std::size_t t = 0, k = 1 + g() % 5; t < k; ++t) r.content_tokens.push_back(space.word(pick(g)));
    r.raw_tokens = r.content_tokens;
    r.answer = space.word(pick(g));
  }

  std::printf("%zu words x %zu dims, %zu records, %d thread(s)\n", words, dim, records, used);
  std::printf("%-14s %10s %10s %9s\n", "kernel", "serial s", "omp s", "speedup");

  {
    std::vector<std::size_t> vocab(words);
    for (std::size_t i = 0; i < words; ++i) vocab[i] = i;
    std::vector<std::size_t> answers;
    for (std::size_t i = 0; i < std::min<std::size_t>(records, 2000); ++i) answers.push_back(*space.find(recs[i].answer));
    const NeighborSearch search(space, vocab);
    std::vector<std::optional<Neighbor>> a, p;
    const double ts = timed([&] {
      for (auto ans : answers) a.push_back(serial::nearest_non_stem(space, vocab, ans));
    });
    const double tp = timed([&] { p = search.nearest(answers, threads); });
    bool same = a.size() == p.size();
    for (std::size_t i = 0; same && i < a.size(); ++i) {
      same = a[i].has_value() == p[i].has_value() && (!a[i] || (a[i]->index == p[i]->index && a[i]->distance == p[i]->distance));
    }
    row("density", ts, tp, same);
  }
  {
    ScoreConfig cfg;
    cfg.threads = threads;
    std::vector<ScoredRecord> a, p;
    const double ts = timed([&] { a = serial::score_corpus(recs, space, table, cfg); });
    const double tp = timed([&] { p = score_corpus(recs, space, table, cfg); });
    bool same = a.size() == p.size();
    for (std::size_t i = 0; same && i < a.size(); ++i) {
      same = a[i].opacity.synergistic_deg == p[i].opacity.synergistic_deg &&
             a[i].opacity.independent_deg == p[i].opacity.independent_deg &&
             a[i].features.answer_density == p[i].features.answer_density;
    }
    row("score", ts, tp, same);
  }
  {
    std::vector<double> values(records);
    for (auto& x : values) x = normal(g);
    double a = 0, p = 0;
    const double ts = timed([&] { a = serial::bootstrap_se(values, 1000, 7); });
    const double tp = timed([&] { p = bootstrap_se(values, 1000, 7, threads); });
    row("bootstrap", ts, tp, a == p);
  }
  {
    NullModelResult a, p;
    const double ts = timed([&] { a = serial::null_model_mean(recs, space, OpacityModel::synergistic, 7, 10); });
    const double tp = timed([&] {
      p = null_model_mean(recs, space, OpacityModel::synergistic, 7, 10, IndependentAggregation::mean_cosine, threads);
    });
    row("null model", ts, tp, a.pooled_angles == p.pooled_angles);
  }
  {
    std::vector<Point2> pts(records);
    for (auto& q : pts) q = {60.0 + 10.0 * normal(g), 1.0 + normal(g)};
    KdeGrid a, p;
    const double ts = timed([&] { a = serial::kde_2d(pts); });
    const double tp = timed([&] { p = kde_2d(pts, {}, threads); });
    row("kde", ts, tp, a.density == p.density);
  }
  return 0;
}
