#include "qdiff/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>
#include <omp.h>

#include "qdiff/error.hpp"

namespace qdiff {

double mean(std::span<const double> x) {
  if (x.empty()) throw ArgumentError("mean of empty sample");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x) {
  if (x.size() < 2) throw ArgumentError("variance needs at least two values");
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size() - 1);
}

double median(std::span<const double> x) {
  if (x.empty()) throw ArgumentError("median of empty sample");
  std::vector<double> v(x.begin(), x.end());
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double quantile(std::span<const double> x, double p) {
  if (x.empty()) throw ArgumentError("quantile of empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError("quantile level outside [0, 1]");
  std::vector<double> v(x.begin(), x.end());
  std::sort(v.begin(), v.end());
  const double h = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double student_t_two_sided_p(double t, double df) {
  if (std::isnan(t)) return 1.0;
  if (std::isinf(t)) return 0.0;
  boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
}

TTestResult t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw ArgumentError("t_test needs at least two values per sample");
  TTestResult r;
  r.n_a = a.size();
  r.n_b = b.size();
  const double ma = mean(a);
  const double mb = mean(b);
  const double va = sample_variance(a) / static_cast<double>(a.size());
  const double vb = sample_variance(b) / static_cast<double>(b.size());
  const double se2 = va + vb;
  if (se2 == 0.0) {
    r.df = static_cast<double>(a.size() + b.size() - 2);
    if (ma == mb) {
      r.t = 0.0;
      r.p = 1.0;
    } else {
      r.t = ma > mb ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
      r.p = 0.0;
    }
    return r;
  }
  r.t = (ma - mb) / std::sqrt(se2);
  r.df = se2 * se2 /
         (va * va / static_cast<double>(a.size() - 1) + vb * vb / static_cast<double>(b.size() - 1));
  r.p = student_t_two_sided_p(r.t, r.df);
  return r;
}

Correlation pearson_r(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ArgumentError("pearson_r: length mismatch");
  if (x.size() < 3) throw ArgumentError("pearson_r needs at least three pairs");
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw ArgumentError("pearson_r: zero variance");
  Correlation c;
  c.n = x.size();
  c.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double df = static_cast<double>(c.n - 2);
  if (std::fabs(c.r) == 1.0) {
    c.p = 0.0;
  } else {
    c.p = student_t_two_sided_p(c.r * std::sqrt(df / (1.0 - c.r * c.r)), df);
  }
  return c;
}

std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

namespace {

double resample_mean(std::span<const double> values, std::uint64_t seed, std::uint64_t rep) {
  auto rng = seeded_engine(seed, rep);
  std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) sum += values[pick(rng)];
  return sum / static_cast<double>(values.size());
}

double spread(std::span<const double> means) {
  if (means.size() < 2) return 0.0;
  return std::sqrt(sample_variance(means));
}

}  // namespace

double bootstrap_se(std::span<const double> values, std::size_t repetitions, std::uint64_t seed, int threads) {
  if (values.empty()) throw ArgumentError("bootstrap_se of empty sample");
  if (repetitions == 0) throw ArgumentError("bootstrap_se needs at least one repetition");
  std::vector<double> means(repetitions);
  const int nthreads = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(nthreads)
  for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(repetitions); ++r) {
    means[static_cast<std::size_t>(r)] = resample_mean(values, seed, static_cast<std::uint64_t>(r));
  }
  return spread(means);
}

namespace serial {

double bootstrap_se(std::span<const double> values, std::size_t repetitions, std::uint64_t seed) {
  if (values.empty()) throw ArgumentError("bootstrap_se of empty sample");
  if (repetitions == 0) throw ArgumentError("bootstrap_se needs at least one repetition");
  std::vector<double> means;
  means.reserve(repetitions);
  for (std::size_t r = 0; r < repetitions; ++r) means.push_back(resample_mean(values, seed, r));
  return spread(means);
}

}  // namespace serial

}  // namespace qdiff
