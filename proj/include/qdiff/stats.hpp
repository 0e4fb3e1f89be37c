#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace qdiff {

double mean(std::span<const double> x);
// Sample variance (n - 1 denominator).
double sample_variance(std::span<const double> x);
// Exact median; mean of the two middle values for even n. Throws on empty input.
double median(std::span<const double> x);
// Linear-interpolation quantile (R type 7), p in [0, 1].
double quantile(std::span<const double> x, double p);

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;  // two-sided
  std::size_t n_a = 0;
  std::size_t n_b = 0;
};

// Welch's unequal-variance two-sample t-test. Throws ArgumentError when a
// sample has fewer than 2 values. Both variances zero: p = 1 for equal means,
// p = 0 otherwise.
TTestResult t_test(std::span<const double> a, std::span<const double> b);

struct Correlation {
  double r = 0.0;
  double p = 1.0;  // two-sided, via t = r sqrt((n-2)/(1-r^2))
  std::size_t n = 0;
};

// Throws ArgumentError on length mismatch, n < 3 or zero variance.
Correlation pearson_r(std::span<const double> x, std::span<const double> y);

// Two-sided p of a t statistic with df degrees of freedom.
double student_t_two_sided_p(double t, double df);

// Deterministic engine for stream `stream` of a master seed.
std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t stream);

// Standard deviation (n - 1) of `repetitions` resample means; resamples draw
// n values with replacement. Repetition r uses seeded_engine(seed, r), so the
// result is independent of the thread count.
double bootstrap_se(std::span<const double> values, std::size_t repetitions = 1000, std::uint64_t seed = 0,
                    int threads = 1);

namespace serial {
double bootstrap_se(std::span<const double> values, std::size_t repetitions = 1000, std::uint64_t seed = 0);
}  // namespace serial

}  // namespace qdiff
