#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qdiff/metrics.hpp"

namespace qdiff {

enum class Predictor { obscurity, opacity, answer_density, q_length, min_q_word_freq, conjunction_freq };
std::string_view to_string(Predictor p);
Predictor predictor_from_string(std::string_view name);

std::optional<double> predictor_value(const FeatureVector& row, Predictor p);

struct ModelSpec {
  std::string name;
  std::vector<Predictor> predictors;  // intercept is implicit
};

// Models I..IV: obscurity; + opacity; + answer_density; + q_length,
// min_q_word_freq, conjunction_freq.
const std::vector<ModelSpec>& model_suite();

// (x - mean) / population sd. Throws ArgumentError (mentioning `name`) for
// n < 2 or zero variance.
std::vector<double> standardize(std::span<const double> values, std::string_view name = "values");

struct Coefficient {
  std::string name;
  double estimate = 0.0;
  double se = 0.0;
  double t = 0.0;
  double p = 1.0;
};

struct RegressionFit {
  std::string model;
  std::size_t n = 0;
  std::size_t dropped = 0;  // rows with an undefined predictor
  Coefficient intercept;
  std::vector<Coefficient> coefficients;  // in predictor order
  double rss = 0.0;
  double r2 = 0.0;
  double aic = 0.0;
};

// Gaussian log-likelihood AIC with k slope terms (intercept and variance also
// counted): n (ln(2 pi rss / n) + 1) + 2 (k + 2).
double gaussian_aic(double rss, std::size_t n, std::size_t k);

// "***" p <= 1e-4, "**" p <= 0.01, "*" p <= 0.05, else "".
std::string stars(double p);

// Least squares of y on [1, columns...] by column-pivoted Householder QR.
// Throws ArgumentError when n <= k + 1, on length mismatch, or when the
// design is rank deficient (the message names the dependent columns).
RegressionFit fit_ols(std::span<const double> y, std::span<const std::vector<double>> columns,
                      std::span<const std::string> names);

// Listwise deletion over the spec's predictors, then standardize the
// response (difficulty) and every predictor on the kept rows and fit.
RegressionFit fit_model(std::span<const FeatureVector> rows, const ModelSpec& spec);

enum class RowPolicy {
  per_model,  // each model keeps every row where its own predictors exist
  common,     // all models use the rows where every suite predictor exists
};

std::vector<RegressionFit> run_model_suite(std::span<const FeatureVector> rows, RowPolicy policy = RowPolicy::per_model);

}  // namespace qdiff
