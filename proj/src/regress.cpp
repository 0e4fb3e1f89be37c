#include "qdiff/regress.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include <Eigen/Dense>

#include "qdiff/error.hpp"
#include "qdiff/stats.hpp"

namespace qdiff {

namespace {

constexpr std::pair<Predictor, std::string_view> predictor_names[] = {
    {Predictor::obscurity, "obscurity"},
    {Predictor::opacity, "opacity"},
    {Predictor::answer_density, "answer_density"},
    {Predictor::q_length, "q_length"},
    {Predictor::min_q_word_freq, "min_q_word_freq"},
    {Predictor::conjunction_freq, "conjunction_freq"},
};

}  // namespace

std::string_view to_string(Predictor p) {
  for (const auto& [value, name] : predictor_names) {
    if (value == p) return name;
  }
  return "unknown";
}

Predictor predictor_from_string(std::string_view name) {
  for (const auto& [value, n] : predictor_names) {
    if (n == name) return value;
  }
  throw ArgumentError("unknown predictor: " + std::string(name));
}

std::optional<double> predictor_value(const FeatureVector& row, Predictor p) {
  switch (p) {
    case Predictor::obscurity: return row.obscurity;
    case Predictor::opacity: return row.opacity;
    case Predictor::answer_density: return row.answer_density;
    case Predictor::q_length: return static_cast<double>(row.q_length);
    case Predictor::min_q_word_freq: return row.min_q_word_freq;
    case Predictor::conjunction_freq: return row.conjunction_freq;
  }
  return std::nullopt;
}

const std::vector<ModelSpec>& model_suite() {
  static const std::vector<ModelSpec> suite = {
      {"I", {Predictor::obscurity}},
      {"II", {Predictor::obscurity, Predictor::opacity}},
      {"III", {Predictor::obscurity, Predictor::opacity, Predictor::answer_density}},
      {"IV",
       {Predictor::obscurity, Predictor::opacity, Predictor::answer_density, Predictor::q_length,
        Predictor::min_q_word_freq, Predictor::conjunction_freq}},
  };
  return suite;
}

std::vector<double> standardize(std::span<const double> values, std::string_view name) {
  if (values.size() < 2) throw ArgumentError("cannot standardize " + std::string(name) + ": fewer than two values");
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  const double sd = std::sqrt(ss / static_cast<double>(values.size()));
  if (!(sd > 0.0)) throw ArgumentError("cannot standardize " + std::string(name) + ": zero variance");
  std::vector<double> z;
  z.reserve(values.size());
  for (double v : values) z.push_back((v - m) / sd);
  return z;
}

double gaussian_aic(double rss, std::size_t n, std::size_t k) {
  const double dn = static_cast<double>(n);
  return dn * (std::log(2.0 * std::numbers::pi * rss / dn) + 1.0) + 2.0 * static_cast<double>(k + 2);
}

std::string stars(double p) {
  if (p <= 1e-4) return "***";
  if (p <= 0.01) return "**";
  if (p <= 0.05) return "*";
  return "";
}

RegressionFit fit_ols(std::span<const double> y, std::span<const std::vector<double>> columns,
                      std::span<const std::string> names) {
  const std::size_t n = y.size();
  const std::size_t k = columns.size();
  if (names.size() != k) throw ArgumentError("fit_ols: one name per column required");
  for (std::size_t j = 0; j < k; ++j) {
    if (columns[j].size() != n) throw ArgumentError("fit_ols: column " + names[j] + " has the wrong length");
  }
  if (n <= k + 1) throw ArgumentError("fit_ols: need more rows than predictors + 1");

  const auto rows = static_cast<Eigen::Index>(n);
  const auto cols = static_cast<Eigen::Index>(k + 1);
  Eigen::MatrixXd X(rows, cols);
  Eigen::VectorXd Y(rows);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    X(r, 0) = 1.0;
    for (std::size_t j = 0; j < k; ++j) X(r, static_cast<Eigen::Index>(j + 1)) = columns[j][i];
    Y(r) = y[i];
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < cols) {
    std::string which;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index j = qr.rank(); j < cols; ++j) {
      const auto c = static_cast<std::size_t>(perm(j));
      if (!which.empty()) which += ", ";
      which += c == 0 ? std::string("intercept") : names[c - 1];
    }
    throw ArgumentError("fit_ols: rank-deficient design; collinear: " + which);
  }
  const Eigen::VectorXd beta = qr.solve(Y);
  const Eigen::VectorXd resid = Y - X * beta;
  const double rss = resid.squaredNorm();
  const double ybar = Y.mean();
  const double tss = (Y.array() - ybar).square().sum();
  if (!(tss > 0.0)) throw ArgumentError("fit_ols: response has zero variance");

  const double df = static_cast<double>(n - k - 1);
  const double sigma2 = rss / df;
  // (X'X)^-1 = P (R'R)^-1 P'
  const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(cols, cols).template triangularView<Eigen::Upper>();
  const Eigen::MatrixXd Rinv =
      R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(cols, cols));
  const Eigen::MatrixXd cov_perm = Rinv * Rinv.transpose();
  const Eigen::MatrixXd cov = qr.colsPermutation() * cov_perm * qr.colsPermutation().transpose();

  auto coefficient = [&](Eigen::Index j, std::string name) {
    Coefficient c;
    c.name = std::move(name);
    c.estimate = beta(j);
    c.se = std::sqrt(sigma2 * cov(j, j));
    if (c.se > 0.0) {
      c.t = c.estimate / c.se;
      c.p = student_t_two_sided_p(c.t, df);
    } else {
      c.t = c.estimate == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), c.estimate);
      c.p = c.estimate == 0.0 ? 1.0 : 0.0;
    }
    return c;
  };

  RegressionFit fit;
  fit.n = n;
  fit.intercept = coefficient(0, "intercept");
  for (std::size_t j = 0; j < k; ++j) fit.coefficients.push_back(coefficient(static_cast<Eigen::Index>(j + 1), names[j]));
  fit.rss = rss;
  fit.r2 = std::clamp(1.0 - rss / tss, 0.0, 1.0);
  fit.aic = gaussian_aic(rss, n, k);
  return fit;
}

RegressionFit fit_model(std::span<const FeatureVector> rows, const ModelSpec& spec) {
  std::set<Predictor> seen(spec.predictors.begin(), spec.predictors.end());
  if (seen.size() != spec.predictors.size()) throw ArgumentError("model " + spec.name + " repeats a predictor");
  if (spec.predictors.empty()) throw ArgumentError("model " + spec.name + " has no predictors");

  const std::size_t k = spec.predictors.size();
  std::vector<std::vector<double>> raw(k);
  std::vector<double> response;
  std::size_t dropped = 0;
  for (const auto& row : rows) {
    std::vector<double> values;
    for (Predictor p : spec.predictors) {
      auto v = predictor_value(row, p);
      if (!v) break;
      values.push_back(*v);
    }
    if (values.size() != k) {
      ++dropped;
      continue;
    }
    for (std::size_t j = 0; j < k; ++j) raw[j].push_back(values[j]);
    response.push_back(static_cast<double>(row.difficulty));
  }

  std::vector<std::vector<double>> z;
  std::vector<std::string> names;
  for (std::size_t j = 0; j < k; ++j) {
    names.emplace_back(to_string(spec.predictors[j]));
    z.push_back(standardize(raw[j], names.back()));
  }
  const auto y = standardize(response, "difficulty");
  RegressionFit fit = fit_ols(y, z, names);
  fit.model = spec.name;
  fit.dropped = dropped;
  return fit;
}

std::vector<RegressionFit> run_model_suite(std::span<const FeatureVector> rows, RowPolicy policy) {
  const auto& suite = model_suite();
  std::vector<RegressionFit> fits;
  if (policy == RowPolicy::per_model) {
    for (const auto& spec : suite) fits.push_back(fit_model(rows, spec));
    return fits;
  }
  std::vector<FeatureVector> common;
  for (const auto& row : rows) {
    bool complete = true;
    for (Predictor p : suite.back().predictors) complete = complete && predictor_value(row, p).has_value();
    if (complete) common.push_back(row);
  }
  const std::size_t dropped = rows.size() - common.size();
  for (const auto& spec : suite) {
    fits.push_back(fit_model(common, spec));
    fits.back().dropped = dropped;
  }
  return fits;
}

}  // namespace qdiff
