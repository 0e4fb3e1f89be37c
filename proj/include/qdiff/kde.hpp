#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace qdiff {

struct Point2 {
  double x = 0.0;  // opacity, degrees
  double y = 0.0;  // log10 fpm
};

struct GridAxis {
  double min = 0.0;
  double max = 0.0;
  std::size_t points = 0;

  double step() const { return points > 1 ? (max - min) / static_cast<double>(points - 1) : 0.0; }
  double at(std::size_t i) const { return min + step() * static_cast<double>(i); }
};

struct GridSpec {
  std::size_t nx = 100;
  std::size_t ny = 100;
  // Explicit ranges; otherwise data range padded by `padding` bandwidths.
  std::optional<std::pair<double, double>> x_range;
  std::optional<std::pair<double, double>> y_range;
  double padding = 4.0;
};

/// Gaussian product-kernel density on a regular grid; density is row-major
/// with y as the row index.
struct KdeGrid {
  GridAxis x;
  GridAxis y;
  double bandwidth_x = 0.0;
  double bandwidth_y = 0.0;
  std::size_t n = 0;
  std::vector<double> density;

  double at(std::size_t ix, std::size_t iy) const { return density[iy * x.points + ix]; }
  // Trapezoidal integral over the grid.
  double mass() const;
  // Grid coordinates of the maximum (first in row-major order on ties).
  std::pair<std::size_t, std::size_t> mode() const;
};

// Scott's rule per axis: n^(-1/6) * sample sd. Throws ArgumentError for
// n < 2 or zero spread on either axis. Points are put in a canonical order
// first, so the result does not depend on input order.
KdeGrid kde_2d(std::span<const Point2> points, const GridSpec& spec = {}, int threads = 0);

namespace serial {
KdeGrid kde_2d(std::span<const Point2> points, const GridSpec& spec = {});
}  // namespace serial

}  // namespace qdiff
