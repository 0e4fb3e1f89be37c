#include "qdiff/kde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <omp.h>

#include "qdiff/error.hpp"

namespace qdiff {

double KdeGrid::mass() const {
  const double dx = x.step();
  const double dy = y.step();
  double total = 0.0;
  for (std::size_t iy = 0; iy < y.points; ++iy) {
    const double wy = (iy == 0 || iy + 1 == y.points) ? 0.5 : 1.0;
    for (std::size_t ix = 0; ix < x.points; ++ix) {
      const double wx = (ix == 0 || ix + 1 == x.points) ? 0.5 : 1.0;
      total += wx * wy * at(ix, iy);
    }
  }
  return total * dx * dy;
}

std::pair<std::size_t, std::size_t> KdeGrid::mode() const {
  const auto it = std::max_element(density.begin(), density.end());
  const auto flat = static_cast<std::size_t>(it - density.begin());
  return {flat % x.points, flat / x.points};
}

namespace {

constexpr std::size_t point_chunk = 1024;

double gaussian(double u) { return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi); }

double sample_sd(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

struct Setup {
  std::vector<Point2> points;
  KdeGrid grid;
};

Setup prepare(std::span<const Point2> input, const GridSpec& spec) {
  if (input.size() < 2) throw ArgumentError("kde_2d needs at least two points");
  if (spec.nx < 2 || spec.ny < 2) throw ArgumentError("kde_2d grid needs at least 2 points per axis");
  Setup s;
  s.points.assign(input.begin(), input.end());
  std::sort(s.points.begin(), s.points.end(),
            [](const Point2& a, const Point2& b) { return a.x != b.x ? a.x < b.x : a.y < b.y; });

  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& p : s.points) {
    xs.push_back(p.x);
    ys.push_back(p.y);
  }
  const double sx = sample_sd(xs);
  const double sy = sample_sd(ys);
  if (!(sx > 0.0) || !(sy > 0.0)) throw ArgumentError("kde_2d: degenerate spread on an axis");
  const double factor = std::pow(static_cast<double>(s.points.size()), -1.0 / 6.0);

  KdeGrid& g = s.grid;
  g.n = s.points.size();
  g.bandwidth_x = factor * sx;
  g.bandwidth_y = factor * sy;
  auto [xmin, xmax] = std::minmax_element(xs.begin(), xs.end());
  auto [ymin, ymax] = std::minmax_element(ys.begin(), ys.end());
  const auto xr = spec.x_range.value_or(std::pair{*xmin - spec.padding * g.bandwidth_x, *xmax + spec.padding * g.bandwidth_x});
  const auto yr = spec.y_range.value_or(std::pair{*ymin - spec.padding * g.bandwidth_y, *ymax + spec.padding * g.bandwidth_y});
  if (!(xr.second > xr.first) || !(yr.second > yr.first)) throw ArgumentError("kde_2d: empty grid range");
  g.x = {xr.first, xr.second, spec.nx};
  g.y = {yr.first, yr.second, spec.ny};
  g.density.assign(spec.nx * spec.ny, 0.0);
  return s;
}

double kx(const KdeGrid& g, std::size_t ix, const Point2& p) {
  return gaussian((g.x.at(ix) - p.x) / g.bandwidth_x) / g.bandwidth_x;
}
double ky(const KdeGrid& g, std::size_t iy, const Point2& p) {
  return gaussian((g.y.at(iy) - p.y) / g.bandwidth_y) / g.bandwidth_y;
}

void normalize(KdeGrid& g) {
  const double inv_n = 1.0 / static_cast<double>(g.n);
  for (double& d : g.density) d *= inv_n;
}

}  // namespace

KdeGrid kde_2d(std::span<const Point2> input, const GridSpec& spec, int threads) {
  Setup s = prepare(input, spec);
  KdeGrid& g = s.grid;
  const std::size_t nx = g.x.points;
  const std::size_t ny = g.y.points;
  const int nthreads = threads > 0 ? threads : omp_get_max_threads();
  std::vector<double> kxs(nx * point_chunk);
  std::vector<double> kys(ny * point_chunk);

  // Every cell accumulates its terms in point order, matching the serial scan.
  for (std::size_t start = 0; start < s.points.size(); start += point_chunk) {
    const std::size_t len = std::min(point_chunk, s.points.size() - start);
#pragma omp parallel num_threads(nthreads)
    {
#pragma omp for schedule(static)
      for (std::ptrdiff_t ix = 0; ix < static_cast<std::ptrdiff_t>(nx); ++ix) {
        for (std::size_t i = 0; i < len; ++i) kxs[static_cast<std::size_t>(ix) * point_chunk + i] = kx(g, static_cast<std::size_t>(ix), s.points[start + i]);
      }
#pragma omp for schedule(static)
      for (std::ptrdiff_t iy = 0; iy < static_cast<std::ptrdiff_t>(ny); ++iy) {
        for (std::size_t i = 0; i < len; ++i) kys[static_cast<std::size_t>(iy) * point_chunk + i] = ky(g, static_cast<std::size_t>(iy), s.points[start + i]);
      }
#pragma omp for schedule(static)
      for (std::ptrdiff_t iy = 0; iy < static_cast<std::ptrdiff_t>(ny); ++iy) {
        const double* ky_row = kys.data() + static_cast<std::size_t>(iy) * point_chunk;
        for (std::size_t ix = 0; ix < nx; ++ix) {
          const double* kx_row = kxs.data() + ix * point_chunk;
          double acc = g.density[static_cast<std::size_t>(iy) * nx + ix];
          for (std::size_t i = 0; i < len; ++i) acc += kx_row[i] * ky_row[i];
          g.density[static_cast<std::size_t>(iy) * nx + ix] = acc;
        }
      }
    }
  }
  normalize(g);
  return std::move(s.grid);
}

namespace serial {

KdeGrid kde_2d(std::span<const Point2> input, const GridSpec& spec) {
  Setup s = prepare(input, spec);
  KdeGrid& g = s.grid;
  for (std::size_t iy = 0; iy < g.y.points; ++iy) {
    for (std::size_t ix = 0; ix < g.x.points; ++ix) {
      double acc = 0.0;
      for (const auto& p : s.points) acc += kx(g, ix, p) * ky(g, iy, p);
      g.density[iy * g.x.points + ix] = acc;
    }
  }
  normalize(g);
  return std::move(s.grid);
}

}  // namespace serial

}  // namespace qdiff
