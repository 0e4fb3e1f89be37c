#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "helpers.hpp"
#include "qdiff/error.hpp"
#include "qdiff/kde.hpp"

using namespace qdiff;
using testing::Gen;

namespace {

std::vector<Point2> cloud(Gen& g, std::size_t n, double mx, double my, double sx, double sy) {
  std::vector<Point2> pts(n);
  for (auto& p : pts) p = {mx + sx * g.normal(), my + sy * g.normal()};
  return pts;
}

long double sd_ld(const std::vector<long double>& v) {
  long double m = 0;
  for (auto x : v) m += x;
  m /= v.size();
  long double ss = 0;
  for (auto x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / (v.size() - 1));
}

}  // namespace

TEST_CASE("kde_2d: degenerate input") {
  const std::vector<Point2> same{{1, 2}, {1, 2}};
  CHECK_THROWS_AS(kde_2d(same), ArgumentError);
  const std::vector<Point2> line{{1, 2}, {3, 2}, {5, 2}};
  CHECK_THROWS_AS(kde_2d(line), ArgumentError);
  const std::vector<Point2> one{{1, 2}};
  CHECK_THROWS_AS(kde_2d(one), ArgumentError);
}

TEST_CASE("kde_2d: mass, mode and bandwidths") {
  Gen g(1);
  const auto pts = cloud(g, 2000, 70.0, 1.2, 8.0, 0.6);
  const auto k = kde_2d(pts);
  CHECK(k.n == 2000);
  CHECK(std::all_of(k.density.begin(), k.density.end(), [](double d) { return d >= 0.0; }));
  CHECK(std::fabs(k.mass() - 1.0) < 0.01);

  std::vector<long double> xs, ys;
  long double mx = 0, my = 0;
  for (const auto& p : pts) {
    xs.push_back(p.x);
    ys.push_back(p.y);
    mx += p.x;
    my += p.y;
  }
  mx /= pts.size();
  my /= pts.size();
  const long double factor = std::pow(2000.0L, -1.0L / 6.0L);
  CHECK(k.bandwidth_x == doctest::Approx(static_cast<double>(factor * sd_ld(xs))).epsilon(1e-12));
  CHECK(k.bandwidth_y == doctest::Approx(static_cast<double>(factor * sd_ld(ys))).epsilon(1e-12));

  // the sample mode wanders around the population centre by a fraction of
  // a standard deviation; the mean is closer still
  const auto [ix, iy] = k.mode();
  CHECK(std::fabs(k.x.at(ix) - 70.0) <= 0.35 * 8.0);
  CHECK(std::fabs(k.y.at(iy) - 1.2) <= 0.35 * 0.6);
  CHECK(std::fabs(static_cast<double>(mx) - 70.0) <= 0.1 * 8.0);
  CHECK(std::fabs(static_cast<double>(my) - 1.2) <= 0.1 * 0.6);
}

TEST_CASE("kde_2d: grid values against direct summation") {
  Gen g(2);
  const auto pts = cloud(g, 150, 0.0, 0.0, 1.0, 2.0);
  GridSpec spec;
  spec.nx = 17;
  spec.ny = 13;
  spec.x_range = std::pair{-3.0, 3.0};
  spec.y_range = std::pair{-5.0, 6.0};
  const auto k = kde_2d(pts, spec);
  CHECK(k.x.min == -3.0);
  CHECK(k.y.max == 6.0);
  for (std::size_t iy = 0; iy < spec.ny; iy += 3) {
    for (std::size_t ix = 0; ix < spec.nx; ix += 4) {
      const long double gx = -3.0L + 6.0L * ix / (spec.nx - 1);
      const long double gy = -5.0L + 11.0L * iy / (spec.ny - 1);
      long double acc = 0;
      for (const auto& p : pts) {
        const long double ux = (gx - p.x) / k.bandwidth_x;
        const long double uy = (gy - p.y) / k.bandwidth_y;
        acc += std::exp(-0.5L * (ux * ux + uy * uy));
      }
      acc /= 2 * std::numbers::pi_v<long double> * k.bandwidth_x * k.bandwidth_y * pts.size();
      CHECK(k.at(ix, iy) == doctest::Approx(static_cast<double>(acc)).epsilon(1e-12));
    }
  }
}

TEST_CASE("kde_2d: permutation invariance and thread independence") {
  Gen g(3);
  auto pts = cloud(g, 2500, 60.0, 0.5, 10.0, 1.0);
  GridSpec spec;
  spec.nx = 40;
  spec.ny = 30;
  const auto ref = serial::kde_2d(pts, spec);
  std::reverse(pts.begin(), pts.end());
  std::rotate(pts.begin(), pts.begin() + 777, pts.end());
  for (int threads : {1, 2, 4}) {
    const auto k = kde_2d(pts, spec, threads);
    CHECK(k.density == ref.density);
    CHECK(k.bandwidth_x == ref.bandwidth_x);
  }
}

TEST_CASE("kde_2d: explicit bad range") {
  Gen g(4);
  const auto pts = cloud(g, 10, 0, 0, 1, 1);
  GridSpec spec;
  spec.x_range = std::pair{2.0, 2.0};
  CHECK_THROWS_AS(kde_2d(pts, spec), ArgumentError);
  GridSpec tiny;
  tiny.nx = 1;
  CHECK_THROWS_AS(kde_2d(pts, tiny), ArgumentError);
}
