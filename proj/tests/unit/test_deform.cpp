#include <doctest.h>

#include <cmath>
#include <random>

#include "deformkit/deform.hpp"
#include "deformkit/errors.hpp"

using namespace deformkit;

namespace {

HeightGrid make_grid(int ncols, int nrows, double cell, double fill) {
  HeightGrid g;
  g.cell_size = cell;
  g.ncols = ncols;
  g.nrows = nrows;
  g.heights.assign(static_cast<std::size_t>(ncols) * nrows, fill);
  return g;
}

// Brute-force discrete kernel: weights over the truncated support, summed
// directly. Independent of the library's separable implementation.
double impulse_peak_oracle(double sigma, double spacing, double truncation, double impulse) {
  const int radius = static_cast<int>(std::ceil(truncation * sigma / spacing));
  double mass = 0.0;
  for (int j = -radius; j <= radius; ++j) {
    const double x = j * spacing / sigma;
    mass += std::exp(-0.5 * x * x);
  }
  return impulse / mass;  // center weight times the impulse
}

}  // namespace

TEST_CASE("diff: identical grids give a zero field, labels carried") {
  auto before = make_grid(8, 6, 0.5, 1.25);
  before.epoch_id = "3";
  auto after = before;
  after.epoch_id = "4";
  const auto field = deform::diff_grids(before, after);
  CHECK(field.epoch_before == "3");
  CHECK(field.epoch_after == "4");
  for (double v : field.raster.heights) CHECK(v == 0.0);
}

TEST_CASE("diff: uniform offset and NODATA propagation") {
  auto before = make_grid(4, 4, 1.0, 1.0);
  auto after = make_grid(4, 4, 1.0, 1.002);
  before.at(1, 1) = nodata();
  after.at(2, 2) = nodata();
  const auto field = deform::diff_grids(before, after);
  CHECK(field.raster.at(0, 0) == doctest::Approx(0.002));
  CHECK(is_nodata(field.raster.at(1, 1)));
  CHECK(is_nodata(field.raster.at(2, 2)));
}

TEST_CASE("diff: frame mismatch") {
  const auto a = make_grid(4, 4, 1.0, 0.0);
  const auto b = make_grid(5, 4, 1.0, 0.0);
  CHECK_THROWS_AS(deform::diff_grids(a, b), FrameMismatch);
}

TEST_CASE("smooth: constant grid preserved to 1e-9 relative") {
  auto g = make_grid(60, 40, 0.01, 0.735);
  g.at(10, 10) = nodata();  // renormalization at the hole's neighbors
  SmoothingSpec spec;
  spec.sigma_m = 0.03;
  const auto s = deform::gaussian_smooth(g, spec);
  for (int row = 0; row < g.nrows; ++row) {
    for (int col = 0; col < g.ncols; ++col) {
      if (row == 10 && col == 10) continue;
      CHECK(std::abs(s.at(row, col) - 0.735) <= 1e-9 * 0.735);
    }
  }
  // The hole itself is interpolated from its neighborhood.
  CHECK(s.at(10, 10) == doctest::Approx(0.735).epsilon(1e-9));
}

TEST_CASE("smooth: 1 mm impulse at 1 mm spacing, sigma 10 mm") {
  Profile p;
  p.spacing = 0.001;
  p.values.assign(201, 0.0);
  p.values[100] = 0.001;  // 1 mm impulse in meters
  SmoothingSpec spec;
  spec.sigma_m = 0.010;
  const auto s = deform::gaussian_smooth(p, spec);
  const double oracle = impulse_peak_oracle(0.010, 0.001, spec.truncation, 0.001);
  CHECK(std::abs(s.values[100] - oracle) <= 1e-15);
  // Peak in mm: 0.03989 within 1e-5.
  CHECK(std::abs(s.values[100] * 1000.0 - 0.03989) <= 1e-5);
}

TEST_CASE("smooth: linear ramp unchanged in the interior") {
  Profile p;
  p.spacing = 0.01;
  for (int i = 0; i < 400; ++i) p.values.push_back(0.002 * i);
  SmoothingSpec spec;
  spec.sigma_m = 0.05;
  const auto s = deform::gaussian_smooth(p, spec);
  const int radius = static_cast<int>(std::ceil(spec.truncation * spec.sigma_m / p.spacing));
  for (int i = radius; i < 400 - radius; ++i) {
    CHECK(std::abs(s.values[i] - p.values[i]) <= 1e-9);
  }
}

TEST_CASE("smooth: all-NODATA neighborhoods stay NODATA") {
  auto g = make_grid(200, 1, 0.01, nodata());
  g.at(0, 10) = 1.0;
  SmoothingSpec spec;
  spec.sigma_m = 0.02;  // truncation radius 8 cells
  const auto s = deform::gaussian_smooth(g, spec);
  CHECK(s.at(0, 10) == doctest::Approx(1.0));
  CHECK_FALSE(is_nodata(s.at(0, 18)));  // within reach
  CHECK(is_nodata(s.at(0, 19)));        // beyond the truncation radius
  CHECK(is_nodata(s.at(0, 150)));
}

TEST_CASE("smooth: invalid spec rejected, degenerate sigma flagged") {
  SmoothingSpec bad;
  bad.sigma_m = -1.0;
  CHECK_THROWS_AS(deform::gaussian_smooth(make_grid(4, 4, 1.0, 0.0), bad), Error);
  SmoothingSpec narrow;
  narrow.sigma_m = 0.4;
  CHECK(narrow.degenerate_for(1.0));
  CHECK_FALSE(narrow.degenerate_for(0.5));
}

TEST_CASE("bending line: equal epochs give zero line") {
  auto before = make_grid(100, 20, 0.1, 2.0);
  before.epoch_id = "3";
  auto after = before;
  after.epoch_id = "4";
  Axis axis{0.05, 1.0, 9.95, 1.0, 0.0};
  SmoothingSpec spec;
  spec.sigma_m = 0.2;
  const auto line = deform::bending_line(before, after, axis, 0.1, spec);
  for (double v : line.profile.values) {
    if (!is_nodata(v)) CHECK(v == 0.0);
  }
}

TEST_CASE("bending line: antisymmetry is exact over randomized grid pairs") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-0.02, 0.02);
  for (int trial = 0; trial < 100; ++trial) {
    auto before = make_grid(40, 10, 0.1, 0.0);
    auto after = before;
    for (auto& v : before.heights) v = u(rng);
    for (auto& v : after.heights) v = u(rng);
    // A few holes on both sides.
    before.at(2, 5) = nodata();
    after.at(7, 30) = nodata();
    Axis axis{0.1, 0.5, 3.9, 0.5, 0.3};
    SmoothingSpec spec;
    spec.sigma_m = 0.15;
    const auto mode = trial % 2 == 0 ? BendMode::diff_then_smooth : BendMode::smooth_then_diff;
    const auto ab = deform::bending_line(before, after, axis, 0.1, spec, mode);
    const auto ba = deform::bending_line(after, before, axis, 0.1, spec, mode);
    REQUIRE(ab.profile.size() == ba.profile.size());
    for (std::size_t i = 0; i < ab.profile.size(); ++i) {
      const double x = ab.profile.values[i];
      const double y = ba.profile.values[i];
      if (is_nodata(x)) {
        CHECK(is_nodata(y));
      } else {
        CHECK(x + y == 0.0);  // exact, not approximate
      }
    }
  }
}

TEST_CASE("bending line: modes agree on hole-free grids") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.01, 0.01);
  auto before = make_grid(80, 20, 0.05, 0.0);
  auto after = before;
  for (auto& v : before.heights) v = u(rng);
  for (auto& v : after.heights) v = u(rng);
  Axis axis{0.1, 0.5, 3.9, 0.5, 0.0};
  SmoothingSpec spec;
  spec.sigma_m = 0.1;
  const auto a = deform::bending_line(before, after, axis, 0.05, spec,
                                      BendMode::diff_then_smooth);
  const auto b = deform::bending_line(before, after, axis, 0.05, spec,
                                      BendMode::smooth_then_diff);
  REQUIRE(a.profile.size() == b.profile.size());
  const int radius = static_cast<int>(std::ceil(spec.truncation * spec.sigma_m / 0.05));
  // Interior only: boundary renormalization differs between 1-D and 2-D.
  for (std::size_t i = radius; i + radius < a.profile.size(); ++i) {
    if (is_nodata(a.profile.values[i]) || is_nodata(b.profile.values[i])) continue;
    CHECK(std::abs(a.profile.values[i] - b.profile.values[i]) <= 1e-9);
  }
}

TEST_CASE("cross profile: zero field gives zero profile, range checked") {
  auto grid = make_grid(100, 40, 0.1, 0.0);
  DeformationField field;
  field.raster = grid;
  Axis main_axis{0.0, 2.0, 10.0, 2.0, 1.5};
  SmoothingSpec spec;
  spec.sigma_m = 0.2;
  const auto p = deform::cross_profile(field, 5.0, main_axis, 0.1, spec);
  for (double v : p.values) {
    if (!is_nodata(v)) CHECK(v == doctest::Approx(0.0));
  }
  CHECK_THROWS_AS(deform::cross_profile(field, 11.0, main_axis, 0.1, spec),
                  ChainageOutOfRange);
}

TEST_CASE("render: color rule") {
  auto grid = make_grid(5, 1, 1.0, 0.0);
  grid.at(0, 0) = 0.0;        // black
  grid.at(0, 1) = -0.010;     // saturated red
  grid.at(0, 2) = 0.010;      // saturated green
  grid.at(0, 3) = nodata();   // grey
  grid.at(0, 4) = 0.0002;     // below threshold: black
  DeformationField field;
  field.raster = grid;
  const auto img = deform::render_deformation_map(field, 0.0005, 0.010);
  CHECK(img.pixels[0] == Rgb{0, 0, 0});
  CHECK(img.pixels[1] == Rgb{255, 0, 0});
  CHECK(img.pixels[2] == Rgb{0, 255, 0});
  CHECK(img.pixels[3] == Rgb{128, 128, 128});
  CHECK(img.pixels[4] == Rgb{0, 0, 0});
}

TEST_CASE("render: channel is monotone in |d|") {
  auto grid = make_grid(41, 1, 1.0, 0.0);
  for (int i = 0; i <= 40; ++i) grid.at(0, i) = -0.012 * i / 40.0;
  DeformationField field;
  field.raster = grid;
  const auto img = deform::render_deformation_map(field, 0.0005, 0.010);
  int prev = 0;
  for (int i = 0; i <= 40; ++i) {
    CHECK(img.pixels[i].g == 0);
    CHECK(img.pixels[i].r >= prev);
    prev = img.pixels[i].r;
  }
  CHECK(prev == 255);  // clamps beyond saturation
}

TEST_CASE("render: bad color params") {
  DeformationField field;
  field.raster = make_grid(2, 2, 1.0, 0.0);
  CHECK_THROWS_AS(deform::render_deformation_map(field, -0.001, 0.01), BadColorParams);
  CHECK_THROWS_AS(deform::render_deformation_map(field, 0.01, 0.01), BadColorParams);
}

TEST_CASE("render: image row 0 is the northernmost grid row") {
  auto grid = make_grid(1, 2, 1.0, 0.0);
  grid.at(0, 0) = -0.010;  // south cell red
  grid.at(1, 0) = +0.010;  // north cell green
  DeformationField field;
  field.raster = grid;
  const auto img = deform::render_deformation_map(field, 0.0005, 0.010);
  CHECK(img.pixels[0] == Rgb{0, 255, 0});   // top of image = north
  CHECK(img.pixels[1] == Rgb{255, 0, 0});
}
