#include "deformkit/surface.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "deformkit/errors.hpp"

namespace deformkit::surface {

namespace {

double aggregate(std::vector<double>& values, Aggregator agg) {
  switch (agg) {
    case Aggregator::mean:
      return std::accumulate(values.begin(), values.end(), 0.0) /
             static_cast<double>(values.size());
    case Aggregator::min:
      return *std::min_element(values.begin(), values.end());
    case Aggregator::max:
      return *std::max_element(values.begin(), values.end());
    case Aggregator::median:
    default: {
      std::sort(values.begin(), values.end());
      const std::size_t n = values.size();
      if (n % 2 == 1) return values[n / 2];
      return 0.5 * (values[n / 2 - 1] + values[n / 2]);
    }
  }
}

double median_of(std::vector<double>& values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

HeightGrid rasterize_dem(const PointCloud& cloud, double cell_size, Aggregator aggregator,
                         int min_points_per_cell, const std::optional<GridBounds>& bounds) {
  if (cloud.points.empty()) throw EmptyCloud();
  if (cell_size <= 0.0) throw NonPositiveCellSize();
  if (min_points_per_cell < 1) min_points_per_cell = 1;

  double min_e, min_n, max_e, max_n;
  if (bounds) {
    min_e = bounds->min_e;
    min_n = bounds->min_n;
    max_e = bounds->max_e;
    max_n = bounds->max_n;
  } else {
    min_e = max_e = cloud.points.front().e;
    min_n = max_n = cloud.points.front().n;
    for (const auto& p : cloud.points) {
      min_e = std::min(min_e, p.e);
      max_e = std::max(max_e, p.e);
      min_n = std::min(min_n, p.n);
      max_n = std::max(max_n, p.n);
    }
  }

  HeightGrid grid;
  grid.epoch_id = cloud.epoch_id;
  grid.cell_size = cell_size;
  // Snap the origin to cell multiples so epochs of the same scene land on
  // the same frame even when their extents differ slightly.
  grid.origin_e = std::floor(min_e / cell_size) * cell_size;
  grid.origin_n = std::floor(min_n / cell_size) * cell_size;
  grid.ncols = std::max(1, static_cast<int>(std::ceil((max_e - grid.origin_e) / cell_size)));
  grid.nrows = std::max(1, static_cast<int>(std::ceil((max_n - grid.origin_n) / cell_size)));
  const std::size_t ncells = static_cast<std::size_t>(grid.ncols) * grid.nrows;
  grid.heights.assign(ncells, nodata());

  // Index points per cell via a sort on cell id; avoids per-cell vectors.
  struct Slot {
    std::size_t cell;
    double h;
  };
  std::vector<Slot> slots;
  slots.reserve(cloud.size());
  for (const auto& p : cloud.points) {
    const int col = static_cast<int>(std::floor((p.e - grid.origin_e) / cell_size));
    const int row = static_cast<int>(std::floor((p.n - grid.origin_n) / cell_size));
    if (!grid.in_bounds(row, col)) continue;  // only possible with fixed bounds
    slots.push_back({static_cast<std::size_t>(row) * grid.ncols + col, p.h});
  }
  std::sort(slots.begin(), slots.end(),
            [](const Slot& a, const Slot& b) { return a.cell < b.cell; });

  std::vector<double> members;
  for (std::size_t i = 0; i < slots.size();) {
    std::size_t j = i;
    members.clear();
    while (j < slots.size() && slots[j].cell == slots[i].cell) {
      members.push_back(slots[j].h);
      ++j;
    }
    if (static_cast<int>(members.size()) >= min_points_per_cell) {
      grid.heights[slots[i].cell] = aggregate(members, aggregator);
    }
    i = j;
  }
  return grid;
}

double bilinear_at(const HeightGrid& grid, double e, double n) {
  const double gx = (e - grid.origin_e) / grid.cell_size - 0.5;
  const double gy = (n - grid.origin_n) / grid.cell_size - 0.5;
  const int col0 = static_cast<int>(std::floor(gx));
  const int row0 = static_cast<int>(std::floor(gy));
  if (!grid.in_bounds(row0, col0) || !grid.in_bounds(row0 + 1, col0 + 1)) return nodata();
  const double fx = gx - col0;
  const double fy = gy - row0;
  const double v00 = grid.at(row0, col0);
  const double v01 = grid.at(row0, col0 + 1);
  const double v10 = grid.at(row0 + 1, col0);
  const double v11 = grid.at(row0 + 1, col0 + 1);
  if (is_nodata(v00) || is_nodata(v01) || is_nodata(v10) || is_nodata(v11)) return nodata();
  return v00 * (1 - fx) * (1 - fy) + v01 * fx * (1 - fy) + v10 * (1 - fx) * fy +
         v11 * fx * fy;
}

Profile sample_profile(const HeightGrid& grid, const Axis& axis, double spacing) {
  if (spacing <= 0.0) throw Error("profile spacing must be positive");
  const double len = axis.length();
  if (!(len > 0.0)) throw Error("axis start and end coincide");

  // Lateral offsets across the corridor. The grid carries no information
  // below cell size, so offsets are spaced one cell apart (minimum 5 so a
  // narrow corridor still has a useful median), capped to keep cost bounded.
  std::vector<double> offsets;
  if (axis.half_width > 0.0) {
    int n_off = static_cast<int>(std::floor(2.0 * axis.half_width / grid.cell_size)) + 1;
    n_off = std::clamp(n_off, 5, 1001);
    if (n_off % 2 == 0) ++n_off;
    for (int k = 0; k < n_off; ++k) {
      offsets.push_back(-axis.half_width +
                        2.0 * axis.half_width * static_cast<double>(k) / (n_off - 1));
    }
  } else {
    offsets.push_back(0.0);
  }

  Profile profile;
  profile.axis = axis;
  profile.spacing = spacing;
  profile.start_chainage = 0.0;
  const int nsamples = static_cast<int>(std::floor(len / spacing + 1e-9)) + 1;
  profile.values.reserve(nsamples);

  std::vector<double> lateral;
  bool any_valid = false;
  for (int i = 0; i < nsamples; ++i) {
    const double c = static_cast<double>(i) * spacing;
    double value;
    if (axis.half_width > 0.0) {
      lateral.clear();
      for (double off : offsets) {
        double e, n;
        axis.point_at(c, off, e, n);
        const double v = bilinear_at(grid, e, n);
        if (!is_nodata(v)) lateral.push_back(v);
      }
      value = lateral.empty() ? nodata() : median_of(lateral);
    } else {
      double e, n;
      axis.point_at(c, 0.0, e, n);
      value = bilinear_at(grid, e, n);
    }
    if (!is_nodata(value)) any_valid = true;
    profile.values.push_back(value);
  }
  if (!any_valid) throw AxisOutsideGrid();
  return profile;
}

Profile interpolate_profile(std::vector<std::pair<double, double>> scatter,
                            double raster_width, double max_gap) {
  if (raster_width <= 0.0) throw Error("raster width must be positive");
  std::stable_sort(scatter.begin(), scatter.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  // Collapse duplicate chainages to their mean height.
  std::vector<std::pair<double, double>> knots;
  for (std::size_t i = 0; i < scatter.size();) {
    std::size_t j = i;
    double sum = 0.0;
    while (j < scatter.size() && scatter[j].first == scatter[i].first) {
      sum += scatter[j].second;
      ++j;
    }
    knots.emplace_back(scatter[i].first, sum / static_cast<double>(j - i));
    i = j;
  }
  if (knots.size() < 2) throw TooFewPoints(knots.size(), 2);

  Profile profile;
  profile.spacing = raster_width;
  profile.start_chainage = knots.front().first;
  const double c_max = knots.back().first;
  const int nsamples =
      static_cast<int>(std::floor((c_max - profile.start_chainage) / raster_width + 1e-9)) + 1;
  profile.values.reserve(nsamples);

  std::size_t seg = 0;
  for (int i = 0; i < nsamples; ++i) {
    const double c = profile.start_chainage + static_cast<double>(i) * raster_width;
    while (seg + 2 < knots.size() && knots[seg + 1].first < c) ++seg;
    const auto& [x0, y0] = knots[seg];
    const auto& [x1, y1] = knots[seg + 1];
    if (c < x0 || c > x1) {
      profile.values.push_back(nodata());
      continue;
    }
    // A sample exactly on a knot keeps the knot height even across wide gaps.
    if ((x1 - x0) > max_gap && c != x0 && c != x1) {
      profile.values.push_back(nodata());
      continue;
    }
    const double t = (c - x0) / (x1 - x0);
    profile.values.push_back(y0 + t * (y1 - y0));
  }
  return profile;
}

}  // namespace deformkit::surface
