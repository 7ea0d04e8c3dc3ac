#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "deformkit/types.hpp"

namespace deformkit::surface {

enum class Aggregator { median, mean, min, max };

struct GridBounds {
  double min_e = 0.0, min_n = 0.0;
  double max_e = 0.0, max_n = 0.0;
};

/// Bins cloud points into a regular grid and aggregates heights per cell.
/// Cells with fewer than `min_points_per_cell` members become NODATA. When
/// `bounds` is given it fixes the raster frame (points outside are dropped),
/// so multiple epochs can share one frame; otherwise the frame snaps to
/// cell_size multiples covering the cloud.
HeightGrid rasterize_dem(const PointCloud& cloud, double cell_size,
                         Aggregator aggregator = Aggregator::median,
                         int min_points_per_cell = 3,
                         const std::optional<GridBounds>& bounds = std::nullopt);

/// Samples the grid along `axis` every `spacing` meters, chainage 0 at the
/// axis start. half_width 0 takes one bilinear sample (NODATA if any of the
/// four surrounding cells is missing); half_width > 0 takes the median over
/// evenly spaced lateral offsets at grid resolution (at least 5), NODATA only
/// when every offset is invalid. Throws AxisOutsideGrid when no sample is
/// valid at all.
Profile sample_profile(const HeightGrid& grid, const Axis& axis, double spacing);

/// Bilinear interpolation at one plan position; NaN when outside or any of
/// the four surrounding cells is NODATA.
double bilinear_at(const HeightGrid& grid, double e, double n);

/// Linear re-rastering of loose (chainage, height) scatter onto a uniform
/// raster starting at the smallest chainage. No extrapolation beyond the
/// scatter hull; spans between consecutive scatter points wider than
/// `max_gap` are left NODATA. Duplicate chainages are averaged.
Profile interpolate_profile(std::vector<std::pair<double, double>> scatter,
                            double raster_width, double max_gap = 0.2);

}  // namespace deformkit::surface
