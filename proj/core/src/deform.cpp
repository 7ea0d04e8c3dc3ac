#include "deformkit/deform.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "deformkit/errors.hpp"
#include "deformkit/parallel.hpp"
#include "deformkit/surface.hpp"

namespace deformkit::deform {

namespace {

std::vector<double> gaussian_taps(double sigma_cells, double truncation) {
  const int radius = std::max(1, static_cast<int>(std::ceil(truncation * sigma_cells)));
  std::vector<double> taps(2 * radius + 1);
  for (int j = -radius; j <= radius; ++j) {
    taps[j + radius] = std::exp(-0.5 * (j / sigma_cells) * (j / sigma_cells));
  }
  return taps;
}

// One normalized-convolution pass along a contiguous stride-1 span.
// num/den accumulate kernel-weighted values and kernel-weighted validity.
void convolve_span(const double* values, int n, const std::vector<double>& taps,
                   double* num, double* den) {
  const int radius = (static_cast<int>(taps.size()) - 1) / 2;
  for (int i = 0; i < n; ++i) {
    double s = 0.0, w = 0.0;
    const int j0 = std::max(-radius, -i);
    const int j1 = std::min(radius, n - 1 - i);
    for (int j = j0; j <= j1; ++j) {
      const double v = values[i + j];
      if (is_nodata(v)) continue;
      const double k = taps[j + radius];
      s += k * v;
      w += k;
    }
    num[i] = s;
    den[i] = w;
  }
}

HeightGrid smooth_grid(const HeightGrid& grid, const SmoothingSpec& spec) {
  if (!spec.valid()) throw Error("smoothing spec requires sigma > 0 and truncation >= 3");
  const double sigma_cells = spec.sigma_m / grid.cell_size;
  const auto taps = gaussian_taps(sigma_cells, spec.truncation);
  const int radius = (static_cast<int>(taps.size()) - 1) / 2;
  const std::size_t ncells = grid.heights.size();

  // Pass 1: rows. Track numerator (kernel * value over valid cells) and the
  // valid-mass denominator separately so the second pass can renormalize
  // jointly; dividing per pass would weight staggered holes incorrectly.
  std::vector<double> num_row(ncells), den_row(ncells);
  parallel_for(0, grid.nrows, [&](int row) {
    const std::size_t off = static_cast<std::size_t>(row) * grid.ncols;
    convolve_span(grid.heights.data() + off, grid.ncols, taps, num_row.data() + off,
                  den_row.data() + off);
  });

  // Pass 2: columns over the row results.
  HeightGrid out = grid;
  parallel_for(0, grid.ncols, [&](int col) {
    std::vector<double> num_col(grid.nrows), den_col(grid.nrows);
    for (int row = 0; row < grid.nrows; ++row) {
      double s = 0.0, w = 0.0;
      const int j0 = std::max(-radius, -row);
      const int j1 = std::min(radius, grid.nrows - 1 - row);
      for (int j = j0; j <= j1; ++j) {
        const std::size_t idx = static_cast<std::size_t>(row + j) * grid.ncols + col;
        const double k = taps[j + radius];
        s += k * num_row[idx];
        w += k * den_row[idx];
      }
      num_col[row] = s;
      den_col[row] = w;
    }
    for (int row = 0; row < grid.nrows; ++row) {
      const std::size_t idx = static_cast<std::size_t>(row) * grid.ncols + col;
      out.heights[idx] = den_col[row] > 0.0 ? num_col[row] / den_col[row] : nodata();
    }
  });
  return out;
}

Profile smooth_profile(const Profile& profile, const SmoothingSpec& spec) {
  if (!spec.valid()) throw Error("smoothing spec requires sigma > 0 and truncation >= 3");
  if (profile.spacing <= 0.0) throw Error("profile spacing must be positive");
  const double sigma_cells = spec.sigma_m / profile.spacing;
  const auto taps = gaussian_taps(sigma_cells, spec.truncation);
  const int n = static_cast<int>(profile.values.size());
  std::vector<double> num(n), den(n);
  convolve_span(profile.values.data(), n, taps, num.data(), den.data());
  Profile out = profile;
  for (int i = 0; i < n; ++i) {
    out.values[i] = den[i] > 0.0 ? num[i] / den[i] : nodata();
  }
  return out;
}

}  // namespace

DeformationField diff_grids(const HeightGrid& before, const HeightGrid& after) {
  if (!before.same_frame(after)) {
    throw FrameMismatch("diff requires identical origin, cell size and dimensions");
  }
  DeformationField field;
  field.epoch_before = before.epoch_id;
  field.epoch_after = after.epoch_id;
  field.raster = before;
  field.raster.epoch_id = before.epoch_id + "->" + after.epoch_id;
  for (std::size_t i = 0; i < field.raster.heights.size(); ++i) {
    const double b = before.heights[i];
    const double a = after.heights[i];
    field.raster.heights[i] = (is_nodata(a) || is_nodata(b)) ? nodata() : a - b;
  }
  return field;
}

HeightGrid gaussian_smooth(const HeightGrid& grid, const SmoothingSpec& spec) {
  return smooth_grid(grid, spec);
}

DeformationField gaussian_smooth(const DeformationField& field, const SmoothingSpec& spec) {
  DeformationField out = field;
  out.raster = smooth_grid(field.raster, spec);
  return out;
}

Profile gaussian_smooth(const Profile& profile, const SmoothingSpec& spec) {
  return smooth_profile(profile, spec);
}

BendingLine bending_line(const HeightGrid& before, const HeightGrid& after, const Axis& axis,
                         double spacing, const SmoothingSpec& spec, BendMode mode) {
  if (!before.same_frame(after)) {
    throw FrameMismatch("bending line requires identical raster frames");
  }
  BendingLine line;
  line.epoch_before = before.epoch_id;
  line.epoch_after = after.epoch_id;
  line.sigma_m = spec.sigma_m;
  line.mode = mode;

  if (mode == BendMode::diff_then_smooth) {
    const Profile pb = surface::sample_profile(before, axis, spacing);
    const Profile pa = surface::sample_profile(after, axis, spacing);
    Profile diff = pa;
    for (std::size_t i = 0; i < diff.values.size(); ++i) {
      const double a = pa.values[i];
      const double b = pb.values[i];
      diff.values[i] = (is_nodata(a) || is_nodata(b)) ? nodata() : a - b;
    }
    line.profile = smooth_profile(diff, spec);
  } else {
    const HeightGrid sb = smooth_grid(before, spec);
    const HeightGrid sa = smooth_grid(after, spec);
    const Profile pb = surface::sample_profile(sb, axis, spacing);
    const Profile pa = surface::sample_profile(sa, axis, spacing);
    line.profile = pa;
    for (std::size_t i = 0; i < line.profile.values.size(); ++i) {
      const double a = pa.values[i];
      const double b = pb.values[i];
      line.profile.values[i] = (is_nodata(a) || is_nodata(b)) ? nodata() : a - b;
    }
  }
  return line;
}

Profile cross_profile(const DeformationField& field, double chainage, const Axis& main_axis,
                      double spacing, const SmoothingSpec& spec, double along_half_width) {
  const double len = main_axis.length();
  if (chainage < 0.0 || chainage > len) throw ChainageOutOfRange(chainage);
  if (main_axis.half_width <= 0.0) {
    throw Error("main axis needs half_width > 0 to span the cross profile");
  }
  double ce, cn, ne, nn;
  main_axis.point_at(chainage, 0.0, ce, cn);
  main_axis.normal(ne, nn);
  // Runs from the left edge of the corridor to the right edge; for an
  // eastward main axis that is north to south.
  Axis cross;
  cross.start_e = ce + main_axis.half_width * ne;
  cross.start_n = cn + main_axis.half_width * nn;
  cross.end_e = ce - main_axis.half_width * ne;
  cross.end_n = cn - main_axis.half_width * nn;
  cross.half_width = along_half_width;
  const Profile raw = surface::sample_profile(field.raster, cross, spacing);
  return smooth_profile(raw, spec);
}

RgbRaster render_deformation_map(const DeformationField& field, double threshold_m,
                                 double saturation_m) {
  if (threshold_m < 0.0 || saturation_m <= threshold_m) throw BadColorParams();
  const HeightGrid& g = field.raster;
  RgbRaster img;
  img.ncols = g.ncols;
  img.nrows = g.nrows;
  img.pixels.assign(static_cast<std::size_t>(g.ncols) * g.nrows, Rgb{});
  const double span = saturation_m - threshold_m;
  for (int row = 0; row < g.nrows; ++row) {
    for (int col = 0; col < g.ncols; ++col) {
      // Image rows run north to south.
      const std::size_t pix = static_cast<std::size_t>(g.nrows - 1 - row) * g.ncols + col;
      const double d = g.at(row, col);
      if (is_nodata(d)) {
        img.pixels[pix] = Rgb{128, 128, 128};
        continue;
      }
      const double mag = std::abs(d);
      if (mag < threshold_m) continue;  // stays black
      const double t = std::clamp((mag - threshold_m) / span, 0.0, 1.0);
      const auto channel = static_cast<std::uint8_t>(std::lround(255.0 * t));
      if (d < 0.0) {
        img.pixels[pix] = Rgb{channel, 0, 0};
      } else {
        img.pixels[pix] = Rgb{0, channel, 0};
      }
    }
  }
  return img;
}

}  // namespace deformkit::deform
