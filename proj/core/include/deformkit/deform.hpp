#pragma once

#include "deformkit/types.hpp"

namespace deformkit::deform {

/// Cell-wise after - before on an identical raster frame (positive up).
/// NODATA wherever either input is NODATA.
DeformationField diff_grids(const HeightGrid& before, const HeightGrid& after);

/// Separable Gaussian smoothing with normalized convolution over the valid
/// support. Produces a value wherever any valid input lies within the kernel
/// truncation radius; cells whose whole neighborhood is NODATA stay NODATA.
/// sigma is metric and converted to cells as sigma / cell_size.
HeightGrid gaussian_smooth(const HeightGrid& grid, const SmoothingSpec& spec);
DeformationField gaussian_smooth(const DeformationField& field, const SmoothingSpec& spec);

/// 1-D variant for profiles; sigma converted as sigma / spacing.
Profile gaussian_smooth(const Profile& profile, const SmoothingSpec& spec);

/// Deformation along `axis`, positive up. diff_then_smooth samples both
/// epochs unfiltered, subtracts, then smooths the difference line (the
/// default); smooth_then_diff smooths both grids in 2-D first, then samples
/// and subtracts, which also bridges empty cells on sparse rasters.
BendingLine bending_line(const HeightGrid& before, const HeightGrid& after, const Axis& axis,
                         double spacing, const SmoothingSpec& spec,
                         BendMode mode = BendMode::diff_then_smooth);

/// Profile through the deformation field perpendicular to `main_axis` at the
/// given chainage, smoothed per spec. The lateral extent is
/// main_axis.half_width to each side; sample chainage runs left ("north" for
/// an eastward axis) to right. `along_half_width` > 0 takes the median over
/// longitudinal offsets, like the corridor of sample_profile.
Profile cross_profile(const DeformationField& field, double chainage, const Axis& main_axis,
                      double spacing, const SmoothingSpec& spec,
                      double along_half_width = 0.0);

/// Color rule: |d| < threshold is black; descent ramps the red channel
/// linearly from 0 at -threshold to 255 at -saturation; uplift ramps green
/// likewise; NODATA is grey (128,128,128). Row 0 of the output is the
/// northernmost grid row (image convention).
RgbRaster render_deformation_map(const DeformationField& field, double threshold_m,
                                 double saturation_m);

}  // namespace deformkit::deform
