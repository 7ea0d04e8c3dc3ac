#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "deformkit/types.hpp"

namespace deformkit::georef {

/// p' = scale * R * p + t. Rotation is kept as a unit quaternion so the
/// round trip through compose/inverse stays orthonormal.
struct SimilarityTransform {
  double scale = 1.0;
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const {
    return scale * (rotation * p) + translation;
  }
  Point3 apply(const Point3& p) const {
    const Eigen::Vector3d q = apply(Eigen::Vector3d(p.e, p.n, p.h));
    return Point3{q.x(), q.y(), q.z()};
  }
  SimilarityTransform inverse() const {
    SimilarityTransform inv;
    inv.scale = 1.0 / scale;
    inv.rotation = rotation.conjugate();
    inv.translation = -(inv.scale * (inv.rotation * translation));
    return inv;
  }
};

struct Correspondence {
  Eigen::Vector3d source;
  Eigen::Vector3d target;
};

struct EstimationResult {
  SimilarityTransform transform;
  std::vector<double> residuals_m;  // |T(source) - target| per correspondence
  double rms_m = 0.0;
};

/// Closed-form least-squares similarity (quaternion absolute orientation).
/// Needs >= 3 non-collinear correspondences. allow_scale=false estimates a
/// rigid 6-parameter transform for pre-scaled clouds.
EstimationResult estimate_similarity(const std::vector<Correspondence>& correspondences,
                                     bool allow_scale = true);

/// Maps every point; epoch id is preserved.
PointCloud apply_transform(const PointCloud& cloud, const SimilarityTransform& t);

using CheckpointKey = std::pair<std::string, std::string>;  // (id, epoch)
using CheckpointSet = std::map<CheckpointKey, Point3>;

/// Component-wise measured-in-cloud minus tachymetric reference, in mm.
/// Key sets must match exactly.
ResidualTable checkpoint_residuals(const CheckpointSet& measured,
                                   const CheckpointSet& reference);

ResidualStats summarize_residuals(const ResidualTable& table);

/// Median deformation over cells inside any of the declared stable-ground
/// rectangles (plan-axis-aligned, meters). Subtracting it removes a uniform
/// vertical bias of the block; NaN when no valid cell falls inside.
struct StableArea {
  double min_e = 0.0, min_n = 0.0, max_e = 0.0, max_n = 0.0;
};
double stable_ground_bias(const DeformationField& field, const std::vector<StableArea>& areas);
DeformationField remove_vertical_bias(const DeformationField& field,
                                      const std::vector<StableArea>& areas);

}  // namespace deformkit::georef
