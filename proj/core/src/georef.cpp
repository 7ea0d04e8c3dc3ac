#include "deformkit/georef.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "deformkit/errors.hpp"

namespace deformkit::georef {

EstimationResult estimate_similarity(const std::vector<Correspondence>& correspondences,
                                     bool allow_scale) {
  const std::size_t n = correspondences.size();
  if (n < 3) throw TooFewPoints(n, 3);

  Eigen::Vector3d src_center = Eigen::Vector3d::Zero();
  Eigen::Vector3d dst_center = Eigen::Vector3d::Zero();
  for (const auto& c : correspondences) {
    src_center += c.source;
    dst_center += c.target;
  }
  src_center /= static_cast<double>(n);
  dst_center /= static_cast<double>(n);

  // Centered cross-covariance, plus the source scatter to detect degenerate
  // geometry: similarity estimation needs at least a plane of points.
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d src_scatter = Eigen::Matrix3d::Zero();
  double src_norm2 = 0.0;
  for (const auto& c : correspondences) {
    const Eigen::Vector3d s = c.source - src_center;
    const Eigen::Vector3d d = c.target - dst_center;
    cov += s * d.transpose();
    src_scatter += s * s.transpose();
    src_norm2 += s.squaredNorm();
  }
  {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> scatter_eig(src_scatter);
    const Eigen::Vector3d ev = scatter_eig.eigenvalues();  // ascending
    if (ev(2) <= 0.0) throw DegenerateGeometry("all source points coincide");
    if (ev(1) <= 1e-12 * ev(2)) throw DegenerateGeometry("source points are collinear");
  }

  // Quaternion absolute orientation: the optimal rotation is the eigenvector
  // of the 4x4 gram matrix built from the cross-covariance.
  const Eigen::Matrix3d& M = cov;
  Eigen::Matrix4d N;
  N << M(0, 0) + M(1, 1) + M(2, 2), M(1, 2) - M(2, 1), M(2, 0) - M(0, 2), M(0, 1) - M(1, 0),
      M(1, 2) - M(2, 1), M(0, 0) - M(1, 1) - M(2, 2), M(0, 1) + M(1, 0), M(2, 0) + M(0, 2),
      M(2, 0) - M(0, 2), M(0, 1) + M(1, 0), M(1, 1) - M(0, 0) - M(2, 2), M(1, 2) + M(2, 1),
      M(0, 1) - M(1, 0), M(2, 0) + M(0, 2), M(1, 2) + M(2, 1), M(2, 2) - M(0, 0) - M(1, 1);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(N);
  const Eigen::Vector4d q_vec = eig.eigenvectors().col(3);  // largest eigenvalue

  EstimationResult result;
  result.transform.rotation =
      Eigen::Quaterniond(q_vec(0), q_vec(1), q_vec(2), q_vec(3)).normalized();

  if (allow_scale) {
    double dot = 0.0;
    for (const auto& c : correspondences) {
      const Eigen::Vector3d s = c.source - src_center;
      const Eigen::Vector3d d = c.target - dst_center;
      dot += (result.transform.rotation * s).dot(d);
    }
    if (!(dot > 0.0) || !(src_norm2 > 0.0)) {
      throw DegenerateGeometry("scale is not recoverable from these correspondences");
    }
    result.transform.scale = dot / src_norm2;
  } else {
    result.transform.scale = 1.0;
  }
  result.transform.translation =
      dst_center - result.transform.scale * (result.transform.rotation * src_center);

  double sum_sq = 0.0;
  result.residuals_m.reserve(n);
  for (const auto& c : correspondences) {
    const double r = (result.transform.apply(c.source) - c.target).norm();
    result.residuals_m.push_back(r);
    sum_sq += r * r;
  }
  result.rms_m = std::sqrt(sum_sq / static_cast<double>(n));
  return result;
}

PointCloud apply_transform(const PointCloud& cloud, const SimilarityTransform& t) {
  PointCloud out = cloud;
  for (auto& p : out.points) p = t.apply(p);
  return out;
}

ResidualTable checkpoint_residuals(const CheckpointSet& measured,
                                   const CheckpointSet& reference) {
  for (const auto& [key, value] : measured) {
    (void)value;
    if (!reference.count(key)) throw KeyMismatch(key.first, key.second);
  }
  for (const auto& [key, value] : reference) {
    (void)value;
    if (!measured.count(key)) throw KeyMismatch(key.first, key.second);
  }
  ResidualTable table;
  table.rows.reserve(measured.size());
  for (const auto& [key, m] : measured) {
    const Point3& r = reference.at(key);
    ResidualRow row;
    row.cp_id = key.first;
    row.epoch = key.second;
    row.de_mm = (m.e - r.e) * 1000.0;
    row.dn_mm = (m.n - r.n) * 1000.0;
    row.dh_mm = (m.h - r.h) * 1000.0;
    table.rows.push_back(std::move(row));
  }
  return table;
}

ResidualStats summarize_residuals(const ResidualTable& table) {
  if (table.rows.empty()) throw EmptyTable();
  ResidualStats stats;
  double se = 0.0, sn = 0.0, sh = 0.0;
  double qe = 0.0, qn = 0.0, qh = 0.0;
  std::map<std::string, std::pair<double, int>> per_epoch;  // sum of squares, count
  for (const auto& row : table.rows) {
    se += row.de_mm;
    sn += row.dn_mm;
    sh += row.dh_mm;
    qe += row.de_mm * row.de_mm;
    qn += row.dn_mm * row.dn_mm;
    qh += row.dh_mm * row.dh_mm;
    auto& [ssq, count] = per_epoch[row.epoch];
    ssq += row.de_mm * row.de_mm + row.dn_mm * row.dn_mm + row.dh_mm * row.dh_mm;
    count += 3;
    const struct {
      double v;
      const char* name;
    } comps[] = {{row.de_mm, "easting"}, {row.dn_mm, "northing"}, {row.dh_mm, "altitude"}};
    for (const auto& c : comps) {
      if (std::abs(c.v) > stats.max_abs_mm) {
        stats.max_abs_mm = std::abs(c.v);
        stats.max_abs_cp = row.cp_id;
        stats.max_abs_epoch = row.epoch;
        stats.max_abs_component = c.name;
      }
    }
  }
  const double n = static_cast<double>(table.rows.size());
  stats.mean_e_mm = se / n;
  stats.mean_n_mm = sn / n;
  stats.mean_h_mm = sh / n;
  stats.rmse_e_mm = std::sqrt(qe / n);
  stats.rmse_n_mm = std::sqrt(qn / n);
  stats.rmse_h_mm = std::sqrt(qh / n);
  for (const auto& [epoch, acc] : per_epoch) {
    stats.per_epoch_rmse_mm[epoch] = std::sqrt(acc.first / acc.second);
  }
  return stats;
}

double stable_ground_bias(const DeformationField& field, const std::vector<StableArea>& areas) {
  std::vector<double> values;
  const HeightGrid& g = field.raster;
  for (int row = 0; row < g.nrows; ++row) {
    const double n = g.cell_center_n(row);
    for (int col = 0; col < g.ncols; ++col) {
      const double v = g.at(row, col);
      if (is_nodata(v)) continue;
      const double e = g.cell_center_e(col);
      for (const auto& a : areas) {
        if (e >= a.min_e && e <= a.max_e && n >= a.min_n && n <= a.max_n) {
          values.push_back(v);
          break;
        }
      }
    }
  }
  if (values.empty()) return nodata();
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size();
  return m % 2 == 1 ? values[m / 2] : 0.5 * (values[m / 2 - 1] + values[m / 2]);
}

DeformationField remove_vertical_bias(const DeformationField& field,
                                      const std::vector<StableArea>& areas) {
  const double bias = stable_ground_bias(field, areas);
  if (is_nodata(bias)) {
    throw Error("no valid deformation cells inside the declared stable areas");
  }
  DeformationField out = field;
  for (auto& v : out.raster.heights) {
    if (!is_nodata(v)) v -= bias;
  }
  return out;
}

}  // namespace deformkit::georef
