#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace deformkit {

// All coordinates are meters in a projected E/N/h frame. Angles are gon.
// Raster cells and profile samples without valid data hold NaN ("NODATA").

inline double nodata() { return std::numeric_limits<double>::quiet_NaN(); }
inline bool is_nodata(double v) { return std::isnan(v); }

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kGonPerRad = 200.0 / kPi;
constexpr double kRadPerGon = kPi / 200.0;

inline double wrap_gon(double g) {  // to [0, 400)
  g = std::fmod(g, 400.0);
  return g < 0.0 ? g + 400.0 : g;
}
inline double wrap_gon_signed(double g) {  // to (-200, 200]
  g = wrap_gon(g);
  return g > 200.0 ? g - 400.0 : g;
}

// ---- point clouds ----------------------------------------------------------

struct Point3 {
  double e = 0.0;
  double n = 0.0;
  double h = 0.0;
};

struct PointCloud {
  std::string epoch_id;
  std::vector<Point3> points;
  std::vector<double> intensity;  // empty when absent, else one per point

  std::size_t size() const { return points.size(); }
  bool has_intensity() const { return !intensity.empty(); }
};

// ---- control network -------------------------------------------------------

enum class PointRole { reference, object, station };

struct ControlPoint {
  std::string id;
  double e = 0.0, n = 0.0, h = 0.0;
  double sigma_e = 0.0, sigma_n = 0.0, sigma_h = 0.0;
  PointRole role = PointRole::reference;
};

struct DistanceObs {
  std::string from, to;
  double value_m = 0.0;
  double sigma_m = 0.0;
};

struct DirectionObs {
  std::string from, to;
  double value_gon = 0.0;
  double sigma_gon = 0.0;
  std::string set_id;
};

struct ZenithObs {
  std::string from, to;
  double value_gon = 0.0;
  double sigma_gon = 0.0;
};

struct GnssObs {
  std::string id;
  double e = 0.0, n = 0.0, h = 0.0;
  double sigma_h_m = 0.0;  // horizontal, per component
  double sigma_v_m = 0.0;  // vertical
};

struct ObservationSet {
  std::vector<DistanceObs> distances;
  std::vector<DirectionObs> directions;
  std::vector<ZenithObs> zeniths;
  std::vector<GnssObs> gnss;

  std::size_t count() const {
    // A GNSS position contributes three scalar observations (e, n, h).
    return distances.size() + directions.size() + zeniths.size() + 3 * gnss.size();
  }
};

// ---- sensors ---------------------------------------------------------------

enum class SeriesKind { displacement, load_kN };

struct SensorSample {
  double time_s = 0.0;
  double value = 0.0;  // mm for displacement, kN for load channels
};

struct SensorSeries {
  std::string channel;
  SeriesKind kind = SeriesKind::displacement;
  std::vector<SensorSample> samples;
  // Transducer plots report deformation magnitude, i.e. downward positive.
  bool down_positive = true;
};

// ---- rasters ---------------------------------------------------------------

/// Regular height raster. `origin` is the lower-left corner (ESRI xllcorner
/// convention); cells are stored row-major with row 0 the southernmost row.
/// Cell (row, col) has its center at origin + (col + 0.5, row + 0.5) * cell.
struct HeightGrid {
  double origin_e = 0.0;
  double origin_n = 0.0;
  double cell_size = 0.0;
  int ncols = 0;
  int nrows = 0;
  std::vector<double> heights;  // NaN = NODATA
  std::string epoch_id;

  double& at(int row, int col) { return heights[static_cast<std::size_t>(row) * ncols + col]; }
  double at(int row, int col) const {
    return heights[static_cast<std::size_t>(row) * ncols + col];
  }
  bool in_bounds(int row, int col) const {
    return row >= 0 && row < nrows && col >= 0 && col < ncols;
  }
  double cell_center_e(int col) const { return origin_e + (col + 0.5) * cell_size; }
  double cell_center_n(int row) const { return origin_n + (row + 0.5) * cell_size; }

  bool same_frame(const HeightGrid& o, double tol = 1e-9) const {
    return ncols == o.ncols && nrows == o.nrows &&
           std::abs(origin_e - o.origin_e) <= tol &&
           std::abs(origin_n - o.origin_n) <= tol &&
           std::abs(cell_size - o.cell_size) <= tol;
  }
};

/// Epoch-to-epoch height difference on the shared raster frame of its inputs,
/// cell-wise h_after - h_before (positive up).
struct DeformationField {
  HeightGrid raster;
  std::string epoch_before;
  std::string epoch_after;
};

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

struct RgbRaster {
  int ncols = 0;
  int nrows = 0;
  std::vector<Rgb> pixels;  // row-major, row 0 = top row (image convention)
};

// ---- axes and profiles -----------------------------------------------------

struct Axis {
  double start_e = 0.0, start_n = 0.0;
  double end_e = 0.0, end_n = 0.0;
  double half_width = 0.0;

  double length() const { return std::hypot(end_e - start_e, end_n - start_n); }
  // Unit vector along the axis.
  void unit(double& ue, double& un) const {
    const double len = length();
    ue = (end_e - start_e) / len;
    un = (end_n - start_n) / len;
  }
  // Unit normal, 90 deg counter-clockwise from the axis direction ("left").
  void normal(double& ne, double& nn) const {
    double ue, un;
    unit(ue, un);
    ne = -un;
    nn = ue;
  }
  void point_at(double chainage, double offset, double& e, double& n) const {
    double ue, un, ne, nn;
    unit(ue, un);
    normal(ne, nn);
    e = start_e + chainage * ue + offset * ne;
    n = start_n + chainage * un + offset * nn;
  }
};

/// Uniformly spaced samples along an axis. chainage(i) = start_chainage +
/// i * spacing, with start_chainage 0 when the profile begins at the axis
/// start. Profiles re-rastered from loose scatter have no backing axis.
struct Profile {
  std::optional<Axis> axis;
  double spacing = 0.0;
  double start_chainage = 0.0;
  std::vector<double> values;  // NaN = NODATA

  double chainage(std::size_t i) const { return start_chainage + static_cast<double>(i) * spacing; }
  std::size_t size() const { return values.size(); }
};

// ---- smoothing / bending ---------------------------------------------------

/// Gaussian smoothing in metric units. NODATA handling is normalized
/// convolution: the kernel is renormalized over valid support, and a cell is
/// produced wherever any valid input lies within the truncation radius;
/// neighborhoods that are entirely NODATA stay NODATA.
struct SmoothingSpec {
  double sigma_m = 0.01;
  double truncation = 4.0;  // kernel radius in multiples of sigma, >= 3

  bool valid() const { return sigma_m > 0.0 && truncation >= 3.0; }
  /// sigma below half a cell degenerates to near-identity; callers may warn.
  bool degenerate_for(double cell_size) const { return sigma_m < 0.5 * cell_size; }
};

enum class BendMode { diff_then_smooth, smooth_then_diff };

struct BendingLine {
  Profile profile;  // values are deformation in meters, positive up
  std::string epoch_before;
  std::string epoch_after;
  double sigma_m = 0.0;
  BendMode mode = BendMode::diff_then_smooth;
};

// ---- comparison ------------------------------------------------------------

enum class TruthSource { transducer, tachymeter };

struct GroundTruthPoint {
  std::string id;
  std::optional<Point3> position;      // E/N (h unused) when known in plan
  std::optional<double> chainage_m;    // along the evaluated axis
  double displacement_mm = 0.0;        // positive up
  TruthSource source = TruthSource::transducer;
};

struct ComparisonRow {
  std::string id;
  double method_mm = 0.0;
  double truth_mm = 0.0;
  double diff_mm = 0.0;  // method - truth
};

struct ComparisonReport {
  std::string method;
  std::vector<ComparisonRow> rows;
  double rmse_mm = 0.0;
  double mean_mm = 0.0;
  double max_abs_mm = 0.0;
};

// ---- georef residuals ------------------------------------------------------

struct ResidualRow {
  std::string cp_id;
  std::string epoch;
  double de_mm = 0.0;  // measured-in-cloud minus tachymetric reference
  double dn_mm = 0.0;
  double dh_mm = 0.0;
};

struct ResidualTable {
  std::vector<ResidualRow> rows;
};

struct ResidualStats {
  double rmse_e_mm = 0.0, rmse_n_mm = 0.0, rmse_h_mm = 0.0;
  double mean_e_mm = 0.0, mean_n_mm = 0.0, mean_h_mm = 0.0;
  double max_abs_mm = 0.0;   // over all components and rows
  std::string max_abs_cp;
  std::string max_abs_epoch;
  std::string max_abs_component;
  std::map<std::string, double> per_epoch_rmse_mm;  // pooled over components
};

}  // namespace deformkit
