#pragma once

#include <optional>
#include <string>
#include <vector>

#include "deformkit/netadjust.hpp"
#include "deformkit/types.hpp"

namespace deformkit::compare {

/// Method value at each truth point: the nearest line sample when window is
/// 0, otherwise the mean over valid samples within +-window of its chainage.
/// Truth points carrying only a plan position are projected onto the line's
/// axis. Differences are method - truth in mm.
ComparisonReport evaluate_at_points(const BendingLine& line,
                                    const std::vector<GroundTruthPoint>& truth,
                                    double window_m = 0.05);

/// Field variant: mean over valid cells within a +-window square around the
/// truth position (bilinear sample when window is 0).
ComparisonReport evaluate_at_points(const DeformationField& field,
                                    const std::vector<GroundTruthPoint>& truth,
                                    double window_m = 0.05);

/// value(t_after) - value(t_before) with linear interpolation between
/// samples, sign-normalized to positive up (transducer magnitude plots are
/// down-positive). Returns mm.
double transducer_deformation(const SensorSeries& series, double t_before, double t_after);

/// Collapses tachymetric edge pairs sharing a chainage into centreline
/// points whose displacement is the mean of the pair.
std::vector<GroundTruthPoint> collapse_to_centreline(
    const std::vector<GroundTruthPoint>& points);

struct ReportInputs {
  std::vector<ComparisonReport> comparisons;
  std::optional<ResidualTable> residuals;
  std::optional<netadjust::PrecisionReport> precision;
};

struct ReportDocument {
  std::string text;              // human-readable summary
  std::string comparisons_csv;   // one row per truth point
  std::string residuals_csv;     // empty when no residual section
  std::string precision_csv;     // empty when no precision section
};

/// Deterministic: identical inputs produce byte-identical documents.
ReportDocument make_report(const ReportInputs& inputs);

}  // namespace deformkit::compare
