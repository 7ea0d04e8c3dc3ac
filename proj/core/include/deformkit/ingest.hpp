#pragma once

#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "deformkit/types.hpp"

namespace deformkit::ingest {

/// Parses whitespace-separated "E N h [intensity]" lines. '#' starts a
/// comment line, blank lines are skipped, CRLF and LF are both accepted.
/// Intensity is all-or-nothing across the file.
PointCloud parse_xyz_cloud(std::istream& in, const std::string& epoch_id);
PointCloud parse_xyz_cloud(const std::string& text, const std::string& epoch_id);

/// CSV "id,role,E,N,h,sigmaE,sigmaN,sigmaH"; role is reference|object|station.
std::vector<ControlPoint> parse_control_points(const std::string& text);

/// Line records:
///   DIST from to value sigma
///   DIR  from to value sigma set
///   ZEN  from to value sigma
///   GNSS id e n h sigmaH sigmaV
ObservationSet parse_observations(const std::string& text);

/// Checks that every point id referenced by `obs` is in `known_ids`.
void validate_point_references(const ObservationSet& obs,
                               const std::set<std::string>& known_ids);

/// CSV "time_s,channel,kind,value"; kind is displacement|load_kN. Rows of
/// different channels may interleave, but each channel must be strictly
/// time-increasing. Returns one series per channel, ordered by channel id.
std::vector<SensorSeries> parse_transducer_series(const std::string& text);

/// CSV "chainage_m,value_m" scatter (e.g. a TLS profile line); "NA" rows are
/// skipped. Arbitrary chainage order is allowed.
std::vector<std::pair<double, double>> parse_profile_scatter(const std::string& text);

/// CSV "id,e,n,h" coordinate list (initial values, GCPs, truth fixtures).
std::vector<std::pair<std::string, Point3>> parse_coordinate_list(const std::string& text);

}  // namespace deformkit::ingest
