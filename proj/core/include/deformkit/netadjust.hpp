#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "deformkit/types.hpp"

namespace deformkit::netadjust {

/// Default instrument sigmas used when simulating or documenting networks:
/// high precision tachymeter plus low-weight GNSS datum priors.
struct InstrumentSigmas {
  double direction_gon = 3e-4;  // 0.3 mgon
  double zenith_gon = 3e-4;
  double distance_const_m = 0.001;  // 1 mm
  double distance_ppm = 1.5;
  double gnss_horizontal_m = 0.010;
  double gnss_vertical_m = 0.020;

  double distance_sigma(double range_m) const {
    return distance_const_m + distance_ppm * 1e-6 * range_m;
  }
};

struct AdjustmentConfig {
  int max_iterations = 20;
  double convergence_threshold_m = 1e-5;
  bool check_redundancy = true;
  /// Points held at their initial coordinates (removed from the unknowns).
  /// Three or more fixed points define a datum without GNSS priors.
  std::vector<std::string> fixed_point_ids;
};

struct AdjustedPoint {
  Point3 coords;
  // A-posteriori standard deviations from the scaled inverse normal matrix.
  // These include the datum uncertainty contributed by the GNSS priors.
  double sigma_e = 0.0, sigma_n = 0.0, sigma_h = 0.0;
  // Network-internal precision: the same covariance mapped into a datum that
  // is free of common translation and azimuth. This is the figure relevant
  // to epoch-to-epoch deformation, where the datum is shared and cancels.
  double sigma_e_inner = 0.0, sigma_n_inner = 0.0, sigma_h_inner = 0.0;
  bool fixed = false;
};

using SetKey = std::pair<std::string, std::string>;  // (station, set_id)

struct OrientationSolution {
  double value_gon = 0.0;
  double sigma_gon = 0.0;
};

struct AdjustedNetwork {
  std::map<std::string, AdjustedPoint> points;
  std::map<SetKey, OrientationSolution> orientations;
  double a_posteriori_variance_factor = 0.0;  // s0^2
  int iterations_used = 0;
  int observation_count = 0;
  int unknown_count = 0;
  int redundancy = 0;
};

/// Iterated linearized Gauss-Markov adjustment of distances, direction sets
/// (one orientation unknown per set), zenith angles and GNSS coordinate
/// priors. Converges when the largest coordinate update drops below the
/// configured threshold. The covariance comes from the inverse normal matrix
/// scaled by the a-posteriori variance factor.
AdjustedNetwork adjust_network(const ObservationSet& obs,
                               const std::map<std::string, Point3>& initial,
                               const AdjustmentConfig& cfg = {});

struct PrecisionReport {
  struct PerPoint {
    std::string id;
    double de_m = 0.0, dn_m = 0.0, dh_m = 0.0;  // adjusted - truth
  };
  std::vector<PerPoint> per_point;
  double rmse_e_m = 0.0, rmse_n_m = 0.0, rmse_h_m = 0.0;
  double max_abs_e_m = 0.0, max_abs_n_m = 0.0, max_abs_h_m = 0.0;
  // Mean reported sigma per component, for comparison against the errors.
  double mean_sigma_e_m = 0.0, mean_sigma_n_m = 0.0, mean_sigma_h_m = 0.0;
};

/// Truth must cover every adjusted point.
PrecisionReport assess_precision(const AdjustedNetwork& net,
                                 const std::map<std::string, Point3>& truth);

struct ConsistencyRatios {
  // Empirical scatter of the replications divided by the mean reported
  // sigma, per component. Near 1 when the stochastic model is consistent.
  double e = 0.0, n = 0.0, h = 0.0;
};

/// Monte Carlo batch check: empirical standard deviation of the adjusted
/// coordinates across replications vs the mean reported sigma.
ConsistencyRatios sigma_consistency(const std::vector<AdjustedNetwork>& replications);

/// CSV "id,e,n,h,sigma_e,sigma_n,sigma_h,sigma_e_inner,sigma_n_inner,
/// sigma_h_inner", meters with 6 decimals, rows sorted by id.
std::string write_adjusted_csv(const AdjustedNetwork& net);

}  // namespace deformkit::netadjust
