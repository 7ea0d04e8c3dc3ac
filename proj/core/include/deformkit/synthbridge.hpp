#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "deformkit/types.hpp"

namespace deformkit::synthbridge {

/// Parameterized single-span deck with overhangs. The exact chainages are
/// configuration: A/B supports, C the ground-anchor (and mid-field
/// transducer) position, D the transducer near support A, E the cantilever
/// range beyond a support. Chainage runs along easting, the deck spans
/// northing [-width/2, +width/2] around the centreline, deck base height 0.
struct BridgeLayout {
  double length_m = 17.5;
  double width_m = 4.0;
  double support_a_m = 1.5;
  double support_b_m = 13.5;
  double anchor_c_m = 7.5;
  double transducer_c_m = 7.5;
  double transducer_d_m = 3.25;
  double cantilever_start_m = 13.5;
  double cantilever_end_m = 17.5;
  double ei_nm2 = 2.0e8;  // bending stiffness; see calibrate_stiffness

  void validate() const;
};

struct LoadStep {
  double load_kn = 0.0;
  double time_s = 0.0;
};

struct NoiseModel {
  double point_sigma_m = 0.002;     // cloud height noise
  double tls_sigma0_m = 0.0005;     // TLS noise at zero range
  double tls_slope_m_per_m = 0.00025;  // TLS noise growth with range
  std::uint64_t seed = 42;
};

/// Closed-form Euler-Bernoulli deflection of the simply supported span under
/// a point load at the anchor, positive up (so loaded means negative between
/// the supports). The overhangs carry no load and rotate rigidly with the
/// slope at their support, hence they rise. w(A) = w(B) = 0 exactly.
class DeflectionCurve {
public:
  DeflectionCurve() = default;
  DeflectionCurve(const BridgeLayout& layout, double load_kn);

  double operator()(double chainage_m) const;
  double load_kn() const { return load_kn_; }

private:
  double a_ = 0.0;       // support A chainage
  double b_ = 1.0;       // support B chainage
  double span_ = 1.0;    // B - A
  double la_ = 0.5;      // load offset from A
  double lb_ = 0.5;      // load offset from B
  double p_over_ei_ = 0.0;  // load [N] / EI [N m^2]
  double load_kn_ = 0.0;
};

DeflectionCurve beam_deflection(const BridgeLayout& layout, const LoadStep& load);

/// EI such that the deflection at target.first (strictly between the
/// supports) equals target.second (< 0) under `load`. Deflection is linear
/// in 1/EI, so this is closed-form.
double calibrate_stiffness(const BridgeLayout& layout,
                           const std::pair<double, double>& target, const LoadStep& load);

/// Seeded uniform deck sampling; height = deflection + cross_tilt * lateral
/// offset + Gaussian noise. Positive cross_tilt lowers the southern edge.
/// The clutter flag raises a few box-shaped patches (tripods, cables) without
/// changing the point positions drawn for the same seed.
PointCloud generate_epoch_cloud(const BridgeLayout& layout, const DeflectionCurve& deflection,
                                double density_per_m2, const NoiseModel& noise,
                                double cross_tilt_m_per_m, bool clutter,
                                const std::string& epoch_id);

/// Underside profile scatter from a fixed scanner position below the deck.
/// Angular sampling at 0.3 mrad, per-point sigma = sigma0 + slope * range,
/// no returns inside the shadow intervals.
std::vector<std::pair<double, double>> generate_tls_profile(
    const BridgeLayout& layout, const DeflectionCurve& deflection, double scanner_chainage_m,
    const NoiseModel& noise, const std::vector<std::pair<double, double>>& shadow_ranges,
    double scanner_drop_m = 1.3);

/// Stepwise transducer series at chainages C and D plus the load channel.
/// Displacement channels are recorded down-positive like the real sensors.
std::vector<SensorSeries> generate_transducer_truth(const BridgeLayout& layout,
                                                    const std::vector<LoadStep>& steps);

// Layout files are flat key=value text.
BridgeLayout parse_layout(const std::string& text);
std::string write_layout(const BridgeLayout& layout);

// Load schedules are CSV "time_s,load_kN".
std::vector<LoadStep> parse_load_steps(const std::string& text);
std::string write_load_steps(const std::vector<LoadStep>& steps);

}  // namespace deformkit::synthbridge
