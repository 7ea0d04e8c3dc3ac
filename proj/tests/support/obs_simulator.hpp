#pragma once

// Observation generator for adjustment tests: exact geometric observations
// from truth coordinates, optionally perturbed with the instrument noise
// model. Kept in test code so the adjustment never sees its own inverse.

#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "deformkit/netadjust.hpp"
#include "deformkit/types.hpp"

namespace testsupport {

struct SimulatedNetwork {
  std::map<std::string, deformkit::Point3> truth;
  std::vector<std::string> stations;
  std::vector<std::string> gnss_points;  // points carrying a GNSS prior
};

/// Reference field around a 17.5 x 4 m deck: two instrument stations, six
/// ground control points, two elevated wall targets and seven deck points.
inline SimulatedNetwork paper_like_network() {
  SimulatedNetwork net;
  auto add = [&](const std::string& id, double e, double n, double h) {
    net.truth[id] = deformkit::Point3{e, n, h};
  };
  add("10", -6.0, -6.0, 0.20);   // station
  add("40", 23.0, 6.0, 0.35);    // station
  add("1", -4.0, -5.0, 0.10);    // GCPs
  add("2", -4.0, 5.0, 0.15);
  add("3", 8.0, -6.0, 0.05);
  add("5", 8.0, 6.0, 0.10);
  add("7", 20.0, -5.0, 0.12);
  add("8", 20.0, 5.0, 0.08);
  add("R1", -10.0, 10.0, 6.00);  // wall targets
  add("R2", -12.0, 8.0, 5.50);
  add("20", 0.5, 0.0, 2.20);     // deck points
  add("21", 4.0, 0.0, 2.20);
  add("22", 7.5, 1.8, 2.20);
  add("23", 7.5, -1.8, 2.20);
  add("24", 11.0, 0.0, 2.20);
  add("25", 14.0, 0.0, 2.20);
  add("30", 17.0, 0.0, 2.20);
  net.stations = {"10", "40"};
  for (const auto& [id, p] : net.truth) {
    (void)p;
    net.gnss_points.push_back(id);
  }
  return net;
}

struct SimulationOptions {
  int sets_per_station = 2;
  bool tachymetric_noise = true;
  bool gnss_noise = true;
  deformkit::netadjust::InstrumentSigmas sigmas;
};

inline deformkit::ObservationSet simulate_observations(const SimulatedNetwork& net,
                                                       const SimulationOptions& opt,
                                                       std::mt19937_64& rng) {
  using namespace deformkit;
  ObservationSet obs;
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uniform_gon(0.0, 400.0);
  auto noise = [&](double sigma) { return opt.tachymetric_noise ? sigma * gauss(rng) : 0.0; };

  for (const auto& station : net.stations) {
    const Point3& s = net.truth.at(station);
    for (int set = 0; set < opt.sets_per_station; ++set) {
      const std::string set_id = std::to_string(set + 1);
      const double omega = uniform_gon(rng);  // unknown circle orientation
      for (const auto& [id, t] : net.truth) {
        if (id == station) continue;
        const double de = t.e - s.e, dn = t.n - s.n, dh = t.h - s.h;
        const double hd = std::hypot(de, dn);
        const double dist = std::sqrt(de * de + dn * dn + dh * dh);
        const double az = wrap_gon(std::atan2(de, dn) * kGonPerRad);

        DistanceObs dobs;
        dobs.from = station;
        dobs.to = id;
        dobs.sigma_m = opt.sigmas.distance_sigma(dist);
        dobs.value_m = dist + noise(dobs.sigma_m);
        obs.distances.push_back(dobs);

        DirectionObs robs;
        robs.from = station;
        robs.to = id;
        robs.set_id = set_id;
        robs.sigma_gon = opt.sigmas.direction_gon;
        robs.value_gon = wrap_gon(az - omega + noise(robs.sigma_gon));
        obs.directions.push_back(robs);

        ZenithObs zobs;
        zobs.from = station;
        zobs.to = id;
        zobs.sigma_gon = opt.sigmas.zenith_gon;
        zobs.value_gon = std::atan2(hd, dh) * kGonPerRad + noise(zobs.sigma_gon);
        obs.zeniths.push_back(zobs);
      }
    }
  }
  for (const auto& id : net.gnss_points) {
    const Point3& p = net.truth.at(id);
    GnssObs g;
    g.id = id;
    g.sigma_h_m = opt.sigmas.gnss_horizontal_m;
    g.sigma_v_m = opt.sigmas.gnss_vertical_m;
    const double ne = opt.gnss_noise ? g.sigma_h_m * gauss(rng) : 0.0;
    const double nn = opt.gnss_noise ? g.sigma_h_m * gauss(rng) : 0.0;
    const double nh = opt.gnss_noise ? g.sigma_v_m * gauss(rng) : 0.0;
    g.e = p.e + ne;
    g.n = p.n + nn;
    g.h = p.h + nh;
    obs.gnss.push_back(g);
  }
  return obs;
}

}  // namespace testsupport
