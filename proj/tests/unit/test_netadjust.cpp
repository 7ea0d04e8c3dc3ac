#include <doctest.h>

#include <cmath>
#include <random>

#include "deformkit/errors.hpp"
#include "deformkit/netadjust.hpp"
#include "obs_simulator.hpp"

using namespace deformkit;
using netadjust::AdjustedNetwork;
using netadjust::AdjustmentConfig;
using testsupport::SimulatedNetwork;
using testsupport::SimulationOptions;

namespace {

SimulatedNetwork ten_point_network() {
  SimulatedNetwork net;
  auto add = [&](const std::string& id, double e, double n, double h) {
    net.truth[id] = Point3{e, n, h};
  };
  add("S1", 0.0, 0.0, 1.0);
  add("S2", 30.0, 5.0, 1.5);
  add("P1", 5.0, 20.0, 0.5);
  add("P2", 12.0, 18.0, 2.5);
  add("P3", 20.0, 22.0, 0.8);
  add("P4", 27.0, 15.0, 1.2);
  add("P5", 8.0, -10.0, 0.3);
  add("P6", 18.0, -12.0, 2.2);
  add("P7", 25.0, -8.0, 0.9);
  add("P8", 14.0, 3.0, 3.0);
  net.stations = {"S1", "S2"};
  for (const auto& [id, p] : net.truth) {
    (void)p;
    net.gnss_points.push_back(id);
  }
  return net;
}

std::map<std::string, Point3> perturb(const std::map<std::string, Point3>& truth,
                                      double amount, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-amount, amount);
  auto out = truth;
  for (auto& [id, p] : out) {
    (void)id;
    p.e += u(rng);
    p.n += u(rng);
    p.h += u(rng);
  }
  return out;
}

}  // namespace

TEST_CASE("adjust: noise-free observations recover truth to 1e-9 from bad initials") {
  const auto net = ten_point_network();
  SimulationOptions opt;
  opt.tachymetric_noise = false;
  opt.gnss_noise = false;
  std::mt19937_64 rng(1);
  const auto obs = simulate_observations(net, opt, rng);

  AdjustmentConfig cfg;
  cfg.convergence_threshold_m = 1e-10;
  const auto adjusted = netadjust::adjust_network(obs, perturb(net.truth, 0.05, 2), cfg);
  for (const auto& [id, p] : adjusted.points) {
    const Point3& t = net.truth.at(id);
    CHECK(std::abs(p.coords.e - t.e) <= 1e-9);
    CHECK(std::abs(p.coords.n - t.n) <= 1e-9);
    CHECK(std::abs(p.coords.h - t.h) <= 1e-9);
  }
  CHECK(adjusted.redundancy > 0);
  CHECK(adjusted.iterations_used >= 2);
}

TEST_CASE("adjust: precision report on exact and shifted truth") {
  const auto net = ten_point_network();
  SimulationOptions opt;
  opt.tachymetric_noise = false;
  opt.gnss_noise = false;
  std::mt19937_64 rng(3);
  const auto obs = simulate_observations(net, opt, rng);
  AdjustmentConfig cfg;
  cfg.convergence_threshold_m = 1e-10;
  const auto adjusted = netadjust::adjust_network(obs, net.truth, cfg);

  const auto exact = netadjust::assess_precision(adjusted, net.truth);
  CHECK(exact.rmse_e_m <= 1e-9);
  CHECK(exact.rmse_h_m <= 1e-9);
  CHECK(exact.max_abs_n_m <= 1e-9);

  // Shift the truth 1 mm up: height RMSE becomes exactly 1 mm.
  auto shifted = net.truth;
  for (auto& [id, p] : shifted) {
    (void)id;
    p.h -= 0.001;
  }
  const auto off = netadjust::assess_precision(adjusted, shifted);
  CHECK(off.rmse_h_m == doctest::Approx(0.001).epsilon(1e-6));
  CHECK(off.rmse_e_m <= 1e-9);

  auto missing = net.truth;
  missing.erase("P3");
  CHECK_THROWS_AS(netadjust::assess_precision(adjusted, missing), MissingTruthPoint);
}

TEST_CASE("adjust: scale equivariance of the weight model") {
  const auto net = ten_point_network();
  SimulationOptions opt;
  std::mt19937_64 rng(4);
  auto obs = simulate_observations(net, opt, rng);
  AdjustmentConfig cfg;
  const auto base = netadjust::adjust_network(obs, net.truth, cfg);

  const double k = 3.0;
  auto scaled = obs;
  for (auto& d : scaled.distances) d.sigma_m *= k;
  for (auto& d : scaled.directions) d.sigma_gon *= k;
  for (auto& z : scaled.zeniths) z.sigma_gon *= k;
  for (auto& g : scaled.gnss) {
    g.sigma_h_m *= k;
    g.sigma_v_m *= k;
  }
  const auto rescaled = netadjust::adjust_network(scaled, net.truth, cfg);

  // Coordinates unchanged; the variance factor renormalizes by 1/k^2, so the
  // a-priori sigma sqrt(Qxx) scales by k and the a-posteriori sigma is flat.
  const double s0_base = std::sqrt(base.a_posteriori_variance_factor);
  const double s0_scaled = std::sqrt(rescaled.a_posteriori_variance_factor);
  CHECK(s0_scaled == doctest::Approx(s0_base / k).epsilon(1e-6));
  for (const auto& [id, p] : base.points) {
    const auto& q = rescaled.points.at(id);
    CHECK(std::abs(p.coords.e - q.coords.e) <= 1e-9);
    CHECK(std::abs(p.coords.h - q.coords.h) <= 1e-9);
    const double apriori_base = p.sigma_h / s0_base;
    const double apriori_scaled = q.sigma_h / s0_scaled;
    CHECK(apriori_scaled == doctest::Approx(k * apriori_base).epsilon(1e-6));
    CHECK(q.sigma_h == doctest::Approx(p.sigma_h).epsilon(1e-6));
  }
}

TEST_CASE("adjust: constant offset on one direction set moves only its orientation") {
  const auto net = ten_point_network();
  SimulationOptions opt;
  std::mt19937_64 rng(5);
  const auto obs = simulate_observations(net, opt, rng);
  AdjustmentConfig cfg;
  const auto base = netadjust::adjust_network(obs, net.truth, cfg);

  auto shifted = obs;
  const std::string station = shifted.directions.front().from;
  const std::string set_id = shifted.directions.front().set_id;
  const double offset = 12.3456;
  for (auto& d : shifted.directions) {
    if (d.from == station && d.set_id == set_id) d.value_gon = wrap_gon(d.value_gon + offset);
  }
  const auto moved = netadjust::adjust_network(shifted, net.truth, cfg);
  for (const auto& [id, p] : base.points) {
    const auto& q = moved.points.at(id);
    CHECK(std::abs(p.coords.e - q.coords.e) <= 1e-8);
    CHECK(std::abs(p.coords.n - q.coords.n) <= 1e-8);
    CHECK(std::abs(p.coords.h - q.coords.h) <= 1e-8);
  }
  const auto key = netadjust::SetKey{station, set_id};
  CHECK(wrap_gon_signed(moved.orientations.at(key).value_gon -
                        base.orientations.at(key).value_gon + offset) ==
        doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("adjust: datum defect without GNSS and without enough fixed points") {
  const auto net = ten_point_network();
  SimulationOptions opt;
  std::mt19937_64 rng(6);
  auto obs = simulate_observations(net, opt, rng);
  obs.gnss.clear();
  CHECK_THROWS_AS(netadjust::adjust_network(obs, net.truth, AdjustmentConfig{}), DatumDefect);

  // Holding three well-spread points restores a usable datum.
  AdjustmentConfig cfg;
  cfg.fixed_point_ids = {"S1", "P4", "P5"};
  const auto adjusted = netadjust::adjust_network(obs, net.truth, cfg);
  CHECK(adjusted.points.at("S1").fixed);
  CHECK(adjusted.points.at("P1").sigma_e > 0.0);
}

TEST_CASE("adjust: insufficient redundancy reported") {
  ObservationSet obs;
  obs.distances.push_back({"A", "B", 10.0, 0.001});
  obs.gnss.push_back({"A", 0, 0, 0, 0.01, 0.02});
  std::map<std::string, Point3> initial{{"A", {0, 0, 0}}, {"B", {10, 0, 0}}};
  CHECK_THROWS_AS(netadjust::adjust_network(obs, initial, AdjustmentConfig{}),
                  InsufficientRedundancy);
}

TEST_CASE("adjust: missing initial coordinate reported") {
  ObservationSet obs;
  obs.distances.push_back({"A", "B", 10.0, 0.001});
  std::map<std::string, Point3> initial{{"A", {0, 0, 0}}};
  CHECK_THROWS_AS(netadjust::adjust_network(obs, initial, AdjustmentConfig{}),
                  UnresolvedPointId);
}

TEST_CASE("adjust: iteration cap raises NoConvergence") {
  const auto net = ten_point_network();
  SimulationOptions opt;
  opt.tachymetric_noise = false;
  opt.gnss_noise = false;
  std::mt19937_64 rng(7);
  const auto obs = simulate_observations(net, opt, rng);
  AdjustmentConfig cfg;
  cfg.max_iterations = 1;
  cfg.convergence_threshold_m = 1e-12;
  CHECK_THROWS_AS(netadjust::adjust_network(obs, perturb(net.truth, 0.5, 8), cfg),
                  NoConvergence);
}

TEST_CASE("adjust: paper-like network yields sub-millimeter inner height sigma") {
  const auto net = testsupport::paper_like_network();
  SimulationOptions opt;
  std::mt19937_64 rng(9);
  const auto obs = simulate_observations(net, opt, rng);
  const auto adjusted = netadjust::adjust_network(obs, net.truth, AdjustmentConfig{});

  for (const std::string id : {"20", "21", "22", "23", "24", "25", "30"}) {
    const auto& p = adjusted.points.at(id);
    // Network-internal precision: what epoch differencing sees.
    CHECK(p.sigma_h_inner < 0.001);
    CHECK(p.sigma_e_inner < 0.001);
    CHECK(p.sigma_n_inner < 0.001);
    // Absolute sigmas include the low-weight GNSS datum and stay centimetric.
    CHECK(p.sigma_h > p.sigma_h_inner);
    CHECK(p.sigma_h < 0.02);
  }
  CHECK(adjusted.a_posteriori_variance_factor == doctest::Approx(1.0).epsilon(0.35));
}

TEST_CASE("adjust: CSV export carries coordinates and both sigma sets") {
  const auto net = ten_point_network();
  SimulationOptions opt;
  std::mt19937_64 rng(10);
  const auto obs = simulate_observations(net, opt, rng);
  const auto adjusted = netadjust::adjust_network(obs, net.truth, AdjustmentConfig{});
  const std::string csv = netadjust::write_adjusted_csv(adjusted);
  CHECK(csv.find("id,e,n,h,sigma_e,sigma_n,sigma_h,sigma_e_inner") == 0);
  CHECK(csv.find("\nP1,") != std::string::npos);
}
