#include <doctest.h>

#include <cmath>
#include <random>

#include "beam_fd_oracle.hpp"
#include "deformkit/errors.hpp"
#include "deformkit/synthbridge.hpp"

using namespace deformkit;
using synthbridge::BridgeLayout;
using synthbridge::DeflectionCurve;
using synthbridge::LoadStep;
using synthbridge::NoiseModel;

namespace {

BridgeLayout calibrated_layout() {
  BridgeLayout layout;
  layout.ei_nm2 =
      synthbridge::calibrate_stiffness(layout, {layout.anchor_c_m, -0.0095}, {95.0, 0.0});
  return layout;
}

}  // namespace

TEST_CASE("beam: zero load means zero deflection everywhere") {
  const BridgeLayout layout = calibrated_layout();
  const auto w = synthbridge::beam_deflection(layout, {0.0, 0.0});
  for (double x = 0.0; x <= layout.length_m; x += 0.25) CHECK(w(x) == 0.0);
}

TEST_CASE("beam: supports stay at zero for any load") {
  const BridgeLayout layout = calibrated_layout();
  for (double load : {10.0, 40.0, 77.0, 95.0}) {
    const auto w = synthbridge::beam_deflection(layout, {load, 0.0});
    CHECK(std::abs(w(layout.support_a_m)) <= 1e-15);
    CHECK(std::abs(w(layout.support_b_m)) <= 1e-15);
  }
}

TEST_CASE("beam: matches the finite-difference oracle on randomized layouts") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int nodes = 10001;
    BridgeLayout layout;
    layout.length_m = 12.0 + 10.0 * u(rng);
    const double h = layout.length_m / (nodes - 1);
    auto snap = [&](double x) { return std::round(x / h) * h; };
    layout.support_a_m = snap(0.5 + 2.0 * u(rng));
    layout.support_b_m = snap(layout.length_m - 0.5 - 3.0 * u(rng));
    layout.anchor_c_m =
        snap(layout.support_a_m + (0.2 + 0.6 * u(rng)) * (layout.support_b_m - layout.support_a_m));
    layout.transducer_c_m = layout.anchor_c_m;
    layout.transducer_d_m = layout.support_a_m + 1.0;
    layout.cantilever_start_m = layout.support_b_m;
    layout.cantilever_end_m = layout.length_m;
    layout.ei_nm2 = 5.0e7 * std::exp(2.0 * u(rng));
    const double load_kn = 20.0 + 150.0 * u(rng);

    const auto w = synthbridge::beam_deflection(layout, {load_kn, 0.0});

    testsupport::BeamFdProblem prob;
    prob.length = layout.length_m;
    prob.support_a = layout.support_a_m;
    prob.support_b = layout.support_b_m;
    prob.load_chainage = layout.anchor_c_m;
    prob.load_n = load_kn * 1000.0;
    prob.ei = layout.ei_nm2;
    prob.nodes = nodes;
    const auto fd = testsupport::solve_beam_fd(prob);

    double w_max = 0.0;
    for (int i = 0; i < nodes; ++i) w_max = std::max(w_max, std::abs(fd[i]));
    REQUIRE(w_max > 1e-4);  // the layout actually bends
    for (int i = 0; i < nodes; i += 13) {
      const double x = i * h;
      CHECK(std::abs(w(x) - fd[i]) <= 1e-6 * w_max);
    }
  }
}

TEST_CASE("beam: cantilever rises when the span is loaded") {
  const BridgeLayout layout = calibrated_layout();
  const auto w = synthbridge::beam_deflection(layout, {95.0, 0.0});
  CHECK(w(layout.anchor_c_m) < 0.0);
  for (double x = layout.cantilever_start_m + 0.1; x <= layout.cantilever_end_m; x += 0.5) {
    CHECK(w(x) > 0.0);
  }
  // Left overhang rises too.
  CHECK(w(0.5) > 0.0);
}

TEST_CASE("beam: load outside the span rejected") {
  BridgeLayout layout;
  layout.anchor_c_m = 14.0;  // beyond support B at 13.5
  CHECK_THROWS_AS(synthbridge::beam_deflection(layout, {50.0, 0.0}), Error);
}

TEST_CASE("calibrate: target reproduced exactly and scales linearly") {
  const BridgeLayout layout = calibrated_layout();
  const auto w95 = synthbridge::beam_deflection(layout, {95.0, 0.0});
  CHECK(w95(layout.anchor_c_m) == doctest::Approx(-0.0095).epsilon(1e-12));
  // Linear elasticity: 40 kN gives -9.5 * 40 / 95 = -4.0 mm.
  const auto w40 = synthbridge::beam_deflection(layout, {40.0, 0.0});
  CHECK(w40(layout.anchor_c_m) * 1000.0 == doctest::Approx(-4.0).epsilon(1e-9));
  // Doubling EI halves deflections.
  BridgeLayout stiff = layout;
  stiff.ei_nm2 *= 2.0;
  const auto w_stiff = synthbridge::beam_deflection(stiff, {95.0, 0.0});
  for (double x : {2.0, 5.0, 7.5, 11.0, 16.0}) {
    CHECK(w_stiff(x) == doctest::Approx(0.5 * w95(x)).epsilon(1e-12));
  }
}

TEST_CASE("calibrate: unreachable targets rejected") {
  BridgeLayout layout;
  CHECK_THROWS_AS(
      synthbridge::calibrate_stiffness(layout, {layout.support_a_m, -0.01}, {95.0, 0.0}),
      UnreachableTarget);
  CHECK_THROWS_AS(synthbridge::calibrate_stiffness(layout, {7.5, 0.01}, {95.0, 0.0}),
                  UnreachableTarget);
}

TEST_CASE("cloud: zero noise, zero deflection, flat deck") {
  const BridgeLayout layout = calibrated_layout();
  NoiseModel noise;
  noise.point_sigma_m = 0.0;
  const auto cloud = synthbridge::generate_epoch_cloud(
      layout, DeflectionCurve(layout, 0.0), 50.0, noise, 0.0, false, "e3");
  REQUIRE(cloud.size() > 100);
  for (const auto& p : cloud.points) CHECK(p.h == 0.0);
}

TEST_CASE("cloud: same seed reproduces identical clouds") {
  const BridgeLayout layout = calibrated_layout();
  NoiseModel noise;
  const DeflectionCurve w(layout, 95.0);
  const auto a = synthbridge::generate_epoch_cloud(layout, w, 100.0, noise, 0.0005, true, "e");
  const auto b = synthbridge::generate_epoch_cloud(layout, w, 100.0, noise, 0.0005, true, "e");
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); i += 37) {
    CHECK(a.points[i].e == b.points[i].e);
    CHECK(a.points[i].h == b.points[i].h);
  }
}

TEST_CASE("cloud: point count follows density times area") {
  const BridgeLayout layout = calibrated_layout();
  NoiseModel noise;
  const auto cloud = synthbridge::generate_epoch_cloud(
      layout, DeflectionCurve(layout, 0.0), 1000.0, noise, 0.0, false, "e");
  const double expected = 1000.0 * 17.5 * 4.0;  // 70000
  CHECK(std::abs(static_cast<double>(cloud.size()) - expected) <= 5.0 * std::sqrt(expected));
}

TEST_CASE("cloud: clutter only raises patches, never moves points") {
  const BridgeLayout layout = calibrated_layout();
  NoiseModel noise;
  const DeflectionCurve w(layout, 0.0);
  const auto plain = synthbridge::generate_epoch_cloud(layout, w, 200.0, noise, 0.0, false, "e");
  const auto littered = synthbridge::generate_epoch_cloud(layout, w, 200.0, noise, 0.0, true, "e");
  REQUIRE(plain.size() == littered.size());
  int raised = 0;
  for (std::size_t i = 0; i < plain.size(); ++i) {
    CHECK(plain.points[i].e == littered.points[i].e);
    CHECK(plain.points[i].n == littered.points[i].n);
    if (littered.points[i].h > plain.points[i].h + 0.01) ++raised;
    CHECK(littered.points[i].h >= plain.points[i].h);
  }
  CHECK(raised > 10);
}

TEST_CASE("tls: sigma reaches 3 mm at 10 m range") {
  NoiseModel noise;
  CHECK(noise.tls_sigma0_m + noise.tls_slope_m_per_m * 10.0 == doctest::Approx(0.003));
}

TEST_CASE("tls: shadow interval has no samples, zero noise lies on the curve") {
  const BridgeLayout layout = calibrated_layout();
  const DeflectionCurve w(layout, 95.0);
  NoiseModel quiet;
  quiet.tls_sigma0_m = 0.0;
  quiet.tls_slope_m_per_m = 0.0;
  const auto scatter =
      synthbridge::generate_tls_profile(layout, w, 3.0, quiet, {{12.5, 14.5}});
  REQUIRE(scatter.size() > 1000);
  bool had_beyond = false;
  for (const auto& [x, h] : scatter) {
    CHECK((x < 12.5 || x > 14.5));
    CHECK(h == doctest::Approx(w(x)).epsilon(1e-12));
    had_beyond = had_beyond || x > 14.5;
  }
  CHECK(had_beyond);  // returns continue past the shadow
}

TEST_CASE("tls: sample spacing grows with range") {
  const BridgeLayout layout = calibrated_layout();
  const DeflectionCurve w(layout, 0.0);
  NoiseModel quiet;
  quiet.tls_sigma0_m = 0.0;
  quiet.tls_slope_m_per_m = 0.0;
  const auto scatter = synthbridge::generate_tls_profile(layout, w, 3.0, quiet, {});
  double near_gap = 0.0, far_gap = 0.0;
  for (std::size_t i = 1; i < scatter.size(); ++i) {
    const double mid = 0.5 * (scatter[i].first + scatter[i - 1].first);
    const double gap = scatter[i].first - scatter[i - 1].first;
    if (std::abs(mid - 3.0) < 0.2) near_gap = gap;
    if (std::abs(mid - 16.0) < 0.2) far_gap = gap;
  }
  CHECK(near_gap > 0.0);
  CHECK(far_gap > 10.0 * near_gap);
}

TEST_CASE("transducer truth: three-step schedule gives the linear-model values") {
  const BridgeLayout layout = calibrated_layout();
  const std::vector<LoadStep> steps = {{0, 0}, {40, 600}, {77, 1200}, {95, 1800}};
  const auto series = synthbridge::generate_transducer_truth(layout, steps);
  REQUIRE(series.size() == 3);
  const auto& c = series[0];
  REQUIRE(c.channel == "C");
  CHECK(c.down_positive);
  CHECK(c.samples[0].value == doctest::Approx(0.0));
  CHECK(c.samples[1].value == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(c.samples[2].value == doctest::Approx(7.7).epsilon(1e-9));
  CHECK(c.samples[3].value == doctest::Approx(9.5).epsilon(1e-9));
  // D sits where the model gives about -4 mm under the full load.
  const auto& d = series[1];
  REQUIRE(d.channel == "D");
  CHECK(d.samples[3].value == doctest::Approx(4.0).epsilon(0.02));
  // Monotone in load for the linear model.
  for (std::size_t i = 1; i < d.samples.size(); ++i) {
    CHECK(d.samples[i].value >= d.samples[i - 1].value);
  }
  // Load channel carries the schedule.
  CHECK(series[2].kind == SeriesKind::load_kN);
  CHECK(series[2].samples[3].value == 95.0);
}

TEST_CASE("transducer truth: zero-load schedule gives zero series") {
  const BridgeLayout layout = calibrated_layout();
  const auto series = synthbridge::generate_transducer_truth(layout, {{0, 0}, {0, 100}});
  for (const auto& s : series) {
    for (const auto& sample : s.samples) CHECK(sample.value == 0.0);
  }
}

TEST_CASE("layout: round-trips through key=value text") {
  BridgeLayout layout = calibrated_layout();
  const auto back = synthbridge::parse_layout(synthbridge::write_layout(layout));
  CHECK(back.support_a_m == doctest::Approx(layout.support_a_m));
  CHECK(back.ei_nm2 == doctest::Approx(layout.ei_nm2).epsilon(1e-9));
  CHECK_THROWS_AS(synthbridge::parse_layout("nonsense=1\n"), ConfigError);
}

TEST_CASE("layout: invalid geometry rejected") {
  BridgeLayout layout;
  layout.support_a_m = 9.0;  // A > C
  CHECK_THROWS_AS(layout.validate(), Error);
}
