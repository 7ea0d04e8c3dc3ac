#include "deformkit/synthbridge.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "deformkit/errors.hpp"

namespace deformkit::synthbridge {

void BridgeLayout::validate() const {
  if (!(length_m > 0.0) || !(width_m > 0.0)) throw Error("layout extents must be positive");
  if (!(0.0 <= support_a_m && support_a_m < anchor_c_m && anchor_c_m < support_b_m &&
        support_b_m <= length_m)) {
    throw Error("layout requires 0 <= A < C < B <= length");
  }
  if (!(ei_nm2 > 0.0)) throw Error("bending stiffness must be positive");
  const bool beyond_b = cantilever_start_m >= support_b_m && cantilever_end_m <= length_m;
  const bool beyond_a = cantilever_end_m <= support_a_m && cantilever_start_m >= 0.0;
  if (!(cantilever_start_m < cantilever_end_m) || !(beyond_a || beyond_b)) {
    throw Error("cantilever range must lie beyond a support");
  }
}

DeflectionCurve::DeflectionCurve(const BridgeLayout& layout, double load_kn) {
  layout.validate();
  if (load_kn < 0.0) throw Error("load must be non-negative");
  if (!(layout.support_a_m < layout.anchor_c_m && layout.anchor_c_m < layout.support_b_m)) {
    throw LoadOutsideSpan();
  }
  a_ = layout.support_a_m;
  b_ = layout.support_b_m;
  span_ = b_ - a_;
  la_ = layout.anchor_c_m - a_;
  lb_ = b_ - layout.anchor_c_m;
  p_over_ei_ = load_kn * 1000.0 / layout.ei_nm2;
  load_kn_ = load_kn;
}

double DeflectionCurve::operator()(double x) const {
  // Downward-positive deflection v of the span under the point load, from
  // the textbook superposition for a simply supported beam; overhangs rotate
  // rigidly with the support slope. Returned as w = -v (positive up).
  const double L = span_;
  const double c = 6.0 * L;
  double v;
  if (x < a_) {
    const double slope_a = p_over_ei_ * lb_ * (L * L - lb_ * lb_) / c;
    v = slope_a * (x - a_);
  } else if (x > b_) {
    const double slope_b = p_over_ei_ * la_ * (la_ * la_ - L * L) / c;
    v = slope_b * (x - b_);
  } else {
    const double xi = x - a_;
    if (xi <= la_) {
      v = p_over_ei_ * lb_ * xi * (L * L - lb_ * lb_ - xi * xi) / c;
    } else {
      v = p_over_ei_ * la_ * (L - xi) * (2.0 * L * xi - la_ * la_ - xi * xi) / c;
    }
  }
  return -v;
}

DeflectionCurve beam_deflection(const BridgeLayout& layout, const LoadStep& load) {
  return DeflectionCurve(layout, load.load_kn);
}

double calibrate_stiffness(const BridgeLayout& layout,
                           const std::pair<double, double>& target, const LoadStep& load) {
  const auto [chainage, deflection] = target;
  if (!(chainage > layout.support_a_m && chainage < layout.support_b_m)) {
    throw UnreachableTarget("target chainage must lie strictly between the supports");
  }
  if (!(deflection < 0.0)) throw UnreachableTarget("target deflection must be negative");
  if (!(load.load_kn > 0.0)) throw UnreachableTarget("load must be positive");

  BridgeLayout unit = layout;
  unit.ei_nm2 = 1.0;
  const double w_unit = DeflectionCurve(unit, load.load_kn)(chainage);
  const double ei = w_unit / deflection;
  if (!(ei > 0.0) || !std::isfinite(ei)) {
    throw UnreachableTarget("deflection at the target chainage has the wrong sign");
  }
  return ei;
}

PointCloud generate_epoch_cloud(const BridgeLayout& layout, const DeflectionCurve& deflection,
                                double density_per_m2, const NoiseModel& noise,
                                double cross_tilt_m_per_m, bool clutter,
                                const std::string& epoch_id) {
  layout.validate();
  if (!(density_per_m2 > 0.0)) throw Error("density must be positive");
  if (noise.point_sigma_m < 0.0) throw Error("noise sigma must be non-negative");

  // Clutter boxes come from their own stream so toggling the flag does not
  // change the sampled point positions for a given seed.
  struct Box {
    double e, n, half, height;
  };
  std::vector<Box> boxes;
  if (clutter) {
    std::mt19937_64 rng(noise.seed ^ 0x9e3779b97f4a7c15ull);
    std::uniform_real_distribution<double> ue(0.0, layout.length_m);
    std::uniform_real_distribution<double> un(-0.5 * layout.width_m, 0.5 * layout.width_m);
    std::uniform_real_distribution<double> uhalf(0.1, 0.25);
    std::uniform_real_distribution<double> uheight(0.05, 0.3);
    for (int i = 0; i < 6; ++i) boxes.push_back({ue(rng), un(rng), uhalf(rng), uheight(rng)});
  }

  std::mt19937_64 rng(noise.seed);
  std::poisson_distribution<long> point_count(density_per_m2 * layout.length_m *
                                              layout.width_m);
  const long n_points = std::max<long>(1, point_count(rng));
  std::uniform_real_distribution<double> ue(0.0, layout.length_m);
  std::uniform_real_distribution<double> un(-0.5 * layout.width_m, 0.5 * layout.width_m);
  std::normal_distribution<double> noise_draw(0.0, 1.0);

  PointCloud cloud;
  cloud.epoch_id = epoch_id;
  cloud.points.reserve(static_cast<std::size_t>(n_points));
  for (long i = 0; i < n_points; ++i) {
    Point3 p;
    p.e = ue(rng);
    p.n = un(rng);
    p.h = deflection(p.e) + cross_tilt_m_per_m * p.n +
          noise.point_sigma_m * noise_draw(rng);
    for (const auto& box : boxes) {
      if (std::abs(p.e - box.e) <= box.half && std::abs(p.n - box.n) <= box.half) {
        p.h += box.height;
        break;
      }
    }
    cloud.points.push_back(p);
  }
  return cloud;
}

std::vector<std::pair<double, double>> generate_tls_profile(
    const BridgeLayout& layout, const DeflectionCurve& deflection, double scanner_chainage_m,
    const NoiseModel& noise, const std::vector<std::pair<double, double>>& shadow_ranges,
    double scanner_drop_m) {
  layout.validate();
  if (!(scanner_chainage_m >= 0.0 && scanner_chainage_m <= layout.length_m)) {
    throw Error("scanner must stand within the layout");
  }
  if (!(scanner_drop_m > 0.0)) throw Error("scanner drop must be positive");

  std::mt19937_64 rng(noise.seed);
  std::normal_distribution<double> noise_draw(0.0, 1.0);

  // Profile-mode scan: constant angular step, 0.3 mrad (3 mm at 10 m).
  constexpr double kAngularStep = 3e-4;
  const double theta_min = std::atan2(0.0 - scanner_chainage_m, scanner_drop_m);
  const double theta_max = std::atan2(layout.length_m - scanner_chainage_m, scanner_drop_m);

  std::vector<std::pair<double, double>> scatter;
  for (double theta = theta_min; theta <= theta_max; theta += kAngularStep) {
    const double x = scanner_chainage_m + scanner_drop_m * std::tan(theta);
    if (x < 0.0 || x > layout.length_m) continue;
    bool shadowed = false;
    for (const auto& [lo, hi] : shadow_ranges) {
      if (x >= lo && x <= hi) {
        shadowed = true;
        break;
      }
    }
    if (shadowed) continue;
    const double range = std::hypot(x - scanner_chainage_m, scanner_drop_m);
    const double sigma = noise.tls_sigma0_m + noise.tls_slope_m_per_m * range;
    scatter.emplace_back(x, deflection(x) + sigma * noise_draw(rng));
  }
  return scatter;
}

std::vector<SensorSeries> generate_transducer_truth(const BridgeLayout& layout,
                                                    const std::vector<LoadStep>& steps) {
  layout.validate();
  for (std::size_t i = 1; i < steps.size(); ++i) {
    if (!(steps[i].time_s > steps[i - 1].time_s)) {
      throw Error("load steps must be strictly time-ordered");
    }
  }
  SensorSeries c, d, load;
  c.channel = "C";
  c.kind = SeriesKind::displacement;
  d.channel = "D";
  d.kind = SeriesKind::displacement;
  load.channel = "load";
  load.kind = SeriesKind::load_kN;
  load.down_positive = false;
  for (const auto& step : steps) {
    const DeflectionCurve w(layout, step.load_kn);
    // Recorded down-positive, like the transducer magnitude plots.
    c.samples.push_back({step.time_s, -w(layout.transducer_c_m) * 1000.0});
    d.samples.push_back({step.time_s, -w(layout.transducer_d_m) * 1000.0});
    load.samples.push_back({step.time_s, step.load_kn});
  }
  return {c, d, load};
}

BridgeLayout parse_layout(const std::string& text) {
  BridgeLayout layout;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      bool blank = true;
      for (char ch : line) {
        if (!std::isspace(static_cast<unsigned char>(ch))) blank = false;
      }
      if (blank) continue;
      throw ConfigError("layout line " + std::to_string(line_no) + ": expected key=value");
    }
    auto trim = [](std::string s) {
      while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
      while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
      return s;
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    double v = 0.0;
    try {
      v = std::stod(value);
    } catch (const std::exception&) {
      throw ConfigError("layout key '" + key + "': bad number '" + value + "'");
    }
    if (key == "length") {
      layout.length_m = v;
    } else if (key == "width") {
      layout.width_m = v;
    } else if (key == "support_a") {
      layout.support_a_m = v;
    } else if (key == "support_b") {
      layout.support_b_m = v;
    } else if (key == "anchor_c") {
      layout.anchor_c_m = v;
    } else if (key == "transducer_c") {
      layout.transducer_c_m = v;
    } else if (key == "transducer_d") {
      layout.transducer_d_m = v;
    } else if (key == "cantilever_start") {
      layout.cantilever_start_m = v;
    } else if (key == "cantilever_end") {
      layout.cantilever_end_m = v;
    } else if (key == "ei") {
      layout.ei_nm2 = v;
    } else {
      throw ConfigError("unknown layout key '" + key + "'");
    }
  }
  layout.validate();
  return layout;
}

std::string write_layout(const BridgeLayout& layout) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "length=%.6f\nwidth=%.6f\nsupport_a=%.6f\nsupport_b=%.6f\n"
                "anchor_c=%.6f\ntransducer_c=%.6f\ntransducer_d=%.6f\n"
                "cantilever_start=%.6f\ncantilever_end=%.6f\nei=%.6f\n",
                layout.length_m, layout.width_m, layout.support_a_m, layout.support_b_m,
                layout.anchor_c_m, layout.transducer_c_m, layout.transducer_d_m,
                layout.cantilever_start_m, layout.cantilever_end_m, layout.ei_nm2);
  return buf;
}

std::vector<LoadStep> parse_load_steps(const std::string& text) {
  std::vector<LoadStep> steps;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("time_s", 0) == 0) continue;  // header
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw ConfigError("loads line " + std::to_string(line_no) + ": expected time_s,load_kN");
    }
    try {
      LoadStep step;
      step.time_s = std::stod(line.substr(0, comma));
      step.load_kn = std::stod(line.substr(comma + 1));
      steps.push_back(step);
    } catch (const std::exception&) {
      throw ConfigError("loads line " + std::to_string(line_no) + ": bad number");
    }
  }
  return steps;
}

std::string write_load_steps(const std::vector<LoadStep>& steps) {
  std::string out = "time_s,load_kN\n";
  char buf[64];
  for (const auto& s : steps) {
    std::snprintf(buf, sizeof(buf), "%.3f,%.3f\n", s.time_s, s.load_kn);
    out += buf;
  }
  return out;
}

}  // namespace deformkit::synthbridge
