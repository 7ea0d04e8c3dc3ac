#include "deformkit/cli.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "deformkit/compare.hpp"
#include "deformkit/deform.hpp"
#include "deformkit/errors.hpp"
#include "deformkit/georef.hpp"
#include "deformkit/ingest.hpp"
#include "deformkit/io.hpp"
#include "deformkit/netadjust.hpp"
#include "deformkit/surface.hpp"
#include "deformkit/synthbridge.hpp"
#include "deformkit/version.hpp"

namespace deformkit::cli {

namespace fs = std::filesystem;

// ---- config ----------------------------------------------------------------

Config Config::from_text(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    bool blank = true;
    for (char c : line) {
      if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
    }
    if (blank) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
    }
    auto trim = [](std::string s) {
      while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
      while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
      return s;
    };
    cfg.values_[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return cfg;
}

Config Config::from_file(const fs::path& path) { return from_text(io::read_file(path)); }

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::string Config::require_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing config key '" + key + "'");
  return it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': bad number '" + it->second + "'");
  }
}

int Config::get_int(const std::string& key, int fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    return std::stoi(it->second);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': bad integer '" + it->second + "'");
  }
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("config key '" + key + "': bad boolean '" + v + "'");
}

// ---- helpers ---------------------------------------------------------------

namespace {

Axis parse_axis_spec(const std::string& spec, double half_width) {
  std::vector<double> vals;
  std::string token;
  std::istringstream in(spec);
  while (std::getline(in, token, ',')) {
    try {
      vals.push_back(std::stod(token));
    } catch (const std::exception&) {
      throw ConfigError("bad axis component '" + token + "'");
    }
  }
  if (vals.size() != 4) throw ConfigError("axis must be 'start_e,start_n,end_e,end_n'");
  Axis axis;
  axis.start_e = vals[0];
  axis.start_n = vals[1];
  axis.end_e = vals[2];
  axis.end_n = vals[3];
  axis.half_width = half_width;
  return axis;
}

surface::Aggregator parse_aggregator(const std::string& name) {
  if (name == "median") return surface::Aggregator::median;
  if (name == "mean") return surface::Aggregator::mean;
  if (name == "min") return surface::Aggregator::min;
  if (name == "max") return surface::Aggregator::max;
  throw ConfigError("unknown aggregator '" + name + "'");
}

BendMode parse_bend_mode(const std::string& name) {
  if (name == "diff-then-smooth") return BendMode::diff_then_smooth;
  if (name == "smooth-then-diff") return BendMode::smooth_then_diff;
  throw ConfigError("unknown bending mode '" + name + "'");
}

struct ManifestBuilder {
  io::RunManifest manifest;

  explicit ManifestBuilder(const std::string& command) {
    manifest.command = command;
    manifest.version = kVersion;
  }
  void param(const std::string& key, const std::string& value) {
    manifest.parameters[key] = value;
  }
  void param(const std::string& key, double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", value);
    manifest.parameters[key] = buf;
  }
  void input(const fs::path& path) {
    manifest.input_digests[path.string()] = io::fnv1a_hex(io::read_file(path));
  }
  void output(const fs::path& path) { manifest.outputs.push_back(path.string()); }
  void write(const fs::path& where) const {
    io::write_file(where, io::write_manifest_json(manifest));
  }
};

HeightGrid load_grid(const fs::path& path, const std::string& epoch_id) {
  return io::read_esri_grid(io::read_file(path), epoch_id);
}

std::string profile_gnuplot(const Profile& profile) {
  std::string out = "# chainage_m deformation_mm\n";
  char buf[64];
  for (std::size_t i = 0; i < profile.size(); ++i) {
    if (is_nodata(profile.values[i])) continue;
    std::snprintf(buf, sizeof(buf), "%.4f %.4f\n", profile.chainage(i),
                  profile.values[i] * 1000.0);
    out += buf;
  }
  return out;
}

double profile_value_at(const Profile& profile, double chainage) {
  if (profile.values.empty() || profile.spacing <= 0.0) return nodata();
  const long i = std::lround((chainage - profile.start_chainage) / profile.spacing);
  if (i < 0 || i >= static_cast<long>(profile.size())) return nodata();
  return profile.values[static_cast<std::size_t>(i)];
}

}  // namespace

// ---- pipeline --------------------------------------------------------------

PipelineResult run_pipeline(const Config& config) {
  using synthbridge::BridgeLayout;
  using synthbridge::DeflectionCurve;
  using synthbridge::LoadStep;
  using synthbridge::NoiseModel;

  const fs::path out_dir = config.require_string("out_dir");
  std::error_code ec;
  fs::create_directories(out_dir, ec);

  auto stage = [](const std::string& name, auto&& fn) -> decltype(fn()) {
    try {
      return fn();
    } catch (const Error& e) {
      throw Error("stage " + name + ": " + e.what());
    }
  };

  // -- synth ------------------------------------------------------------
  BridgeLayout layout;
  if (config.has("layout_file")) {
    layout = synthbridge::parse_layout(io::read_file(config.require_string("layout_file")));
  } else {
    layout.length_m = config.get_double("length", 17.5);
    layout.width_m = config.get_double("width", 4.0);
    layout.support_a_m = config.get_double("support_a", 1.5);
    layout.support_b_m = config.get_double("support_b", 13.5);
    layout.anchor_c_m = config.get_double("anchor_c", 7.5);
    layout.transducer_c_m = config.get_double("transducer_c", layout.anchor_c_m);
    layout.transducer_d_m = config.get_double("transducer_d", 3.25);
    layout.cantilever_start_m = config.get_double("cantilever_start", layout.support_b_m);
    layout.cantilever_end_m = config.get_double("cantilever_end", layout.length_m);
  }

  std::vector<LoadStep> steps;
  if (config.has("loads_file")) {
    steps = synthbridge::parse_load_steps(io::read_file(config.require_string("loads_file")));
  } else {
    steps = {{0.0, 0.0}, {40.0, 600.0}, {77.0, 1200.0}, {95.0, 1800.0}};
  }
  if (steps.size() < 2) throw ConfigError("need at least two load steps");

  const double calibrate_load = config.get_double("calibrate_load_kn", steps.back().load_kn);
  const double calibrate_mm = config.get_double("calibrate_deflection_mm", -9.5);
  layout.ei_nm2 = synthbridge::calibrate_stiffness(
      layout, {layout.anchor_c_m, calibrate_mm / 1000.0}, LoadStep{calibrate_load, 0.0});

  NoiseModel noise;
  noise.point_sigma_m = config.get_double("noise_sigma", 0.002);
  noise.seed = static_cast<std::uint64_t>(config.get_double("seed", 42));
  const double density = config.get_double("density", 1000.0);
  const double cross_tilt = config.get_double("cross_tilt", 0.0005);
  const bool clutter = config.get_bool("clutter", false);

  const DeflectionCurve curve_unloaded(layout, 0.0);
  const DeflectionCurve curve_loaded(layout, steps.back().load_kn);

  PointCloud cloud3, cloud4;
  std::vector<SensorSeries> transducers;
  stage("synth", [&] {
    NoiseModel noise3 = noise;
    NoiseModel noise4 = noise;
    noise4.seed = noise.seed + 1;  // epochs are independent captures
    cloud3 = synthbridge::generate_epoch_cloud(layout, curve_unloaded, density, noise3, 0.0,
                                               clutter, "3");
    cloud4 = synthbridge::generate_epoch_cloud(layout, curve_loaded, density, noise4,
                                               cross_tilt, clutter, "4");
    transducers = synthbridge::generate_transducer_truth(layout, steps);
    io::write_file(out_dir / "layout.txt", synthbridge::write_layout(layout));
    io::write_file(out_dir / "loads.csv", synthbridge::write_load_steps(steps));
    io::write_file(out_dir / "cloud_epoch3.xyz", io::write_xyz_cloud(cloud3));
    io::write_file(out_dir / "cloud_epoch4.xyz", io::write_xyz_cloud(cloud4));
    io::write_file(out_dir / "transducers.csv", io::write_transducer_csv(transducers));
    // True bending line of the model, for inspection and plotting.
    Profile truth;
    truth.spacing = 0.01;
    truth.start_chainage = 0.0;
    const int n = static_cast<int>(layout.length_m / truth.spacing) + 1;
    for (int i = 0; i < n; ++i) {
      truth.values.push_back(curve_loaded(i * truth.spacing) - curve_unloaded(i * truth.spacing));
    }
    io::write_file(out_dir / "truth_deflection.csv", io::write_profile_csv(truth));
    return 0;
  });

  // -- georef (optional; clouds are already in the reference frame) ------
  if (config.has("gcp_src") || config.has("gcp_dst")) {
    stage("georef", [&] {
      const auto src_list =
          ingest::parse_coordinate_list(io::read_file(config.require_string("gcp_src")));
      const auto dst_list =
          ingest::parse_coordinate_list(io::read_file(config.require_string("gcp_dst")));
      std::map<std::string, Point3> dst;
      for (const auto& [id, p] : dst_list) dst[id] = p;
      std::vector<georef::Correspondence> corr;
      for (const auto& [id, p] : src_list) {
        const auto it = dst.find(id);
        if (it == dst.end()) throw UnresolvedPointId(id);
        corr.push_back({{p.e, p.n, p.h},
                        {it->second.e, it->second.n, it->second.h}});
      }
      const auto est = georef::estimate_similarity(corr, !config.get_bool("rigid", false));
      cloud3 = georef::apply_transform(cloud3, est.transform);
      cloud4 = georef::apply_transform(cloud4, est.transform);
      return 0;
    });
  }

  // -- dem ---------------------------------------------------------------
  const double cell = config.get_double("cell_size", 0.005);
  const int min_points = config.get_int("min_points", 1);
  const auto aggregator = parse_aggregator(config.get_string("aggregator", "median"));
  surface::GridBounds bounds{0.0, -0.5 * layout.width_m, layout.length_m,
                             0.5 * layout.width_m};
  HeightGrid dem3, dem4;
  stage("dem", [&] {
    dem3 = surface::rasterize_dem(cloud3, cell, aggregator, min_points, bounds);
    dem4 = surface::rasterize_dem(cloud4, cell, aggregator, min_points, bounds);
    io::write_file(out_dir / "dem_epoch3.asc", io::write_esri_grid(dem3));
    io::write_file(out_dir / "dem_epoch4.asc", io::write_esri_grid(dem4));
    return 0;
  });

  // -- diff + render -------------------------------------------------------
  SmoothingSpec bend_spec;
  bend_spec.sigma_m = config.get_double("bend_sigma", 0.01);
  DeformationField field, field_smooth;
  stage("diff", [&] {
    field = deform::diff_grids(dem3, dem4);
    io::write_file(out_dir / "diff.asc", io::write_esri_grid(field.raster));
    // The smoothed field backs the cross profile and the rendered map.
    field_smooth = deform::diff_grids(deform::gaussian_smooth(dem3, bend_spec),
                                      deform::gaussian_smooth(dem4, bend_spec));
    io::write_file(out_dir / "diff_smooth.asc", io::write_esri_grid(field_smooth.raster));
    return 0;
  });
  stage("render", [&] {
    const auto img = deform::render_deformation_map(
        field_smooth, config.get_double("render_threshold", 0.0005),
        config.get_double("render_saturation", 0.01));
    io::write_file(out_dir / "map.ppm", io::write_ppm(img));
    return 0;
  });

  // -- bend + cross ---------------------------------------------------------
  Axis centreline;
  centreline.start_e = 0.0;
  centreline.start_n = 0.0;
  centreline.end_e = layout.length_m;
  centreline.end_n = 0.0;
  centreline.half_width = config.get_double("corridor_half_width", 1.9);
  const double spacing = config.get_double("spacing", 0.005);
  const BendMode mode =
      parse_bend_mode(config.get_string("bend_mode", "smooth-then-diff"));

  BendingLine line;
  stage("bend", [&] {
    line = deform::bending_line(dem3, dem4, centreline, spacing, bend_spec, mode);
    io::write_file(out_dir / "bend.csv", io::write_profile_csv(line.profile));
    io::write_file(out_dir / "bend.dat", profile_gnuplot(line.profile));
    return 0;
  });

  Profile cross;
  stage("cross", [&] {
    SmoothingSpec cross_spec = bend_spec;
    cross_spec.sigma_m = config.get_double("cross_sigma", bend_spec.sigma_m);
    cross = deform::cross_profile(field_smooth, config.get_double("cross_chainage", layout.anchor_c_m),
                                  centreline, config.get_double("cross_spacing", spacing),
                                  cross_spec, config.get_double("cross_along_half_width", 0.5));
    io::write_file(out_dir / "cross.csv", io::write_profile_csv(cross));
    return 0;
  });

  // -- TLS (optional profile-based route) -----------------------------------
  if (config.get_bool("tls", false)) {
    stage("tls", [&] {
      std::vector<std::pair<double, double>> shadows;
      if (config.has("tls_shadow")) {
        const std::string spec = config.require_string("tls_shadow");
        const auto colon = spec.find(':');
        if (colon == std::string::npos) throw ConfigError("tls_shadow must be 'lo:hi'");
        shadows.emplace_back(std::stod(spec.substr(0, colon)), std::stod(spec.substr(colon + 1)));
      }
      NoiseModel tls_noise = noise;
      tls_noise.tls_sigma0_m = config.get_double("tls_sigma0", 0.0005);
      tls_noise.tls_slope_m_per_m = config.get_double("tls_slope", 0.00025);
      const double scanner = config.get_double("tls_scanner_chainage", 3.0);
      tls_noise.seed = noise.seed + 10;
      const auto scatter3 = synthbridge::generate_tls_profile(layout, curve_unloaded, scanner,
                                                              tls_noise, shadows);
      tls_noise.seed = noise.seed + 11;
      const auto scatter4 = synthbridge::generate_tls_profile(layout, curve_loaded, scanner,
                                                              tls_noise, shadows);
      const double raster = config.get_double("tls_raster", 0.001);
      const double max_gap = config.get_double("tls_max_gap", 0.2);
      SmoothingSpec tls_spec;
      tls_spec.sigma_m = config.get_double("tls_sigma", 0.03);
      Profile p3 = deform::gaussian_smooth(
          surface::interpolate_profile(scatter3, raster, max_gap), tls_spec);
      Profile p4 = deform::gaussian_smooth(
          surface::interpolate_profile(scatter4, raster, max_gap), tls_spec);
      // Difference over the common raster (both start at their own first
      // return; align by chainage).
      Profile tls_bend = p3;
      for (std::size_t i = 0; i < p3.size(); ++i) {
        const double v4 = profile_value_at(p4, p3.chainage(i));
        tls_bend.values[i] =
            (is_nodata(p3.values[i]) || is_nodata(v4)) ? nodata() : v4 - p3.values[i];
      }
      io::write_file(out_dir / "tls_bend.csv", io::write_profile_csv(tls_bend));
      return 0;
    });
  }

  // -- report -----------------------------------------------------------------
  PipelineResult result;
  result.out_dir = out_dir;
  stage("report", [&] {
    const double t_before = steps.front().time_s;
    const double t_after = steps.back().time_s;
    const SensorSeries* series_c = nullptr;
    const SensorSeries* series_d = nullptr;
    for (const auto& s : transducers) {
      if (s.channel == "C") series_c = &s;
      if (s.channel == "D") series_d = &s;
    }
    if (!series_c || !series_d) throw Error("transducer channels C and D not generated");

    std::vector<GroundTruthPoint> truth;
    GroundTruthPoint c;
    c.id = "C";
    c.chainage_m = layout.transducer_c_m;
    c.displacement_mm = compare::transducer_deformation(*series_c, t_before, t_after);
    c.source = TruthSource::transducer;
    truth.push_back(c);
    GroundTruthPoint d;
    d.id = "D";
    d.chainage_m = layout.transducer_d_m;
    d.displacement_mm = compare::transducer_deformation(*series_d, t_before, t_after);
    d.source = TruthSource::transducer;
    truth.push_back(d);

    const double window = config.get_double("eval_window", 0.05);
    result.transducer_comparison = compare::evaluate_at_points(line, truth, window);

    const double support_window = config.get_double("support_window", 0.5);
    std::vector<GroundTruthPoint> supports;
    GroundTruthPoint sa;
    sa.id = "A";
    sa.chainage_m = layout.support_a_m;
    sa.displacement_mm = 0.0;
    supports.push_back(sa);
    GroundTruthPoint sb;
    sb.id = "B";
    sb.chainage_m = layout.support_b_m;
    sb.displacement_mm = 0.0;
    supports.push_back(sb);
    const ComparisonReport support_report =
        compare::evaluate_at_points(line, supports, support_window);
    result.support_a_mm = support_report.rows[0].method_mm;
    result.support_b_mm = support_report.rows[1].method_mm;

    {
      double sum = 0.0;
      int count = 0;
      for (std::size_t i = 0; i < line.profile.size(); ++i) {
        const double ch = line.profile.chainage(i);
        if (ch >= layout.cantilever_start_m && ch <= layout.cantilever_end_m &&
            !is_nodata(line.profile.values[i])) {
          sum += line.profile.values[i];
          ++count;
        }
      }
      result.cantilever_mean_mm = count ? sum / count * 1000.0 : nodata();
    }

    compare::ReportInputs inputs;
    inputs.comparisons = {result.transducer_comparison, support_report};
    compare::ReportDocument doc = compare::make_report(inputs);

    const double tol_cd = config.get_double("tol_cd_mm", 1.0);
    const double tol_support = config.get_double("tol_support_mm", 0.3);
    bool ok = true;
    char buf[160];
    doc.text += "\n[criteria]\n";
    for (const auto& row : result.transducer_comparison.rows) {
      const bool pass = std::abs(row.diff_mm) < tol_cd;
      ok = ok && pass;
      std::snprintf(buf, sizeof(buf), "  |method - truth| at %s: %.4f mm (< %.1f mm): %s\n",
                    row.id.c_str(), std::abs(row.diff_mm), tol_cd, pass ? "PASS" : "FAIL");
      doc.text += buf;
    }
    for (const auto& row : support_report.rows) {
      const bool pass = std::abs(row.method_mm) < tol_support;
      ok = ok && pass;
      std::snprintf(buf, sizeof(buf), "  |line| at support %s: %.4f mm (< %.1f mm): %s\n",
                    row.id.c_str(), std::abs(row.method_mm), tol_support, pass ? "PASS" : "FAIL");
      doc.text += buf;
    }
    std::snprintf(buf, sizeof(buf), "  cantilever mean: %+.4f mm (expected > 0)\n",
                  result.cantilever_mean_mm);
    doc.text += buf;
    result.tolerances_met = ok;

    io::write_file(out_dir / "report.txt", doc.text);
    io::write_file(out_dir / "comparisons.csv", doc.comparisons_csv);
    return 0;
  });

  return result;
}

// ---- subcommands ------------------------------------------------------------

namespace {

int cmd_synth(const Config& flags);

int run_checked(const std::vector<std::string>& args);

}  // namespace

int run(const std::vector<std::string>& args) {
  try {
    return run_checked(args);
  } catch (const CLI::ParseError&) {
    return 2;  // handled inside run_checked; defensive
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

namespace {

int run_checked(const std::vector<std::string>& args) {
  CLI::App app{"point-cloud deformation analysis toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  // ---- synth ----
  auto* synth = app.add_subcommand("synth", "generate a synthetic loading study");
  std::string synth_layout, synth_loads, synth_out;
  double synth_density = 1000.0, synth_noise = 0.002, synth_tilt = 0.0005;
  std::uint64_t synth_seed = 42;
  bool synth_clutter = false, synth_tls = false;
  synth->add_option("--layout", synth_layout, "layout key=value file");
  synth->add_option("--loads", synth_loads, "load schedule CSV");
  synth->add_option("--density", synth_density, "points per m^2");
  synth->add_option("--noise", synth_noise, "cloud height sigma [m]");
  synth->add_option("--cross-tilt", synth_tilt, "loaded-epoch lateral tilt [m/m]");
  synth->add_option("--seed", synth_seed, "RNG seed");
  synth->add_flag("--clutter", synth_clutter, "add raised clutter patches");
  synth->add_flag("--tls", synth_tls, "also write TLS profile scatter");
  synth->add_option("--out", synth_out, "output directory")->required();

  // ---- adjust ----
  auto* adjust = app.add_subcommand("adjust", "least-squares network adjustment");
  std::string adj_obs, adj_init, adj_out, adj_fixed;
  int adj_max_iter = 20;
  double adj_threshold = 1e-5;
  adjust->add_option("--obs", adj_obs, "observation file")->required();
  adjust->add_option("--init", adj_init, "initial coordinates CSV")->required();
  adjust->add_option("--out", adj_out, "adjusted coordinates CSV")->required();
  adjust->add_option("--fixed", adj_fixed, "comma-separated ids held fixed");
  adjust->add_option("--max-iterations", adj_max_iter, "iteration cap");
  adjust->add_option("--threshold", adj_threshold, "convergence threshold [m]");

  // ---- georef ----
  auto* georef_cmd = app.add_subcommand("georef", "register a cloud via GCPs");
  std::string geo_cloud, geo_src, geo_dst, geo_out;
  bool geo_rigid = false;
  georef_cmd->add_option("--cloud", geo_cloud, "input cloud")->required();
  georef_cmd->add_option("--gcp-src", geo_src, "GCPs in cloud frame (id,e,n,h)")->required();
  georef_cmd->add_option("--gcp-dst", geo_dst, "GCPs in target frame (id,e,n,h)")->required();
  georef_cmd->add_flag("--rigid", geo_rigid, "fix scale to 1");
  georef_cmd->add_option("--out", geo_out, "output cloud")->required();

  // ---- dem ----
  auto* dem = app.add_subcommand("dem", "rasterize a cloud to a height grid");
  std::string dem_cloud, dem_out, dem_agg = "median", dem_extent;
  double dem_cell = 0.005;
  int dem_min_points = 3;
  dem->add_option("--cloud", dem_cloud, "input cloud")->required();
  dem->add_option("--cell", dem_cell, "cell size [m]");
  dem->add_option("--agg", dem_agg, "median|mean|min|max");
  dem->add_option("--min-points", dem_min_points, "minimum points per cell");
  dem->add_option("--extent", dem_extent, "fixed frame 'min_e,min_n,max_e,max_n'");
  dem->add_option("--out", dem_out, "output ESRI ASCII grid")->required();

  // ---- diff ----
  auto* diff = app.add_subcommand("diff", "difference two height grids");
  std::string diff_before, diff_after, diff_out;
  diff->add_option("--before", diff_before, "earlier epoch grid")->required();
  diff->add_option("--after", diff_after, "later epoch grid")->required();
  diff->add_option("--out", diff_out, "output deformation grid")->required();

  // ---- bend ----
  auto* bend = app.add_subcommand("bend", "extract a bending line");
  std::string bend_before, bend_after, bend_axis, bend_out, bend_mode = "diff-then-smooth";
  double bend_half_width = 0.0, bend_spacing = 0.005, bend_sigma = 0.01;
  bend->add_option("--before", bend_before, "earlier epoch grid")->required();
  bend->add_option("--after", bend_after, "later epoch grid")->required();
  bend->add_option("--axis", bend_axis, "'start_e,start_n,end_e,end_n'")->required();
  bend->add_option("--half-width", bend_half_width, "corridor half width [m]");
  bend->add_option("--spacing", bend_spacing, "sample spacing [m]");
  bend->add_option("--sigma", bend_sigma, "smoothing sigma [m]");
  bend->add_option("--mode", bend_mode, "diff-then-smooth|smooth-then-diff");
  bend->add_option("--out", bend_out, "output profile CSV")->required();

  // ---- cross ----
  auto* cross = app.add_subcommand("cross", "extract a cross profile");
  std::string cross_field, cross_axis, cross_out;
  double cross_chainage = 0.0, cross_half_width = 2.0, cross_along = 0.0,
         cross_spacing = 0.005, cross_sigma = 0.01;
  cross->add_option("--field", cross_field, "deformation grid")->required();
  cross->add_option("--axis", cross_axis, "main axis 'e0,n0,e1,n1'")->required();
  cross->add_option("--chainage", cross_chainage, "position along the main axis [m]")
      ->required();
  cross->add_option("--half-width", cross_half_width, "lateral extent [m]");
  cross->add_option("--along-width", cross_along, "longitudinal corridor half width [m]");
  cross->add_option("--spacing", cross_spacing, "sample spacing [m]");
  cross->add_option("--sigma", cross_sigma, "smoothing sigma [m]");
  cross->add_option("--out", cross_out, "output profile CSV")->required();

  // ---- render ----
  auto* render = app.add_subcommand("render", "color-coded deformation map");
  std::string render_field, render_out;
  double render_threshold = 0.0005, render_saturation = 0.01;
  render->add_option("--field", render_field, "deformation grid")->required();
  render->add_option("--threshold", render_threshold, "black below this |d| [m]");
  render->add_option("--saturation", render_saturation, "full red/green at this |d| [m]");
  render->add_option("--out", render_out, "output PPM")->required();

  // ---- report ----
  auto* report = app.add_subcommand("report", "compare a bending line to truth");
  std::string rep_bend, rep_truth, rep_residuals, rep_map, rep_out;
  double rep_t_before = 0.0, rep_t_after = 0.0, rep_window = 0.05;
  report->add_option("--bend", rep_bend, "bending line profile CSV")->required();
  report->add_option("--truth", rep_truth, "transducer series CSV")->required();
  report->add_option("--t-before", rep_t_before, "reference time [s]");
  report->add_option("--t-after", rep_t_after, "evaluation time [s]")->required();
  report->add_option("--chainage-map", rep_map, "channel=chainage[,channel=chainage...]")
      ->required();
  report->add_option("--residuals", rep_residuals, "optional checkpoint residual CSV fixture");
  report->add_option("--window", rep_window, "evaluation window [m]");
  report->add_option("--out", rep_out, "output directory")->required();

  // ---- pipeline ----
  auto* pipeline = app.add_subcommand("pipeline", "full synthetic loading study");
  std::string pipe_config, pipe_out;
  std::int64_t pipe_seed = -1;
  pipeline->add_option("--config", pipe_config, "key=value config file")->required();
  pipeline->add_option("--out", pipe_out, "override out_dir");
  pipeline->add_option("--seed", pipe_seed, "override seed");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    std::cout << kVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }

  if (synth->parsed()) {
    Config flags;
    if (!synth_layout.empty()) flags.set("layout_file", synth_layout);
    if (!synth_loads.empty()) flags.set("loads_file", synth_loads);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", synth_density);
    flags.set("density", buf);
    std::snprintf(buf, sizeof(buf), "%.9g", synth_noise);
    flags.set("noise_sigma", buf);
    std::snprintf(buf, sizeof(buf), "%.9g", synth_tilt);
    flags.set("cross_tilt", buf);
    flags.set("seed", std::to_string(synth_seed));
    flags.set("clutter", synth_clutter ? "1" : "0");
    flags.set("tls", synth_tls ? "1" : "0");
    flags.set("out_dir", synth_out);
    return cmd_synth(flags);
  }

  if (adjust->parsed()) {
    const auto obs = ingest::parse_observations(io::read_file(adj_obs));
    const auto init_list = ingest::parse_coordinate_list(io::read_file(adj_init));
    std::map<std::string, Point3> initial;
    std::set<std::string> known;
    for (const auto& [id, p] : init_list) {
      initial[id] = p;
      known.insert(id);
    }
    ingest::validate_point_references(obs, known);
    netadjust::AdjustmentConfig cfg;
    cfg.max_iterations = adj_max_iter;
    cfg.convergence_threshold_m = adj_threshold;
    if (!adj_fixed.empty()) {
      std::istringstream in(adj_fixed);
      std::string id;
      while (std::getline(in, id, ',')) cfg.fixed_point_ids.push_back(id);
    }
    const auto net = netadjust::adjust_network(obs, initial, cfg);
    io::write_file(adj_out, netadjust::write_adjusted_csv(net));
    ManifestBuilder mb("adjust");
    mb.manifest.seed = 0;
    mb.input(adj_obs);
    mb.input(adj_init);
    mb.param("max_iterations", static_cast<double>(adj_max_iter));
    mb.param("threshold", adj_threshold);
    if (!adj_fixed.empty()) mb.param("fixed", adj_fixed);
    mb.output(adj_out);
    mb.write(adj_out + ".manifest.json");
    std::printf("adjusted %d points, %d iterations, s0^2 = %.4f\n",
                static_cast<int>(net.points.size()), net.iterations_used,
                net.a_posteriori_variance_factor);
    return 0;
  }

  if (georef_cmd->parsed()) {
    const auto cloud = ingest::parse_xyz_cloud(io::read_file(geo_cloud), "georef-input");
    const auto src_list = ingest::parse_coordinate_list(io::read_file(geo_src));
    const auto dst_list = ingest::parse_coordinate_list(io::read_file(geo_dst));
    std::map<std::string, Point3> dst;
    for (const auto& [id, p] : dst_list) dst[id] = p;
    std::vector<georef::Correspondence> corr;
    for (const auto& [id, p] : src_list) {
      const auto it = dst.find(id);
      if (it == dst.end()) throw UnresolvedPointId(id);
      corr.push_back({{p.e, p.n, p.h}, {it->second.e, it->second.n, it->second.h}});
    }
    const auto est = georef::estimate_similarity(corr, !geo_rigid);
    const auto transformed = georef::apply_transform(cloud, est.transform);
    io::write_file(geo_out, io::write_xyz_cloud(transformed));
    ManifestBuilder mb("georef");
    mb.input(geo_cloud);
    mb.input(geo_src);
    mb.input(geo_dst);
    mb.param("rigid", geo_rigid ? "1" : "0");
    mb.param("scale", est.transform.scale);
    mb.param("rms_m", est.rms_m);
    mb.output(geo_out);
    mb.write(geo_out + ".manifest.json");
    std::printf("similarity fit over %d GCPs, rms %.6f m, scale %.9f\n",
                static_cast<int>(corr.size()), est.rms_m, est.transform.scale);
    return 0;
  }

  if (dem->parsed()) {
    const auto cloud = ingest::parse_xyz_cloud(io::read_file(dem_cloud), "dem-input");
    std::optional<surface::GridBounds> bounds;
    if (!dem_extent.empty()) {
      std::vector<double> vals;
      std::istringstream in(dem_extent);
      std::string token;
      while (std::getline(in, token, ',')) vals.push_back(std::stod(token));
      if (vals.size() != 4) throw ConfigError("extent must be 'min_e,min_n,max_e,max_n'");
      bounds = surface::GridBounds{vals[0], vals[1], vals[2], vals[3]};
    }
    const auto grid = surface::rasterize_dem(cloud, dem_cell, parse_aggregator(dem_agg),
                                             dem_min_points, bounds);
    io::write_file(dem_out, io::write_esri_grid(grid));
    ManifestBuilder mb("dem");
    mb.input(dem_cloud);
    mb.param("cell", dem_cell);
    mb.param("agg", dem_agg);
    mb.param("min_points", static_cast<double>(dem_min_points));
    mb.output(dem_out);
    mb.write(dem_out + ".manifest.json");
    return 0;
  }

  if (diff->parsed()) {
    const auto before = load_grid(diff_before, "before");
    const auto after = load_grid(diff_after, "after");
    const auto field = deform::diff_grids(before, after);
    io::write_file(diff_out, io::write_esri_grid(field.raster));
    ManifestBuilder mb("diff");
    mb.input(diff_before);
    mb.input(diff_after);
    mb.output(diff_out);
    mb.write(diff_out + ".manifest.json");
    return 0;
  }

  if (bend->parsed()) {
    const auto before = load_grid(bend_before, "before");
    const auto after = load_grid(bend_after, "after");
    const Axis axis = parse_axis_spec(bend_axis, bend_half_width);
    SmoothingSpec spec;
    spec.sigma_m = bend_sigma;
    if (spec.degenerate_for(before.cell_size)) {
      std::cerr << "warning: sigma " << bend_sigma << " m is below half a cell ("
                << before.cell_size << " m); smoothing degenerates to near-identity\n";
    }
    const auto line = deform::bending_line(before, after, axis, bend_spacing, spec,
                                           parse_bend_mode(bend_mode));
    io::write_file(bend_out, io::write_profile_csv(line.profile));
    ManifestBuilder mb("bend");
    mb.input(bend_before);
    mb.input(bend_after);
    mb.param("axis", bend_axis);
    mb.param("half_width", bend_half_width);
    mb.param("spacing", bend_spacing);
    mb.param("sigma", bend_sigma);
    mb.param("mode", bend_mode);
    mb.output(bend_out);
    mb.write(bend_out + ".manifest.json");
    return 0;
  }

  if (cross->parsed()) {
    const auto grid = load_grid(cross_field, "diff");
    DeformationField field;
    field.raster = grid;
    field.epoch_before = "before";
    field.epoch_after = "after";
    Axis axis = parse_axis_spec(cross_axis, cross_half_width);
    SmoothingSpec spec;
    spec.sigma_m = cross_sigma;
    const auto profile = deform::cross_profile(field, cross_chainage, axis, cross_spacing,
                                               spec, cross_along);
    io::write_file(cross_out, io::write_profile_csv(profile));
    ManifestBuilder mb("cross");
    mb.input(cross_field);
    mb.param("axis", cross_axis);
    mb.param("chainage", cross_chainage);
    mb.param("half_width", cross_half_width);
    mb.param("along_width", cross_along);
    mb.param("sigma", cross_sigma);
    mb.output(cross_out);
    mb.write(cross_out + ".manifest.json");
    return 0;
  }

  if (render->parsed()) {
    const auto grid = load_grid(render_field, "diff");
    DeformationField field;
    field.raster = grid;
    const auto img = deform::render_deformation_map(field, render_threshold, render_saturation);
    io::write_file(render_out, io::write_ppm(img));
    ManifestBuilder mb("render");
    mb.input(render_field);
    mb.param("threshold", render_threshold);
    mb.param("saturation", render_saturation);
    mb.output(render_out);
    mb.write(render_out + ".manifest.json");
    return 0;
  }

  if (report->parsed()) {
    // Bending line from its CSV.
    const auto scatter = ingest::parse_profile_scatter(io::read_file(rep_bend));
    if (scatter.size() < 2) throw Error("bending line CSV has too few samples");
    BendingLine line;
    line.epoch_before = "before";
    line.epoch_after = "after";
    line.profile.start_chainage = scatter.front().first;
    line.profile.spacing = scatter[1].first - scatter[0].first;
    for (const auto& [c, v] : scatter) {
      (void)c;
      line.profile.values.push_back(v);
    }

    const auto series = ingest::parse_transducer_series(io::read_file(rep_truth));
    std::vector<GroundTruthPoint> truth;
    std::istringstream in(rep_map);
    std::string item;
    while (std::getline(in, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw ConfigError("chainage map entry needs channel=value");
      const std::string channel = item.substr(0, eq);
      const double chainage = std::stod(item.substr(eq + 1));
      const SensorSeries* s = nullptr;
      for (const auto& cand : series) {
        if (cand.channel == channel) s = &cand;
      }
      if (!s) throw Error("truth file has no channel '" + channel + "'");
      GroundTruthPoint pt;
      pt.id = channel;
      pt.chainage_m = chainage;
      pt.displacement_mm = compare::transducer_deformation(*s, rep_t_before, rep_t_after);
      truth.push_back(pt);
    }

    compare::ReportInputs inputs;
    inputs.comparisons = {compare::evaluate_at_points(line, truth, rep_window)};
    if (!rep_residuals.empty()) {
      // Residual fixtures arrive as raw rows: cp,epoch,de_mm,dn_mm,dh_mm.
      ResidualTable table;
      std::istringstream rin(io::read_file(rep_residuals));
      std::string rline;
      int line_no = 0;
      while (std::getline(rin, rline)) {
        ++line_no;
        if (!rline.empty() && rline.back() == '\r') rline.pop_back();
        if (rline.empty() || rline[0] == '#' || rline.rfind("cp,", 0) == 0) continue;
        std::istringstream fields(rline);
        ResidualRow row;
        std::string tok;
        std::getline(fields, row.cp_id, ',');
        std::getline(fields, row.epoch, ',');
        std::getline(fields, tok, ',');
        row.de_mm = std::stod(tok);
        std::getline(fields, tok, ',');
        row.dn_mm = std::stod(tok);
        std::getline(fields, tok, ',');
        row.dh_mm = std::stod(tok);
        table.rows.push_back(std::move(row));
      }
      inputs.residuals = table;
    }
    const auto doc = compare::make_report(inputs);
    const fs::path out_dir = rep_out;
    io::write_file(out_dir / "report.txt", doc.text);
    io::write_file(out_dir / "comparisons.csv", doc.comparisons_csv);
    if (!doc.residuals_csv.empty()) io::write_file(out_dir / "residuals.csv", doc.residuals_csv);
    ManifestBuilder mb("report");
    mb.input(rep_bend);
    mb.input(rep_truth);
    if (!rep_residuals.empty()) mb.input(rep_residuals);
    mb.param("t_before", rep_t_before);
    mb.param("t_after", rep_t_after);
    mb.param("window", rep_window);
    mb.param("chainage_map", rep_map);
    mb.output((out_dir / "report.txt").string());
    mb.output((out_dir / "comparisons.csv").string());
    mb.write(out_dir / "manifest.json");
    return 0;
  }

  if (pipeline->parsed()) {
    Config config = Config::from_file(pipe_config);
    if (!pipe_out.empty()) config.set("out_dir", pipe_out);
    if (pipe_seed >= 0) config.set("seed", std::to_string(pipe_seed));
    const auto result = run_pipeline(config);
    ManifestBuilder mb("pipeline");
    mb.manifest.seed = static_cast<std::uint64_t>(config.get_double("seed", 42));
    mb.input(pipe_config);
    for (const auto& [key, value] : config.values()) mb.param(key, value);
    for (const char* name :
         {"report.txt", "bend.csv", "cross.csv", "diff.asc", "map.ppm"}) {
      mb.output((result.out_dir / name).string());
    }
    mb.write(result.out_dir / "manifest.json");
    std::printf("pipeline done: %s (criteria %s)\n", result.out_dir.string().c_str(),
                result.tolerances_met ? "met" : "NOT met");
    return 0;
  }

  return 2;
}

int cmd_synth(const Config& flags) {
  using synthbridge::BridgeLayout;
  using synthbridge::DeflectionCurve;
  using synthbridge::LoadStep;
  using synthbridge::NoiseModel;

  const fs::path out_dir = flags.require_string("out_dir");

  BridgeLayout layout;
  if (flags.has("layout_file")) {
    layout = synthbridge::parse_layout(io::read_file(flags.require_string("layout_file")));
  } else {
    layout.ei_nm2 = synthbridge::calibrate_stiffness(layout, {layout.anchor_c_m, -0.0095},
                                                     LoadStep{95.0, 0.0});
  }
  std::vector<LoadStep> steps;
  if (flags.has("loads_file")) {
    steps = synthbridge::parse_load_steps(io::read_file(flags.require_string("loads_file")));
  } else {
    steps = {{0.0, 0.0}, {40.0, 600.0}, {77.0, 1200.0}, {95.0, 1800.0}};
  }

  NoiseModel noise;
  noise.point_sigma_m = flags.get_double("noise_sigma", 0.002);
  noise.seed = static_cast<std::uint64_t>(flags.get_double("seed", 42));

  const DeflectionCurve unloaded(layout, 0.0);
  const DeflectionCurve loaded(layout, steps.back().load_kn);
  NoiseModel noise4 = noise;
  noise4.seed = noise.seed + 1;
  const auto cloud3 = synthbridge::generate_epoch_cloud(
      layout, unloaded, flags.get_double("density", 1000.0), noise, 0.0,
      flags.get_bool("clutter", false), "3");
  const auto cloud4 = synthbridge::generate_epoch_cloud(
      layout, loaded, flags.get_double("density", 1000.0), noise4,
      flags.get_double("cross_tilt", 0.0005), flags.get_bool("clutter", false), "4");
  const auto transducers = synthbridge::generate_transducer_truth(layout, steps);

  io::write_file(out_dir / "layout.txt", synthbridge::write_layout(layout));
  io::write_file(out_dir / "loads.csv", synthbridge::write_load_steps(steps));
  io::write_file(out_dir / "cloud_epoch3.xyz", io::write_xyz_cloud(cloud3));
  io::write_file(out_dir / "cloud_epoch4.xyz", io::write_xyz_cloud(cloud4));
  io::write_file(out_dir / "transducers.csv", io::write_transducer_csv(transducers));

  if (flags.get_bool("tls", false)) {
    NoiseModel tls3 = noise;
    tls3.seed = noise.seed + 10;
    NoiseModel tls4 = noise;
    tls4.seed = noise.seed + 11;
    const std::vector<std::pair<double, double>> shadows = {{12.5, 14.5}};
    auto write_scatter = [&](const std::vector<std::pair<double, double>>& scatter,
                             const fs::path& path) {
      std::string out = "chainage_m,value_m\n";
      char buf[64];
      for (const auto& [c, h] : scatter) {
        std::snprintf(buf, sizeof(buf), "%.6f,%.6f\n", c, h);
        out += buf;
      }
      io::write_file(path, out);
    };
    write_scatter(synthbridge::generate_tls_profile(layout, unloaded, 3.0, tls3, shadows),
                  out_dir / "tls_epoch3.csv");
    write_scatter(synthbridge::generate_tls_profile(layout, loaded, 3.0, tls4, shadows),
                  out_dir / "tls_epoch4.csv");
  }

  ManifestBuilder mb("synth");
  mb.manifest.seed = noise.seed;
  for (const auto& [key, value] : flags.values()) mb.param(key, value);
  if (flags.has("layout_file")) mb.input(flags.require_string("layout_file"));
  if (flags.has("loads_file")) mb.input(flags.require_string("loads_file"));
  for (const char* name : {"layout.txt", "loads.csv", "cloud_epoch3.xyz", "cloud_epoch4.xyz",
                           "transducers.csv"}) {
    mb.output((out_dir / name).string());
  }
  mb.write(out_dir / "manifest.json");
  return 0;
}

}  // namespace

}  // namespace deformkit::cli
