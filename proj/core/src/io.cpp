#include "deformkit/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "deformkit/errors.hpp"

namespace deformkit::io {

namespace {

constexpr double kEsriNoData = -9999.0;

void append_shortest(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

}  // namespace

std::string write_xyz_cloud(const PointCloud& cloud) {
  std::string out;
  out.reserve(cloud.size() * 24);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    append_shortest(out, cloud.points[i].e);
    out.push_back(' ');
    append_shortest(out, cloud.points[i].n);
    out.push_back(' ');
    append_shortest(out, cloud.points[i].h);
    if (cloud.has_intensity()) {
      out.push_back(' ');
      append_shortest(out, cloud.intensity[i]);
    }
    out.push_back('\n');
  }
  return out;
}

std::string write_esri_grid(const HeightGrid& grid) {
  std::ostringstream out;
  out << "ncols " << grid.ncols << "\n";
  out << "nrows " << grid.nrows << "\n";
  out << "xllcorner " << fixed(grid.origin_e, 4) << "\n";
  out << "yllcorner " << fixed(grid.origin_n, 4) << "\n";
  out << "cellsize " << fixed(grid.cell_size, 6) << "\n";
  out << "NODATA_value -9999\n";
  for (int row = grid.nrows - 1; row >= 0; --row) {
    for (int col = 0; col < grid.ncols; ++col) {
      if (col) out << ' ';
      const double v = grid.at(row, col);
      if (is_nodata(v)) {
        out << "-9999";
      } else {
        out << fixed(v, 4);
      }
    }
    out << "\n";
  }
  return out.str();
}

HeightGrid read_esri_grid(const std::string& text, const std::string& epoch_id) {
  std::istringstream in(text);
  HeightGrid grid;
  grid.epoch_id = epoch_id;
  double nodata_value = kEsriNoData;
  std::string key;
  // Header: six "key value" pairs in canonical order; keys case-insensitive.
  for (int i = 0; i < 6; ++i) {
    std::string k;
    double v = 0.0;
    if (!(in >> k >> v)) throw FileError("truncated ESRI grid header");
    for (auto& c : k) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (k == "ncols") {
      grid.ncols = static_cast<int>(v);
    } else if (k == "nrows") {
      grid.nrows = static_cast<int>(v);
    } else if (k == "xllcorner") {
      grid.origin_e = v;
    } else if (k == "yllcorner") {
      grid.origin_n = v;
    } else if (k == "cellsize") {
      grid.cell_size = v;
    } else if (k == "nodata_value") {
      nodata_value = v;
    } else {
      throw FileError("unexpected ESRI grid header key '" + k + "'");
    }
  }
  if (grid.ncols < 1 || grid.nrows < 1 || grid.cell_size <= 0.0) {
    throw FileError("invalid ESRI grid dimensions");
  }
  grid.heights.assign(static_cast<std::size_t>(grid.ncols) * grid.nrows, nodata());
  for (int row = grid.nrows - 1; row >= 0; --row) {
    for (int col = 0; col < grid.ncols; ++col) {
      double v = 0.0;
      if (!(in >> v)) throw FileError("truncated ESRI grid body");
      grid.at(row, col) = (v == nodata_value) ? nodata() : v;
    }
  }
  return grid;
}

std::string write_profile_csv(const Profile& profile) {
  std::string out = "chainage_m,value_m\n";
  for (std::size_t i = 0; i < profile.size(); ++i) {
    out += fixed(profile.chainage(i), 6);
    out.push_back(',');
    if (is_nodata(profile.values[i])) {
      out += "NA";
    } else {
      out += fixed(profile.values[i], 6);
    }
    out.push_back('\n');
  }
  return out;
}

std::string write_transducer_csv(const std::vector<SensorSeries>& series) {
  std::string out = "time_s,channel,kind,value\n";
  for (const auto& s : series) {
    const char* kind = s.kind == SeriesKind::displacement ? "displacement" : "load_kN";
    for (const auto& sample : s.samples) {
      out += fixed(sample.time_s, 3);
      out.push_back(',');
      out += s.channel;
      out.push_back(',');
      out += kind;
      out.push_back(',');
      out += fixed(sample.value, 4);
      out.push_back('\n');
    }
  }
  return out;
}

std::string write_ppm(const RgbRaster& raster) {
  std::string out = "P6\n" + std::to_string(raster.ncols) + " " +
                    std::to_string(raster.nrows) + "\n255\n";
  out.reserve(out.size() + raster.pixels.size() * 3);
  for (const auto& px : raster.pixels) {
    out.push_back(static_cast<char>(px.r));
    out.push_back(static_cast<char>(px.g));
    out.push_back(static_cast<char>(px.b));
  }
  return out;
}

std::string write_residual_csv(const ResidualTable& table) {
  // Collect checkpoint and epoch ids in first-seen / sorted order.
  std::vector<std::string> cps;
  std::vector<std::string> epochs;
  for (const auto& row : table.rows) {
    if (std::find(cps.begin(), cps.end(), row.cp_id) == cps.end()) cps.push_back(row.cp_id);
    if (std::find(epochs.begin(), epochs.end(), row.epoch) == epochs.end()) {
      epochs.push_back(row.epoch);
    }
  }
  std::sort(epochs.begin(), epochs.end());

  auto find_row = [&](const std::string& cp, const std::string& epoch) -> const ResidualRow* {
    for (const auto& row : table.rows) {
      if (row.cp_id == cp && row.epoch == epoch) return &row;
    }
    return nullptr;
  };

  std::string out = "cp";
  for (const char* comp : {"easting_err_mm", "northing_err_mm", "altitude_err_mm"}) {
    for (const auto& ep : epochs) {
      out.push_back(',');
      out += comp;
      out += "_epoch";
      out += ep;
    }
  }
  out.push_back('\n');
  for (const auto& cp : cps) {
    out += cp;
    for (int comp = 0; comp < 3; ++comp) {
      for (const auto& ep : epochs) {
        out.push_back(',');
        const ResidualRow* row = find_row(cp, ep);
        if (!row) {
          out += "NA";
          continue;
        }
        const double v = comp == 0 ? row->de_mm : comp == 1 ? row->dn_mm : row->dh_mm;
        out += fixed(v, 1);
      }
    }
    out.push_back('\n');
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FileError("cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw FileError("short write to '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

std::string fnv1a_hex(const std::string& content) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : content) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

std::string write_manifest_json(const RunManifest& manifest) {
  nlohmann::ordered_json j;
  j["command"] = manifest.command;
  j["version"] = manifest.version;
  j["seed"] = manifest.seed;
  j["parameters"] = manifest.parameters;
  j["inputs"] = manifest.input_digests;
  j["outputs"] = manifest.outputs;
  return j.dump(2) + "\n";
}

}  // namespace deformkit::io
