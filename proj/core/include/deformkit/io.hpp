#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "deformkit/types.hpp"

namespace deformkit::io {

// Text renderings are deterministic: identical objects yield identical bytes.

/// "E N h [intensity]" lines with shortest round-trip decimals, so
/// parse(write(cloud)) reproduces the cloud field-for-field.
std::string write_xyz_cloud(const PointCloud& cloud);

/// ESRI ASCII grid: ncols/nrows/xllcorner/yllcorner/cellsize/NODATA_value
/// header, heights in meters with 4 decimals, NODATA written as -9999,
/// top row first.
std::string write_esri_grid(const HeightGrid& grid);
HeightGrid read_esri_grid(const std::string& text, const std::string& epoch_id = "");

/// CSV "chainage_m,value_m", NODATA as literal "NA", 6 decimals.
std::string write_profile_csv(const Profile& profile);

/// CSV "time_s,channel,kind,value" in ingest format.
std::string write_transducer_csv(const std::vector<SensorSeries>& series);

/// Binary PPM (P6, maxval 255).
std::string write_ppm(const RgbRaster& raster);

/// Residual table CSV matching the published layout: one row per checkpoint,
/// easting/northing/altitude error columns grouped per epoch, mm with one
/// decimal.
std::string write_residual_csv(const ResidualTable& table);

// ---- filesystem helpers ----------------------------------------------------

std::string read_file(const std::filesystem::path& path);

/// Atomic write: temp file in the target directory, then rename.
void write_file(const std::filesystem::path& path, const std::string& content);

/// FNV-1a 64-bit content digest, hex encoded. Used for run manifests.
std::string fnv1a_hex(const std::string& content);

// ---- run manifest ----------------------------------------------------------

struct RunManifest {
  std::string command;
  std::string version;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> parameters;
  std::map<std::string, std::string> input_digests;  // path -> fnv1a
  std::vector<std::string> outputs;
};

std::string write_manifest_json(const RunManifest& manifest);

}  // namespace deformkit::io
