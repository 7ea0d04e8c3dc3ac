#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "deformkit/types.hpp"

namespace deformkit::cli {

/// Flat key=value configuration with '#' comments. Flag values override file
/// values via `set`.
class Config {
public:
  static Config from_file(const std::filesystem::path& path);
  static Config from_text(const std::string& text);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::string require_string(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  const std::map<std::string, std::string>& values() const { return values_; }

private:
  std::map<std::string, std::string> values_;
};

struct PipelineResult {
  std::filesystem::path out_dir;
  // Deformation of the bending line evaluated at the transducer chainages,
  // against the generated transducer truth (mm, positive up).
  ComparisonReport transducer_comparison;
  // Line value at the support chainages, expected ~0 (mm).
  double support_a_mm = 0.0;
  double support_b_mm = 0.0;
  // Mean line value over the cantilever range (mm); positive when it rises.
  double cantilever_mean_mm = 0.0;
  bool tolerances_met = false;
};

/// Full synthetic loading study: synth -> (georef) -> dem -> diff -> bend /
/// cross -> render -> report, intermediates persisted under out_dir.
PipelineResult run_pipeline(const Config& config);

/// Entry point behind the `deformkit` binary. Exit codes: 0 success, 1 data
/// error, 2 usage error. Every subcommand writes a run manifest alongside
/// its outputs.
int run(const std::vector<std::string>& args);

}  // namespace deformkit::cli
