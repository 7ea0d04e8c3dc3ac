#pragma once

// Loader for the on-bridge checkpoint fixture: reference (tachymetric) and
// measured (reconstructed) coordinates per checkpoint and epoch.

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "deformkit/georef.hpp"

#ifndef DEFORMKIT_FIXTURE_DIR
#define DEFORMKIT_FIXTURE_DIR "tests/fixtures"
#endif

namespace testsupport {

inline deformkit::georef::CheckpointSet load_checkpoint_csv(const std::string& filename) {
  const std::string path = std::string(DEFORMKIT_FIXTURE_DIR) + "/" + filename;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open fixture " + path);
  deformkit::georef::CheckpointSet set;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("cp,", 0) == 0) continue;
    std::istringstream fields(line);
    std::string cp, epoch, tok;
    std::getline(fields, cp, ',');
    std::getline(fields, epoch, ',');
    deformkit::Point3 p;
    std::getline(fields, tok, ',');
    p.e = std::stod(tok);
    std::getline(fields, tok, ',');
    p.n = std::stod(tok);
    std::getline(fields, tok, ',');
    p.h = std::stod(tok);
    set[{cp, epoch}] = p;
  }
  return set;
}

}  // namespace testsupport
