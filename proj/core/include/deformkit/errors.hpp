#pragma once

#include <stdexcept>
#include <string>

namespace deformkit {

/// Base class for all data errors raised by the library. The CLI maps these
/// to exit code 1 (usage errors are exit code 2 and never reach this type).
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// ---- ingest ----------------------------------------------------------------

class MalformedLine : public Error {
public:
  MalformedLine(int line_no, const std::string& detail)
      : Error("malformed line " + std::to_string(line_no) + ": " + detail),
        line_no(line_no) {}
  int line_no;
};

class EmptyCloud : public Error {
public:
  EmptyCloud() : Error("point cloud is empty") {}
};

class DuplicateId : public Error {
public:
  explicit DuplicateId(const std::string& id)
      : Error("duplicate point id '" + id + "'"), id(id) {}
  std::string id;
};

class UnknownRole : public Error {
public:
  UnknownRole(int line_no, const std::string& role)
      : Error("line " + std::to_string(line_no) + ": unknown role '" + role + "'"),
        line_no(line_no), role(role) {}
  int line_no;
  std::string role;
};

class NonPositiveSigma : public Error {
public:
  NonPositiveSigma(int line_no, const std::string& where)
      : Error("line " + std::to_string(line_no) + ": non-positive sigma in " + where),
        line_no(line_no) {}
  int line_no;
};

class UnknownRecordType : public Error {
public:
  UnknownRecordType(int line_no, const std::string& token)
      : Error("line " + std::to_string(line_no) + ": unknown record type '" + token + "'"),
        line_no(line_no), token(token) {}
  int line_no;
  std::string token;
};

class UnresolvedPointId : public Error {
public:
  explicit UnresolvedPointId(const std::string& id)
      : Error("observation references unknown point id '" + id + "'"), id(id) {}
  std::string id;
};

class NonMonotoneTime : public Error {
public:
  NonMonotoneTime(const std::string& channel, int line_no)
      : Error("line " + std::to_string(line_no) + ": non-monotone time in channel '" +
              channel + "'"),
        channel(channel), line_no(line_no) {}
  std::string channel;
  int line_no;
};

class UnknownKind : public Error {
public:
  UnknownKind(int line_no, const std::string& kind)
      : Error("line " + std::to_string(line_no) + ": unknown series kind '" + kind + "'"),
        line_no(line_no), kind(kind) {}
  int line_no;
  std::string kind;
};

// ---- netadjust -------------------------------------------------------------

class DatumDefect : public Error {
public:
  DatumDefect() : Error("normal matrix singular: network datum is not defined") {}
};

class NoConvergence : public Error {
public:
  explicit NoConvergence(int iterations)
      : Error("adjustment did not converge within " + std::to_string(iterations) +
              " iterations"),
        iterations(iterations) {}
  int iterations;
};

class InsufficientRedundancy : public Error {
public:
  InsufficientRedundancy(int observations, int unknowns)
      : Error("insufficient redundancy: " + std::to_string(observations) +
              " observations for " + std::to_string(unknowns) + " unknowns"),
        observations(observations), unknowns(unknowns) {}
  int observations;
  int unknowns;
};

class MissingTruthPoint : public Error {
public:
  explicit MissingTruthPoint(const std::string& id)
      : Error("truth coordinates missing for point '" + id + "'"), id(id) {}
  std::string id;
};

// ---- georef ----------------------------------------------------------------

class TooFewPoints : public Error {
public:
  TooFewPoints(std::size_t got, std::size_t need)
      : Error("need at least " + std::to_string(need) + " points, got " +
              std::to_string(got)) {}
};

class DegenerateGeometry : public Error {
public:
  explicit DegenerateGeometry(const std::string& detail)
      : Error("degenerate correspondence geometry: " + detail) {}
};

class KeyMismatch : public Error {
public:
  KeyMismatch(const std::string& id, const std::string& epoch)
      : Error("checkpoint key (" + id + ", epoch " + epoch +
              ") present on one side only"),
        id(id), epoch(epoch) {}
  std::string id;
  std::string epoch;
};

class EmptyTable : public Error {
public:
  EmptyTable() : Error("residual table is empty") {}
};

// ---- surface / deform ------------------------------------------------------

class NonPositiveCellSize : public Error {
public:
  NonPositiveCellSize() : Error("cell size must be positive") {}
};

class AxisOutsideGrid : public Error {
public:
  AxisOutsideGrid() : Error("axis does not intersect grid: all samples are NODATA") {}
};

class FrameMismatch : public Error {
public:
  explicit FrameMismatch(const std::string& detail)
      : Error("raster frames differ: " + detail) {}
};

class ChainageOutOfRange : public Error {
public:
  explicit ChainageOutOfRange(double chainage)
      : Error("chainage " + std::to_string(chainage) + " outside axis extent"),
        chainage(chainage) {}
  double chainage;
};

class BadColorParams : public Error {
public:
  BadColorParams() : Error("require threshold >= 0 and saturation > threshold") {}
};

// ---- compare / synthbridge -------------------------------------------------

class TimeOutsideSeries : public Error {
public:
  explicit TimeOutsideSeries(double t)
      : Error("time " + std::to_string(t) + " s outside series span"), t(t) {}
  double t;
};

class PointOutsideExtent : public Error {
public:
  explicit PointOutsideExtent(const std::string& id)
      : Error("truth point '" + id + "' maps outside the evaluated extent"), id(id) {}
  std::string id;
};

class EmptyReport : public Error {
public:
  EmptyReport() : Error("report has no input sections") {}
};

class LoadOutsideSpan : public Error {
public:
  LoadOutsideSpan() : Error("load chainage must lie strictly between the supports") {}
};

class UnreachableTarget : public Error {
public:
  explicit UnreachableTarget(const std::string& detail)
      : Error("stiffness calibration target unreachable: " + detail) {}
};

// ---- io / cli --------------------------------------------------------------

class FileError : public Error {
public:
  explicit FileError(const std::string& detail) : Error(detail) {}
};

class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& detail) : Error(detail) {}
};

}  // namespace deformkit
