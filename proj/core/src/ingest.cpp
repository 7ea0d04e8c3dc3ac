#include "deformkit/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <istream>
#include <map>
#include <sstream>

#include "deformkit/errors.hpp"

namespace deformkit::ingest {

namespace {

// Splits into lines, accepting LF and CRLF. Control characters other than
// tab, CR and LF make the line malformed.
std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      lines.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) lines.push_back(cur);
  for (auto& line : lines) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
  }
  return lines;
}

void reject_control_chars(const std::string& line, int line_no) {
  for (unsigned char c : line) {
    if (c < 0x20 && c != '\t') {
      throw MalformedLine(line_no, "control character in input");
    }
  }
}

bool is_blank_or_comment(const std::string& line) {
  for (char c : line) {
    if (c == '#') return true;
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream iss(line);
  std::string tok;
  while (iss >> tok) out.push_back(tok);
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  for (auto& f : out) {
    while (!f.empty() && std::isspace(static_cast<unsigned char>(f.front()))) f.erase(f.begin());
    while (!f.empty() && std::isspace(static_cast<unsigned char>(f.back()))) f.pop_back();
  }
  return out;
}

double parse_finite_double(const std::string& tok, int line_no) {
  double v = 0.0;
  const char* begin = tok.data();
  const char* end = begin + tok.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw MalformedLine(line_no, "expected finite number, got '" + tok + "'");
  }
  return v;
}

}  // namespace

PointCloud parse_xyz_cloud(const std::string& text, const std::string& epoch_id) {
  if (epoch_id.empty()) throw Error("epoch id must be non-empty");
  PointCloud cloud;
  cloud.epoch_id = epoch_id;

  const auto lines = split_lines(text);
  bool intensity_decided = false;
  bool with_intensity = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const int line_no = static_cast<int>(i) + 1;
    reject_control_chars(lines[i], line_no);
    if (is_blank_or_comment(lines[i])) continue;
    const auto toks = split_ws(lines[i]);
    if (toks.size() != 3 && toks.size() != 4) {
      throw MalformedLine(line_no, "expected 3 or 4 columns, got " +
                                       std::to_string(toks.size()));
    }
    if (!intensity_decided) {
      with_intensity = toks.size() == 4;
      intensity_decided = true;
    } else if ((toks.size() == 4) != with_intensity) {
      throw MalformedLine(line_no, "inconsistent intensity column");
    }
    Point3 p;
    p.e = parse_finite_double(toks[0], line_no);
    p.n = parse_finite_double(toks[1], line_no);
    p.h = parse_finite_double(toks[2], line_no);
    cloud.points.push_back(p);
    if (with_intensity) cloud.intensity.push_back(parse_finite_double(toks[3], line_no));
  }
  if (cloud.points.empty()) throw EmptyCloud();
  return cloud;
}

PointCloud parse_xyz_cloud(std::istream& in, const std::string& epoch_id) {
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_xyz_cloud(buf.str(), epoch_id);
}

std::vector<ControlPoint> parse_control_points(const std::string& text) {
  std::vector<ControlPoint> points;
  std::set<std::string> seen;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const int line_no = static_cast<int>(i) + 1;
    reject_control_chars(lines[i], line_no);
    if (is_blank_or_comment(lines[i])) continue;
    const auto f = split_csv(lines[i]);
    if (f.size() == 8 && f[0] == "id" && f[1] == "role") continue;  // header
    if (f.size() != 8) {
      throw MalformedLine(line_no, "expected 8 CSV fields, got " + std::to_string(f.size()));
    }
    ControlPoint cp;
    cp.id = f[0];
    if (cp.id.empty()) throw MalformedLine(line_no, "empty id");
    if (!seen.insert(cp.id).second) throw DuplicateId(cp.id);
    if (f[1] == "reference") {
      cp.role = PointRole::reference;
    } else if (f[1] == "object") {
      cp.role = PointRole::object;
    } else if (f[1] == "station") {
      cp.role = PointRole::station;
    } else {
      throw UnknownRole(line_no, f[1]);
    }
    cp.e = parse_finite_double(f[2], line_no);
    cp.n = parse_finite_double(f[3], line_no);
    cp.h = parse_finite_double(f[4], line_no);
    cp.sigma_e = parse_finite_double(f[5], line_no);
    cp.sigma_n = parse_finite_double(f[6], line_no);
    cp.sigma_h = parse_finite_double(f[7], line_no);
    if (cp.sigma_e <= 0.0 || cp.sigma_n <= 0.0 || cp.sigma_h <= 0.0) {
      throw NonPositiveSigma(line_no, "control point '" + cp.id + "'");
    }
    points.push_back(std::move(cp));
  }
  return points;
}

ObservationSet parse_observations(const std::string& text) {
  ObservationSet obs;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const int line_no = static_cast<int>(i) + 1;
    reject_control_chars(lines[i], line_no);
    if (is_blank_or_comment(lines[i])) continue;
    const auto t = split_ws(lines[i]);
    const std::string& rec = t[0];
    auto need = [&](std::size_t n) {
      if (t.size() != n) {
        throw MalformedLine(line_no, rec + " record expects " + std::to_string(n - 1) +
                                         " fields, got " + std::to_string(t.size() - 1));
      }
    };
    auto check_sigma = [&](double s) {
      if (s <= 0.0) throw NonPositiveSigma(line_no, rec + " record");
    };
    if (rec == "DIST") {
      need(5);
      DistanceObs d{t[1], t[2], parse_finite_double(t[3], line_no),
                    parse_finite_double(t[4], line_no)};
      check_sigma(d.sigma_m);
      obs.distances.push_back(std::move(d));
    } else if (rec == "DIR") {
      need(6);
      DirectionObs d{t[1], t[2], parse_finite_double(t[3], line_no),
                     parse_finite_double(t[4], line_no), t[5]};
      check_sigma(d.sigma_gon);
      obs.directions.push_back(std::move(d));
    } else if (rec == "ZEN") {
      need(5);
      ZenithObs z{t[1], t[2], parse_finite_double(t[3], line_no),
                  parse_finite_double(t[4], line_no)};
      check_sigma(z.sigma_gon);
      obs.zeniths.push_back(std::move(z));
    } else if (rec == "GNSS") {
      need(7);
      GnssObs g{t[1],
                parse_finite_double(t[2], line_no),
                parse_finite_double(t[3], line_no),
                parse_finite_double(t[4], line_no),
                parse_finite_double(t[5], line_no),
                parse_finite_double(t[6], line_no)};
      check_sigma(g.sigma_h_m);
      check_sigma(g.sigma_v_m);
      obs.gnss.push_back(std::move(g));
    } else {
      throw UnknownRecordType(line_no, rec);
    }
  }
  return obs;
}

void validate_point_references(const ObservationSet& obs,
                               const std::set<std::string>& known_ids) {
  auto check = [&](const std::string& id) {
    if (!known_ids.count(id)) throw UnresolvedPointId(id);
  };
  for (const auto& d : obs.distances) {
    check(d.from);
    check(d.to);
  }
  for (const auto& d : obs.directions) {
    check(d.from);
    check(d.to);
  }
  for (const auto& z : obs.zeniths) {
    check(z.from);
    check(z.to);
  }
  for (const auto& g : obs.gnss) check(g.id);
}

std::vector<SensorSeries> parse_transducer_series(const std::string& text) {
  std::map<std::string, SensorSeries> by_channel;
  std::vector<std::string> order;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const int line_no = static_cast<int>(i) + 1;
    reject_control_chars(lines[i], line_no);
    if (is_blank_or_comment(lines[i])) continue;
    const auto f = split_csv(lines[i]);
    if (f.size() == 4 && f[0] == "time_s") continue;  // header
    if (f.size() != 4) {
      throw MalformedLine(line_no, "expected 4 CSV fields, got " + std::to_string(f.size()));
    }
    const double t = parse_finite_double(f[0], line_no);
    const std::string& channel = f[1];
    SeriesKind kind;
    if (f[2] == "displacement") {
      kind = SeriesKind::displacement;
    } else if (f[2] == "load_kN") {
      kind = SeriesKind::load_kN;
    } else {
      throw UnknownKind(line_no, f[2]);
    }
    const double value = parse_finite_double(f[3], line_no);

    auto it = by_channel.find(channel);
    if (it == by_channel.end()) {
      SensorSeries s;
      s.channel = channel;
      s.kind = kind;
      it = by_channel.emplace(channel, std::move(s)).first;
      order.push_back(channel);
    } else if (it->second.kind != kind) {
      throw UnknownKind(line_no, "kind changed within channel '" + channel + "'");
    }
    if (!it->second.samples.empty() && t <= it->second.samples.back().time_s) {
      throw NonMonotoneTime(channel, line_no);
    }
    it->second.samples.push_back({t, value});
  }
  std::vector<SensorSeries> out;
  out.reserve(order.size());
  std::sort(order.begin(), order.end());
  for (const auto& ch : order) out.push_back(std::move(by_channel.at(ch)));
  return out;
}

std::vector<std::pair<double, double>> parse_profile_scatter(const std::string& text) {
  std::vector<std::pair<double, double>> out;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const int line_no = static_cast<int>(i) + 1;
    reject_control_chars(lines[i], line_no);
    if (is_blank_or_comment(lines[i])) continue;
    const auto f = split_csv(lines[i]);
    if (f.size() == 2 && f[0] == "chainage_m") continue;  // header
    if (f.size() != 2) {
      throw MalformedLine(line_no, "expected 2 CSV fields, got " + std::to_string(f.size()));
    }
    if (f[1] == "NA") continue;
    out.emplace_back(parse_finite_double(f[0], line_no), parse_finite_double(f[1], line_no));
  }
  return out;
}

std::vector<std::pair<std::string, Point3>> parse_coordinate_list(const std::string& text) {
  std::vector<std::pair<std::string, Point3>> out;
  std::set<std::string> seen;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const int line_no = static_cast<int>(i) + 1;
    reject_control_chars(lines[i], line_no);
    if (is_blank_or_comment(lines[i])) continue;
    const auto f = split_csv(lines[i]);
    if (f.size() == 4 && f[0] == "id") continue;  // header
    if (f.size() != 4) {
      throw MalformedLine(line_no, "expected 4 CSV fields, got " + std::to_string(f.size()));
    }
    if (f[0].empty()) throw MalformedLine(line_no, "empty id");
    if (!seen.insert(f[0]).second) throw DuplicateId(f[0]);
    Point3 p{parse_finite_double(f[1], line_no), parse_finite_double(f[2], line_no),
             parse_finite_double(f[3], line_no)};
    out.emplace_back(f[0], p);
  }
  return out;
}

}  // namespace deformkit::ingest
