#include "deformkit/netadjust.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "deformkit/errors.hpp"

namespace deformkit::netadjust {

namespace {

struct Indexer {
  // Unknown layout: 3 coordinates per free point, then one orientation per
  // direction set.
  std::vector<std::string> free_points;
  std::map<std::string, int> point_offset;  // id -> first unknown index, -1 if fixed
  std::vector<SetKey> sets;
  std::map<SetKey, int> set_offset;
  int count = 0;
};

double azimuth_gon(const Point3& from, const Point3& to) {
  return wrap_gon(std::atan2(to.e - from.e, to.n - from.n) * kGonPerRad);
}

struct Row {
  // Sparse observation row: up to 7 nonzero entries
  // (3 coords x 2 points + orientation).
  int idx[7];
  double coeff[7];
  int nnz = 0;
  double misclosure = 0.0;
  double weight = 0.0;

  void add(int unknown, double value) {
    if (unknown < 0) return;  // fixed point: coefficient drops out
    idx[nnz] = unknown;
    coeff[nnz] = value;
    ++nnz;
  }
};

}  // namespace

AdjustedNetwork adjust_network(const ObservationSet& obs,
                               const std::map<std::string, Point3>& initial,
                               const AdjustmentConfig& cfg) {
  if (cfg.max_iterations < 1) throw Error("max_iterations must be >= 1");
  if (cfg.convergence_threshold_m <= 0.0) throw Error("convergence threshold must be > 0");

  // Every observed point needs an initial coordinate.
  std::set<std::string> observed;
  for (const auto& d : obs.distances) {
    observed.insert(d.from);
    observed.insert(d.to);
  }
  for (const auto& d : obs.directions) {
    observed.insert(d.from);
    observed.insert(d.to);
  }
  for (const auto& z : obs.zeniths) {
    observed.insert(z.from);
    observed.insert(z.to);
  }
  for (const auto& g : obs.gnss) observed.insert(g.id);
  for (const auto& id : observed) {
    if (!initial.count(id)) throw UnresolvedPointId(id);
  }

  const std::set<std::string> fixed(cfg.fixed_point_ids.begin(), cfg.fixed_point_ids.end());
  for (const auto& id : fixed) {
    if (!initial.count(id)) throw UnresolvedPointId(id);
  }

  Indexer ix;
  for (const auto& [id, p] : initial) {
    (void)p;
    if (fixed.count(id)) {
      ix.point_offset[id] = -1;
    } else {
      ix.point_offset[id] = ix.count;
      ix.free_points.push_back(id);
      ix.count += 3;
    }
  }
  {
    std::set<SetKey> set_keys;
    for (const auto& d : obs.directions) set_keys.insert({d.from, d.set_id});
    for (const auto& key : set_keys) {
      ix.set_offset[key] = ix.count;
      ix.sets.push_back(key);
      ix.count += 1;
    }
  }

  const int n_obs = static_cast<int>(obs.count());
  const int n_unknowns = ix.count;
  const int redundancy = n_obs - n_unknowns;
  if (cfg.check_redundancy && redundancy < 1) {
    throw InsufficientRedundancy(n_obs, n_unknowns);
  }
  // Datum precondition: GNSS priors or at least three held points.
  if (obs.gnss.empty() && fixed.size() < 3) throw DatumDefect();

  std::map<std::string, Point3> coords = initial;

  // Initial orientations from the starting coordinates keep the first
  // linearization close.
  std::map<SetKey, double> orientation;
  {
    std::map<SetKey, std::pair<double, double>> acc;  // sum sin, cos
    for (const auto& d : obs.directions) {
      const double offset =
          wrap_gon(azimuth_gon(coords.at(d.from), coords.at(d.to)) - d.value_gon);
      auto& [s, c] = acc[{d.from, d.set_id}];
      s += std::sin(offset * kRadPerGon);
      c += std::cos(offset * kRadPerGon);
    }
    for (const auto& key : ix.sets) {
      const auto& [s, c] = acc.at(key);
      orientation[key] = wrap_gon(std::atan2(s, c) * kGonPerRad);
    }
  }

  auto build_rows = [&](std::vector<Row>& rows) {
    rows.clear();
    rows.reserve(static_cast<std::size_t>(n_obs));
    for (const auto& d : obs.distances) {
      const Point3& pf = coords.at(d.from);
      const Point3& pt = coords.at(d.to);
      const double de = pt.e - pf.e, dn = pt.n - pf.n, dh = pt.h - pf.h;
      const double s = std::sqrt(de * de + dn * dn + dh * dh);
      Row row;
      const int f = ix.point_offset.at(d.from);
      const int t = ix.point_offset.at(d.to);
      row.add(t < 0 ? -1 : t + 0, de / s);
      row.add(t < 0 ? -1 : t + 1, dn / s);
      row.add(t < 0 ? -1 : t + 2, dh / s);
      row.add(f < 0 ? -1 : f + 0, -de / s);
      row.add(f < 0 ? -1 : f + 1, -dn / s);
      row.add(f < 0 ? -1 : f + 2, -dh / s);
      row.misclosure = d.value_m - s;
      row.weight = 1.0 / (d.sigma_m * d.sigma_m);
      rows.push_back(row);
    }
    for (const auto& d : obs.directions) {
      const Point3& pf = coords.at(d.from);
      const Point3& pt = coords.at(d.to);
      const double de = pt.e - pf.e, dn = pt.n - pf.n;
      const double d2 = de * de + dn * dn;
      const SetKey key{d.from, d.set_id};
      const double computed = wrap_gon(azimuth_gon(pf, pt) - orientation.at(key));
      Row row;
      const int f = ix.point_offset.at(d.from);
      const int t = ix.point_offset.at(d.to);
      const double ce = dn / d2 * kGonPerRad;
      const double cn = -de / d2 * kGonPerRad;
      row.add(t < 0 ? -1 : t + 0, ce);
      row.add(t < 0 ? -1 : t + 1, cn);
      row.add(f < 0 ? -1 : f + 0, -ce);
      row.add(f < 0 ? -1 : f + 1, -cn);
      row.add(ix.set_offset.at(key), -1.0);
      row.misclosure = wrap_gon_signed(d.value_gon - computed);
      row.weight = 1.0 / (d.sigma_gon * d.sigma_gon);
      rows.push_back(row);
    }
    for (const auto& z : obs.zeniths) {
      const Point3& pf = coords.at(z.from);
      const Point3& pt = coords.at(z.to);
      const double de = pt.e - pf.e, dn = pt.n - pf.n, dh = pt.h - pf.h;
      const double hd = std::hypot(de, dn);
      const double d2 = hd * hd + dh * dh;
      const double computed = std::atan2(hd, dh) * kGonPerRad;
      Row row;
      const int f = ix.point_offset.at(z.from);
      const int t = ix.point_offset.at(z.to);
      const double ce = dh * de / (hd * d2) * kGonPerRad;
      const double cn = dh * dn / (hd * d2) * kGonPerRad;
      const double ch = -hd / d2 * kGonPerRad;
      row.add(t < 0 ? -1 : t + 0, ce);
      row.add(t < 0 ? -1 : t + 1, cn);
      row.add(t < 0 ? -1 : t + 2, ch);
      row.add(f < 0 ? -1 : f + 0, -ce);
      row.add(f < 0 ? -1 : f + 1, -cn);
      row.add(f < 0 ? -1 : f + 2, -ch);
      row.misclosure = z.value_gon - computed;
      row.weight = 1.0 / (z.sigma_gon * z.sigma_gon);
      rows.push_back(row);
    }
    for (const auto& g : obs.gnss) {
      const Point3& p = coords.at(g.id);
      const int o = ix.point_offset.at(g.id);
      const double wh = 1.0 / (g.sigma_h_m * g.sigma_h_m);
      const double wv = 1.0 / (g.sigma_v_m * g.sigma_v_m);
      Row re;
      re.add(o < 0 ? -1 : o + 0, 1.0);
      re.misclosure = g.e - p.e;
      re.weight = wh;
      rows.push_back(re);
      Row rn;
      rn.add(o < 0 ? -1 : o + 1, 1.0);
      rn.misclosure = g.n - p.n;
      rn.weight = wh;
      rows.push_back(rn);
      Row rh;
      rh.add(o < 0 ? -1 : o + 2, 1.0);
      rh.misclosure = g.h - p.h;
      rh.weight = wv;
      rows.push_back(rh);
    }
  };

  Eigen::MatrixXd N(n_unknowns, n_unknowns);
  Eigen::VectorXd rhs(n_unknowns);
  std::vector<Row> rows;
  Eigen::LDLT<Eigen::MatrixXd> solver;

  int iterations = 0;
  bool converged = false;
  while (iterations < cfg.max_iterations) {
    build_rows(rows);
    N.setZero();
    rhs.setZero();
    for (const auto& row : rows) {
      for (int a = 0; a < row.nnz; ++a) {
        rhs(row.idx[a]) += row.weight * row.coeff[a] * row.misclosure;
        for (int b = a; b < row.nnz; ++b) {
          N(row.idx[a], row.idx[b]) += row.weight * row.coeff[a] * row.coeff[b];
        }
      }
    }
    N.triangularView<Eigen::StrictlyLower>() = N.transpose();

    if (iterations == 0) {
      // Rank check on the first normal matrix catches datum defects the
      // precondition cannot (e.g. a single GNSS prior leaving rotation free).
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(N, Eigen::EigenvaluesOnly);
      const double max_ev = eig.eigenvalues().cwiseAbs().maxCoeff();
      if (!(max_ev > 0.0) || eig.eigenvalues().minCoeff() <= 1e-12 * max_ev) {
        throw DatumDefect();
      }
    }

    solver.compute(N);
    if (solver.info() != Eigen::Success) throw DatumDefect();
    const Eigen::VectorXd dx = solver.solve(rhs);

    double max_coord_update = 0.0;
    for (const auto& id : ix.free_points) {
      const int o = ix.point_offset.at(id);
      Point3& p = coords.at(id);
      p.e += dx(o + 0);
      p.n += dx(o + 1);
      p.h += dx(o + 2);
      max_coord_update = std::max({max_coord_update, std::abs(dx(o + 0)),
                                   std::abs(dx(o + 1)), std::abs(dx(o + 2))});
    }
    for (const auto& key : ix.sets) {
      orientation[key] = wrap_gon(orientation.at(key) + dx(ix.set_offset.at(key)));
    }
    ++iterations;
    if (max_coord_update < cfg.convergence_threshold_m) {
      converged = true;
      break;
    }
  }
  if (!converged) throw NoConvergence(cfg.max_iterations);

  // Residuals at the converged solution: v = computed - observed = -l.
  build_rows(rows);
  double vtwv = 0.0;
  for (const auto& row : rows) vtwv += row.weight * row.misclosure * row.misclosure;
  const double s0_sq = redundancy > 0 ? vtwv / redundancy : 0.0;

  const Eigen::MatrixXd Qxx =
      solver.solve(Eigen::MatrixXd::Identity(n_unknowns, n_unknowns));

  // Network-internal precision: project the coordinate covariance into a
  // datum free of common translation and azimuth (an S-transformation).
  // Scale and the horizontal-axis rotations are observed by distances and
  // zenith angles, so only four datum columns remain.
  const int n_free = static_cast<int>(ix.free_points.size());
  Eigen::MatrixXd inner_diag = Eigen::MatrixXd::Zero(3 * n_free, 1);
  {
    Eigen::MatrixXd Qcc(3 * n_free, 3 * n_free);
    for (int a = 0; a < n_free; ++a) {
      const int oa = ix.point_offset.at(ix.free_points[a]);
      for (int b = 0; b < n_free; ++b) {
        const int ob = ix.point_offset.at(ix.free_points[b]);
        Qcc.block<3, 3>(3 * a, 3 * b) = Qxx.block<3, 3>(oa, ob);
      }
    }
    double ce = 0.0, cn = 0.0;
    for (const auto& id : ix.free_points) {
      ce += coords.at(id).e;
      cn += coords.at(id).n;
    }
    ce /= n_free;
    cn /= n_free;
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(3 * n_free, 4);
    for (int a = 0; a < n_free; ++a) {
      const Point3& p = coords.at(ix.free_points[a]);
      H(3 * a + 0, 0) = 1.0;                // east translation
      H(3 * a + 1, 1) = 1.0;                // north translation
      H(3 * a + 2, 2) = 1.0;                // height translation
      H(3 * a + 0, 3) = -(p.n - cn);        // rotation about the vertical
      H(3 * a + 1, 3) = p.e - ce;
    }
    const Eigen::MatrixXd S =
        Eigen::MatrixXd::Identity(3 * n_free, 3 * n_free) -
        H * (H.transpose() * H).ldlt().solve(H.transpose());
    const Eigen::MatrixXd Q_inner = S * Qcc * S.transpose();
    inner_diag = Q_inner.diagonal();
  }

  AdjustedNetwork net;
  net.a_posteriori_variance_factor = s0_sq;
  net.iterations_used = iterations;
  net.observation_count = n_obs;
  net.unknown_count = n_unknowns;
  net.redundancy = redundancy;
  for (const auto& [id, offset] : ix.point_offset) {
    AdjustedPoint ap;
    ap.coords = coords.at(id);
    ap.fixed = offset < 0;
    if (!ap.fixed) {
      ap.sigma_e = std::sqrt(std::max(0.0, s0_sq * Qxx(offset + 0, offset + 0)));
      ap.sigma_n = std::sqrt(std::max(0.0, s0_sq * Qxx(offset + 1, offset + 1)));
      ap.sigma_h = std::sqrt(std::max(0.0, s0_sq * Qxx(offset + 2, offset + 2)));
      const auto it =
          std::find(ix.free_points.begin(), ix.free_points.end(), id);
      const int a = static_cast<int>(it - ix.free_points.begin());
      ap.sigma_e_inner = std::sqrt(std::max(0.0, s0_sq * inner_diag(3 * a + 0)));
      ap.sigma_n_inner = std::sqrt(std::max(0.0, s0_sq * inner_diag(3 * a + 1)));
      ap.sigma_h_inner = std::sqrt(std::max(0.0, s0_sq * inner_diag(3 * a + 2)));
    }
    net.points[id] = ap;
  }
  for (const auto& key : ix.sets) {
    OrientationSolution sol;
    sol.value_gon = orientation.at(key);
    const int o = ix.set_offset.at(key);
    sol.sigma_gon = std::sqrt(std::max(0.0, s0_sq * Qxx(o, o)));
    net.orientations[key] = sol;
  }
  return net;
}

PrecisionReport assess_precision(const AdjustedNetwork& net,
                                 const std::map<std::string, Point3>& truth) {
  PrecisionReport report;
  double qe = 0.0, qn = 0.0, qh = 0.0;
  double sse = 0.0, ssn = 0.0, ssh = 0.0;
  int n_sigma = 0;
  for (const auto& [id, ap] : net.points) {
    const auto it = truth.find(id);
    if (it == truth.end()) throw MissingTruthPoint(id);
    PrecisionReport::PerPoint pp;
    pp.id = id;
    pp.de_m = ap.coords.e - it->second.e;
    pp.dn_m = ap.coords.n - it->second.n;
    pp.dh_m = ap.coords.h - it->second.h;
    qe += pp.de_m * pp.de_m;
    qn += pp.dn_m * pp.dn_m;
    qh += pp.dh_m * pp.dh_m;
    report.max_abs_e_m = std::max(report.max_abs_e_m, std::abs(pp.de_m));
    report.max_abs_n_m = std::max(report.max_abs_n_m, std::abs(pp.dn_m));
    report.max_abs_h_m = std::max(report.max_abs_h_m, std::abs(pp.dh_m));
    report.per_point.push_back(std::move(pp));
    if (!ap.fixed) {
      sse += ap.sigma_e;
      ssn += ap.sigma_n;
      ssh += ap.sigma_h;
      ++n_sigma;
    }
  }
  const double n = static_cast<double>(report.per_point.size());
  report.rmse_e_m = std::sqrt(qe / n);
  report.rmse_n_m = std::sqrt(qn / n);
  report.rmse_h_m = std::sqrt(qh / n);
  if (n_sigma > 0) {
    report.mean_sigma_e_m = sse / n_sigma;
    report.mean_sigma_n_m = ssn / n_sigma;
    report.mean_sigma_h_m = ssh / n_sigma;
  }
  return report;
}

ConsistencyRatios sigma_consistency(const std::vector<AdjustedNetwork>& replications) {
  if (replications.size() < 2) throw Error("need at least two replications");
  ConsistencyRatios ratios;
  double scatter_e = 0.0, scatter_n = 0.0, scatter_h = 0.0;
  double sigma_e = 0.0, sigma_n = 0.0, sigma_h = 0.0;
  int n_points = 0;
  const double reps = static_cast<double>(replications.size());
  for (const auto& [id, first] : replications.front().points) {
    if (first.fixed) continue;
    double me = 0.0, mn = 0.0, mh = 0.0;
    for (const auto& rep : replications) {
      const auto& p = rep.points.at(id);
      me += p.coords.e;
      mn += p.coords.n;
      mh += p.coords.h;
    }
    me /= reps;
    mn /= reps;
    mh /= reps;
    double ve = 0.0, vn = 0.0, vh = 0.0;
    double se = 0.0, sn = 0.0, sh = 0.0;
    for (const auto& rep : replications) {
      const auto& p = rep.points.at(id);
      ve += (p.coords.e - me) * (p.coords.e - me);
      vn += (p.coords.n - mn) * (p.coords.n - mn);
      vh += (p.coords.h - mh) * (p.coords.h - mh);
      se += p.sigma_e;
      sn += p.sigma_n;
      sh += p.sigma_h;
    }
    scatter_e += ve / (reps - 1.0);
    scatter_n += vn / (reps - 1.0);
    scatter_h += vh / (reps - 1.0);
    sigma_e += se / reps;
    sigma_n += sn / reps;
    sigma_h += sh / reps;
    ++n_points;
  }
  if (n_points == 0) throw Error("no free points in the replications");
  ratios.e = std::sqrt(scatter_e / n_points) / (sigma_e / n_points);
  ratios.n = std::sqrt(scatter_n / n_points) / (sigma_n / n_points);
  ratios.h = std::sqrt(scatter_h / n_points) / (sigma_h / n_points);
  return ratios;
}

std::string write_adjusted_csv(const AdjustedNetwork& net) {
  std::string out =
      "id,e,n,h,sigma_e,sigma_n,sigma_h,sigma_e_inner,sigma_n_inner,sigma_h_inner\n";
  char buf[256];
  for (const auto& [id, p] : net.points) {
    std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n",
                  id.c_str(), p.coords.e, p.coords.n, p.coords.h, p.sigma_e, p.sigma_n,
                  p.sigma_h, p.sigma_e_inner, p.sigma_n_inner, p.sigma_h_inner);
    out += buf;
  }
  return out;
}

}  // namespace deformkit::netadjust
