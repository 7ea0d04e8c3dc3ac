#pragma once

// Independent finite-difference check for the closed-form beam model: solves
// EI * w'''' = q on a uniform grid with free ends (zero moment and shear),
// the point load and the two unknown support reactions entered as nodal
// deltas, and w = 0 enforced at the support nodes. Point deltas at node j
// are spread (1/6, 2/3, 1/6)/h over (j-1, j, j+1), which reproduces the
// discrete fourth difference of a piecewise-cubic exactly, so the solve is
// node-exact when A, B and C sit on grid nodes.

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <stdexcept>
#include <vector>

namespace testsupport {

struct BeamFdProblem {
  double length = 17.5;
  double support_a = 1.5;
  double support_b = 13.5;
  double load_chainage = 7.5;
  double load_n = 95000.0;  // downward point load [N]
  double ei = 2.0e8;        // [N m^2]
  int nodes = 10001;
};

/// Returns w (positive up) at the grid nodes; chainage of node i is
/// i * length / (nodes - 1). Supports and load are snapped to the nearest
/// node; callers should pass chainages that already sit on nodes.
inline std::vector<double> solve_beam_fd(const BeamFdProblem& prob) {
  const int n = prob.nodes;
  if (n < 7) throw std::invalid_argument("need at least 7 nodes");
  const double h = prob.length / (n - 1);
  auto node_of = [&](double x) { return static_cast<int>(std::lround(x / h)); };
  const int ja = node_of(prob.support_a);
  const int jb = node_of(prob.support_b);
  const int jc = node_of(prob.load_chainage);
  if (ja < 1 || jb > n - 2 || ja == jb) {
    throw std::invalid_argument("supports must be interior grid nodes");
  }

  using Triplet = Eigen::Triplet<double>;
  std::vector<Triplet> triplets;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 2);
  const double inv_h4 = prob.ei / (h * h * h * h);

  auto add = [&](int row, int col, double v) { triplets.emplace_back(row, col, v); };

  // Beam equations; rows 0, 1, n-2, n-1 have ghost nodes eliminated via the
  // free-end conditions w'' = w''' = 0.
  for (int i = 0; i < n; ++i) {
    if (i == 0) {
      add(0, 0, 2.0 * inv_h4);
      add(0, 1, -4.0 * inv_h4);
      add(0, 2, 2.0 * inv_h4);
    } else if (i == 1) {
      add(1, 0, -2.0 * inv_h4);
      add(1, 1, 5.0 * inv_h4);
      add(1, 2, -4.0 * inv_h4);
      add(1, 3, 1.0 * inv_h4);
    } else if (i == n - 2) {
      add(i, n - 1, -2.0 * inv_h4);
      add(i, n - 2, 5.0 * inv_h4);
      add(i, n - 3, -4.0 * inv_h4);
      add(i, n - 4, 1.0 * inv_h4);
    } else if (i == n - 1) {
      add(i, n - 1, 2.0 * inv_h4);
      add(i, n - 2, -4.0 * inv_h4);
      add(i, n - 3, 2.0 * inv_h4);
    } else {
      add(i, i - 2, 1.0 * inv_h4);
      add(i, i - 1, -4.0 * inv_h4);
      add(i, i, 6.0 * inv_h4);
      add(i, i + 1, -4.0 * inv_h4);
      add(i, i + 2, 1.0 * inv_h4);
    }
  }

  const double smear[3] = {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0};
  // Downward load at jc on the right-hand side.
  for (int k = -1; k <= 1; ++k) rhs(jc + k) += -prob.load_n * smear[k + 1] / h;
  // Unknown upward reactions at the supports (columns n and n+1).
  for (int k = -1; k <= 1; ++k) {
    add(ja + k, n, -smear[k + 1] / h);
    add(jb + k, n + 1, -smear[k + 1] / h);
  }
  // Support constraints.
  add(n, ja, 1.0);
  add(n + 1, jb, 1.0);

  Eigen::SparseMatrix<double> A(n + 2, n + 2);
  A.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> solver;
  solver.compute(A);
  if (solver.info() != Eigen::Success) throw std::runtime_error("beam FD factorization failed");
  const Eigen::VectorXd sol = solver.solve(rhs);
  if (solver.info() != Eigen::Success) throw std::runtime_error("beam FD solve failed");

  return std::vector<double>(sol.data(), sol.data() + n);
}

}  // namespace testsupport
