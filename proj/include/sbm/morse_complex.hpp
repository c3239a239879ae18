#pragma once

#include <vector>

#include <Eigen/Dense>

#include "sbm/susy_flat.hpp"

namespace sbm {

// Nondegenerate critical point of a Morse function on the flat torus.
// frame columns are orthonormal Hessian eigenvectors ordered with
// positive curvatures first, so the trailing `index` columns span the
// unstable (descending) subspace.  Eigenvector signs are fixed by making
// the largest-magnitude component positive; the per-point orientation
// choice flips matched rows and columns of the coboundary and therefore
// never affects d^2 = 0 or Betti numbers.
struct CriticalPoint {
  Eigen::VectorXd location;    // in [0, 2pi)^m
  int index = 0;               // negative Hessian eigenvalues
  double h_value = 0.0;
  Eigen::VectorXd curvatures;  // Hessian eigenvalues, descending
  Eigen::MatrixXd frame;       // matching eigenvectors as columns
};

// One steepest-descent curve from a higher critical point down to a
// lower one.  The sign factors the leaving direction out of the source's
// unstable frame, transports the complement along the curve (the metric
// is Euclidean, so transport is the identity on components), and
// compares it with the target's unstable frame.
struct Instanton {
  int source = -1;  // id into MorseComplex::points; filled by tunneling_matrix
  int target = -1;
  int sign = 0;
  std::vector<Eigen::VectorXd> curve;  // sampled from source to target
};

struct MorseComplex {
  std::vector<CriticalPoint> points;
  std::vector<std::vector<int>> grading;  // point ids per Morse index, 0..m
  std::vector<Instanton> instantons;
  // rescaled[p](i, j): signed instanton count from grading[p][j] up to
  // grading[p+1][i].  coboundary[p] multiplies the same integers by the
  // tunneling amplitude (u/pi)^{1/2} exp(-u (h_up - h_down)).
  std::vector<Eigen::MatrixXi> rescaled;
  std::vector<Eigen::MatrixXd> coboundary;
  double u = 0.0;
  double gap_ratio = 0.0;
};

// Locates every critical point on the torus (m <= 2) via a dense seed
// scan plus Newton iteration; positions are converged well below 1e-8.
// Throws std::runtime_error on a degenerate critical point.
std::vector<CriticalPoint> find_critical_points(const MorseFunctionSpec& spec);

// All descending flows dx/dt = -grad h from b to a, found by shooting
// along unstable directions of b.  A flow connects once it enters a 1e-3
// ball around a.  Returns the empty list unless index(b) = index(a) + 1.
// Throws std::runtime_error when a continuum of connecting directions is
// detected (non-transverse configuration).
std::vector<Instanton> steepest_descent_flows(const MorseFunctionSpec& spec,
                                              const CriticalPoint& a,
                                              const CriticalPoint& b);

// Assembles the instanton complex at coupling u.  Requires the harmonic
// scale u * min |curvature| to exceed the squared tunneling scale
// (u/pi) exp(-2 u dh) by a factor of 10; the ratio is reported in
// gap_ratio and a std::runtime_error names it when the bound fails.
MorseComplex tunneling_matrix(const MorseFunctionSpec& spec, double u);

// Cohomology ranks of the integer rescaled coboundary.  Verifies
// d . d = 0 exactly on the integer matrices and throws on violation.
std::vector<int> betti_numbers(const MorseComplex& complex);

}  // namespace sbm
