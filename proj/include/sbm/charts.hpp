#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace sbm {

// One coordinate chart of a 2D surface with analytic metric data.  The
// curvature tensor of a surface is determined by the Gauss curvature:
// R_{ijkl} = K (g_ik g_jl - g_il g_jk), Ricci R_i^j = K delta_i^j.
struct SurfaceChart {
  int id = 0;
  std::function<Eigen::Matrix2d(const Eigen::Vector2d&)> metric;
  std::function<Eigen::Matrix2d(const Eigen::Vector2d&)> metric_inv;
  // christoffel(x)[i](j, k) = Gamma^i_{jk}
  std::function<std::array<Eigen::Matrix2d, 2>(const Eigen::Vector2d&)> christoffel;
  std::function<double(const Eigen::Vector2d&)> gauss_curvature;
  std::function<bool(const Eigen::Vector2d&)> in_region;      // atlas validity
  std::function<bool(const Eigen::Vector2d&)> should_switch;  // hysteresis trigger
  std::function<Eigen::Vector2d(const Eigen::Vector2d&)> to_neighbor;
  std::function<Eigen::Matrix2d(const Eigen::Vector2d&)> to_neighbor_jac;
  std::function<Eigen::Vector2d(const Eigen::Vector2d&)> normalize;  // e.g. torus wrap
  int neighbor_id = 0;
};

struct Surface {
  std::string name;
  std::vector<SurfaceChart> charts;
  double area = 0.0;
  // Deterministic low-discrepancy start points covering the Riemannian
  // volume uniformly; returns (chart id, coordinates) of point idx of total.
  std::function<std::pair<int, Eigen::Vector2d>(int idx, int total)> strata_point;
  // Global distance between chart points: exact wrap distance on the
  // torus, chordal distance on the sphere (collision kernels only need an
  // eps^2-consistent family).
  std::function<double(int chart_a, const Eigen::Vector2d&, int chart_b,
                       const Eigen::Vector2d&)>
      distance;
};

// Point of the orthonormal frame bundle: frame columns e^i_a satisfy
// g^{ij}(x) = sum_a e^i_a e^j_a at the start and within integrator drift
// along simulated paths.
struct FramePoint {
  int chart = 0;
  Eigen::Vector2d x = Eigen::Vector2d::Zero();
  Eigen::Matrix2d e = Eigen::Matrix2d::Identity();
};

// Flat torus [0, 2pi)^2, single self-glued chart, K = 0.
Surface flat_torus();

// Unit round sphere in two stereographic charts with conformal metric
// 4/(1 + |x|^2)^2, transition y = x/|x|^2, switch hysteresis at |x| > 1.2.
Surface round_sphere();

FramePoint make_frame_point(const Surface& surf, int chart, const Eigen::Vector2d& x);

// max_ij |g^{ij}(x) - sum_a e^i_a e^j_a|
double frame_defect(const Surface& surf, const FramePoint& p);

// Largest deviation between analytic Christoffels and the ones assembled
// from 5-point finite differences of the metric.
double chart_consistency_residual(const SurfaceChart& chart,
                                  const std::vector<Eigen::Vector2d>& samples);

// Largest deviation between the analytic Gauss curvature and the one
// assembled from finite differences of the analytic Christoffels.
double curvature_consistency_residual(const SurfaceChart& chart,
                                      const std::vector<Eigen::Vector2d>& samples);

// Largest metric pullback mismatch |g_this - J^T g_neighbor J| over
// samples inside the overlap of the two charts.
double transition_consistency_residual(const Surface& surf, int chart,
                                       const std::vector<Eigen::Vector2d>& samples);

// Lowered curvature tensor R_{ijkl} = K (g_ik g_jl - g_il g_jk);
// result[i][j](k, l).
std::array<std::array<Eigen::Matrix2d, 2>, 2> riemann_lowered(const SurfaceChart& chart,
                                                              const Eigen::Vector2d& x);

// Mixed Ricci tensor R_i^j = K delta_i^j.
Eigen::Matrix2d ricci_mixed(const SurfaceChart& chart, const Eigen::Vector2d& x);

}  // namespace sbm
