#include "sbm/charts.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sbm {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Eigen::Vector2d wrap_torus(const Eigen::Vector2d& x) {
  Eigen::Vector2d y;
  for (int i = 0; i < 2; ++i) y[i] = x[i] - kTwoPi * std::floor(x[i] / kTwoPi);
  return y;
}

// Conformal factor of the stereographic sphere chart, g = e^{2 phi} I with
// phi = log 2 - log(1 + |x|^2); phi_i = -2 x_i / (1 + |x|^2).
Eigen::Vector2d sphere_phi_grad(const Eigen::Vector2d& x) {
  return -2.0 * x / (1.0 + x.squaredNorm());
}

std::array<Eigen::Matrix2d, 2> conformal_christoffel(const Eigen::Vector2d& grad_phi) {
  // Gamma^i_{jk} = d_ij phi_k + d_ik phi_j - d_jk phi_i
  std::array<Eigen::Matrix2d, 2> gamma;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      for (int k = 0; k < 2; ++k) {
        double v = 0.0;
        if (i == j) v += grad_phi[k];
        if (i == k) v += grad_phi[j];
        if (j == k) v -= grad_phi[i];
        gamma[i](j, k) = v;
      }
    }
  }
  return gamma;
}

SurfaceChart sphere_chart(int id) {
  SurfaceChart c;
  c.id = id;
  c.neighbor_id = 1 - id;
  c.metric = [](const Eigen::Vector2d& x) {
    double s = 1.0 + x.squaredNorm();
    return Eigen::Matrix2d((4.0 / (s * s)) * Eigen::Matrix2d::Identity());
  };
  c.metric_inv = [](const Eigen::Vector2d& x) {
    double s = 1.0 + x.squaredNorm();
    return Eigen::Matrix2d((s * s / 4.0) * Eigen::Matrix2d::Identity());
  };
  c.christoffel = [](const Eigen::Vector2d& x) {
    return conformal_christoffel(sphere_phi_grad(x));
  };
  c.gauss_curvature = [](const Eigen::Vector2d&) { return 1.0; };
  c.in_region = [](const Eigen::Vector2d& x) { return x.norm() <= 2.0; };
  c.should_switch = [](const Eigen::Vector2d& x) { return x.norm() > 1.2; };
  c.to_neighbor = [](const Eigen::Vector2d& x) {
    return Eigen::Vector2d(x / x.squaredNorm());
  };
  c.to_neighbor_jac = [](const Eigen::Vector2d& x) {
    double r2 = x.squaredNorm();
    Eigen::Matrix2d j = Eigen::Matrix2d::Identity() / r2 -
                        2.0 * (x * x.transpose()) / (r2 * r2);
    return j;
  };
  c.normalize = [](const Eigen::Vector2d& x) { return x; };
  return c;
}

}  // namespace

Surface flat_torus() {
  SurfaceChart c;
  c.id = 0;
  c.neighbor_id = 0;
  c.metric = [](const Eigen::Vector2d&) { return Eigen::Matrix2d::Identity(); };
  c.metric_inv = [](const Eigen::Vector2d&) { return Eigen::Matrix2d::Identity(); };
  c.christoffel = [](const Eigen::Vector2d&) {
    return std::array<Eigen::Matrix2d, 2>{Eigen::Matrix2d::Zero(),
                                          Eigen::Matrix2d::Zero()};
  };
  c.gauss_curvature = [](const Eigen::Vector2d&) { return 0.0; };
  c.in_region = [](const Eigen::Vector2d&) { return true; };
  c.should_switch = [](const Eigen::Vector2d&) { return false; };
  c.to_neighbor = [](const Eigen::Vector2d& x) { return wrap_torus(x); };
  c.to_neighbor_jac = [](const Eigen::Vector2d&) { return Eigen::Matrix2d::Identity(); };
  c.normalize = [](const Eigen::Vector2d& x) { return wrap_torus(x); };

  Surface s;
  s.name = "flat-torus";
  s.charts = {c};
  s.area = kTwoPi * kTwoPi;
  s.strata_point = [](int idx, int total) {
    // golden-ratio lattice on the square
    double golden = (std::sqrt(5.0) - 1.0) / 2.0;
    double u = (idx + 0.5) / total;
    double v = std::fmod((idx + 0.5) * golden, 1.0);
    return std::make_pair(0, Eigen::Vector2d(kTwoPi * u, kTwoPi * v));
  };
  s.distance = [](int, const Eigen::Vector2d& a, int, const Eigen::Vector2d& b) {
    double dx = std::remainder(a[0] - b[0], kTwoPi);
    double dy = std::remainder(a[1] - b[1], kTwoPi);
    return std::hypot(dx, dy);
  };
  return s;
}

namespace {

// Inverse stereographic embedding into R^3; chart 0 projects from the
// south pole, chart 1 from the north pole.
Eigen::Vector3d sphere_embed(int chart, const Eigen::Vector2d& x) {
  double r2 = x.squaredNorm();
  double s = 1.0 + r2;
  if (chart == 0) return Eigen::Vector3d(2.0 * x[0] / s, 2.0 * x[1] / s, (1.0 - r2) / s);
  return Eigen::Vector3d(2.0 * x[0] / s, 2.0 * x[1] / s, (r2 - 1.0) / s);
}

}  // namespace

Surface round_sphere() {
  Surface s;
  s.name = "round-sphere";
  s.charts = {sphere_chart(0), sphere_chart(1)};
  s.area = 4.0 * std::numbers::pi;
  s.strata_point = [](int idx, int total) {
    // Fibonacci lattice; chart 0 covers z >= 0, chart 1 the rest.
    double z = 1.0 - 2.0 * (idx + 0.5) / total;
    double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    double a = idx * (std::numbers::pi * (3.0 - std::sqrt(5.0)));
    Eigen::Vector2d xy(rho * std::cos(a), rho * std::sin(a));
    if (z >= 0.0) return std::make_pair(0, Eigen::Vector2d(xy / (1.0 + z)));
    return std::make_pair(1, Eigen::Vector2d(xy / (1.0 - z)));
  };
  s.distance = [](int ca, const Eigen::Vector2d& a, int cb, const Eigen::Vector2d& b) {
    return (sphere_embed(ca, a) - sphere_embed(cb, b)).norm();
  };
  return s;
}

FramePoint make_frame_point(const Surface& surf, int chart, const Eigen::Vector2d& x) {
  if (chart < 0 || chart >= static_cast<int>(surf.charts.size()))
    throw std::invalid_argument("make_frame_point: no such chart");
  const SurfaceChart& c = surf.charts[chart];
  Eigen::Vector2d xn = c.normalize(x);
  if (!c.in_region(xn)) throw std::invalid_argument("make_frame_point: outside chart region");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eg(c.metric(xn));
  FramePoint p;
  p.chart = chart;
  p.x = xn;
  p.e = eg.operatorInverseSqrt();
  return p;
}

double frame_defect(const Surface& surf, const FramePoint& p) {
  const SurfaceChart& c = surf.charts[p.chart];
  Eigen::Matrix2d diff = c.metric_inv(p.x) - p.e * p.e.transpose();
  return diff.cwiseAbs().maxCoeff();
}

namespace {

// 5-point central derivative of a matrix-valued chart function.
template <typename F>
Eigen::Matrix2d fd_partial(const F& f, const Eigen::Vector2d& x, int dir, double h) {
  Eigen::Vector2d e = Eigen::Vector2d::Zero();
  e[dir] = 1.0;
  return (-f(x + 2 * h * e) + 8.0 * f(x + h * e) - 8.0 * f(x - h * e) + f(x - 2 * h * e)) /
         (12.0 * h);
}

}  // namespace

double chart_consistency_residual(const SurfaceChart& chart,
                                  const std::vector<Eigen::Vector2d>& samples) {
  double worst = 0.0;
  const double h = 1e-3;
  for (const auto& x : samples) {
    std::array<Eigen::Matrix2d, 2> dg;
    for (int m = 0; m < 2; ++m) dg[m] = fd_partial(chart.metric, x, m, h);
    Eigen::Matrix2d ginv = chart.metric_inv(x);
    auto gamma = chart.christoffel(x);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        for (int k = 0; k < 2; ++k) {
          double v = 0.0;
          for (int l = 0; l < 2; ++l)
            v += 0.5 * ginv(i, l) * (dg[j](l, k) + dg[k](l, j) - dg[l](j, k));
          worst = std::max(worst, std::abs(v - gamma[i](j, k)));
        }
      }
    }
  }
  return worst;
}

double curvature_consistency_residual(const SurfaceChart& chart,
                                      const std::vector<Eigen::Vector2d>& samples) {
  double worst = 0.0;
  const double h = 1e-3;
  auto gamma_mat = [&chart](int i) {
    return [&chart, i](const Eigen::Vector2d& x) { return chart.christoffel(x)[i]; };
  };
  for (const auto& x : samples) {
    std::array<Eigen::Matrix2d, 2> dgamma1, dgamma2;  // d_k Gamma^i
    for (int i = 0; i < 2; ++i) {
      dgamma1[i] = fd_partial(gamma_mat(i), x, 0, h);
      dgamma2[i] = fd_partial(gamma_mat(i), x, 1, h);
    }
    auto gamma = chart.christoffel(x);
    // R^i_{j12} = d_1 Gamma^i_{2j} - d_2 Gamma^i_{1j}
    //             + Gamma^i_{1m} Gamma^m_{2j} - Gamma^i_{2m} Gamma^m_{1j}
    Eigen::Vector2d riem;  // R^m_{212}, index m
    for (int i = 0; i < 2; ++i) {
      double v = dgamma1[i](1, 1) - dgamma2[i](0, 1);
      for (int m = 0; m < 2; ++m)
        v += gamma[i](0, m) * gamma[m](1, 1) - gamma[i](1, m) * gamma[m](0, 1);
      riem[i] = v;
    }
    Eigen::Matrix2d g = chart.metric(x);
    double k_check = (g(0, 0) * riem[0] + g(0, 1) * riem[1]) / g.determinant();
    worst = std::max(worst, std::abs(k_check - chart.gauss_curvature(x)));
  }
  return worst;
}

std::array<std::array<Eigen::Matrix2d, 2>, 2> riemann_lowered(const SurfaceChart& chart,
                                                              const Eigen::Vector2d& x) {
  Eigen::Matrix2d g = chart.metric(x);
  double k = chart.gauss_curvature(x);
  std::array<std::array<Eigen::Matrix2d, 2>, 2> r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int kk = 0; kk < 2; ++kk)
        for (int l = 0; l < 2; ++l)
          r[i][j](kk, l) = k * (g(i, kk) * g(j, l) - g(i, l) * g(j, kk));
  return r;
}

Eigen::Matrix2d ricci_mixed(const SurfaceChart& chart, const Eigen::Vector2d& x) {
  return chart.gauss_curvature(x) * Eigen::Matrix2d::Identity();
}

double transition_consistency_residual(const Surface& surf, int chart,
                                       const std::vector<Eigen::Vector2d>& samples) {
  const SurfaceChart& c = surf.charts[chart];
  const SurfaceChart& n = surf.charts[c.neighbor_id];
  double worst = 0.0;
  for (const auto& x : samples) {
    if (!c.in_region(x)) continue;
    Eigen::Vector2d y = n.normalize(c.to_neighbor(x));
    if (!n.in_region(y)) continue;
    Eigen::Matrix2d j = c.to_neighbor_jac(x);
    Eigen::Matrix2d diff = c.metric(x) - j.transpose() * n.metric(y) * j;
    worst = std::max(worst, diff.cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace sbm
