#include "sbm/frame_sde.hpp"

#include <stdexcept>

namespace sbm {

namespace {

struct Increment {
  Eigen::Vector2d dx;
  Eigen::Matrix2d de;
};

Increment horizontal_increment(const SurfaceChart& chart, const Eigen::Vector2d& x,
                               const Eigen::Matrix2d& e, const Eigen::Vector2d& db) {
  Increment inc;
  inc.dx = e * db;
  auto gamma = chart.christoffel(x);
  Eigen::Matrix2d m;  // m_{il} = Gamma^i_{kl} dx^k
  for (int i = 0; i < 2; ++i)
    for (int l = 0; l < 2; ++l)
      m(i, l) = gamma[i](0, l) * inc.dx[0] + gamma[i](1, l) * inc.dx[1];
  inc.de = -m * e;
  return inc;
}

}  // namespace

FramePoint frame_sde_step(const Surface& surf, const FramePoint& p,
                          const Eigen::Vector2d& db, FrameScheme scheme) {
  const SurfaceChart& chart = surf.charts[p.chart];

  Eigen::JacobiSVD<Eigen::Matrix2d> svd(p.e);
  double smin = svd.singularValues()(1);
  if (smin <= 0.0 || svd.singularValues()(0) / smin > 1e6)
    throw std::runtime_error("frame degenerated: condition number exceeds 1e6");

  FramePoint q = p;
  Increment a = horizontal_increment(chart, p.x, p.e, db);
  if (scheme == FrameScheme::Heun) {
    Increment b = horizontal_increment(chart, p.x + a.dx, p.e + a.de, db);
    q.x = p.x + 0.5 * (a.dx + b.dx);
    q.e = p.e + 0.5 * (a.de + b.de);
  } else {
    Increment b =
        horizontal_increment(chart, p.x + 0.5 * a.dx, p.e + 0.5 * a.de, db);
    q.x = p.x + b.dx;
    q.e = p.e + b.de;
  }
  q.x = chart.normalize(q.x);

  if (chart.should_switch(q.x)) {
    q.e = chart.to_neighbor_jac(q.x) * q.e;
    q.x = surf.charts[chart.neighbor_id].normalize(chart.to_neighbor(q.x));
    q.chart = chart.neighbor_id;
  }
  if (!surf.charts[q.chart].in_region(q.x))
    throw std::runtime_error("left atlas coverage");
  return q;
}

OddFiber odd_fiber(const Surface& surf, const FramePoint& p) {
  OddFiber f;
  f.xi_rotation = p.e;
  f.pi_rotation = surf.charts[p.chart].metric(p.x) * p.e;
  return f;
}

}  // namespace sbm
