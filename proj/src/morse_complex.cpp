#include "sbm/morse_complex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace sbm {

namespace {

double wrap_2pi(double x) {
  double y = std::fmod(x, 2.0 * M_PI);
  if (y < 0.0) y += 2.0 * M_PI;
  return y;
}

Eigen::VectorXd wrap_point(Eigen::VectorXd x) {
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = wrap_2pi(x[i]);
  return x;
}

// Minimum-image difference a - b, componentwise in (-pi, pi].
Eigen::VectorXd torus_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  Eigen::VectorXd d = a - b;
  for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = std::remainder(d[i], 2.0 * M_PI);
  return d;
}

double torus_dist(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return torus_diff(a, b).norm();
}

void require_torus(const MorseFunctionSpec& spec) {
  if (spec.domain != Domain::Torus)
    throw std::invalid_argument("Morse complex construction needs a torus domain");
  if (spec.m < 1 || spec.m > 2)
    throw std::invalid_argument("Morse complex construction supports m in {1, 2}");
}

// Newton iteration on grad h = 0 with periodic wrapping.  Wild steps mean
// the seed sits in a nearly singular Hessian region; the seed grid is
// dense enough that such seeds can simply be dropped.
bool newton_converge(const MorseFunctionSpec& spec, Eigen::VectorXd& x) {
  for (int it = 0; it < 80; ++it) {
    const Eigen::VectorXd g = spec.grad(x);
    if (g.lpNorm<Eigen::Infinity>() < 1e-13) return true;
    const Eigen::VectorXd step = spec.hess(x).fullPivLu().solve(g);
    if (!step.allFinite() || step.norm() > 1.0) return false;
    x = wrap_point(x - step);
  }
  return spec.grad(x).lpNorm<Eigen::Infinity>() < 1e-10;
}

struct FlowResult {
  bool hit = false;
  double closest = std::numeric_limits<double>::infinity();
  Eigen::VectorXd closest_point;
  std::vector<Eigen::VectorXd> curve;
};

// Fixed-step RK4 on dx/dt = -grad h with closest-approach tracking.
// Connecting flows take infinite time to reach the target, so entering
// the 1e-3 ball is the success criterion; trajectories that settle at a
// different sink stop once the gradient is negligible.
FlowResult integrate_flow(const MorseFunctionSpec& spec, const Eigen::VectorXd& start,
                          const Eigen::VectorXd& target) {
  const double dt = 5e-3;
  const int max_steps = 60000;
  const double ball = 1e-3;
  FlowResult r;
  Eigen::VectorXd x = wrap_point(start);
  r.closest = torus_dist(x, target);
  r.closest_point = x;
  r.curve.push_back(x);
  const auto f = [&spec](const Eigen::VectorXd& p) { return (-spec.grad(p)).eval(); };
  for (int s = 1; s <= max_steps; ++s) {
    const Eigen::VectorXd k1 = f(x);
    const Eigen::VectorXd k2 = f(wrap_point(x + 0.5 * dt * k1));
    const Eigen::VectorXd k3 = f(wrap_point(x + 0.5 * dt * k2));
    const Eigen::VectorXd k4 = f(wrap_point(x + dt * k3));
    x = wrap_point(x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
    const double d = torus_dist(x, target);
    if (d < r.closest) {
      r.closest = d;
      r.closest_point = x;
    }
    if (s % 25 == 0) r.curve.push_back(x);
    if (d < ball) {
      r.hit = true;
      r.curve.push_back(x);
      return r;
    }
    if (spec.grad(x).norm() < 1e-12) break;
  }
  return r;
}

// Sign convention: factor the leaving direction out of the source's
// unstable frame as the leading vector, orient the complement so that
// (leave, complement) matches the frame orientation, transport the
// complement along the flow (identity for the Euclidean metric), and
// compare against the target's unstable frame.  Flipping any per-point
// frame orientation flips a matched row and column of the coboundary.
int orientation_sign(const CriticalPoint& a, const CriticalPoint& b,
                     const Eigen::VectorXd& leave) {
  const int p = a.index;
  const Eigen::MatrixXd bb = b.frame.rightCols(p + 1);
  Eigen::VectorXd v = bb * (bb.transpose() * leave);
  if (v.norm() < 1e-6) throw std::runtime_error("flow leaves outside the unstable subspace");
  v.normalize();
  Eigen::MatrixXd w(v.size(), p);
  int filled = 0;
  for (int c = 0; c < p + 1 && filled < p; ++c) {
    Eigen::VectorXd cand = bb.col(c) - v * v.dot(bb.col(c));
    for (int k = 0; k < filled; ++k) cand -= w.col(k) * w.col(k).dot(cand);
    const double n = cand.norm();
    if (n < 1e-8) continue;
    w.col(filled++) = cand / n;
  }
  if (filled != p) throw std::runtime_error("unstable frame complement construction failed");
  Eigen::MatrixXd c(p + 1, p + 1);
  c.col(0) = bb.transpose() * v;
  for (int k = 0; k < p; ++k) c.col(k + 1) = bb.transpose() * w.col(k);
  const double d1 = c.determinant();
  double d2 = 1.0;
  if (p > 0) {
    const Eigen::MatrixXd ba = a.frame.rightCols(p);
    d2 = (ba.transpose() * w).determinant();
    if (std::abs(d2) < 1e-3)
      throw std::runtime_error("ambiguous orientation comparison at the flow target");
  }
  return (d1 * d2 > 0.0) ? 1 : -1;
}

}  // namespace

std::vector<CriticalPoint> find_critical_points(const MorseFunctionSpec& spec) {
  require_torus(spec);
  const int per_axis = spec.m == 1 ? 256 : 96;
  std::vector<Eigen::VectorXd> found;
  const int total = spec.m == 1 ? per_axis : per_axis * per_axis;
  for (int s = 0; s < total; ++s) {
    Eigen::VectorXd x(spec.m);
    if (spec.m == 1) {
      x[0] = 2.0 * M_PI * (s + 0.5) / per_axis;
    } else {
      x[0] = 2.0 * M_PI * (s / per_axis + 0.5) / per_axis;
      x[1] = 2.0 * M_PI * (s % per_axis + 0.5) / per_axis;
    }
    if (!newton_converge(spec, x)) continue;
    bool duplicate = false;
    for (const auto& y : found) {
      if (torus_dist(x, y) < 1e-5) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) found.push_back(x);
  }
  std::vector<CriticalPoint> points;
  points.reserve(found.size());
  for (const auto& loc : found) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(spec.hess(loc));
    CriticalPoint cp;
    cp.location = loc;
    cp.h_value = spec.h(loc);
    cp.curvatures = es.eigenvalues().reverse();
    cp.frame = es.eigenvectors().rowwise().reverse();
    if (cp.curvatures.cwiseAbs().minCoeff() < 1e-8) {
      std::ostringstream os;
      os << "degenerate critical point near x = " << loc.transpose();
      throw std::runtime_error(os.str());
    }
    cp.index = static_cast<int>((cp.curvatures.array() < 0.0).count());
    for (Eigen::Index j = 0; j < cp.frame.cols(); ++j) {
      Eigen::Index imax = 0;
      cp.frame.col(j).cwiseAbs().maxCoeff(&imax);
      if (cp.frame(imax, j) < 0.0) cp.frame.col(j) = -cp.frame.col(j);
    }
    points.push_back(std::move(cp));
  }
  std::sort(points.begin(), points.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
    if (a.index != b.index) return a.index < b.index;
    if (std::abs(a.h_value - b.h_value) > 1e-12) return a.h_value < b.h_value;
    for (Eigen::Index i = 0; i < a.location.size(); ++i) {
      if (std::abs(a.location[i] - b.location[i]) > 1e-9) return a.location[i] < b.location[i];
    }
    return false;
  });
  return points;
}

std::vector<Instanton> steepest_descent_flows(const MorseFunctionSpec& spec,
                                              const CriticalPoint& a,
                                              const CriticalPoint& b) {
  require_torus(spec);
  if (b.index != a.index + 1) return {};
  const double offset = 1e-4;
  std::vector<Instanton> flows;

  if (b.index == 1) {
    const Eigen::VectorXd e = b.frame.col(b.frame.cols() - 1);
    for (const double s : {1.0, -1.0}) {
      const Eigen::VectorXd dir = s * e;
      FlowResult r = integrate_flow(spec, wrap_point(b.location + offset * dir), a.location);
      if (!r.hit) continue;
      Instanton inst;
      inst.sign = orientation_sign(a, b, dir);
      inst.curve = std::move(r.curve);
      flows.push_back(std::move(inst));
    }
    return flows;
  }

  // Two-dimensional unstable manifold.  Scan the circle of leaving
  // directions, classify each trajectory by the side on which it passes
  // the target saddle (the sign of the unstable coordinate at closest
  // approach), and bisect every sign change down to a connecting
  // direction.  Brackets that bottom out without entering the 1e-3 ball
  // are far passes whose classifier jumped across the torus seam.
  const int scan_n = 720;
  const Eigen::MatrixXd uns = b.frame.rightCols(2);
  const Eigen::VectorXd ea = a.frame.col(a.frame.cols() - 1);
  const auto direction = [&uns](double theta) {
    return (std::cos(theta) * uns.col(0) + std::sin(theta) * uns.col(1)).eval();
  };
  const auto probe = [&](double theta, FlowResult& out) {
    out = integrate_flow(spec, wrap_point(b.location + offset * direction(theta)), a.location);
    return ea.dot(torus_diff(out.closest_point, a.location));
  };

  std::vector<double> miss(scan_n);
  std::vector<char> hit(scan_n);
  struct Candidate {
    double angle;
    FlowResult flow;
  };
  std::vector<Candidate> cands;
  int hit_count = 0;
  for (int k = 0; k < scan_n; ++k) {
    const double theta = 2.0 * M_PI * k / scan_n;
    FlowResult r;
    miss[k] = probe(theta, r);
    hit[k] = r.hit ? 1 : 0;
    if (r.hit) {
      ++hit_count;
      cands.push_back({theta, std::move(r)});
    }
  }
  if (hit_count > scan_n / 16)
    throw std::runtime_error("non-transverse configuration: connecting directions not discrete");
  for (int k = 0; k < scan_n; ++k) {
    const int k2 = (k + 1) % scan_n;
    if (hit[k] || hit[k2]) continue;
    if (!(miss[k] * miss[k2] < 0.0)) continue;
    double lo = 2.0 * M_PI * k / scan_n;
    double hi = 2.0 * M_PI * (k + 1) / scan_n;
    double mlo = miss[k];
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      FlowResult r;
      const double mm = probe(mid, r);
      if (r.hit) {
        cands.push_back({mid, std::move(r)});
        break;
      }
      if (mm * mlo > 0.0) {
        lo = mid;
        mlo = mm;
      } else {
        hi = mid;
      }
    }
  }

  std::sort(cands.begin(), cands.end(),
            [](const Candidate& x, const Candidate& y) { return x.angle < y.angle; });
  const double merge = 1.5 * 2.0 * M_PI / scan_n;
  std::vector<Candidate> unique;
  for (auto& cand : cands) {
    if (!unique.empty() && cand.angle - unique.back().angle < merge) continue;
    unique.push_back(std::move(cand));
  }
  while (unique.size() > 1 &&
         2.0 * M_PI - unique.back().angle + unique.front().angle < merge) {
    unique.pop_back();
  }
  for (auto& cand : unique) {
    Instanton inst;
    inst.sign = orientation_sign(a, b, direction(cand.angle));
    inst.curve = std::move(cand.flow.curve);
    flows.push_back(std::move(inst));
  }
  return flows;
}

MorseComplex tunneling_matrix(const MorseFunctionSpec& spec, double u) {
  require_torus(spec);
  if (!(u > 0.0)) throw std::invalid_argument("tunneling_matrix needs u > 0");
  MorseComplex cx;
  cx.u = u;
  cx.points = find_critical_points(spec);
  cx.grading.assign(spec.m + 1, {});
  for (size_t i = 0; i < cx.points.size(); ++i)
    cx.grading[cx.points[i].index].push_back(static_cast<int>(i));

  double omega = std::numeric_limits<double>::infinity();
  for (const auto& cp : cx.points) omega = std::min(omega, u * cp.curvatures.cwiseAbs().minCoeff());
  double low = 0.0;
  for (int p = 0; p < spec.m; ++p) {
    for (const int ja : cx.grading[p]) {
      for (const int jb : cx.grading[p + 1]) {
        const double dh = cx.points[jb].h_value - cx.points[ja].h_value;
        if (dh > 0.0) low = std::max(low, (u / M_PI) * std::exp(-2.0 * u * dh));
      }
    }
  }
  cx.gap_ratio = low > 0.0 ? omega / low : std::numeric_limits<double>::infinity();
  if (!(cx.gap_ratio > 10.0)) {
    std::ostringstream os;
    os << "low and high spectra do not separate: gap ratio " << cx.gap_ratio
       << " <= 10 at u = " << u;
    throw std::runtime_error(os.str());
  }

  const double amp = std::sqrt(u / M_PI);
  for (int p = 0; p < spec.m; ++p) {
    const auto& lo_ids = cx.grading[p];
    const auto& hi_ids = cx.grading[p + 1];
    Eigen::MatrixXi n = Eigen::MatrixXi::Zero(hi_ids.size(), lo_ids.size());
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(hi_ids.size(), lo_ids.size());
    for (size_t j = 0; j < lo_ids.size(); ++j) {
      for (size_t i = 0; i < hi_ids.size(); ++i) {
        const CriticalPoint& a = cx.points[lo_ids[j]];
        const CriticalPoint& bpt = cx.points[hi_ids[i]];
        auto pair_flows = steepest_descent_flows(spec, a, bpt);
        int count = 0;
        for (auto& f : pair_flows) {
          count += f.sign;
          f.source = hi_ids[i];
          f.target = lo_ids[j];
          cx.instantons.push_back(std::move(f));
        }
        n(i, j) = count;
        c(i, j) = amp * std::exp(-u * (bpt.h_value - a.h_value)) * count;
      }
    }
    cx.rescaled.push_back(std::move(n));
    cx.coboundary.push_back(std::move(c));
  }
  return cx;
}

std::vector<int> betti_numbers(const MorseComplex& complex) {
  for (size_t p = 0; p + 1 < complex.rescaled.size(); ++p) {
    const Eigen::MatrixXi prod = complex.rescaled[p + 1] * complex.rescaled[p];
    if (prod.size() > 0 && prod.cwiseAbs().maxCoeff() != 0)
      throw std::runtime_error("coboundary does not square to zero");
  }
  std::vector<int> rank(complex.rescaled.size(), 0);
  for (size_t p = 0; p < complex.rescaled.size(); ++p) {
    if (complex.rescaled[p].size() == 0) continue;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(complex.rescaled[p].cast<double>());
    lu.setThreshold(1e-9);
    rank[p] = static_cast<int>(lu.rank());
  }
  const int levels = static_cast<int>(complex.grading.size());
  std::vector<int> betti(levels, 0);
  for (int p = 0; p < levels; ++p) {
    const int n = static_cast<int>(complex.grading[p].size());
    const int r_out = p < static_cast<int>(rank.size()) ? rank[p] : 0;
    const int r_in = p > 0 ? rank[p - 1] : 0;
    betti[p] = n - r_out - r_in;
  }
  return betti;
}

}  // namespace sbm
