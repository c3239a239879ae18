#include "sbm/susy_flat.hpp"

#include <cmath>
#include <complex>

namespace sbm {

namespace {

std::span<const double> as_span(const Eigen::VectorXd& v) {
  return std::span<const double>(v.data(), size_t(v.size()));
}

// Critical points of a 1D Morse function by sign-change scan plus Newton
// polish; used only to reject degenerate Hessians before grid assembly.
std::vector<double> critical_points_1d(const MorseFunctionSpec& spec, double lo, double hi) {
  const int cells = 4096;
  std::vector<double> found;
  auto dh = [&](double x) {
    Eigen::VectorXd v(1);
    v << x;
    return spec.grad(v)[0];
  };
  auto ddh = [&](double x) {
    Eigen::VectorXd v(1);
    v << x;
    return spec.hess(v)(0, 0);
  };
  double prev = dh(lo);
  for (int i = 1; i <= cells; ++i) {
    double x = lo + (hi - lo) * i / cells;
    double cur = dh(x);
    if (prev == 0.0 || prev * cur < 0) {
      double c = x - (hi - lo) / cells / 2;
      for (int it = 0; it < 60; ++it) {
        double d2 = ddh(c);
        if (d2 == 0) break;
        double step = dh(c) / d2;
        c -= step;
        if (std::abs(step) < 1e-14) break;
      }
      bool dup = false;
      for (double f : found)
        if (std::abs(f - c) < 1e-6) dup = true;
      if (!dup) found.push_back(c);
    }
    prev = cur;
  }
  for (double c : found)
    if (std::abs(ddh(c)) < 1e-8)
      throw std::runtime_error("degenerate Hessian at a critical point");
  return found;
}

void require_confining(const MorseFunctionSpec& spec, double half_width) {
  if (spec.domain != Domain::Line) return;
  for (double s : {-1.0, 1.0}) {
    Eigen::VectorXd x = Eigen::VectorXd::Constant(spec.m, 0.0);
    x[0] = s * half_width;
    if (spec.grad(x).norm() < 0.5)
      throw std::invalid_argument(
          "non-confining Morse function on the line: |grad h| too small at the truncation "
          "boundary");
  }
}

// Determinant of the rows/cols submatrix selected by bit masks; the
// exterior-power transport coefficient between fermion words.
double minor_det(const Eigen::MatrixXd& w, Mask rows, Mask cols) {
  std::vector<int> r, c;
  for (int i = 0; i < w.rows(); ++i)
    if (rows >> i & 1) r.push_back(i);
  for (int j = 0; j < w.cols(); ++j)
    if (cols >> j & 1) c.push_back(j);
  if (r.size() != c.size()) return 0.0;
  if (r.empty()) return 1.0;
  Eigen::MatrixXd sub(r.size(), c.size());
  for (size_t i = 0; i < r.size(); ++i)
    for (size_t j = 0; j < c.size(); ++j) sub(Eigen::Index(i), Eigen::Index(j)) = w(r[i], c[j]);
  return sub.determinant();
}

}  // namespace

MorseFunctionSpec quadratic_spec(int m, double u) {
  if (m < 1) throw std::invalid_argument("quadratic_spec: m >= 1 required");
  MorseFunctionSpec s;
  s.m = m;
  s.domain = Domain::Line;
  s.u = u;
  s.name = "quad";
  s.h = [](const Eigen::VectorXd& x) { return 0.5 * x.squaredNorm(); };
  s.grad = [](const Eigen::VectorXd& x) { return x; };
  s.hess = [m](const Eigen::VectorXd&) { return Eigen::MatrixXd::Identity(m, m); };
  return s;
}

MorseFunctionSpec cos_circle_spec(double u) {
  MorseFunctionSpec s;
  s.m = 1;
  s.domain = Domain::Torus;
  s.u = u;
  s.name = "cos";
  s.h = [](const Eigen::VectorXd& x) { return std::cos(x[0]); };
  s.grad = [](const Eigen::VectorXd& x) {
    Eigen::VectorXd g(1);
    g << -std::sin(x[0]);
    return g;
  };
  s.hess = [](const Eigen::VectorXd& x) {
    Eigen::MatrixXd h(1, 1);
    h << -std::cos(x[0]);
    return h;
  };
  return s;
}

MorseFunctionSpec cos2_circle_spec(double u) {
  MorseFunctionSpec s;
  s.m = 1;
  s.domain = Domain::Torus;
  s.u = u;
  s.name = "cos2";
  s.h = [](const Eigen::VectorXd& x) { return 0.25 * std::cos(2 * x[0]); };
  s.grad = [](const Eigen::VectorXd& x) {
    Eigen::VectorXd g(1);
    g << -0.5 * std::sin(2 * x[0]);
    return g;
  };
  s.hess = [](const Eigen::VectorXd& x) {
    Eigen::MatrixXd h(1, 1);
    h << -std::cos(2 * x[0]);
    return h;
  };
  return s;
}

MorseFunctionSpec cos_torus2_spec(double u) {
  MorseFunctionSpec s;
  s.m = 2;
  s.domain = Domain::Torus;
  s.u = u;
  s.name = "cos-sum";
  s.h = [](const Eigen::VectorXd& x) { return std::cos(x[0]) + std::cos(x[1]); };
  s.grad = [](const Eigen::VectorXd& x) {
    Eigen::VectorXd g(2);
    g << -std::sin(x[0]), -std::sin(x[1]);
    return g;
  };
  s.hess = [](const Eigen::VectorXd& x) {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2, 2);
    h(0, 0) = -std::cos(x[0]);
    h(1, 1) = -std::cos(x[1]);
    return h;
  };
  return s;
}

MorseFunctionSpec polynomial_spec(
    int m, const std::vector<std::pair<std::vector<int>, double>>& table, double u) {
  Poly h(m);
  for (const auto& [expo, coeff] : table) {
    if (int(expo.size()) != m) throw std::invalid_argument("polynomial_spec: exponent arity");
    Poly term = Poly::constant(m, coeff);
    for (int i = 0; i < m; ++i)
      for (int k = 0; k < expo[size_t(i)]; ++k) term = term * Poly::variable(m, i);
    h += term;
  }
  std::vector<Poly> grad;
  std::vector<Poly> hess;
  for (int i = 0; i < m; ++i) grad.push_back(h.derivative(i));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) hess.push_back(grad[size_t(i)].derivative(j));
  MorseFunctionSpec s;
  s.m = m;
  s.domain = Domain::Line;
  s.u = u;
  s.name = "poly";
  s.h = [h](const Eigen::VectorXd& x) { return h.eval(as_span(x)); };
  s.grad = [grad, m](const Eigen::VectorXd& x) {
    Eigen::VectorXd g(m);
    for (int i = 0; i < m; ++i) g[i] = grad[size_t(i)].eval(as_span(x));
    return g;
  };
  s.hess = [hess, m](const Eigen::VectorXd& x) {
    Eigen::MatrixXd hm(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) hm(i, j) = hess[size_t(i * m + j)].eval(as_span(x));
    return hm;
  };
  return s;
}

MorseFunctionSpec spec_from_name(const std::string& name, double u) {
  if (name == "quad" || name == "quadratic") return quadratic_spec(1, u);
  if (name == "cos" || name == "cos-circle") return cos_circle_spec(u);
  if (name == "cos2" || name == "cos2-circle") return cos2_circle_spec(u);
  if (name == "cos-sum" || name == "cos-torus2") return cos_torus2_spec(u);
  throw std::invalid_argument("unknown Morse function: " + name);
}

void check_spec_consistency(const MorseFunctionSpec& spec,
                            const std::vector<Eigen::VectorXd>& samples, double tol) {
  const double eps = 1e-5;
  for (const Eigen::VectorXd& x : samples) {
    if (x.size() != spec.m) throw std::invalid_argument("sample dimension mismatch");
    Eigen::VectorXd g = spec.grad(x);
    Eigen::MatrixXd hm = spec.hess(x);
    for (int i = 0; i < spec.m; ++i) {
      Eigen::VectorXd xp = x, xm = x;
      xp[i] += eps;
      xm[i] -= eps;
      double fd = (spec.h(xp) - spec.h(xm)) / (2 * eps);
      if (std::abs(fd - g[i]) > tol * (1 + std::abs(g[i])))
        throw std::runtime_error("gradient inconsistent with h");
      Eigen::VectorXd gp = spec.grad(xp), gm = spec.grad(xm);
      for (int j = 0; j < spec.m; ++j) {
        double hfd = (gp[j] - gm[j]) / (2 * eps);
        if (std::abs(hfd - hm(j, i)) > tol * (1 + std::abs(hm(j, i))))
          throw std::runtime_error("Hessian inconsistent with gradient");
      }
    }
  }
}

GridSpec default_grid(const MorseFunctionSpec& spec) {
  GridSpec g;
  g.domain = spec.domain;
  if (spec.domain == Domain::Torus) {
    g.points = 511;
    g.half_width = 0;
  } else {
    // Wide enough that every mode contributing to heat sums at t >= 1/2
    // keeps its classical turning points inside the window.
    g.points = 769;
    g.half_width = std::max(10.0, 6.0 / std::sqrt(spec.u) + 4.0);
  }
  return g;
}

Eigen::MatrixXd WittenOperator::full() const {
  int n = int(h0.rows());
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  f.topLeftCorner(n, n) = h0;
  f.bottomRightCorner(n, n) = h1;
  return f;
}

WittenOperator witten_hamiltonian(const MorseFunctionSpec& spec, const GridSpec& grid,
                                  Assembly assembly) {
  if (spec.m != 1)
    throw std::invalid_argument("grid Hamiltonian implemented for m = 1; use the tensor"
                                " construction for separable m = 2 spectra");
  if (spec.domain != grid.domain) throw std::invalid_argument("grid/spec domain mismatch");
  if (grid.points > 4097) throw std::invalid_argument("grid budget exceeded: points > 4097");

  WittenOperator w;
  w.u = spec.u;
  if (spec.domain == Domain::Torus) {
    w.grid = make_circle_grid(grid.points);
    critical_points_1d(spec, 0.0, 2 * M_PI);
  } else {
    w.grid = make_line_grid(grid.points, grid.half_width);
    critical_points_1d(spec, -grid.half_width, grid.half_width);
  }

  int n = grid.points;
  Eigen::VectorXd dh(n), ddh(n);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd x(1);
    x << w.grid.nodes[i];
    dh[i] = spec.grad(x)[0];
    ddh[i] = spec.hess(x)(0, 0);
  }
  w.a = w.grid.deriv + spec.u * dh.asDiagonal().toDenseMatrix();
  if (assembly == Assembly::Factorized) {
    w.h0 = 0.5 * (w.a.transpose() * w.a);
    w.h1 = 0.5 * (w.a * w.a.transpose());
  } else {
    Eigen::MatrixXd lap = w.grid.deriv * w.grid.deriv;
    Eigen::MatrixXd base = -0.5 * lap;
    base += (0.5 * spec.u * spec.u) * dh.cwiseProduct(dh).asDiagonal().toDenseMatrix();
    w.h0 = base - (0.5 * spec.u) * ddh.asDiagonal().toDenseMatrix();
    w.h1 = base + (0.5 * spec.u) * ddh.asDiagonal().toDenseMatrix();
  }
  // Symmetrize away round-off so the self-adjoint solver sees exact symmetry.
  w.h0 = 0.5 * (w.h0 + w.h0.transpose()).eval();
  w.h1 = 0.5 * (w.h1 + w.h1.transpose()).eval();
  return w;
}

std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> brst_pair(const MorseFunctionSpec& spec,
                                                        const GridSpec& grid) {
  WittenOperator w = witten_hamiltonian(spec, grid, Assembly::Factorized);
  int n = int(w.a.rows());
  const std::complex<double> i1(0, 1);
  Eigen::MatrixXcd omega = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
  Eigen::MatrixXcd chi = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
  omega.bottomLeftCorner(n, n) = i1 * w.a;
  chi.topRightCorner(n, n) = w.a.transpose();
  return {omega, chi};
}

Eigen::MatrixXcd brst_omega_torus2(const MorseFunctionSpec& spec, int points_per_dim) {
  if (spec.m != 2 || spec.domain != Domain::Torus)
    throw std::invalid_argument("brst_omega_torus2 needs an m = 2 torus spec");
  if (points_per_dim > 41)
    throw std::invalid_argument("dense torus assembly budget: points_per_dim > 41");
  int n = points_per_dim;
  Eigen::MatrixXd d = circle_derivative(n);
  Eigen::VectorXd nodes = circle_nodes(n);
  int g = n * n;
  auto gi = [n](int ix, int iy) { return ix * n + iy; };

  // Supercharge blocks c_j = d_j + u * (d_j h) on the grid factor.
  std::vector<Eigen::MatrixXd> c(2, Eigen::MatrixXd::Zero(g, g));
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy) {
      Eigen::VectorXd x(2);
      x << nodes[ix], nodes[iy];
      Eigen::VectorXd dh = spec.grad(x);
      for (int k = 0; k < n; ++k) {
        c[0](gi(ix, iy), gi(k, iy)) += d(ix, k);
        c[1](gi(ix, iy), gi(ix, k)) += d(iy, k);
      }
      c[0](gi(ix, iy), gi(ix, iy)) += spec.u * dh[0];
      c[1](gi(ix, iy), gi(ix, iy)) += spec.u * dh[1];
    }

  const std::complex<double> i1(0, 1);
  Eigen::MatrixXcd omega = Eigen::MatrixXcd::Zero(4 * g, 4 * g);
  for (Mask s = 0; s < 4; ++s)
    for (int j = 0; j < 2; ++j) {
      if (s >> j & 1) continue;
      Mask tmask = s | Mask(1) << j;
      double sign = mul_sign(Mask(1) << j, s);
      omega.block(Eigen::Index(tmask) * g, Eigen::Index(s) * g, g, g) = (i1 * sign) * c[size_t(j)];
    }
  return omega;
}

double mehler_kernel(double b_field, double t) {
  if (!(t > 0)) throw std::invalid_argument("mehler_kernel: t > 0 required");
  if (b_field < 0) throw std::invalid_argument("mehler_kernel: b >= 0 required");
  if (b_field == 0) return 1.0 / (2 * M_PI * t);
  return b_field / (4 * M_PI * std::sinh(0.5 * b_field * t));
}

MCResult magnetic_kernel_mc(double b_field, double t, int steps, long long n_paths,
                            std::uint64_t seed) {
  if (!(t > 0)) throw std::invalid_argument("magnetic_kernel_mc: t > 0 required");
  PathEnsemble e(2, t, steps, n_paths, seed);
  std::vector<double> samples;
  samples.reserve(size_t(n_paths));
  std::vector<double> ix(static_cast<size_t>(steps)), iy(static_cast<size_t>(steps));
  for (long long p = 0; p < n_paths; ++p) {
    // Bridge 0 -> 0 and its signed enclosed area.
    double tx = 0, ty = 0;
    for (int k = 0; k < steps; ++k) {
      ix[size_t(k)] = e.increment(p, k, 0);
      iy[size_t(k)] = e.increment(p, k, 1);
      tx += ix[size_t(k)];
      ty += iy[size_t(k)];
    }
    double bx = 0, by = 0, area = 0;
    for (int k = 0; k < steps; ++k) {
      double frac0 = double(k) / steps, frac1 = double(k + 1) / steps;
      double x0 = bx - frac0 * tx, y0 = by - frac0 * ty;
      bx += ix[size_t(k)];
      by += iy[size_t(k)];
      double x1 = bx - frac1 * tx, y1 = by - frac1 * ty;
      area += 0.5 * (x0 * (y1 - y0) - y0 * (x1 - x0));
    }
    samples.push_back(std::cos(b_field * area) / (2 * M_PI * t));
  }
  return mc_reduce(samples);
}

FermionicEstimate nicolai_fk_evolve(const MorseFunctionSpec& spec, const SuperPolynomial& psi0,
                                    double t, const Eigen::VectorXd& x0,
                                    const PathEnsemble& ensemble) {
  if (ensemble.m() != spec.m) throw std::invalid_argument("ensemble dimension mismatch");
  if (psi0.p != spec.m || psi0.q != spec.m)
    throw std::invalid_argument("psi0 must live on R^{m|m}");
  if (x0.size() != spec.m) throw std::invalid_argument("x0 dimension mismatch");
  if (std::abs(ensemble.T() - t) > 1e-12) throw std::invalid_argument("ensemble horizon != t");
  double dt = ensemble.dt();
  if (spec.u * dt > 0.1)
    throw std::invalid_argument("stiff drift: u * dt > 0.1, refine the time grid");

  int m = spec.m;
  size_t words = size_t(1) << m;
  std::vector<std::vector<double>> samples(words);
  double h_start = spec.h(x0);
  for (long long p = 0; p < ensemble.n_paths(); ++p) {
    Eigen::VectorXd x = x0;
    Eigen::MatrixXd w = Eigen::MatrixXd::Identity(m, m);
    for (int k = 0; k < ensemble.steps(); ++k) {
      w = expm_taylor((-spec.u * dt) * spec.hess(x)) * w;
      Eigen::VectorXd drift = -spec.u * spec.grad(x) * dt;
      for (int c = 0; c < m; ++c) drift[c] += ensemble.increment(p, k, c);
      x += drift;
    }
    double weight = std::exp(-spec.u * (h_start - spec.h(x)));
    for (Mask tw = 0; tw < words; ++tw) {
      double acc = 0;
      for (const auto& [sw, poly] : psi0.terms) acc += minor_det(w, tw, sw) * poly.eval(as_span(x));
      samples[tw].push_back(weight * acc);
    }
  }

  FermionicEstimate out{GElem(m), GElem(m), ensemble.n_paths()};
  for (Mask tw = 0; tw < words; ++tw) {
    MCResult r = mc_reduce(samples[size_t(tw)]);
    if (r.estimate != 0) out.mean.add_term(tw, cplx(r.estimate, 0));
    if (r.se != 0) out.se.add_term(tw, cplx(r.se, 0));
  }
  return out;
}

std::vector<IndexResult> witten_index_spectral(const MorseFunctionSpec& spec,
                                               const std::vector<double>& ts,
                                               const GridSpec& grid) {
  require_confining(spec, grid.half_width);
  WittenOperator w = witten_hamiltonian(spec, grid, Assembly::Displayed);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> e0(w.h0), e1(w.h1);
  if (e0.info() != Eigen::Success || e1.info() != Eigen::Success)
    throw std::runtime_error("eigensolver failed");
  std::vector<IndexResult> out;
  for (double t : ts) {
    if (!(t > 0)) throw std::invalid_argument("witten_index: t > 0 required");
    out.push_back({t, heat_sum(e0.eigenvalues(), t) - heat_sum(e1.eigenvalues(), t), 0.0});
  }
  return out;
}

std::vector<IndexResult> witten_index_mc(const MorseFunctionSpec& spec,
                                         const std::vector<double>& ts, int quad_points,
                                         long long bridges_per_point, int steps,
                                         std::uint64_t seed) {
  if (spec.m != 1) throw std::invalid_argument("bridge estimator implemented for m = 1");
  if (quad_points < 2 || bridges_per_point < 2) throw std::invalid_argument("sample budget");
  std::vector<IndexResult> out;
  auto potential = [&](double xv) {
    Eigen::VectorXd x(1);
    x << xv;
    double g = spec.grad(x)[0], hh = spec.hess(x)(0, 0);
    return 0.5 * spec.u * spec.u * g * g - 0.5 * spec.u * hh;
  };
  auto hess_at = [&](double xv) {
    Eigen::VectorXd x(1);
    x << xv;
    return spec.hess(x)(0, 0);
  };

  double tmax = *std::max_element(ts.begin(), ts.end());
  double lo, hi;
  std::vector<int> windings;
  if (spec.domain == Domain::Line) {
    double half = 6.0 / std::sqrt(spec.u) + 3.0 * std::sqrt(tmax);
    require_confining(spec, half);
    lo = -half;
    hi = half;
    windings = {0};
  } else {
    lo = 0;
    hi = 2 * M_PI;
    windings = {-2, -1, 0, 1, 2};
  }
  double dxq = (hi - lo) / quad_points;

  for (size_t ti = 0; ti < ts.size(); ++ti) {
    double t = ts[ti];
    if (!(t > 0)) throw std::invalid_argument("witten_index: t > 0 required");
    double dt = t / steps;
    PathEnsemble e(1, t, steps, quad_points * bridges_per_point, seed + 1000003 * ti);
    double total = 0, var = 0;
    for (int q = 0; q < quad_points; ++q) {
      double xq = lo + (q + 0.5) * dxq;  // midpoint rule; integrand decays at line edges
      std::vector<double> node;
      node.reserve(size_t(bridges_per_point));
      std::vector<double> inc(static_cast<size_t>(steps));
      for (long long j = 0; j < bridges_per_point; ++j) {
        long long path = q * bridges_per_point + j;
        double endpoint = 0;
        for (int k = 0; k < steps; ++k) {
          inc[size_t(k)] = e.increment(path, k, 0);
          endpoint += inc[size_t(k)];
        }
        double sample = 0;
        for (int wind : windings) {
          double shift = 2 * M_PI * wind;
          double gauss = std::exp(-shift * shift / (2 * t)) / std::sqrt(2 * M_PI * t);
          double cum = 0, action = 0, wferm = 1.0;
          for (int k = 0; k < steps; ++k) {
            double frac = double(k) / steps;
            double xs = xq + cum - frac * endpoint + frac * shift;
            action += potential(xs) * dt;
            wferm *= std::exp(-spec.u * hess_at(xs) * dt);
            cum += inc[size_t(k)];
          }
          sample += gauss * std::exp(-action) * (1.0 - wferm);
        }
        node.push_back(sample);
      }
      MCResult r = mc_reduce(node);
      total += dxq * r.estimate;
      var += dxq * dxq * r.se * r.se;
    }
    out.push_back({t, total, std::sqrt(var)});
  }
  return out;
}

}  // namespace sbm
