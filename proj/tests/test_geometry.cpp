#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "sbm/charts.hpp"
#include "sbm/frame_sde.hpp"
#include "sbm/geometry_ops.hpp"
#include "sbm/paths.hpp"

using namespace sbm;

namespace {

std::vector<Eigen::Vector2d> sample_points() {
  // radii up to 1.4 keep the 5-point stencils inside the stereographic
  // validity disk r <= 2
  std::vector<Eigen::Vector2d> pts;
  for (int k = 0; k < 12; ++k) {
    double r = 0.2 + 0.1 * k;
    double a = 2.399963229728653 * k;
    pts.emplace_back(r * std::cos(a), r * std::sin(a));
  }
  return pts;
}

Eigen::Vector3d sphere_embed_pt(int chart, const Eigen::Vector2d& x) {
  double r2 = x.squaredNorm(), s = 1.0 + r2;
  double z = (chart == 0 ? 1.0 : -1.0) * (1.0 - r2) / s;
  return {2.0 * x[0] / s, 2.0 * x[1] / s, z};
}

double gdiff(const GElem& a, const GElem& b) {
  double m = 0;
  for (Mask w = 0; w < 4; ++w) m = std::max(m, std::abs(a.project(w) - b.project(w)));
  return m;
}

bool poly_equal(const Poly& a, const Poly& b) { return a.coeffs() == b.coeffs(); }

bool sp_equal(const SuperPolynomial& a, const SuperPolynomial& b) {
  if (a.terms.size() != b.terms.size()) return false;
  for (const auto& [w, poly] : a.terms) {
    if (!b.terms.count(w) || !poly_equal(poly, b.terms.at(w))) return false;
  }
  return true;
}

SuperPolynomial sp_add(SuperPolynomial a, const SuperPolynomial& b) {
  for (const auto& [w, poly] : b.terms) {
    Poly acc = poly;
    if (a.terms.count(w)) acc += a.terms.at(w);
    a.set(w, acc);
  }
  return a;
}

// integer coefficients keep every +/-/* exact in double arithmetic, so the
// algebraic identities below can be checked with == instead of tolerances
SuperPolynomial random_sp(std::mt19937& rng) {
  std::uniform_int_distribution<int> coeff(-3, 3), expo(0, 2);
  SuperPolynomial f(2, 2);
  for (Mask w = 0; w < 4; ++w) {
    Poly poly(2);
    for (int k = 0; k < 3; ++k) {
      Poly mono = Poly::constant(2, double(coeff(rng)));
      for (int j = expo(rng); j > 0; --j) mono = mono * Poly::variable(2, 0);
      for (int j = expo(rng); j > 0; --j) mono = mono * Poly::variable(2, 1);
      poly += mono;
    }
    f.set(w, poly);
  }
  return f;
}

FramePoint run_path(const Surface& surf, FramePoint fp, const PathEnsemble& ens,
                    long long path, FrameScheme scheme) {
  for (int k = 0; k < int(std::llround(ens.T() / ens.dt())); ++k) {
    Eigen::Vector2d db(ens.increment(path, k, 0), ens.increment(path, k, 1));
    fp = frame_sde_step(surf, fp, db, scheme);
  }
  return fp;
}

std::vector<double> defect_samples(const Surface& surf, const FramePoint& start,
                                   const PathEnsemble& ens, long long n_paths) {
  std::vector<double> d;
  for (long long p = 0; p < n_paths; ++p)
    d.push_back(frame_defect(surf, run_path(surf, start, ens, p, FrameScheme::Heun)));
  std::sort(d.begin(), d.end());
  return d;
}

// single flat chart with a small validity disk and no neighbor to switch to
Surface open_disk() {
  Surface s;
  s.name = "disk";
  SurfaceChart c;
  c.id = 0;
  c.metric = [](const Eigen::Vector2d&) { return Eigen::Matrix2d::Identity(); };
  c.metric_inv = c.metric;
  c.christoffel = [](const Eigen::Vector2d&) {
    return std::array<Eigen::Matrix2d, 2>{Eigen::Matrix2d::Zero(), Eigen::Matrix2d::Zero()};
  };
  c.gauss_curvature = [](const Eigen::Vector2d&) { return 0.0; };
  c.in_region = [](const Eigen::Vector2d& x) { return x.norm() < 0.5; };
  c.should_switch = [](const Eigen::Vector2d&) { return false; };
  c.to_neighbor = [](const Eigen::Vector2d& x) { return x; };
  c.to_neighbor_jac = [](const Eigen::Vector2d&) { return Eigen::Matrix2d::Identity(); };
  c.normalize = [](const Eigen::Vector2d& x) { return x; };
  c.neighbor_id = 0;
  s.charts = {c};
  s.area = 0.25 * M_PI;
  return s;
}

SuperField sphere_z_field() {
  SuperField f;
  f.terms[0] = [](int chart, const Eigen::Vector2d& x) {
    double r2 = x.squaredNorm();
    return (chart == 0 ? 1.0 : -1.0) * (1.0 - r2) / (1.0 + r2);
  };
  return f;
}

}  // namespace

TEST_CASE("chart data is consistent with finite differences of the metric") {
  auto pts = sample_points();
  for (const Surface& surf : {flat_torus(), round_sphere()}) {
    for (const SurfaceChart& c : surf.charts) {
      CHECK(chart_consistency_residual(c, pts) < 1e-8);
      CHECK(curvature_consistency_residual(c, pts) < 1e-7);
    }
    for (int ci = 0; ci < int(surf.charts.size()); ++ci)
      CHECK(transition_consistency_residual(surf, ci, pts) < 1e-12);
  }
}

TEST_CASE("metric and curvature tensors satisfy the classical identities") {
  auto pts = sample_points();
  for (const Surface& surf : {flat_torus(), round_sphere()}) {
    for (const SurfaceChart& c : surf.charts) {
      for (const auto& x : pts) {
        Eigen::Matrix2d g = c.metric(x);
        CHECK((g * c.metric_inv(x) - Eigen::Matrix2d::Identity()).norm() < 1e-12);
        CHECK(g(0, 1) == doctest::Approx(g(1, 0)).epsilon(1e-14));
        CHECK(g.determinant() > 0);
        CHECK(g(0, 0) > 0);

        auto R = riemann_lowered(c, x);
        double K = c.gauss_curvature(x);
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
              for (int l = 0; l < 2; ++l) {
                CHECK(std::abs(R[i][j](k, l) + R[j][i](k, l)) < 1e-12);
                CHECK(std::abs(R[i][j](k, l) + R[i][j](l, k)) < 1e-12);
                CHECK(std::abs(R[i][j](k, l) - R[k][l](i, j)) < 1e-12);
                // first Bianchi identity
                CHECK(std::abs(R[i][j](k, l) + R[i][k](l, j) + R[i][l](j, k)) < 1e-12);
              }
        // sectional curvature recovers K
        CHECK(R[0][1](0, 1) / g.determinant() == doctest::Approx(K).epsilon(1e-10));
        CHECK((ricci_mixed(c, x) - K * Eigen::Matrix2d::Identity()).norm() < 1e-12);
      }
    }
  }

  Surface torus = flat_torus();
  for (const auto& x : pts) {
    CHECK(torus.charts[0].gauss_curvature(x) == 0.0);
    auto Gamma = torus.charts[0].christoffel(x);
    CHECK(Gamma[0].norm() == 0.0);
    CHECK(Gamma[1].norm() == 0.0);
  }
  Surface sphere = round_sphere();
  for (const auto& x : pts) CHECK(sphere.charts[0].gauss_curvature(x) == doctest::Approx(1.0));
}

TEST_CASE("areas, strata coverage, and distances") {
  Surface torus = flat_torus();
  Surface sphere = round_sphere();
  CHECK(torus.area == doctest::Approx(4.0 * M_PI * M_PI).epsilon(1e-12));
  CHECK(sphere.area == doctest::Approx(4.0 * M_PI).epsilon(1e-12));

  const int total = 500;
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (int i = 0; i < total; ++i) {
    auto [chart, x] = sphere.strata_point(i, total);
    REQUIRE(sphere.charts[size_t(chart)].in_region(x));
    mean += sphere_embed_pt(chart, x);
  }
  // a volume-uniform stratification has a nearly vanishing embedded centroid
  CHECK((mean / total).norm() < 0.05);

  for (int i = 0; i < total; ++i) {
    auto [chart, x] = torus.strata_point(i, total);
    CHECK(chart == 0);
    CHECK(torus.charts[0].in_region(x));
  }

  // wrap-around distance on the torus
  Eigen::Vector2d a(-M_PI + 0.05, 0.3), b(M_PI - 0.05, 0.3);
  CHECK(torus.distance(0, a, 0, b) == doctest::Approx(0.1).epsilon(1e-12));

  // chordal distance: poles are antipodal, and the same equator point seen
  // from both charts is at distance zero
  Eigen::Vector2d origin(0, 0), eq(1, 0);
  CHECK(sphere.distance(0, origin, 1, origin) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(sphere.distance(0, eq, 1, eq) < 1e-12);
  CHECK(sphere.distance(0, eq, 0, origin) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("orthonormal frames and the odd fiber pairing") {
  Surface sphere = round_sphere();
  for (const auto& x : sample_points()) {
    FramePoint p = make_frame_point(sphere, 0, x);
    CHECK(frame_defect(sphere, p) < 1e-12);
    OddFiber f = odd_fiber(sphere, p);
    CHECK((f.pi_rotation.transpose() * f.xi_rotation - Eigen::Matrix2d::Identity()).norm() <
          1e-12);
  }
  CHECK_THROWS_AS((void)make_frame_point(sphere, 0, Eigen::Vector2d(3.0, 0.0)),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)make_frame_point(sphere, 5, Eigen::Vector2d(0.0, 0.0)),
                  std::invalid_argument);
}

TEST_CASE("frame transport is exact on the flat torus and O(dt) on the sphere") {
  Surface torus = flat_torus();
  PathEnsemble flat_ens(2, 1.0, 200, 50, 11);
  FramePoint start_t = make_frame_point(torus, 0, Eigen::Vector2d(0.4, -1.0));
  for (long long p = 0; p < 50; ++p) {
    FramePoint fp = run_path(torus, start_t, flat_ens, p, FrameScheme::Heun);
    CHECK((fp.e - start_t.e).norm() == 0.0);
    CHECK(frame_defect(torus, fp) < 1e-12);
  }

  Surface sphere = round_sphere();
  FramePoint start_s = make_frame_point(sphere, 0, Eigen::Vector2d(0.3, -0.1));
  PathEnsemble ens_full(2, 1.0, 1000, 200, 7);
  auto d_full = defect_samples(sphere, start_s, ens_full, 200);
  CHECK(d_full[100] < 1e-2);  // measured median 3.2e-4
  CHECK(d_full[180] < 5e-2);  // measured p90 1.4e-3

  // halving dt roughly halves the defect (measured ratio 0.60)
  PathEnsemble ens_half(2, 1.0, 2000, 100, 7);
  auto d_half = defect_samples(sphere, start_s, ens_half, 100);
  PathEnsemble ens_ref(2, 1.0, 1000, 100, 7);
  auto d_ref = defect_samples(sphere, start_s, ens_ref, 100);
  CHECK(d_half[50] < 0.8 * d_ref[50]);
}

TEST_CASE("frame SDE detects degenerate frames and atlas exits") {
  Surface torus = flat_torus();
  FramePoint bad;
  bad.chart = 0;
  bad.x = Eigen::Vector2d(0.0, 0.0);
  bad.e = Eigen::Vector2d(1.0, 1e-7).asDiagonal();
  CHECK_THROWS_AS(
      (void)frame_sde_step(torus, bad, Eigen::Vector2d(0.01, 0.0), FrameScheme::Heun),
      std::runtime_error);

  Surface disk = open_disk();
  FramePoint edge = make_frame_point(disk, 0, Eigen::Vector2d(0.45, 0.0));
  CHECK_THROWS_AS(
      (void)frame_sde_step(disk, edge, Eigen::Vector2d(0.2, 0.0), FrameScheme::Heun),
      std::runtime_error);
}

TEST_CASE("exterior derivative, codifferential, and the flat Hodge Laplacian") {
  std::mt19937 rng(20260814);
  Surface torus = flat_torus();
  const SurfaceChart& flat = torus.charts[0];

  for (int trial = 0; trial < 50; ++trial) {
    SuperPolynomial f = random_sp(rng);

    DifferentialForm w = to_form(f);
    CHECK(w.q == f.q);
    CHECK(sp_equal(from_form(w), f));

    CHECK(exterior_d(exterior_d(f)).terms.empty());
    CHECK(flat_codifferential(flat_codifferential(f)).terms.empty());

    // (d + delta)^2 = -(component Laplacian) in the flat metric, exactly
    SuperPolynomial sq = sp_add(exterior_d(flat_codifferential(f)),
                                flat_codifferential(exterior_d(f)));
    SuperPolynomial lap(2, 2);
    for (const auto& [word, poly] : f.terms) {
      Poly l = poly.derivative(0).derivative(0);
      l += poly.derivative(1).derivative(1);
      lap.set(word, -1.0 * l);
    }
    CHECK(sp_equal(sq, lap));

    // pointwise operator route matches the polynomial route when g = id
    Eigen::Vector2d x(0.3 + 0.01 * trial, -0.2 + 0.02 * trial);
    SuperPolynomial dirac = sp_add(exterior_d(f), flat_codifferential(f));
    std::array<double, 2> xv{x[0], x[1]};
    CHECK(gdiff(hodge_dirac_at(flat, f, x), dirac.eval_even(xv)) < 1e-12);
  }
}

TEST_CASE("Hodge, horizontal, and Bochner Laplacians agree") {
  Surface torus = flat_torus();
  Surface sphere = round_sphere();
  CHECK(horizontal_field_check(torus.charts[0]) < 1e-12);
  CHECK(horizontal_field_check(sphere.charts[0]) < 1e-6);  // measured 2.2e-8
  CHECK(horizontal_field_check(sphere.charts[1]) < 1e-6);
}

TEST_CASE("curvature weight generator acts only on one-form words") {
  Eigen::Matrix4d gen = curvature_weight_generator();
  Eigen::Matrix4d want = Eigen::Vector4d(0.0, 0.5, 0.5, 0.0).asDiagonal();
  CHECK((gen - want).norm() < 1e-14);
}

TEST_CASE("heat semigroup on the flat torus") {
  Surface torus = flat_torus();
  double t = 0.5;
  Eigen::Vector2d x0(0.7, 1.1);
  FramePoint start = make_frame_point(torus, 0, x0);

  SuperField g0;
  g0.terms[0] = [](int, const Eigen::Vector2d& x) { return std::cos(x[0]); };
  g0.terms[1] = [](int, const Eigen::Vector2d& x) { return std::cos(x[0]); };
  g0.terms[3] = [](int, const Eigen::Vector2d&) { return 1.0; };

  PathEnsemble ens(2, t, 250, 2000, 77);
  auto est = fk_laplace_beltrami(torus, g0, t, start, ens);
  CHECK(est.samples == 2000);

  // cos(x) has Laplace eigenvalue 1, so L-decay rate 1/2, for the scalar
  // and the parallel-transported one-form component alike
  double want = std::exp(-t / 2.0) * std::cos(x0[0]);
  for (Mask w : {Mask(0), Mask(1)}) {
    CHECK(est.se.project(w).real() < 0.02);
    CHECK(std::abs(est.mean.project(w).real() - want) < 3.0 * est.se.project(w).real());
  }
  // the flat volume form is parallel and harmonic: every sample equals 1
  CHECK(est.mean.project(3).real() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(est.se.project(3).real() < 1e-12);

  // within_tol only flags, never alters, the estimate
  PathEnsemble small(2, t, 50, 200, 3);
  auto flagged = fk_laplace_beltrami(torus, g0, t, start, small, FrameScheme::Heun, 1e-9);
  CHECK_FALSE(flagged.within_tol);
  auto relaxed = fk_laplace_beltrami(torus, g0, t, start, small, FrameScheme::Heun, 1.0);
  CHECK(relaxed.within_tol);
  CHECK(gdiff(flagged.mean, relaxed.mean) == 0.0);

  // short horizon reproduces the initial data
  PathEnsemble tiny(2, 1e-4, 1, 50, 5);
  auto near0 = fk_laplace_beltrami(torus, g0, 1e-4, start, tiny);
  CHECK(std::abs(near0.mean.project(0).real() - std::cos(x0[0])) < 0.01);

  PathEnsemble wrong_T(2, 0.6, 300, 100, 9);
  CHECK_THROWS_AS((void)fk_laplace_beltrami(torus, g0, t, start, wrong_T),
                  std::invalid_argument);
  PathEnsemble too_long(2, 2.5, 100, 100, 9);
  CHECK_THROWS_AS((void)fk_laplace_beltrami(torus, g0, 2.5, start, too_long),
                  std::invalid_argument);
  PathEnsemble wrong_m(3, t, 100, 100, 9);
  CHECK_THROWS_AS((void)fk_laplace_beltrami(torus, g0, t, start, wrong_m),
                  std::invalid_argument);
  Surface sphere = round_sphere();
  FramePoint outside;
  outside.chart = 0;
  outside.x = Eigen::Vector2d(3.0, 0.0);
  PathEnsemble ok(2, t, 100, 100, 9);
  CHECK_THROWS_AS((void)fk_laplace_beltrami(sphere, g0, t, outside, ok),
                  std::invalid_argument);
}

TEST_CASE("heat semigroup on the round sphere") {
  Surface sphere = round_sphere();
  double t = 0.5;
  Eigen::Vector2d x0(0.5, 0.2);
  FramePoint start = make_frame_point(sphere, 0, x0);
  double s0 = 1.0 + x0.squaredNorm();

  // l = 1 spherical harmonic decays at rate l(l+1)/2 = 1
  {
    PathEnsemble ens(2, t, 500, 4000, 99);
    auto est = fk_laplace_beltrami(sphere, sphere_z_field(), t, start, ens);
    double want = std::exp(-t) * (1.0 - x0.squaredNorm()) / s0;
    CHECK(est.se.project(0).real() < 0.015);
    CHECK(std::abs(est.mean.project(0).real() - want) < 3.0 * est.se.project(0).real());
  }

  // its exterior derivative is a co-exact eigenform at the same eigenvalue
  {
    SuperField dz;
    dz.terms[1] = [](int chart, const Eigen::Vector2d& x) {
      double s = 1.0 + x.squaredNorm();
      return (chart == 0 ? -4.0 : 4.0) * x[0] / (s * s);
    };
    dz.terms[2] = [](int chart, const Eigen::Vector2d& x) {
      double s = 1.0 + x.squaredNorm();
      return (chart == 0 ? -4.0 : 4.0) * x[1] / (s * s);
    };
    PathEnsemble ens(2, t, 500, 8000, 311);
    auto est = fk_laplace_beltrami(sphere, dz, t, start, ens);
    for (Mask w : {Mask(1), Mask(2)}) {
      double want = std::exp(-t) * (-4.0) * x0[int(w) - 1] / (s0 * s0);
      CHECK(est.se.project(w).real() < 0.015);
      CHECK(std::abs(est.mean.project(w).real() - want) < 3.0 * est.se.project(w).real());
    }
  }

  // the volume form is harmonic: the estimator reproduces sqrt(det g)(x0)
  // path by path, up to O(dt) integrator bias (measured 1.1e-3)
  {
    SuperField vol;
    vol.terms[3] = [](int chart, const Eigen::Vector2d& x) {
      double s = 1.0 + x.squaredNorm();
      // the 2-form coefficient flips sign across the orientation-reversing
      // stereographic transition
      return (chart == 0 ? 4.0 : -4.0) / (s * s);
    };
    PathEnsemble ens(2, t, 500, 500, 123);
    auto est = fk_laplace_beltrami(sphere, vol, t, start, ens);
    double want = 4.0 / (s0 * s0);
    CHECK(est.se.project(3).real() < 2e-4);
    CHECK(std::abs(est.mean.project(3).real() - want) < 2.5e-3);
  }
}

TEST_CASE("heat semigroup is invariant under rotating the start across the seam") {
  Surface sphere = round_sphere();
  double t = 0.5;
  Eigen::Vector2d xa(0.5, 0.2);
  double r2 = xa.squaredNorm(), s = 1.0 + r2;
  Eigen::Vector3d pa(2.0 * xa[0] / s, 2.0 * xa[1] / s, (1.0 - r2) / s);

  // rotate start and observable together by alpha about the y-axis; the
  // rotated start lands in the other chart, so the run crosses the seam
  double alpha = 2.0, c = std::cos(alpha), sn = std::sin(alpha);
  Eigen::Vector3d pb(c * pa[0] + sn * pa[2], pa[1], -sn * pa[0] + c * pa[2]);
  int chart_b = pb[2] >= 0 ? 0 : 1;
  REQUIRE(chart_b == 1);
  double denom = 1.0 + (chart_b == 0 ? pb[2] : -pb[2]);
  Eigen::Vector2d xb(pb[0] / denom, pb[1] / denom);

  SuperField u;  // u(q) = z(R^{-1} q) = sin(alpha) X + cos(alpha) Z
  u.terms[0] = [c, sn](int chart, const Eigen::Vector2d& x) {
    double rr = x.squaredNorm(), ss = 1.0 + rr;
    double X = 2.0 * x[0] / ss;
    double Z = (chart == 0 ? 1.0 : -1.0) * (1.0 - rr) / ss;
    return sn * X + c * Z;
  };
  REQUIRE(sn * pb[0] + c * pb[2] == doctest::Approx(pa[2]).epsilon(1e-12));

  PathEnsemble ea(2, t, 500, 6000, 41);
  PathEnsemble eb(2, t, 500, 6000, 42);
  auto est_a = fk_laplace_beltrami(sphere, sphere_z_field(), t,
                                   make_frame_point(sphere, 0, xa), ea);
  auto est_b =
      fk_laplace_beltrami(sphere, u, t, make_frame_point(sphere, chart_b, xb), eb);

  double ma = est_a.mean.project(0).real(), sa = est_a.se.project(0).real();
  double mb = est_b.mean.project(0).real(), sb = est_b.se.project(0).real();
  double want = std::exp(-t) * pa[2];
  CHECK(std::abs(ma - mb) < 3.0 * std::sqrt(sa * sa + sb * sb));
  CHECK(std::abs(ma - want) < 3.0 * sa);
  CHECK(std::abs(mb - want) < 3.0 * sb);
}

TEST_CASE("both integration schemes estimate the same expectation") {
  Surface sphere = round_sphere();
  double t = 0.5;
  PathEnsemble ens(2, t, 250, 6000, 55);
  FramePoint start = make_frame_point(sphere, 0, Eigen::Vector2d(0.5, 0.2));
  auto h = fk_laplace_beltrami(sphere, sphere_z_field(), t, start, ens, FrameScheme::Heun);
  auto e =
      fk_laplace_beltrami(sphere, sphere_z_field(), t, start, ens, FrameScheme::EulerHeun);
  double want = std::exp(-t) * (1.0 - 0.29) / 1.29;
  // same driving increments, so the two schemes track each other closely
  CHECK(std::abs(h.mean.project(0).real() - e.mean.project(0).real()) < 3e-3);
  CHECK(std::abs(h.mean.project(0).real() - want) < 3.0 * h.se.project(0).real());
  CHECK(std::abs(e.mean.project(0).real() - want) < 3.0 * e.se.project(0).real());
}

TEST_CASE("Euler characteristics: 2 for the sphere, exactly 0 for the torus") {
  Surface sphere = round_sphere();
  Surface torus = flat_torus();

  std::vector<double> est, se;
  for (double t : {0.25, 0.5, 1.0}) {
    PathEnsemble ens(2, t / 2.0, std::max(50, int(t * 500)), 8000, 2024);
    MCResult chi_s = euler_characteristic(sphere, t, ens);
    CHECK(chi_s.se < 0.15);
    CHECK(std::abs(chi_s.estimate - 2.0) < 3.0 * chi_s.se);
    // the estimate rounds to an integer within noise
    CHECK(std::abs(chi_s.estimate - std::round(chi_s.estimate)) <= 3.0 * chi_s.se);
    est.push_back(chi_s.estimate);
    se.push_back(chi_s.se);

    // flat fiber weight and identity transport cancel the supertrace
    // sample by sample
    MCResult chi_t = euler_characteristic(torus, t, ens);
    CHECK(chi_t.estimate == 0.0);
    CHECK(chi_t.se == 0.0);
  }

  // t-independence of the supertrace
  for (size_t i = 0; i < est.size(); ++i)
    for (size_t j = i + 1; j < est.size(); ++j)
      CHECK(std::abs(est[i] - est[j]) < 3.0 * std::sqrt(se[i] * se[i] + se[j] * se[j]));

  PathEnsemble wrong(2, 0.3, 100, 100, 1);
  CHECK_THROWS_AS((void)euler_characteristic(sphere, 0.5, wrong), std::invalid_argument);
}
