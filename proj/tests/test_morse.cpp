#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include <unsupported/Eigen/KroneckerProduct>

#include "sbm/morse_complex.hpp"

using namespace sbm;

namespace {

double circ_dist(double a, double b) { return std::abs(std::remainder(a - b, 2.0 * M_PI)); }

bool near_any(double x, std::vector<double> targets, double tol) {
  for (double t : targets) {
    if (circ_dist(x, t) < tol) return true;
  }
  return false;
}

MorseFunctionSpec perturbed_circle_spec(double eps) {
  MorseFunctionSpec s;
  s.m = 1;
  s.domain = Domain::Torus;
  s.u = 1.0;
  s.name = "cos-perturbed";
  s.h = [eps](const Eigen::VectorXd& x) {
    return std::cos(x[0]) + eps * std::sin(2.0 * x[0]);
  };
  s.grad = [eps](const Eigen::VectorXd& x) {
    Eigen::VectorXd g(1);
    g[0] = -std::sin(x[0]) + 2.0 * eps * std::cos(2.0 * x[0]);
    return g;
  };
  s.hess = [eps](const Eigen::VectorXd& x) {
    Eigen::MatrixXd h(1, 1);
    h(0, 0) = -std::cos(x[0]) - 4.0 * eps * std::sin(2.0 * x[0]);
    return h;
  };
  return s;
}

// h'' vanishes at the critical point pi (cubic zero of h').
MorseFunctionSpec degenerate_circle_spec() {
  MorseFunctionSpec s;
  s.m = 1;
  s.domain = Domain::Torus;
  s.u = 1.0;
  s.name = "cos-degenerate";
  s.h = [](const Eigen::VectorXd& x) { return std::cos(x[0]) + 0.25 * std::cos(2.0 * x[0]); };
  s.grad = [](const Eigen::VectorXd& x) {
    Eigen::VectorXd g(1);
    g[0] = -std::sin(x[0]) - 0.5 * std::sin(2.0 * x[0]);
    return g;
  };
  s.hess = [](const Eigen::VectorXd& x) {
    Eigen::MatrixXd h(1, 1);
    h(0, 0) = -std::cos(x[0]) - std::cos(2.0 * x[0]);
    return h;
  };
  return s;
}

}  // namespace

TEST_CASE("critical points on the circle") {
  auto spec = cos_circle_spec(4.0);
  auto pts = find_critical_points(spec);
  REQUIRE(pts.size() == 2);
  CHECK(pts[0].index == 0);
  CHECK(circ_dist(pts[0].location[0], M_PI) < 1e-8);
  CHECK(pts[0].h_value == doctest::Approx(-1.0));
  CHECK(pts[1].index == 1);
  CHECK(circ_dist(pts[1].location[0], 0.0) < 1e-8);
  CHECK(pts[1].h_value == doctest::Approx(1.0));
  for (const auto& p : pts) {
    CHECK(spec.grad(p.location).norm() < 1e-10);
    CHECK(p.frame(0, 0) == doctest::Approx(1.0));
  }

  auto pts4 = find_critical_points(cos2_circle_spec(4.0));
  REQUIRE(pts4.size() == 4);
  CHECK(pts4[0].index == 0);
  CHECK(pts4[1].index == 0);
  CHECK(pts4[2].index == 1);
  CHECK(pts4[3].index == 1);
  CHECK(near_any(pts4[0].location[0], {M_PI / 2, 3 * M_PI / 2}, 1e-8));
  CHECK(near_any(pts4[1].location[0], {M_PI / 2, 3 * M_PI / 2}, 1e-8));
  CHECK(near_any(pts4[2].location[0], {0.0, M_PI}, 1e-8));
  CHECK(near_any(pts4[3].location[0], {0.0, M_PI}, 1e-8));
  CHECK(circ_dist(pts4[0].location[0], pts4[1].location[0]) > 1.0);
  CHECK(circ_dist(pts4[2].location[0], pts4[3].location[0]) > 1.0);

  auto ptsp = find_critical_points(perturbed_circle_spec(0.01));
  REQUIRE(ptsp.size() == 2);
  CHECK(ptsp[0].index == 0);
  CHECK(ptsp[1].index == 1);
  CHECK(circ_dist(ptsp[0].location[0], M_PI) < 0.05);
  CHECK(circ_dist(ptsp[1].location[0], 0.0) < 0.05);
  for (const auto& p : ptsp) CHECK(perturbed_circle_spec(0.01).grad(p.location).norm() < 1e-10);

  CHECK_THROWS_AS(find_critical_points(degenerate_circle_spec()), std::runtime_error);
  CHECK_THROWS_AS(find_critical_points(quadratic_spec(1, 1.0)), std::invalid_argument);
}

TEST_CASE("critical points on the two-torus") {
  auto spec = cos_torus2_spec(4.0);
  auto pts = find_critical_points(spec);
  REQUIRE(pts.size() == 4);
  CHECK(pts[0].index == 0);
  CHECK(pts[1].index == 1);
  CHECK(pts[2].index == 1);
  CHECK(pts[3].index == 2);
  CHECK(circ_dist(pts[0].location[0], M_PI) < 1e-8);
  CHECK(circ_dist(pts[0].location[1], M_PI) < 1e-8);
  CHECK(circ_dist(pts[3].location[0], 0.0) < 1e-8);
  CHECK(circ_dist(pts[3].location[1], 0.0) < 1e-8);
  CHECK(pts[0].h_value == doctest::Approx(-2.0));
  CHECK(pts[3].h_value == doctest::Approx(2.0));
  // saddles at (0, pi) and (pi, 0), curvatures ordered descending
  CHECK(circ_dist(pts[1].location[0], 0.0) < 1e-8);
  CHECK(circ_dist(pts[1].location[1], M_PI) < 1e-8);
  CHECK(circ_dist(pts[2].location[0], M_PI) < 1e-8);
  CHECK(circ_dist(pts[2].location[1], 0.0) < 1e-8);
  CHECK(pts[1].curvatures[0] == doctest::Approx(1.0));
  CHECK(pts[1].curvatures[1] == doctest::Approx(-1.0));
  // unstable direction of the (0, pi) saddle is the x axis
  CHECK(std::abs(pts[1].frame(0, 1)) == doctest::Approx(1.0));
  CHECK(std::abs(pts[1].frame(1, 1)) < 1e-9);
}

TEST_CASE("steepest descent flows on the circle") {
  auto spec = cos_circle_spec(4.0);
  auto pts = find_critical_points(spec);
  auto flows = steepest_descent_flows(spec, pts[0], pts[1]);
  REQUIRE(flows.size() == 2);
  CHECK(std::abs(flows[0].sign) == 1);
  CHECK(std::abs(flows[1].sign) == 1);
  CHECK(flows[0].sign + flows[1].sign == 0);
  for (const auto& f : flows) {
    REQUIRE(f.curve.size() > 2);
    CHECK(circ_dist(f.curve.front()[0], pts[1].location[0]) < 1e-3);
    CHECK(circ_dist(f.curve.back()[0], pts[0].location[0]) < 1e-3);
  }
  CHECK(steepest_descent_flows(spec, pts[1], pts[0]).empty());
}

TEST_CASE("steepest descent flows on the two-torus") {
  auto spec = cos_torus2_spec(4.0);
  auto pts = find_critical_points(spec);
  // min -> saddle pairs: one-dimensional unstable manifolds
  for (int saddle : {1, 2}) {
    auto flows = steepest_descent_flows(spec, pts[0], pts[saddle]);
    REQUIRE(flows.size() == 2);
    CHECK(flows[0].sign + flows[1].sign == 0);
    for (const auto& f : flows) {
      Eigen::VectorXd d = f.curve.back() - pts[0].location;
      CHECK(std::abs(std::remainder(d[0], 2.0 * M_PI)) < 2e-3);
      CHECK(std::abs(std::remainder(d[1], 2.0 * M_PI)) < 2e-3);
    }
  }
  // saddle -> max pairs: scan over the two-dimensional unstable circle
  for (int saddle : {1, 2}) {
    auto flows = steepest_descent_flows(spec, pts[saddle], pts[3]);
    REQUIRE(flows.size() == 2);
    CHECK(std::abs(flows[0].sign) == 1);
    CHECK(flows[0].sign + flows[1].sign == 0);
  }
  // index gap two: empty by grading
  CHECK(steepest_descent_flows(spec, pts[0], pts[3]).empty());
}

TEST_CASE("tunneling matrix on the circle") {
  auto cx = tunneling_matrix(cos_circle_spec(8.0), 8.0);
  REQUIRE(cx.rescaled.size() == 1);
  REQUIRE(cx.rescaled[0].rows() == 1);
  REQUIRE(cx.rescaled[0].cols() == 1);
  CHECK(cx.rescaled[0](0, 0) == 0);
  CHECK(cx.coboundary[0](0, 0) == 0.0);
  CHECK(cx.gap_ratio > 10.0);
  CHECK(cx.instantons.size() == 2);
  auto betti = betti_numbers(cx);
  REQUIRE(betti.size() == 2);
  CHECK(betti[0] == 1);
  CHECK(betti[1] == 1);

  auto cx4 = tunneling_matrix(cos2_circle_spec(8.0), 8.0);
  REQUIRE(cx4.rescaled[0].rows() == 2);
  REQUIRE(cx4.rescaled[0].cols() == 2);
  CHECK(cx4.instantons.size() == 4);
  for (int i = 0; i < 2; ++i) {
    CHECK(cx4.rescaled[0].row(i).sum() == 0);
    CHECK(cx4.rescaled[0].col(i).sum() == 0);
    for (int j = 0; j < 2; ++j) CHECK(std::abs(cx4.rescaled[0](i, j)) == 1);
  }
  const double amp = std::sqrt(8.0 / M_PI) * std::exp(-8.0 * 0.5);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      CHECK(std::abs(cx4.coboundary[0](i, j)) == doctest::Approx(amp).epsilon(1e-12));
    }
  }
  auto betti4 = betti_numbers(cx4);
  CHECK(betti4[0] == 1);
  CHECK(betti4[1] == 1);
}

TEST_CASE("tunneling matrix on the two-torus") {
  auto cx = tunneling_matrix(cos_torus2_spec(6.0), 6.0);
  REQUIRE(cx.rescaled.size() == 2);
  CHECK(cx.rescaled[0].rows() == 2);
  CHECK(cx.rescaled[0].cols() == 1);
  CHECK(cx.rescaled[1].rows() == 1);
  CHECK(cx.rescaled[1].cols() == 2);
  CHECK(cx.rescaled[0].cwiseAbs().maxCoeff() == 0);
  CHECK(cx.rescaled[1].cwiseAbs().maxCoeff() == 0);
  CHECK(cx.instantons.size() == 8);
  auto betti = betti_numbers(cx);
  REQUIRE(betti.size() == 3);
  CHECK(betti[0] == 1);
  CHECK(betti[1] == 2);
  CHECK(betti[2] == 1);
  // Euler characteristic from chain ranks and from cohomology agree
  const int chi_chain = static_cast<int>(cx.grading[0].size()) -
                        static_cast<int>(cx.grading[1].size()) +
                        static_cast<int>(cx.grading[2].size());
  CHECK(chi_chain == betti[0] - betti[1] + betti[2]);
  CHECK(chi_chain == 0);
}

TEST_CASE("spectral gap criterion rejects weak coupling") {
  CHECK_THROWS_AS(tunneling_matrix(cos_circle_spec(0.05), 0.05), std::runtime_error);
}

TEST_CASE("betti numbers of hand-built complexes") {
  MorseComplex cx;
  cx.grading = {{0}, {1, 2}, {3}};
  cx.rescaled = {Eigen::MatrixXi::Zero(2, 1), Eigen::MatrixXi::Zero(1, 2)};
  auto betti = betti_numbers(cx);
  REQUIRE(betti.size() == 3);
  CHECK(betti[0] == 1);
  CHECK(betti[1] == 2);
  CHECK(betti[2] == 1);

  cx.rescaled[0](0, 0) = 1;
  cx.rescaled[1](0, 0) = 1;
  CHECK_THROWS_AS(betti_numbers(cx), std::runtime_error);
}

TEST_CASE("tunneling amplitudes match the grid matrix element") {
  const double u = 8.0;
  auto spec = cos2_circle_spec(u);
  auto op = witten_hamiltonian(spec, GridSpec{Domain::Torus, 1023, 10.0},
                               Assembly::Factorized);
  const double dx = op.grid.dx;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es0(op.h0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es1(op.h1);
  // one low mode per critical point of matching index, separated gap
  CHECK(es0.eigenvalues()[0] < 1e-8);
  CHECK(es0.eigenvalues()[1] < 0.01);
  CHECK(es0.eigenvalues()[2] > 1.0);
  CHECK(es1.eigenvalues()[0] < 1e-8);
  CHECK(es1.eigenvalues()[1] < 0.01);
  CHECK(es1.eigenvalues()[2] > 1.0);

  // quasi-modes: low-subspace projections of unit Gaussians at the
  // critical points (curvature |h''| = 1), symmetrically orthonormalized
  const auto quasi = [&](const Eigen::MatrixXd& lowvecs, const std::vector<double>& centers) {
    Eigen::MatrixXd p(lowvecs.rows(), static_cast<Eigen::Index>(centers.size()));
    for (size_t c = 0; c < centers.size(); ++c) {
      Eigen::VectorXd t(lowvecs.rows());
      for (Eigen::Index i = 0; i < t.size(); ++i) {
        const double d = std::remainder(op.grid.nodes[i] - centers[c], 2.0 * M_PI);
        t[i] = std::exp(-0.5 * u * d * d);
      }
      p.col(static_cast<Eigen::Index>(c)) = lowvecs * (lowvecs.transpose() * t);
    }
    const Eigen::MatrixXd gram = dx * (p.transpose() * p);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eg(gram);
    return (p * eg.operatorInverseSqrt()).eval();
  };
  const Eigen::MatrixXd psi0 =
      quasi(es0.eigenvectors().leftCols(2), {M_PI / 2, 3 * M_PI / 2});
  const Eigen::MatrixXd psi1 = quasi(es1.eigenvectors().leftCols(2), {0.0, M_PI});
  const Eigen::MatrixXd cgrid = dx * (psi1.transpose() * (op.a * psi0));

  const double amp = std::sqrt(u / M_PI) * std::exp(-u * 0.5);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      CHECK(std::abs(std::abs(cgrid(i, j)) - amp) / amp < 0.10);
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(cgrid);
  CHECK(svd.singularValues()[1] / svd.singularValues()[0] < 0.05);

  auto cx = tunneling_matrix(spec, u);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double instanton = std::abs(cx.coboundary[0](i, j));
      CHECK(std::abs(std::abs(cgrid(i, j)) - instanton) / instanton < 0.10);
    }
  }
}

TEST_CASE("two-torus low eigenvalue counts match critical point counts") {
  const double u = 4.0;
  auto spec1 = cos_circle_spec(u);
  auto op = witten_hamiltonian(spec1, GridSpec{Domain::Torus, 127, 10.0},
                               Assembly::Factorized);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es0(op.h0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es1(op.h1);
  const Eigen::VectorXd e = es0.eigenvalues();
  const Eigen::VectorXd f = es1.eigenvalues();
  const auto count_sums = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b, double thr) {
    int n = 0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      for (Eigen::Index j = 0; j < b.size(); ++j) {
        if (a[i] + b[j] < thr) ++n;
      }
    }
    return n;
  };
  const int n0 = count_sums(e, e, 0.5);
  const int n1 = count_sums(f, e, 0.5) + count_sums(e, f, 0.5);
  const int n2 = count_sums(f, f, 0.5);
  CHECK(n0 == 1);
  CHECK(n1 == 2);
  CHECK(n2 == 1);

  auto pts = find_critical_points(cos_torus2_spec(u));
  std::vector<int> counts(3, 0);
  for (const auto& p : pts) counts[p.index]++;
  CHECK(counts[0] == n0);
  CHECK(counts[1] == n1);
  CHECK(counts[2] == n2);

  // dense Kronecker cross-check of the separable form sectors
  auto sop = witten_hamiltonian(spec1, GridSpec{Domain::Torus, 21, 10.0},
                                Assembly::Factorized);
  const Eigen::Index mm = sop.h0.rows();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(mm, mm);
  const Eigen::MatrixXd ax = Eigen::kroneckerProduct(sop.a, id);
  const Eigen::MatrixXd ay = Eigen::kroneckerProduct(id, sop.a);
  const Eigen::MatrixXd h00 = 0.5 * (ax.transpose() * ax + ay.transpose() * ay);
  const Eigen::MatrixXd h22 = 0.5 * (ax * ax.transpose() + ay * ay.transpose());
  const Eigen::MatrixXd tl = 0.5 * (ax * ax.transpose() + ay.transpose() * ay);
  const Eigen::MatrixXd br = 0.5 * (ay * ay.transpose() + ax.transpose() * ax);
  const Eigen::MatrixXd offd = 0.5 * (ax * ay.transpose() - ay.transpose() * ax);
  CHECK(offd.cwiseAbs().maxCoeff() < 1e-10);
  const Eigen::MatrixXd h00_sum = Eigen::kroneckerProduct(sop.h0, id).eval() +
                                  Eigen::kroneckerProduct(id, sop.h0).eval();
  CHECK((h00 - h00_sum).cwiseAbs().maxCoeff() < 1e-12);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> s0(sop.h0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> s1(sop.h1);
  const auto check_lows = [](const Eigen::MatrixXd& h2d, const Eigen::VectorXd& a,
                             const Eigen::VectorXd& b) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h2d);
    std::vector<double> sums;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      for (Eigen::Index j = 0; j < b.size(); ++j) sums.push_back(a[i] + b[j]);
    }
    std::sort(sums.begin(), sums.end());
    for (int k = 0; k < 8; ++k) {
      CHECK(std::abs(es.eigenvalues()[k] - sums[static_cast<size_t>(k)]) < 1e-8);
    }
  };
  check_lows(h00, s0.eigenvalues(), s0.eigenvalues());
  check_lows(tl, s1.eigenvalues(), s0.eigenvalues());
  check_lows(br, s0.eigenvalues(), s1.eigenvalues());
  check_lows(h22, s1.eigenvalues(), s1.eigenvalues());
}

TEST_CASE("euler characteristic agrees with the heat-kernel index") {
  auto spec = cos_circle_spec(6.0);
  auto cx = tunneling_matrix(spec, 6.0);
  auto betti = betti_numbers(cx);
  const int chi = betti[0] - betti[1];
  CHECK(chi == static_cast<int>(cx.grading[0].size()) - static_cast<int>(cx.grading[1].size()));
  auto idx = witten_index_spectral(spec, {1.0}, GridSpec{Domain::Torus, 255, 10.0});
  CHECK(std::abs(idx[0].estimate - chi) < 1e-6);
}
