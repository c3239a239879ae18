#pragma once

#include <functional>
#include <limits>
#include <map>

#include <Eigen/Dense>

#include "sbm/charts.hpp"
#include "sbm/frame_sde.hpp"
#include "sbm/grassmann.hpp"
#include "sbm/paths.hpp"
#include "sbm/super_wiener.hpp"
#include "sbm/superpoly.hpp"

namespace sbm {

// ---------------------------------------------------------------------------
// Forms as functions of anticommuting fiber variables.
//
// Conventions used throughout this module, on a 2D chart:
//   d + delta = psi^i D_i,  psi^i = xi^i - g^{ij}(x) d/dxi^j,
//   D_i = d/dx^i - Gamma^k_{ij}(x) xi^j d/dxi^k.
// With this normalization the flat-metric square is (d+delta)^2 = -Laplacian
// on components.  The heat generator follows the Brownian normalization
// E[db^2] = dt:  L = (1/2)(d+delta)^2, so scalars on the unit sphere decay
// at rates l(l+1)/2.
// ---------------------------------------------------------------------------

// Differential form with polynomial components; word mask {i,j,...} holds
// the coefficient of dx^i ^ dx^j ^ ... (ascending).  Identified one-to-one
// with a SuperPolynomial via xi^i <-> dx^i.
struct DifferentialForm {
  int p = 2;  // even variables
  int q = 2;  // form dimension
  std::map<Mask, Poly> components;
};

DifferentialForm to_form(const SuperPolynomial& f);
SuperPolynomial from_form(const DifferentialForm& w);

// d = xi^i d/dx^i; exact on polynomial coefficients.
SuperPolynomial exterior_d(const SuperPolynomial& f);
// Flat-metric codifferential delta = -d/dxi^i d/dx^i.
SuperPolynomial flat_codifferential(const SuperPolynomial& f);

// ---------------------------------------------------------------------------
// Pointwise operator applications on a chart (exact in xi, exact polynomial
// x-derivatives inside; outer derivatives of operator squares use 5-point
// stencils of the exact inner evaluation).
// ---------------------------------------------------------------------------

// (d + delta) f at x.
GElem hodge_dirac_at(const SurfaceChart& chart, const SuperPolynomial& f,
                     const Eigen::Vector2d& x);

// L f = (1/2)(d+delta)^2 f at x.
GElem hodge_laplacian_at(const SurfaceChart& chart, const SuperPolynomial& f,
                         const Eigen::Vector2d& x);

// L f via horizontal vector fields on the frame bundle:
// -(1/2)(W_a W_a - curvature terms) at (x, e), the frame e = g^{-1/2}(x).
GElem horizontal_laplacian_at(const SurfaceChart& chart, const SuperPolynomial& f,
                              const Eigen::Vector2d& x);

// L f via the Bochner Laplacian B = g^{ij}(D_i D_j - Gamma^k_{ij} D_k) plus
// the same curvature terms.
GElem bochner_laplacian_at(const SurfaceChart& chart, const SuperPolynomial& f,
                           const Eigen::Vector2d& x);

// Max coefficient discrepancy between the three routes above over a fixed
// basis of test SuperPolynomials and sample points of the chart.
double horizontal_field_check(const SurfaceChart& chart);

// Matrix of the curvature fiber operator (1/2) R_i^j xi^i d_j +
// (1/4) R_{ki}^{jl} xi^i xi^k d_j d_l at unit Gauss curvature, on the word
// basis {1, xi1, xi2, xi1 xi2}.  The weight along a path is the
// time-ordered product of exp(-dt K(x_s) * this).
Eigen::Matrix4d curvature_weight_generator();

// ---------------------------------------------------------------------------
// Feynman-Kac evolution and supertraces on a surface.
// ---------------------------------------------------------------------------

// Field on a surface: one coefficient function per odd word, evaluated in
// chart coordinates (callers supply chart-consistent component functions).
struct SuperField {
  std::map<Mask, std::function<double(int chart, const Eigen::Vector2d&)>> terms;
};

struct GeometryEstimate {
  GElem mean{2};
  GElem se{2};
  long long samples = 0;
  bool within_tol = true;  // false when some stderr exceeds the requested tolerance
};

// E[ curvature-weight * g0(x_t, xi_t) ] over the ensemble paths started at
// `start`; the fiber weight is accumulated as exact matrix factors per step.
// The ensemble horizon must equal t (t <= 2).  A finite se_tol only flags
// the estimate, it never fails it.
GeometryEstimate fk_laplace_beltrami(
    const Surface& surf, const SuperField& g0, double t, const FramePoint& start,
    const PathEnsemble& ensemble, FrameScheme scheme = FrameScheme::Heun,
    double se_tol = std::numeric_limits<double>::infinity());

// MC estimate of Supertrace e^{-Lt} (the Euler characteristic): start
// points run over a deterministic volume-uniform lattice, two independent
// half-time paths per sample meet in a volume-corrected Gaussian collision
// kernel (Richardson-extrapolated in eps^2), and the fiber factor is the
// grade supertrace of the combined transport and curvature weight.
// The ensemble horizon must equal t/2; paths are consumed in pairs.
MCResult euler_characteristic(const Surface& surf, double t,
                              const PathEnsemble& ensemble,
                              double collision_eps = -1.0);

}  // namespace sbm
