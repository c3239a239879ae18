#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "sbm/grassmann.hpp"
#include "sbm/spectral.hpp"
#include "sbm/super_wiener.hpp"
#include "sbm/superpoly.hpp"

namespace sbm {

// A Morse function on R^m or the flat torus [0,2pi)^m together with the
// deformation scale u.  Gradient and Hessian are supplied analytically
// and cross-checked against finite differences of h.
struct MorseFunctionSpec {
  int m = 1;
  Domain domain = Domain::Line;
  double u = 1.0;
  std::string name;
  std::function<double(const Eigen::VectorXd&)> h;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> hess;
};

MorseFunctionSpec quadratic_spec(int m, double u);   // h = |x|^2/2 on R^m
MorseFunctionSpec cos_circle_spec(double u);         // h = cos x on the circle
MorseFunctionSpec cos2_circle_spec(double u);        // h = cos(2x)/4 on the circle
MorseFunctionSpec cos_torus2_spec(double u);         // h = cos x + cos y on the torus
MorseFunctionSpec polynomial_spec(
    int m, const std::vector<std::pair<std::vector<int>, double>>& table, double u);
MorseFunctionSpec spec_from_name(const std::string& name, double u);

// Checks grad and hess against central differences of h at the sample
// points; throws on relative mismatch above tol.
void check_spec_consistency(const MorseFunctionSpec& spec,
                            const std::vector<Eigen::VectorXd>& samples, double tol = 1e-6);

struct GridSpec {
  Domain domain = Domain::Line;
  int points = 513;
  double half_width = 10.0;  // line truncation; ignored on the torus
};

GridSpec default_grid(const MorseFunctionSpec& spec);

// Deformed Hodge Laplacian on the 1D grid, split into the fermion-number
// sectors it preserves.  a is the supercharge block (sector 0 -> 1).
struct WittenOperator {
  Grid1D grid;
  double u = 1.0;
  Eigen::MatrixXd a;
  Eigen::MatrixXd h0;
  Eigen::MatrixXd h1;
  Eigen::MatrixXd full() const;  // block-diagonal h0 (+) h1
};

// Factorized: h0 = a^T a / 2, h1 = a a^T / 2 with a = d/dx + u h'.
// Exact supersymmetric pairing of the discrete spectra.  On a truncated
// line the exact pairing is a mixed blessing: sector 1 inherits a
// spurious near-zero partner mode localized at the truncation boundary
// (the non-normalizable continuum solution exp(+u h) reborn as a lattice
// vector), so heat evolution of slowly decaying data is polluted there.
// Displayed:  h_s = (-(d/dx)^2 + u^2 h'^2 -+ u h'')/2 assembled directly;
// agrees with Factorized to spectral accuracy on interior-supported data
// and is free of the boundary mode.  Prefer Displayed on the line.
enum class Assembly { Factorized, Displayed };

WittenOperator witten_hamiltonian(const MorseFunctionSpec& spec, const GridSpec& grid,
                                  Assembly assembly = Assembly::Factorized);

// BRST charge Omega = i e^{-uh} d e^{uh} and gauge-fixing partner
// chi = e^{uh} delta e^{-uh} as full grid operators (m = 1).
// {Omega, chi} = 2i * witten_hamiltonian (Factorized) exactly.
std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> brst_pair(const MorseFunctionSpec& spec,
                                                        const GridSpec& grid);

// Omega on the 2-torus (m = 2) over the 4-dimensional fermion fiber;
// small node counts only (dense Kronecker assembly).
Eigen::MatrixXcd brst_omega_torus2(const MorseFunctionSpec& spec, int points_per_dim);

// Diagonal heat kernel of the magnetic Laplacian on R^2 at field b:
// b / (4 pi sinh(b t / 2)), with the b -> 0 limit 1/(2 pi t).
double mehler_kernel(double b_field, double t);

// Monte Carlo estimate of the same diagonal via Brownian bridges and the
// enclosed-area phase.  The imaginary part vanishes by symmetry; the
// estimator averages the real part.
MCResult magnetic_kernel_mc(double b_field, double t, int steps, long long n_paths,
                            std::uint64_t seed);

struct FermionicEstimate {
  GElem mean;
  GElem se;
  long long samples = 0;
};

// Feynman-Kac evolution by exp(-tH) along the drifted paths
// dx = db - u grad(h) dt: per-path weight exp(-u(h(x0)-h(x_t))) times the
// exterior transport of the fermion word, applied to psi0(x_t, eta).
// psi0 lives on R^{m|m}.  Rejects stiff drift steps (u * dt > 0.1).
FermionicEstimate nicolai_fk_evolve(const MorseFunctionSpec& spec, const SuperPolynomial& psi0,
                                    double t, const Eigen::VectorXd& x0,
                                    const PathEnsemble& ensemble);

struct IndexResult {
  double t = 0;
  double estimate = 0;
  double se = 0;  // zero for the spectral route
};

// Supertrace of exp(-tH) summed over the grid spectra of both sectors.
std::vector<IndexResult> witten_index_spectral(const MorseFunctionSpec& spec,
                                               const std::vector<double>& ts,
                                               const GridSpec& grid);

// Supertrace of exp(-tH) by quadrature over start points and Brownian
// bridges, with the exterior-transport determinant as the fiber trace.
// Torus runs sum winding sectors -2..2.
std::vector<IndexResult> witten_index_mc(const MorseFunctionSpec& spec,
                                         const std::vector<double>& ts, int quad_points,
                                         long long bridges_per_point, int steps,
                                         std::uint64_t seed);

}  // namespace sbm
