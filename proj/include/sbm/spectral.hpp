#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace sbm {

// Flat 1D computational domains: the truncated line [-L, L] and the
// circle [0, 2pi).
enum class Domain { Line, Torus };

// Collocation nodes 2*pi*j/points on the circle.
Eigen::VectorXd circle_nodes(int points);

// Fourier differentiation matrix on the circle for an ODD node count.
// Even counts carry a sawtooth null vector that pollutes supersymmetric
// spectra, so they are rejected.
Eigen::MatrixXd circle_derivative(int points);

// Sinc-collocation differentiation matrix on a uniform line grid with
// spacing dx.  Antisymmetric; spectrally accurate for functions that
// decay inside the truncation window.
Eigen::MatrixXd line_derivative(int points, double dx);

struct Grid1D {
  Domain domain;
  Eigen::VectorXd nodes;
  double dx;
  Eigen::MatrixXd deriv;
};

Grid1D make_circle_grid(int points);
Grid1D make_line_grid(int points, double half_width);

// exp(x) for small dense matrices by scaling-and-squaring on a fixed
// Taylor series; intended for propagator factors with ||x|| of order 1.
Eigen::MatrixXd expm_taylor(const Eigen::MatrixXd& x);

// exp(-t*h) * v for symmetric h via full eigendecomposition.
Eigen::VectorXd heat_apply(const Eigen::MatrixXd& h, const Eigen::VectorXd& v, double t);

// sum_k exp(-t*lambda_k) over an eigenvalue vector.
double heat_sum(const Eigen::VectorXd& eigenvalues, double t);

}  // namespace sbm
