#pragma once

#include <vector>

#include <Eigen/Dense>

#include "sbm/fermion_op.hpp"
#include "sbm/grassmann.hpp"

namespace sbm {

// Calculus on the (1,1)-dimensional superspace R^{1|1} with coordinates
// (t; tau).  A function F(t;tau) = f(t) + tau g(t) is a polynomial in t
// whose coefficients live in a Grassmann algebra where generator 0 is
// reserved for tau; further generators carry any odd constants of the
// problem.  The superderivative D = d/dtau + tau d/dt squares to d/dt.
struct SuperTimeFunction {
  int n = 1;                 // coefficient algebra generators, tau included
  std::vector<GElem> coeff;  // coeff[k] multiplies t^k

  explicit SuperTimeFunction(int n_gens = 1);

  void set_term(int k, const GElem& c);
  GElem eval(double t) const;  // value in the coefficient algebra
  GElem at_origin() const;     // F(0;0): constant term with the tau words dropped
  double distance(const SuperTimeFunction& o) const;  // max coefficient deviation
};

SuperTimeFunction operator+(const SuperTimeFunction& a, const SuperTimeFunction& b);
SuperTimeFunction operator-(const SuperTimeFunction& a, const SuperTimeFunction& b);
// coefficient products; the reserved-generator algebra handles all tau signs
SuperTimeFunction operator*(const SuperTimeFunction& a, const SuperTimeFunction& b);

SuperTimeFunction time_derivative(const SuperTimeFunction& f);   // d/dt
SuperTimeFunction super_derivative(const SuperTimeFunction& f);  // df/dtau + tau df/dt

// Integration between even and odd limits:
//   int_0^tau int_0^t D[s;sigma] F(s;sigma)
//     = Berezin_sigma int_0^{t+sigma tau} F(s;sigma) ds
//     = int_0^t (dF/dsigma)(s) ds + tau F|_{sigma=0}(t).
// This is the square root of the fundamental theorem of calculus:
// super_integral(super_derivative(F)) = F(t;tau) - F(0;0), exact for
// polynomial coefficient data (the 1/k of the s-integral cancels the k of
// the derivative).
SuperTimeFunction super_integral(const SuperTimeFunction& f);

// Dirac functions: the 2^{m/2}-dimensional subspace of the 2^m word space
// cut out by psibar^{2r-1} psibar^{2r} f = i f for r = 1..m/2, with
// psibar^a = eta^a - d/deta^a.  projector = P_1 ... P_{m/2} where
// P_r = (1 - i psibar^{2r-1} psibar^{2r})/2 picks the +i eigenspace.
struct DiracSpace {
  int m = 2;
  Eigen::MatrixXcd projector;    // 2^m x 2^m, idempotent, rank 2^{m/2}
  Eigen::MatrixXcd image_basis;  // 2^m x 2^{m/2}, columns span the image
};

DiracSpace make_dirac_space(int m);  // even 0 < m <= 8

using CliffordNorm = FermionOperator::CliffordNorm;

// Matrix of a FermionOperator on the word basis (mask = column index).
Eigen::MatrixXcd operator_matrix(const FermionOperator& op, int m);

// psi^a = eta^a + d/deta^a; TwoDelta keeps {psi^a, psi^b} = 2 delta^{ab},
// UnitDelta divides by sqrt2.  The flat Dirac operator on the Fourier mode
// e^{ik.x} of the m-torus is D(k) = -i psi^a d/dx^a -> sum_a k_a psi^a,
// so D^2 = |k|^2 Id with TwoDelta (|k|^2/2 with UnitDelta).  psi^a
// anticommutes with every psibar^b, hence preserves the Dirac subspace.
Eigen::MatrixXcd dirac_matrix(int m, const Eigen::VectorXi& k,
                              CliffordNorm norm = CliffordNorm::TwoDelta);

// D(k) compressed onto the image basis of the projector.
Eigen::MatrixXcd dirac_restricted(const DiracSpace& space, const Eigen::VectorXi& k,
                                  CliffordNorm norm = CliffordNorm::TwoDelta);

std::vector<Eigen::VectorXi> torus_modes(int m, int kmax = 3);  // |k|_inf <= kmax

// Reserved-generator representation of odd time: operators on the 2^{m+1}
// words over (eta^1..eta^m, tau) with tau = generator m.  Operators built
// from eta ops never cross the tau bit, so their extension is tau-blind;
// all tau anticommutation signs live in the two matrices below.
Eigen::MatrixXcd extend_operator(const Eigen::MatrixXcd& op, int m);
Eigen::MatrixXcd tau_mul_matrix(int m);  // left multiplication by tau
Eigen::MatrixXcd tau_del_matrix(int m);  // left derivative d/dtau

// U(t;tau) = exp(-D^2 t - D tau) = e^{-D^2 t} (I - D T) on the extended
// space (the two exponent pieces commute, and (D T)^2 = 0).  As a series
// with tau written on the right, U = e^{-D^2 t} + (-D e^{-D^2 t}) tau.
// Satisfies the superderivative identity
//   D_{(t;tau)} U = U (D - 2 tau D^2)
// to round-off, where the left side is tau_del U + T (dU/dt).
struct SuperEvolution {
  int m = 2;
  double t = 0;
  Eigen::MatrixXcd dirac;      // D(k) on the 2^m word space
  Eigen::MatrixXcd heat;       // e^{-D^2 t}
  Eigen::MatrixXcd tau_coeff;  // -D e^{-D^2 t}, the tau series coefficient
  Eigen::MatrixXcd extended;   // the full operator on 2^{m+1} words
};

SuperEvolution super_evolution(int m, const Eigen::VectorXi& k, double t,
                               CliffordNorm norm = CliffordNorm::TwoDelta);

}  // namespace sbm
