#pragma once

#include <vector>

#include "sbm/grassmann.hpp"
#include "sbm/rational.hpp"

namespace sbm {

// Index-density integrand
//   Tr exp(-F/2pi) * det^{1/2}( (i Omega/2pi) / tanh(i Omega/2pi) )
// evaluated exactly in the nilpotent algebra on m odd symbols.  Entries of
// `omega` (m x m, antisymmetric) and `f_twist` (n_twist x n_twist) are even
// elements with rational coefficients; the 1/2pi normalization is already
// absorbed into the inputs.  Since the determinant factor is an even series
// in (i Omega/2pi)^2 = -(Omega/2pi)^2, everything stays rational:
//   x/tanh x = 1 + Y/3 - Y^2/45 + 2Y^3/945 - Y^4/4725 + ...,  Y = x^2,
// and det^{1/2} = exp((1/2) tr log).  Supported for even m <= 8.
GElemR index_density_element(int m, const std::vector<std::vector<GElemR>>& omega,
                             const std::vector<std::vector<GElemR>>& f_twist,
                             int n_twist);

// Coefficient of the top word (the m-form component that gets integrated).
Rational index_density(int m, const std::vector<std::vector<GElemR>>& omega,
                       const std::vector<std::vector<GElemR>>& f_twist, int n_twist);

}  // namespace sbm
