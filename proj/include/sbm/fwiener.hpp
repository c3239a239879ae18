#pragma once

#include <span>
#include <utility>
#include <vector>

#include "sbm/fermion_op.hpp"
#include "sbm/grassmann.hpp"

// Fermionic Wiener space: finite-dimensional marginal densities over phase
// space slots (theta_k, rho_k), exact Grassmann expectations, and the
// evaluation of clifford operator products as path expectations.

namespace sbm {

struct TimeGrid {
  std::vector<double> times;

  explicit TimeGrid(std::vector<double> t) : times(std::move(t)) {
    if (times.empty()) throw std::invalid_argument("TimeGrid: at least one time required");
    if (times.front() < 0) throw std::invalid_argument("TimeGrid: times must be nonnegative");
    for (size_t k = 1; k < times.size(); ++k)
      if (!(times[k] > times[k - 1]))
        throw std::invalid_argument("TimeGrid: times must be strictly increasing");
  }
  int slots() const { return int(times.size()); }
};

// Generator layout for N slots of n odd dimensions, 2nN generators total:
// slot k (0-based) holds theta bits [2nk, 2nk+n) and rho bits [2nk+n, 2nk+2n).
inline int theta_bit(int n, int slot, int j) { return 2 * n * slot + j; }
inline int rho_bit(int n, int slot, int j) { return 2 * n * slot + n + j; }

inline void require_generator_budget(long long needed, const char* formula) {
  if (needed > 64)
    throw std::invalid_argument(std::string("generator budget exceeded: ") + formula + " = " +
                                std::to_string(needed) + " > 64");
}

struct FermionicMarginal {
  TimeGrid grid;
  int n;
  GElem density;  // 2 n N generators
};

// exp(-i rho_1.theta_1 - i rho_2.(theta_2 - theta_1) - ...), theta_0 = 0,
// expanded exactly (the exponent is nilpotent).
inline FermionicMarginal marginal_density(const TimeGrid& grid, int n) {
  int N = grid.slots();
  require_generator_budget(2LL * n * N, "2nN");
  int big = 2 * n * N;
  GElem d = GElem::unit(big);
  for (int k = 0; k < N; ++k)
    for (int j = 0; j < n; ++j) {
      GElem rho = GElem::generator(big, rho_bit(n, k, j));
      GElem step = GElem::generator(big, theta_bit(n, k, j));
      if (k > 0) step -= GElem::generator(big, theta_bit(n, k - 1, j));
      d *= GElem::unit(big) + cplx(0, -1) * (rho * step);
    }
  return FermionicMarginal{grid, n, std::move(d)};
}

// Full-integral weight of a single slot; i^(n mod 2), so the measure is
// normalized exactly when n is even.
inline cplx slot_weight(int n) { return (n % 2) ? cplx(0, 1) : cplx(1, 0); }

// E[rv] = full Berezin integral of density * rv over all slot generators,
// earliest slot as the leftmost measure factor (= ascending bit order).
inline cplx fexpect(const GElem& rv, const FermionicMarginal& m) {
  int big = 2 * m.n * m.grid.slots();
  if (rv.generators() != big)
    throw std::invalid_argument("fexpect: rv references generators outside the grid");
  return (m.density * rv).berezin_all();
}

// (|E[rv]|, sum of |coefficients| of rv): the bound of the expectation
// estimate for finitely defined random variables.
inline std::pair<double, double> fexpect_bound(const GElem& rv, const FermionicMarginal& m) {
  double sum = 0;
  for (const auto& [mask, c] : rv.coeffs()) sum += std::abs(c);
  return {std::abs(fexpect(rv, m)), sum};
}

// Integrate out the last slot; equals slot_weight(n) times the marginal of
// the truncated grid (Kolmogorov consistency, exact).
inline GElem integrate_last_slot(const FermionicMarginal& m) {
  int n = m.n, N = m.grid.slots();
  if (N < 2) throw std::invalid_argument("integrate_last_slot: need at least two slots");
  std::vector<int> order;
  for (int j = 0; j < n; ++j) order.push_back(theta_bit(n, N - 1, j));
  for (int j = 0; j < n; ++j) order.push_back(rho_bit(n, N - 1, j));
  GElem reduced = m.density.berezin(order);
  GElem out(2 * n * (N - 1));
  for (const auto& [mask, c] : reduced.coeffs()) {
    if (mask >> (2 * n * (N - 1))) throw std::logic_error("integrate_last_slot: slot survived");
    out.add_term(mask, c);
  }
  return out;
}

// Substitute images[j] (odd elements of the target algebra) for generator j
// of f, multiplying images in ascending word order.
inline GElem substitute_linear(const GElem& f, const std::vector<GElem>& images, int big_n) {
  GElem r(big_n);
  for (const auto& [mask, c] : f.coeffs()) {
    GElem word = GElem::unit(big_n);
    Mask rem = mask;
    while (rem) {
      int j = std::countr_zero(rem);
      rem &= rem - 1;
      word *= images[size_t(j)];
    }
    r += c * word;
  }
  return r;
}

// F(psi) = sum_mu F_mu psi^mu with the unscaled psi^i = xi^i + d/dxi^i.
inline FermionOperator psi_word_operator(const GElem& f, int n) {
  std::vector<FermionOperator> psi;
  for (int i = 0; i < n; ++i) psi.push_back(FermionOperator::clifford(n, i));
  FermionOperator op = FermionOperator::zero(n);
  for (const auto& [mask, c] : f.coeffs()) {
    FermionOperator word = FermionOperator::identity(n);
    Mask rem = mask;
    while (rem) {
      int j = std::countr_zero(rem);
      rem &= rem - 1;
      word = word * psi[size_t(j)];
    }
    op = op + c * word;
  }
  return op;
}

enum class ExpectationRoute { Expansion, Matrix };

// F_1(psi) ... F_N(psi) G evaluated either as the matrix product or as the
// anchored path expectation E[F_1(theta_1 + i rho_1) ... G(theta_N)].  The
// expansion route is the ground truth; the matrix route scales.
//
// Anchored layout: anchor xi on bits [0, n), slot banks shifted up by n.
// The anchored density uses exp(+i rho_k.(theta_k - theta_{k-1})) with
// theta_0 = xi; the raw expectation is normalized by E[1] (a unit factor,
// 1 for even n).
inline GElem operator_product_expectation(std::span<const GElem> fs, const GElem& g, int n,
                                          ExpectationRoute route) {
  int N = int(fs.size());
  for (const GElem& f : fs)
    if (f.generators() != n)
      throw std::invalid_argument("operator_product_expectation: F generator count mismatch");
  if (g.generators() != n)
    throw std::invalid_argument("operator_product_expectation: G generator count mismatch");

  if (route == ExpectationRoute::Matrix) {
    FermionOperator op = FermionOperator::identity(n);
    for (const GElem& f : fs) op = op * psi_word_operator(f, n);
    return op.apply(g);
  }

  require_generator_budget(2LL * n * N + n, "2nN + n");
  int big = 2 * n * N + n;
  auto tbit = [&](int slot, int j) { return n + 2 * n * slot + j; };
  auto rbit = [&](int slot, int j) { return n + 2 * n * slot + n + j; };

  auto slot_density = [&](int k) {
    GElem d = GElem::unit(big);
    for (int j = 0; j < n; ++j) {
      GElem rho = GElem::generator(big, rbit(k, j));
      GElem step = GElem::generator(big, tbit(k, j));
      step -= (k > 0) ? GElem::generator(big, tbit(k - 1, j)) : GElem::generator(big, j);
      d *= GElem::unit(big) + cplx(0, 1) * (rho * step);
    }
    return d;
  };
  auto slot_order = [&](int k) {
    std::vector<int> order;
    for (int b = 0; b < 2 * n; ++b) order.push_back(n + 2 * n * k + b);
    return order;
  };

  // Eliminate slots right to left.  Each elimination extracts an even
  // number of generators (surviving terms carry all 2n slot bits), so the
  // nested integrals equal the full Berezin integral exactly while keeping
  // intermediate supports small.
  GElem y(big);
  {
    std::vector<GElem> images;
    for (int j = 0; j < n; ++j)
      images.push_back(N > 0 ? GElem::generator(big, tbit(N - 1, j)) : GElem::generator(big, j));
    y = substitute_linear(g, images, big);
  }
  for (int k = N - 1; k >= 0; --k) {
    std::vector<GElem> images;
    for (int j = 0; j < n; ++j)
      images.push_back(GElem::generator(big, tbit(k, j)) +
                       cplx(0, 1) * GElem::generator(big, rbit(k, j)));
    GElem x = slot_density(k) * substitute_linear(fs[size_t(k)], images, big) * y;
    y = x.berezin(slot_order(k));
  }

  // The empty-insertion weight factorizes over slots: the coupling terms
  // each lack one slot generator and drop out of the slot integral.
  cplx w(1, 0);
  if (N > 0) {
    cplx c = slot_density(0).berezin(slot_order(0)).body();
    if (c == cplx(0)) throw std::logic_error("operator_product_expectation: vanishing weight");
    w = std::pow(c, N);
  }

  GElem out(n);
  for (const auto& [mask, c] : y.coeffs()) {
    if (mask >> n) throw std::logic_error("operator_product_expectation: slot bits survived");
    out.add_term(mask, c / w);
  }
  return out;
}

}  // namespace sbm
