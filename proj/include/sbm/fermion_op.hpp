#pragma once

#include <Eigen/Dense>

#include "sbm/grassmann.hpp"

namespace sbm {

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

// Linear operator on the 2^n-dimensional space of functions of n
// anticommuting variables.  Basis vectors are the words xi^mu ordered by
// mask value (mu = 0 is the unit); column mu holds the expansion of
// K(xi^mu).
class FermionOperator {
public:
  FermionOperator() = default;
  FermionOperator(int n, CMat m) : n_(n), m_(std::move(m)) {
    if (m_.rows() != dim() || m_.cols() != dim())
      throw std::invalid_argument("FermionOperator: matrix size != 2^n");
  }

  static FermionOperator zero(int n) {
    return FermionOperator(n, CMat::Zero(Eigen::Index(1) << n, Eigen::Index(1) << n));
  }
  static FermionOperator identity(int n) {
    return FermionOperator(n, CMat::Identity(Eigen::Index(1) << n, Eigen::Index(1) << n));
  }

  // Multiplication by xi^i from the left.
  static FermionOperator xi_mul(int n, int i) {
    FermionOperator k = zero(n);
    Mask bit = Mask(1) << i;
    for (Mask mu = 0; mu < Mask(1) << n; ++mu) {
      if (mu & bit) continue;
      k.m_(Eigen::Index(mu | bit), Eigen::Index(mu)) = mul_sign(bit, mu);
    }
    return k;
  }

  // Left derivative d/dxi^i: sign (-1)^{k-1} when xi^i sits in position k.
  static FermionOperator xi_del(int n, int i) {
    FermionOperator k = zero(n);
    Mask bit = Mask(1) << i;
    for (Mask mu = 0; mu < Mask(1) << n; ++mu) {
      if (!(mu & bit)) continue;
      int below = std::popcount(mu & (bit - 1));
      k.m_(Eigen::Index(mu & ~bit), Eigen::Index(mu)) = (below & 1) ? -1.0 : 1.0;
    }
    return k;
  }

  enum class CliffordNorm { UnitDelta, TwoDelta };

  // psi^i = xi^i + d/dxi^i, optionally scaled by 1/sqrt(2) so the
  // anticommutator closes on delta^{ij} instead of 2 delta^{ij}.
  static FermionOperator clifford(int n, int i, CliffordNorm norm = CliffordNorm::TwoDelta) {
    FermionOperator k = xi_mul(n, i) + xi_del(n, i);
    if (norm == CliffordNorm::UnitDelta) k.m_ *= 1.0 / std::sqrt(2.0);
    return k;
  }

  // psibar^i = xi^i - d/dxi^i (anticommutator -2 delta^{ij}).
  static FermionOperator clifford_bar(int n, int i) { return xi_mul(n, i) - xi_del(n, i); }

  // Grading involution: +1 on even words, -1 on odd words.
  static FermionOperator gamma(int n) {
    FermionOperator k = zero(n);
    for (Mask mu = 0; mu < Mask(1) << n; ++mu)
      k.m_(Eigen::Index(mu), Eigen::Index(mu)) = (mask_degree(mu) & 1) ? -1.0 : 1.0;
    return k;
  }

  int n() const { return n_; }
  Eigen::Index dim() const { return Eigen::Index(1) << n_; }
  const CMat& matrix() const { return m_; }
  CMat& matrix() { return m_; }

  friend FermionOperator operator+(const FermionOperator& a, const FermionOperator& b) {
    a.require_same(b);
    return FermionOperator(a.n_, a.m_ + b.m_);
  }
  friend FermionOperator operator-(const FermionOperator& a, const FermionOperator& b) {
    a.require_same(b);
    return FermionOperator(a.n_, a.m_ - b.m_);
  }
  friend FermionOperator operator*(const FermionOperator& a, const FermionOperator& b) {
    a.require_same(b);
    return FermionOperator(a.n_, a.m_ * b.m_);
  }
  friend FermionOperator operator*(cplx s, const FermionOperator& a) {
    return FermionOperator(a.n_, s * a.m_);
  }

  FermionOperator anticommutator(const FermionOperator& o) const {
    return FermionOperator(n_, m_ * o.m_ + o.m_ * m_);
  }

  GElem apply(const GElem& f) const {
    if (f.generators() != n_)
      throw std::invalid_argument("FermionOperator::apply: generator count mismatch");
    CVec v = CVec::Zero(dim());
    for (const auto& [m, c] : f.coeffs()) v(Eigen::Index(m)) = c;
    CVec w = m_ * v;
    GElem r(n_);
    for (Eigen::Index mu = 0; mu < dim(); ++mu)
      if (w(mu) != cplx(0)) r.add_term(Mask(mu), w(mu));
    return r;
  }

  cplx trace_plain() const { return m_.trace(); }
  cplx trace_alternating() const {
    cplx s = 0;
    for (Eigen::Index mu = 0; mu < dim(); ++mu)
      s += ((mask_degree(Mask(mu)) & 1) ? -1.0 : 1.0) * m_(mu, mu);
    return s;
  }

private:
  void require_same(const FermionOperator& o) const {
    if (n_ != o.n_) throw std::invalid_argument("FermionOperator: dimension mismatch");
  }

  int n_ = 0;
  CMat m_;
};

// ---------------------------------------------------------------------------
// Kernel calculus.  Kernels live in the algebra on 2n generators with the
// xi bank on bits 0..n-1 and the theta bank on bits n..2n-1, so a stored
// ascending word reads xi^alpha theta^beta.
// ---------------------------------------------------------------------------

// Word for the ordered product prod_{j in mu ascending} factors[j].
inline GElem word_product(int big_n, Mask mu, const std::vector<GElem>& factors) {
  GElem w = GElem::unit(big_n);
  Mask rem = mu;
  while (rem) {
    int j = std::countr_zero(rem);
    rem &= rem - 1;
    w *= factors[size_t(j)];
  }
  return w;
}

// delta(xi, theta) = prod_i (xi^i - theta^i), ascending factor order.
inline GElem delta_kernel(int n) {
  GElem d = GElem::unit(2 * n);
  for (int i = 0; i < n; ++i)
    d *= GElem::generator(2 * n, i) - GElem::generator(2 * n, n + i);
  return d;
}

// K F(xi) = int d^n theta Ker(xi, theta) F(theta); the measure order is
// theta^1 ... theta^n ascending.
inline GElem apply_kernel(const GElem& ker, const GElem& f, int n) {
  std::vector<int> to(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) to[size_t(i)] = n + i;
  GElem ft = f.relabel(to, 2 * n);
  GElem prod = ker * ft;
  std::vector<int> order(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) order[size_t(i)] = n + i;
  GElem big = prod.berezin(order);
  // Result involves only the xi bank; shrink back to n generators.
  GElem r(n);
  for (const auto& [m, c] : big.coeffs()) {
    if (m >> n) throw std::logic_error("apply_kernel: theta generators survived");
    r.add_term(m, c);
  }
  return r;
}

// Kernel of a matrix operator: Ker_K(xi, theta) = K_xi delta(xi, theta).
// K acts on the xi prefix of each word; theta generators are right-hand
// spectators so no crossing signs appear.
inline GElem op_kernel(const FermionOperator& k) {
  int n = k.n();
  GElem d = delta_kernel(n);
  // Split terms by their theta part.
  std::map<Mask, GElem> by_theta;  // theta mask (shifted) -> xi-part element
  for (const auto& [m, c] : d.coeffs()) {
    Mask theta = m >> n;
    Mask xi = m & ((Mask(1) << n) - 1);
    auto it = by_theta.try_emplace(theta, GElem(n)).first;
    it->second.add_term(xi, c);
  }
  GElem r(2 * n);
  for (const auto& [theta, fxi] : by_theta) {
    GElem kf = k.apply(fxi);
    for (const auto& [mxi, c] : kf.coeffs()) r.add_term(mxi | (theta << n), c);
  }
  return r;
}

// Composition of kernels via an auxiliary phi bank: needs 3n <= 64.
inline GElem compose_kernels(const GElem& k1, const GElem& k2, int n) {
  if (3 * n > 64) throw std::invalid_argument("compose_kernels: 3n exceeds generator budget");
  int big = 3 * n;
  // k1(xi, phi): xi -> bits 0.., theta bank n.. -> phi bank n..
  std::vector<int> map1(static_cast<size_t>(2 * n));
  for (int i = 0; i < n; ++i) { map1[size_t(i)] = i; map1[size_t(n + i)] = n + i; }
  GElem a = k1.relabel(map1, big);
  // k2(phi, theta): xi bank -> phi bits n.., theta bank -> bits 2n..
  std::vector<int> map2(static_cast<size_t>(2 * n));
  for (int i = 0; i < n; ++i) { map2[size_t(i)] = n + i; map2[size_t(n + i)] = 2 * n + i; }
  GElem b = k2.relabel(map2, big);
  std::vector<int> order(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) order[size_t(i)] = n + i;
  GElem prod = (a * b).berezin(order);
  // Shrink: bits 0..n-1 stay, bits 2n.. -> n..
  std::vector<int> back(static_cast<size_t>(big));
  for (int i = 0; i < big; ++i) back[size_t(i)] = i;
  for (int i = 0; i < n; ++i) back[size_t(2 * n + i)] = n + i;
  return prod.relabel(back, 2 * n);
}

// Supertrace / trace via coincident-point kernels.
enum class TraceMode { Grade, Hodge, Plain };

// int d^n xi Ker(xi, xi): substitute theta -> xi, integrate.
inline cplx kernel_supertrace(const GElem& ker, int n) {
  GElem merged = ker.substitute_bank(n, 2 * n, 0, /*negate=*/false);
  return merged.berezin_all(0, n);
}

// int d^n xi Ker(xi, -xi).
inline cplx kernel_trace(const GElem& ker, int n) {
  GElem merged = ker.substitute_bank(n, 2 * n, 0, /*negate=*/true);
  return merged.berezin_all(0, n);
}

// exp(i rho . xi) with rho on bits n..2n-1 and xi on bits 0..n-1, built as
// the ordered product of the n commuting factors (1 + i rho^j xi^j).
inline GElem exp_i_rho_xi(int n, cplx scale) {
  GElem e = GElem::unit(2 * n);
  for (int j = 0; j < n; ++j) {
    GElem term = GElem::generator(2 * n, n + j) * GElem::generator(2 * n, j);
    e *= GElem::unit(2 * n) + scale * term;
  }
  return e;
}

// Fourier transform hat F(rho) = int d^n xi F(xi) exp(i rho . xi),
// returned on the same generator labels as the input.  Requires even n;
// the inversion theorem fails by a sign for odd n.
inline GElem fourier(const GElem& f, int n) {
  if (n % 2 != 0) throw std::invalid_argument("fourier: odd n rejected");
  std::vector<int> id(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) id[size_t(i)] = i;
  GElem big = f.relabel(id, 2 * n);
  GElem prod = big * exp_i_rho_xi(n, cplx(0, 1));
  std::vector<int> order(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) order[size_t(i)] = i;
  GElem hat = prod.berezin(order);
  std::vector<int> down(size_t(2 * n), 0);
  for (int i = 0; i < n; ++i) { down[size_t(n + i)] = i; down[size_t(i)] = i; }
  return hat.relabel(down, n);
}

// Flat Hodge-type involution tau F(xi) = int d^n rho exp(i rho . xi) F(rho),
// assembled column by column as an operator matrix.
inline FermionOperator tau_involution(int n) {
  FermionOperator t = FermionOperator::zero(n);
  GElem e = exp_i_rho_xi(n, cplx(0, 1));
  std::vector<GElem> gens;
  gens.reserve(static_cast<size_t>(2 * n));
  for (int j = 0; j < 2 * n; ++j) gens.push_back(GElem::generator(2 * n, j));
  std::vector<int> order(static_cast<size_t>(n));
  for (int j = 0; j < n; ++j) order[size_t(j)] = n + j;
  for (Mask mu = 0; mu < Mask(1) << n; ++mu) {
    // F = rho^mu on the rho bank (bits n..2n-1).
    GElem f = word_product(2 * n, mu << n, gens);
    GElem col = (e * f).berezin(order);
    for (const auto& [m, c] : col.coeffs()) {
      if (m >> n) throw std::logic_error("tau_involution: rho generators survived");
      t.matrix()(Eigen::Index(m), Eigen::Index(mu)) = c;
    }
  }
  return t;
}

// Mode-dispatched supertrace of an operator.
inline cplx supertrace(const FermionOperator& k, TraceMode mode) {
  switch (mode) {
    case TraceMode::Grade: return k.trace_alternating();
    case TraceMode::Plain: return k.trace_plain();
    case TraceMode::Hodge: return (tau_involution(k.n()) * k).trace_plain();
  }
  throw std::logic_error("supertrace: bad mode");
}

}  // namespace sbm
