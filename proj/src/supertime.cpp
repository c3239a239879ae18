#include "sbm/supertime.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sbm {

namespace {

void check_gens(int n) {
  if (n < 1 || n > 16)
    throw std::invalid_argument("SuperTimeFunction: generator count must be in [1, 16]");
}

GElem zero_elem(int n) { return GElem(n); }

// component-wise true division keeps integer and dyadic data exact
GElem scale_div(const GElem& x, double d) {
  GElem r(x.generators());
  for (const auto& [w, c] : x.coeffs()) r.add_term(w, c / d);
  return r;
}

double max_abs(const GElem& x) {
  double m = 0.0;
  for (const auto& [w, c] : x.coeffs()) m = std::max(m, std::abs(c));
  return m;
}

int check_dim(int m, int lo, int hi, const char* who) {
  if (m < lo || m > hi)
    throw std::invalid_argument(std::string(who) + ": m must be in [" + std::to_string(lo) +
                                ", " + std::to_string(hi) + "]");
  return 1 << m;
}

double word_parity(Mask w) { return (__builtin_popcountll(w) & 1) ? -1.0 : 1.0; }

SuperTimeFunction trim(SuperTimeFunction f) {
  while (!f.coeff.empty() && f.coeff.back().is_zero()) f.coeff.pop_back();
  return f;
}

}  // namespace

SuperTimeFunction::SuperTimeFunction(int n_gens) : n(n_gens) { check_gens(n_gens); }

void SuperTimeFunction::set_term(int k, const GElem& c) {
  if (k < 0) throw std::invalid_argument("SuperTimeFunction::set_term: negative power");
  if (c.generators() != n)
    throw std::invalid_argument("SuperTimeFunction::set_term: generator count mismatch");
  if (static_cast<int>(coeff.size()) <= k) coeff.resize(k + 1, zero_elem(n));
  coeff[k] = c;
}

GElem SuperTimeFunction::eval(double t) const {
  GElem acc(n);
  double tk = 1.0;
  for (const GElem& c : coeff) {
    acc = acc + cplx(tk, 0.0) * c;
    tk *= t;
  }
  return acc;
}

GElem SuperTimeFunction::at_origin() const {
  GElem r(n);
  if (coeff.empty()) return r;
  for (const auto& [w, c] : coeff[0].coeffs())
    if (!(w & 1)) r.add_term(w, c);
  return r;
}

double SuperTimeFunction::distance(const SuperTimeFunction& o) const {
  if (o.n != n) throw std::invalid_argument("SuperTimeFunction::distance: algebra mismatch");
  double m = 0.0;
  size_t top = std::max(coeff.size(), o.coeff.size());
  for (size_t k = 0; k < top; ++k) {
    GElem a = k < coeff.size() ? coeff[k] : zero_elem(n);
    GElem b = k < o.coeff.size() ? o.coeff[k] : zero_elem(n);
    m = std::max(m, max_abs(a - b));
  }
  return m;
}

SuperTimeFunction operator+(const SuperTimeFunction& a, const SuperTimeFunction& b) {
  if (a.n != b.n) throw std::invalid_argument("SuperTimeFunction: algebra mismatch");
  SuperTimeFunction r(a.n);
  r.coeff.resize(std::max(a.coeff.size(), b.coeff.size()), zero_elem(a.n));
  for (size_t k = 0; k < a.coeff.size(); ++k) r.coeff[k] = r.coeff[k] + a.coeff[k];
  for (size_t k = 0; k < b.coeff.size(); ++k) r.coeff[k] = r.coeff[k] + b.coeff[k];
  return trim(r);
}

SuperTimeFunction operator-(const SuperTimeFunction& a, const SuperTimeFunction& b) {
  if (a.n != b.n) throw std::invalid_argument("SuperTimeFunction: algebra mismatch");
  SuperTimeFunction r(a.n);
  r.coeff.resize(std::max(a.coeff.size(), b.coeff.size()), zero_elem(a.n));
  for (size_t k = 0; k < a.coeff.size(); ++k) r.coeff[k] = r.coeff[k] + a.coeff[k];
  for (size_t k = 0; k < b.coeff.size(); ++k) r.coeff[k] = r.coeff[k] - b.coeff[k];
  return trim(r);
}

SuperTimeFunction operator*(const SuperTimeFunction& a, const SuperTimeFunction& b) {
  if (a.n != b.n) throw std::invalid_argument("SuperTimeFunction: algebra mismatch");
  SuperTimeFunction r(a.n);
  if (a.coeff.empty() || b.coeff.empty()) return r;
  r.coeff.resize(a.coeff.size() + b.coeff.size() - 1, zero_elem(a.n));
  for (size_t i = 0; i < a.coeff.size(); ++i)
    for (size_t j = 0; j < b.coeff.size(); ++j)
      r.coeff[i + j] = r.coeff[i + j] + a.coeff[i] * b.coeff[j];
  return trim(r);
}

SuperTimeFunction time_derivative(const SuperTimeFunction& f) {
  SuperTimeFunction r(f.n);
  if (f.coeff.size() <= 1) return r;
  r.coeff.resize(f.coeff.size() - 1, zero_elem(f.n));
  for (size_t k = 1; k < f.coeff.size(); ++k)
    r.coeff[k - 1] = cplx(static_cast<double>(k), 0.0) * f.coeff[k];
  return trim(r);
}

SuperTimeFunction super_derivative(const SuperTimeFunction& f) {
  FermionOperator del = FermionOperator::xi_del(f.n, 0);
  FermionOperator mul = FermionOperator::xi_mul(f.n, 0);
  SuperTimeFunction dt = time_derivative(f);
  SuperTimeFunction r(f.n);
  r.coeff.resize(std::max<size_t>(f.coeff.size(), dt.coeff.size()), zero_elem(f.n));
  for (size_t k = 0; k < f.coeff.size(); ++k) r.coeff[k] = r.coeff[k] + del.apply(f.coeff[k]);
  for (size_t k = 0; k < dt.coeff.size(); ++k) r.coeff[k] = r.coeff[k] + mul.apply(dt.coeff[k]);
  return trim(r);
}

SuperTimeFunction super_integral(const SuperTimeFunction& f) {
  FermionOperator del = FermionOperator::xi_del(f.n, 0);
  FermionOperator mul = FermionOperator::xi_mul(f.n, 0);
  SuperTimeFunction r(f.n);
  r.coeff.resize(f.coeff.size() + 1, zero_elem(f.n));
  for (size_t k = 0; k < f.coeff.size(); ++k) {
    // int_0^t (dF/dsigma)(s) ds raises the power; division undoes the
    // integer factor introduced by time_derivative exactly
    r.coeff[k + 1] =
        r.coeff[k + 1] + scale_div(del.apply(f.coeff[k]), static_cast<double>(k + 1));
    // + tau F|_{sigma=0}: left multiplication by tau kills the tau words
    r.coeff[k] = r.coeff[k] + mul.apply(f.coeff[k]);
  }
  while (!r.coeff.empty() && r.coeff.back().is_zero()) r.coeff.pop_back();
  return r;
}

Eigen::MatrixXcd operator_matrix(const FermionOperator& op, int m) {
  int dim = check_dim(m, 1, 8, "operator_matrix");
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
  for (int w = 0; w < dim; ++w) {
    GElem img = op.apply(GElem(m, static_cast<Mask>(w), cplx(1.0, 0.0)));
    for (const auto& [mask, c] : img.coeffs()) out(static_cast<int>(mask), w) = c;
  }
  return out;
}

DiracSpace make_dirac_space(int m) {
  int dim = check_dim(m, 1, 8, "make_dirac_space");
  if (m % 2 != 0) throw std::invalid_argument("make_dirac_space: m must be even");
  FermionOperator p = FermionOperator::identity(m);
  for (int r = 0; r < m / 2; ++r) {
    FermionOperator q =
        FermionOperator::clifford_bar(m, 2 * r) * FermionOperator::clifford_bar(m, 2 * r + 1);
    p = p * (cplx(0.5, 0.0) * FermionOperator::identity(m) + cplx(0.0, -0.5) * q);
  }
  DiracSpace out;
  out.m = m;
  out.projector = operator_matrix(p, m);
  // one generating word per pair: either empty or the even member eta^{2r-1}
  out.image_basis.resize(dim, 1 << (m / 2));
  int col = 0;
  for (Mask w = 0; w < static_cast<Mask>(dim); ++w) {
    bool pair_free = true;
    for (int r = 0; r < m / 2; ++r)
      if ((w >> (2 * r + 1)) & 1) pair_free = false;
    if (!pair_free) continue;
    out.image_basis.col(col++) = out.projector.col(static_cast<int>(w));
  }
  return out;
}

Eigen::MatrixXcd dirac_matrix(int m, const Eigen::VectorXi& k, CliffordNorm norm) {
  check_dim(m, 1, 8, "dirac_matrix");
  if (k.size() != m) throw std::invalid_argument("dirac_matrix: mode vector has wrong length");
  FermionOperator d = FermionOperator::zero(m);
  for (int a = 0; a < m; ++a)
    d = d + cplx(static_cast<double>(k[a]), 0.0) * FermionOperator::clifford(m, a, norm);
  return operator_matrix(d, m);
}

Eigen::MatrixXcd dirac_restricted(const DiracSpace& space, const Eigen::VectorXi& k,
                                  CliffordNorm norm) {
  Eigen::MatrixXcd d = dirac_matrix(space.m, k, norm);
  const Eigen::MatrixXcd& s = space.image_basis;
  // psi^a preserves the image, so D S = S X is exactly solvable
  Eigen::MatrixXcd x = s.colPivHouseholderQr().solve(d * s);
  double defect = (d * s - s * x).norm();
  if (defect > 1e-9 * (1.0 + d.norm()))
    throw std::runtime_error("dirac_restricted: operator does not preserve the subspace");
  return x;
}

std::vector<Eigen::VectorXi> torus_modes(int m, int kmax) {
  check_dim(m, 1, 8, "torus_modes");
  if (kmax < 0) throw std::invalid_argument("torus_modes: kmax must be nonnegative");
  std::vector<Eigen::VectorXi> out;
  Eigen::VectorXi k = Eigen::VectorXi::Constant(m, -kmax);
  for (;;) {
    out.push_back(k);
    int a = m - 1;
    while (a >= 0 && k[a] == kmax) k[a--] = -kmax;
    if (a < 0) break;
    ++k[a];
  }
  return out;
}

Eigen::MatrixXcd extend_operator(const Eigen::MatrixXcd& op, int m) {
  int dim = check_dim(m, 1, 8, "extend_operator");
  if (op.rows() != dim || op.cols() != dim)
    throw std::invalid_argument("extend_operator: operator has wrong dimension");
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(2 * dim, 2 * dim);
  out.topLeftCorner(dim, dim) = op;
  out.bottomRightCorner(dim, dim) = op;
  return out;
}

Eigen::MatrixXcd tau_mul_matrix(int m) {
  int dim = check_dim(m, 1, 8, "tau_mul_matrix");
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(2 * dim, 2 * dim);
  // tau (eta-word w) = (-1)^{|w|} (eta-word w) tau: tau is the last generator
  for (int w = 0; w < dim; ++w) out(dim + w, w) = word_parity(static_cast<Mask>(w));
  return out;
}

Eigen::MatrixXcd tau_del_matrix(int m) {
  int dim = check_dim(m, 1, 8, "tau_del_matrix");
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(2 * dim, 2 * dim);
  for (int w = 0; w < dim; ++w) out(w, dim + w) = word_parity(static_cast<Mask>(w));
  return out;
}

SuperEvolution super_evolution(int m, const Eigen::VectorXi& k, double t, CliffordNorm norm) {
  int dim = check_dim(m, 1, 8, "super_evolution");
  if (t < 0) throw std::invalid_argument("super_evolution: t must be nonnegative");
  SuperEvolution ev;
  ev.m = m;
  ev.t = t;
  ev.dirac = dirac_matrix(m, k, norm);
  // D is real symmetric, so e^{-D^2 t} comes from its eigendecomposition
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ev.dirac.real());
  if (es.info() != Eigen::Success)
    throw std::runtime_error("super_evolution: eigendecomposition failed");
  Eigen::VectorXd decay =
      (-es.eigenvalues().array().square() * t).exp();
  Eigen::MatrixXd heat_real =
      es.eigenvectors() * decay.asDiagonal() * es.eigenvectors().transpose();
  ev.heat = heat_real.cast<cplx>();
  ev.tau_coeff = -(ev.dirac * ev.heat);
  Eigen::MatrixXcd ident = Eigen::MatrixXcd::Identity(2 * dim, 2 * dim);
  ev.extended = extend_operator(ev.heat, m) *
                (ident - extend_operator(ev.dirac, m) * tau_mul_matrix(m));
  return ev;
}

}  // namespace sbm
