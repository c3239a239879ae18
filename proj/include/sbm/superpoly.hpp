#pragma once

#include <map>
#include <span>
#include <vector>

#include "sbm/grassmann.hpp"

namespace sbm {

// Real polynomial in p commuting variables, exact coefficients, exact
// differentiation.  Desk scale: dense exponent vectors as map keys.
class Poly {
public:
  explicit Poly(int p) : p_(p) {}

  static Poly constant(int p, double v) {
    Poly q(p);
    if (v != 0) q.c_[std::vector<int>(size_t(p), 0)] = v;
    return q;
  }
  static Poly variable(int p, int i) {
    Poly q(p);
    std::vector<int> e(size_t(p), 0);
    e[size_t(i)] = 1;
    q.c_[e] = 1.0;
    return q;
  }

  int vars() const { return p_; }
  const std::map<std::vector<int>, double>& coeffs() const { return c_; }
  bool is_zero() const { return c_.empty(); }

  Poly& operator+=(const Poly& o) {
    require_same(o);
    for (const auto& [e, v] : o.c_) {
      double nv = (c_.count(e) ? c_[e] : 0.0) + v;
      if (nv == 0) c_.erase(e); else c_[e] = nv;
    }
    return *this;
  }
  Poly& operator-=(const Poly& o) { return *this += -1.0 * o; }
  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator*(double s, const Poly& a) {
    Poly r(a.p_);
    if (s != 0)
      for (const auto& [e, v] : a.c_) r.c_[e] = s * v;
    return r;
  }
  friend Poly operator*(const Poly& a, const Poly& b) {
    a.require_same(b);
    Poly r(a.p_);
    for (const auto& [ea, va] : a.c_)
      for (const auto& [eb, vb] : b.c_) {
        std::vector<int> e(ea);
        for (size_t i = 0; i < e.size(); ++i) e[i] += eb[i];
        double nv = (r.c_.count(e) ? r.c_[e] : 0.0) + va * vb;
        if (nv == 0) r.c_.erase(e); else r.c_[e] = nv;
      }
    return r;
  }

  Poly derivative(int i) const {
    Poly r(p_);
    for (const auto& [e, v] : c_) {
      if (e[size_t(i)] == 0) continue;
      std::vector<int> d(e);
      d[size_t(i)] -= 1;
      r.c_[d] = v * e[size_t(i)];
    }
    return r;
  }

  double eval(std::span<const double> x) const {
    double s = 0;
    for (const auto& [e, v] : c_) {
      double t = v;
      for (size_t i = 0; i < e.size(); ++i)
        for (int k = 0; k < e[i]; ++k) t *= x[i];
      s += t;
    }
    return s;
  }

private:
  void require_same(const Poly& o) const {
    if (p_ != o.p_) throw std::invalid_argument("Poly: variable count mismatch");
  }

  int p_;
  std::map<std::vector<int>, double> c_;
};

// Function on R^{p|q}: polynomial coefficients indexed by odd words.
struct SuperPolynomial {
  int p;
  int q;  // odd generator count
  std::map<Mask, Poly> terms;

  SuperPolynomial(int p_, int q_) : p(p_), q(q_) {}

  void set(Mask word, Poly poly) {
    if (poly.vars() != p) throw std::invalid_argument("SuperPolynomial: variable count");
    if (mask_degree(word) > q) throw std::invalid_argument("SuperPolynomial: word out of range");
    if (poly.is_zero()) terms.erase(word); else terms.insert_or_assign(word, std::move(poly));
  }

  GElem eval_even(std::span<const double> x) const {
    GElem r(q);
    for (const auto& [word, poly] : terms) {
      double v = poly.eval(x);
      if (v != 0) r.add_term(word, cplx(v, 0));
    }
    return r;
  }
};

}  // namespace sbm
