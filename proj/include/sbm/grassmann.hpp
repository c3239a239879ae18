#pragma once

#include <bit>
#include <complex>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "sbm/rational.hpp"

namespace sbm {

using cplx = std::complex<double>;

// A multi-index over at most 64 generators, one bit per generator.
// Bit i set means the generator with label i (0-based) is present; a set
// mask always denotes the word with labels in ascending order.
using Mask = std::uint64_t;

inline int mask_degree(Mask m) { return std::popcount(m); }

inline Mask mask_bits_above(int j) {
  return j >= 63 ? Mask(0) : (~Mask(0) << (j + 1));
}

// Sign of beta^a * beta^b relative to the ascending word beta^{a|b}:
// each generator j of b crosses every generator of a with a larger label.
// Caller must ensure a and b are disjoint.
inline int mul_sign(Mask a, Mask b) {
  int crossings = 0;
  while (b) {
    int j = std::countr_zero(b);
    crossings += std::popcount(a & mask_bits_above(j));
    b &= b - 1;
  }
  return (crossings & 1) ? -1 : 1;
}

template <class S> struct ScalarOps {
  static S zero() { return S(0); }
  static S one() { return S(1); }
  static bool is_zero(const S& s) { return s == S(0); }
};

// Element of the Grassmann algebra on n <= 64 generators with scalar
// coefficients; finitely supported map from masks to coefficients.
// The ordered map keeps iteration (and serialization) deterministic.
template <class S> class GrassmannElement {
public:
  using Coeffs = std::map<Mask, S>;

  explicit GrassmannElement(int n = 0) : n_(n) { check_n(n); }
  GrassmannElement(int n, Mask m, const S& c) : n_(n) {
    check_n(n);
    check_mask(m);
    if (!ScalarOps<S>::is_zero(c)) c_[m] = c;
  }

  static GrassmannElement unit(int n) { return GrassmannElement(n, 0, ScalarOps<S>::one()); }
  static GrassmannElement generator(int n, int i) {
    return GrassmannElement(n, Mask(1) << i, ScalarOps<S>::one());
  }

  int generators() const { return n_; }
  const Coeffs& coeffs() const { return c_; }
  bool is_zero() const { return c_.empty(); }

  S project(Mask m) const {
    auto it = c_.find(m);
    return it == c_.end() ? ScalarOps<S>::zero() : it->second;
  }
  S body() const { return project(0); }

  void set(Mask m, const S& c) {
    check_mask(m);
    if (ScalarOps<S>::is_zero(c)) c_.erase(m);
    else c_[m] = c;
  }
  void add_term(Mask m, const S& c) {
    check_mask(m);
    auto it = c_.find(m);
    if (it == c_.end()) {
      if (!ScalarOps<S>::is_zero(c)) c_[m] = c;
    } else {
      it->second += c;
      if (ScalarOps<S>::is_zero(it->second)) c_.erase(it);
    }
  }

  GrassmannElement& operator+=(const GrassmannElement& o) {
    require_same(o);
    for (const auto& [m, c] : o.c_) add_term(m, c);
    return *this;
  }
  GrassmannElement& operator-=(const GrassmannElement& o) {
    require_same(o);
    for (const auto& [m, c] : o.c_) add_term(m, -c);
    return *this;
  }
  friend GrassmannElement operator+(GrassmannElement a, const GrassmannElement& b) { return a += b; }
  friend GrassmannElement operator-(GrassmannElement a, const GrassmannElement& b) { return a -= b; }
  GrassmannElement operator-() const {
    GrassmannElement r(n_);
    for (const auto& [m, c] : c_) r.c_[m] = -c;
    return r;
  }
  friend GrassmannElement operator*(const S& s, const GrassmannElement& x) {
    GrassmannElement r(x.n_);
    if (ScalarOps<S>::is_zero(s)) return r;
    for (const auto& [m, c] : x.c_) {
      S v = s * c;
      if (!ScalarOps<S>::is_zero(v)) r.c_[m] = v;
    }
    return r;
  }

  friend GrassmannElement operator*(const GrassmannElement& a, const GrassmannElement& b) {
    a.require_same(b);
    GrassmannElement r(a.n_);
    for (const auto& [ma, ca] : a.c_) {
      for (const auto& [mb, cb] : b.c_) {
        if (ma & mb) continue;  // repeated generator annihilates the term
        S v = ca * cb;
        if (mul_sign(ma, mb) < 0) v = -v;
        r.add_term(ma | mb, v);
      }
    }
    return r;
  }
  GrassmannElement& operator*=(const GrassmannElement& o) { return *this = *this * o; }

  friend bool operator==(const GrassmannElement& a, const GrassmannElement& b) {
    return a.n_ == b.n_ && a.c_ == b.c_;
  }

  // True when every term has even (resp. odd) degree.
  bool is_even() const { return degrees_all(0); }
  bool is_odd() const { return degrees_all(1); }

  // Berezin integral with respect to the ordered generator list `order`:
  // factor the word as beta^{o_1} ... beta^{o_k} * (rest ascending) and
  // return the signed coefficient of the rest.  Terms missing any o_i
  // integrate to zero.
  GrassmannElement berezin(std::span<const int> order) const {
    Mask want = 0;
    for (int o : order) {
      Mask b = Mask(1) << o;
      if (want & b) throw std::invalid_argument("berezin: repeated generator in order");
      want |= b;
    }
    GrassmannElement r(n_);
    for (const auto& [m, c] : c_) {
      if ((m & want) != want) continue;
      Mask rest = m;
      int sign = 1;
      for (int o : order) {
        int below = std::popcount(rest & ((Mask(1) << o) - 1));
        if (below & 1) sign = -sign;
        rest &= ~(Mask(1) << o);
      }
      r.add_term(rest, sign < 0 ? S(-c) : c);
    }
    return r;
  }

  GrassmannElement berezin(std::initializer_list<int> order) const {
    return berezin(std::span<const int>(order.begin(), order.size()));
  }

  // Full integral over generators lo..hi-1 in ascending measure order.
  S berezin_all(int lo, int hi) const {
    std::vector<int> order;
    for (int i = lo; i < hi; ++i) order.push_back(i);
    return berezin(order).body();
  }
  S berezin_all() const { return berezin_all(0, n_); }

  // Rebuilds the element with generator labels mapped through `to`
  // (to[i] = new label of old generator i).  The map must be injective on
  // the support.  Reordering signs are accounted for.
  GrassmannElement relabel(std::span<const int> to, int new_n) const {
    GrassmannElement r(new_n);
    for (const auto& [m, c] : c_) {
      Mask nm = 0;
      int sign = 1;
      // Insert new labels one by one in the order of the old word; the
      // crossing count against already-inserted labels gives the sign.
      Mask rem = m;
      while (rem) {
        int i = std::countr_zero(rem);
        rem &= rem - 1;
        int ni = to[size_t(i)];
        Mask bit = Mask(1) << ni;
        if (nm & bit) throw std::invalid_argument("relabel: non-injective map");
        if (std::popcount(nm & mask_bits_above(ni)) & 1) sign = -sign;
        nm |= bit;
      }
      r.add_term(nm, sign < 0 ? S(-c) : c);
    }
    return r;
  }

  // Substitutes, for every generator src_i (given ascending), the element
  // sign_flip ? -generator(dst_i) : generator(dst_i); other generators are
  // kept.  Used for coincident-point kernels: Ker(xi, xi) and Ker(xi, -xi).
  GrassmannElement substitute_bank(int src_lo, int src_hi, int dst_lo, bool negate) const {
    GrassmannElement r(n_);
    for (const auto& [m, c] : c_) {
      Mask word = m;
      bool dead = false;
      Mask acc = 0;
      int sign = 1;
      // Walk the word in ascending label order, mapping each generator.
      while (word) {
        int i = std::countr_zero(word);
        word &= word - 1;
        int j = (i >= src_lo && i < src_hi) ? dst_lo + (i - src_lo) : i;
        if (i >= src_lo && i < src_hi && negate) sign = -sign;
        Mask bit = Mask(1) << j;
        if (acc & bit) { dead = true; break; }
        if (std::popcount(acc & mask_bits_above(j)) & 1) sign = -sign;
        acc |= bit;
      }
      if (dead) continue;
      r.add_term(acc, sign < 0 ? S(-c) : c);
    }
    return r;
  }

  // exp(x) for even x.  The nilpotent part terminates; a nonzero body is
  // only allowed for scalar types with std::exp (complex/double).
  static GrassmannElement exp_even(const GrassmannElement& x) {
    if (!x.is_even()) throw std::invalid_argument("exp_even: element must be even");
    S body = x.body();
    GrassmannElement nil = x;
    nil.set(0, ScalarOps<S>::zero());
    GrassmannElement acc = unit(x.n_);
    GrassmannElement pow = unit(x.n_);
    S fact = ScalarOps<S>::one();
    for (int k = 1; k <= x.n_ / 2 + 1; ++k) {
      pow = pow * nil;
      if (pow.is_zero()) break;
      fact = fact * S(k);
      acc += (ScalarOps<S>::one() / fact) * pow;
    }
    S scale;
    if constexpr (std::is_same_v<S, Rational>) {
      if (!ScalarOps<S>::is_zero(body))
        throw std::invalid_argument("exp_even: rational mode needs zero body");
      scale = ScalarOps<S>::one();
    } else {
      scale = std::exp(body);
    }
    return scale * acc;
  }

private:
  static void check_n(int n) {
    if (n < 0 || n > 64) throw std::invalid_argument("GrassmannElement: need 0 <= n <= 64");
  }
  void check_mask(Mask m) const {
    if (n_ < 64 && (m >> n_) != 0)
      throw std::invalid_argument("GrassmannElement: mask outside generator range");
  }
  void require_same(const GrassmannElement& o) const {
    if (n_ != o.n_) throw std::invalid_argument("GrassmannElement: generator count mismatch");
  }
  bool degrees_all(int parity) const {
    for (const auto& [m, c] : c_) {
      (void)c;
      if ((mask_degree(m) & 1) != parity) return false;
    }
    return true;
  }

  int n_ = 0;
  Coeffs c_;
};

using GElem = GrassmannElement<cplx>;
using GElemR = GrassmannElement<Rational>;

}  // namespace sbm
