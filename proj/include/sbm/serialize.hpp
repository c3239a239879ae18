#pragma once

#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string>

#include "sbm/fermion_op.hpp"
#include "sbm/grassmann.hpp"

// Text records for golden tests.  Byte-exact: coefficients print as C99
// hexfloats, masks as lowercase hex, terms in ascending mask order (the
// element already stores them that way).
//
//   gelem 1 <n> <nterms>\n
//   <mask> <re> <im>\n          (one line per multi-index)
//
//   fop 1 <n> <nnz>\n
//   <row> <col> <re> <im>\n     (row-major over nonzero entries)

namespace sbm {

inline std::string hexf(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", x);
  return buf;
}

inline std::string to_text(const GElem& f) {
  std::ostringstream os;
  os << "gelem 1 " << f.generators() << ' ' << f.coeffs().size() << '\n';
  for (const auto& [m, c] : f.coeffs()) {
    char mask[32];
    std::snprintf(mask, sizeof mask, "%llx", static_cast<unsigned long long>(m));
    os << mask << ' ' << hexf(c.real()) << ' ' << hexf(c.imag()) << '\n';
  }
  return os.str();
}

inline GElem gelem_from_text(const std::string& text) {
  std::istringstream is(text);
  std::string tag;
  int version = 0, n = 0;
  size_t terms = 0;
  is >> tag >> version >> n >> terms;
  if (tag != "gelem" || version != 1 || !is)
    throw std::invalid_argument("gelem_from_text: bad header");
  GElem f(n);
  for (size_t k = 0; k < terms; ++k) {
    std::string mask, re, im;
    is >> mask >> re >> im;
    if (!is) throw std::invalid_argument("gelem_from_text: truncated record");
    Mask m = std::strtoull(mask.c_str(), nullptr, 16);
    f.add_term(m, cplx(std::strtod(re.c_str(), nullptr), std::strtod(im.c_str(), nullptr)));
  }
  return f;
}

inline std::string to_text(const FermionOperator& k) {
  size_t nnz = 0;
  for (Eigen::Index r = 0; r < k.dim(); ++r)
    for (Eigen::Index c = 0; c < k.dim(); ++c)
      if (k.matrix()(r, c) != cplx(0)) ++nnz;
  std::ostringstream os;
  os << "fop 1 " << k.n() << ' ' << nnz << '\n';
  for (Eigen::Index r = 0; r < k.dim(); ++r)
    for (Eigen::Index c = 0; c < k.dim(); ++c) {
      cplx v = k.matrix()(r, c);
      if (v == cplx(0)) continue;
      char head[64];
      std::snprintf(head, sizeof head, "%llx %llx", static_cast<unsigned long long>(r),
                    static_cast<unsigned long long>(c));
      os << head << ' ' << hexf(v.real()) << ' ' << hexf(v.imag()) << '\n';
    }
  return os.str();
}

inline FermionOperator fop_from_text(const std::string& text) {
  std::istringstream is(text);
  std::string tag;
  int version = 0, n = 0;
  size_t nnz = 0;
  is >> tag >> version >> n >> nnz;
  if (tag != "fop" || version != 1 || !is)
    throw std::invalid_argument("fop_from_text: bad header");
  FermionOperator k = FermionOperator::zero(n);
  for (size_t e = 0; e < nnz; ++e) {
    std::string row, col, re, im;
    is >> row >> col >> re >> im;
    if (!is) throw std::invalid_argument("fop_from_text: truncated record");
    Eigen::Index r = Eigen::Index(std::strtoull(row.c_str(), nullptr, 16));
    Eigen::Index c = Eigen::Index(std::strtoull(col.c_str(), nullptr, 16));
    if (r >= k.dim() || c >= k.dim()) throw std::invalid_argument("fop_from_text: index out of range");
    k.matrix()(r, c) = cplx(std::strtod(re.c_str(), nullptr), std::strtod(im.c_str(), nullptr));
  }
  return k;
}

}  // namespace sbm
