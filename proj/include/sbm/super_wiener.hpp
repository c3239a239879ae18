#pragma once

#include <Eigen/Dense>
#include <functional>

#include "sbm/fwiener.hpp"
#include "sbm/paths.hpp"
#include "sbm/superpoly.hpp"

// Super Brownian motion: sampled even paths tensored with the exact
// fermionic sector.  Expectations are Monte Carlo over paths of exact
// per-path Grassmann expectations; the odd sector contributes no variance.

namespace sbm {

struct MCResult {
  double estimate = 0;
  double se = 0;
  long long samples = 0;
};

// Mean and standard error in fixed sample order.
inline MCResult mc_reduce(const std::vector<double>& values) {
  MCResult r;
  r.samples = (long long)values.size();
  if (values.empty()) return r;
  double sum = 0;
  for (double v : values) sum += v;
  r.estimate = sum / double(values.size());
  double ss = 0;
  for (double v : values) ss += (v - r.estimate) * (v - r.estimate);
  if (values.size() > 1)
    r.se = std::sqrt(ss / (double(values.size()) - 1.0) / double(values.size()));
  return r;
}

// MC average over paths of the exact fermionic expectation of rv(path).
// The result must be real; a persistent imaginary part means the random
// variable itself is not real-valued.
inline MCResult super_expect(const std::function<GElem(PathView&)>& rv,
                             const FermionicMarginal& marginal, const PathEnsemble& ensemble) {
  std::vector<double> vals;
  vals.reserve(size_t(ensemble.n_paths()));
  double worst_imag = 0;
  for (long long p = 0; p < ensemble.n_paths(); ++p) {
    PathView view(ensemble, p);
    view.set_horizon(ensemble.steps());
    cplx v = fexpect(rv(view), marginal);
    worst_imag = std::max(worst_imag, std::abs(v.imag()));
    vals.push_back(v.real());
  }
  if (worst_imag > 1e-9)
    throw std::domain_error("super_expect: expectation has a nonreal component");
  return mc_reduce(vals);
}

// Purely even functional.
inline MCResult super_expect(const std::function<double(PathView&)>& f,
                             const PathEnsemble& ensemble) {
  std::vector<double> vals;
  vals.reserve(size_t(ensemble.n_paths()));
  for (long long p = 0; p < ensemble.n_paths(); ++p) {
    PathView view(ensemble, p);
    view.set_horizon(ensemble.steps());
    vals.push_back(f(view));
  }
  return mc_reduce(vals);
}

// Riemann sum sum_r F(t_r) dt with left-point adapted evaluation.
inline double time_integral(PathView& view, const std::function<double(PathView&, int)>& f) {
  double s = 0;
  for (int r = 0; r < view.ensemble().steps(); ++r) {
    view.set_horizon(r);
    s += f(view, r) * view.ensemble().dt();
  }
  view.set_horizon(view.ensemble().steps());
  return s;
}

// Ito sum sum_r F^a(t_r) (b^a_{r+1} - b^a_r); the integrand is evaluated
// before the horizon advances past the increment it multiplies.
inline double ito_integral(PathView& view,
                           const std::function<std::vector<double>(PathView&, int)>& f) {
  int m = view.ensemble().m();
  double s = 0;
  for (int r = 0; r < view.ensemble().steps(); ++r) {
    view.set_horizon(r);
    std::vector<double> fa = f(view, r);
    if (int(fa.size()) != m) throw std::invalid_argument("ito_integral: integrand dimension");
    view.set_horizon(r + 1);
    for (int a = 0; a < m; ++a) s += fa[size_t(a)] * view.increment(r, a);
  }
  view.set_horizon(view.ensemble().steps());
  return s;
}

// Discrete residual of the Ito formula for F(x, theta, rho) along the
// Euler path of dx = h dt + g db:
//   F(x_T, .) - F(x_0, .)
//     - sum_r [ dF.(h dt + g db) + 1/2 d^2F : (g g^T) dt ](x_r)
// The odd sector enters through the stationary one-slot expectations of
// the words of F, computed exactly once.
struct ItoDrift {
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> h;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> g;  // p x m
};

inline MCResult ito_residual(const SuperPolynomial& F, const ItoDrift& drift,
                             const Eigen::VectorXd& x0, const PathEnsemble& ensemble) {
  int p = F.p;
  if (x0.size() != p) throw std::invalid_argument("ito_residual: x0 dimension mismatch");
  if (F.q % 2 != 0) throw std::invalid_argument("ito_residual: odd sector needs theta,rho banks");
  int n = F.q / 2;

  FermionicMarginal slot = marginal_density(TimeGrid({1.0}), n);
  struct WordData {
    cplx weight;
    Poly value;
    std::vector<Poly> grad;
    std::vector<Poly> hess;  // row-major p x p
  };
  std::vector<WordData> words;
  for (const auto& [word, poly] : F.terms) {
    GElem rv(2 * n);
    rv.add_term(word, cplx(1));
    WordData w{fexpect(rv, slot), poly, {}, {}};
    for (int i = 0; i < p; ++i) w.grad.push_back(poly.derivative(i));
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j) w.hess.push_back(w.grad[size_t(i)].derivative(j));
    words.push_back(std::move(w));
  }

  int m = ensemble.m();
  std::vector<double> vals;
  vals.reserve(size_t(ensemble.n_paths()));
  double worst_imag = 0;
  for (long long path = 0; path < ensemble.n_paths(); ++path) {
    Eigen::VectorXd x = x0;
    std::vector<cplx> lhs_minus_rhs(words.size(), cplx(0));
    for (size_t w = 0; w < words.size(); ++w)
      lhs_minus_rhs[w] -= words[w].value.eval(std::span(x.data(), size_t(p)));
    for (int r = 0; r < ensemble.steps(); ++r) {
      Eigen::VectorXd h = drift.h(x);
      Eigen::MatrixXd g = drift.g(x);
      if (h.size() != p || g.rows() != p || g.cols() != m)
        throw std::invalid_argument("ito_residual: drift/diffusion dimensions");
      Eigen::VectorXd db(m);
      for (int a = 0; a < m; ++a) db(a) = ensemble.increment(path, r, a);
      Eigen::VectorXd dx = h * ensemble.dt() + g * db;
      Eigen::MatrixXd gg = g * g.transpose();
      std::span<const double> xs(x.data(), size_t(p));
      for (size_t w = 0; w < words.size(); ++w) {
        double s = 0;
        for (int i = 0; i < p; ++i) s += words[w].grad[size_t(i)].eval(xs) * dx(i);
        for (int i = 0; i < p; ++i)
          for (int j = 0; j < p; ++j)
            s += 0.5 * words[w].hess[size_t(i * p + j)].eval(xs) * gg(i, j) * ensemble.dt();
        lhs_minus_rhs[w] -= s;
      }
      x += dx;
    }
    for (size_t w = 0; w < words.size(); ++w)
      lhs_minus_rhs[w] += words[w].value.eval(std::span(x.data(), size_t(p)));
    cplx total(0);
    for (size_t w = 0; w < words.size(); ++w) total += lhs_minus_rhs[w] * words[w].weight;
    worst_imag = std::max(worst_imag, std::abs(total.imag()));
    vals.push_back(total.real());
  }
  if (worst_imag > 1e-9) throw std::domain_error("ito_residual: nonreal residual");
  return mc_reduce(vals);
}

}  // namespace sbm
